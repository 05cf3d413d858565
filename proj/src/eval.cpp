#include "gxs/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <unordered_map>

#include "gxs/error.hpp"

namespace gxs {

namespace {

void check(const GoldSet& gold) {
  if (gold.empty()) throw Error(ErrorCode::EmptyGold, "gold set is empty");
}

void check(const GoldSet& gold, std::size_t k) {
  check(gold);
  if (k < 1) throw Error(ErrorCode::BadParam, "k must be >= 1");
}

struct QueryMetrics {
  double hit_low = 0.0;
  double hit_high = 0.0;
  double recall = 0.0;
  double rr = 0.0;
};

QueryMetrics score_query(std::span<const std::string> ranked, const GoldSet& gold,
                         const EvalOptions& o) {
  return {static_cast<double>(hit_at_k(ranked, gold, o.hit_k_low)),
          static_cast<double>(hit_at_k(ranked, gold, o.hit_k_high)),
          recall_at_k(ranked, gold, o.recall_k), reciprocal_rank(ranked, gold)};
}

std::string fmt2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

int hit_at_k(std::span<const std::string> ranked, const GoldSet& gold, std::size_t k) {
  check(gold, k);
  const std::size_t n = std::min(k, ranked.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (gold.contains(ranked[i])) return 1;
  }
  return 0;
}

double recall_at_k(std::span<const std::string> ranked, const GoldSet& gold, std::size_t k) {
  check(gold, k);
  const std::size_t n = std::min(k, ranked.size());
  std::set<std::string_view> found;
  for (std::size_t i = 0; i < n; ++i) {
    if (gold.contains(ranked[i])) found.insert(ranked[i]);
  }
  return static_cast<double>(found.size()) / static_cast<double>(gold.size());
}

double reciprocal_rank(std::span<const std::string> ranked, const GoldSet& gold) {
  check(gold);
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    if (gold.contains(ranked[i])) return 1.0 / static_cast<double>(i + 1);
  }
  return 0.0;
}

EvalReport evaluate(std::span<const RunRecord> runs, std::span<const QueryRecord> queries,
                    const EvalOptions& options) {
  if (options.hit_k_low < 1 || options.hit_k_high < 1 || options.recall_k < 1) {
    throw Error(ErrorCode::BadParam, "metric cut-offs must be >= 1");
  }
  EvalReport report;
  report.options = options;

  std::unordered_map<std::string, std::size_t> query_pos;
  std::vector<GoldSet> gold(queries.size());
  std::vector<bool> included(queries.size(), false);
  for (std::size_t i = 0; i < queries.size(); ++i) {
    if (!query_pos.emplace(queries[i].query_id, i).second) {
      throw Error(ErrorCode::BadParam, "duplicate query id: " + queries[i].query_id);
    }
    for (const auto& id : queries[i].gold_workflow_ids) {
      if (options.corpus == nullptr || options.corpus->contains(id)) gold[i].insert(id);
    }
    included[i] = !gold[i].empty();
    if (!included[i]) ++report.excluded_queries;
  }

  // method -> query position -> first run
  std::map<std::string, std::unordered_map<std::size_t, const RunRecord*>> by_method;
  for (const auto& run : runs) {
    auto it = query_pos.find(run.query_id);
    if (it == query_pos.end()) {
      throw Error(ErrorCode::UnknownQuery, "run references unknown query: " + run.query_id);
    }
    by_method[run.method].emplace(it->second, &run);
  }

  std::vector<std::size_t> scored;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    if (included[i]) scored.push_back(i);
  }
  if (scored.empty()) return report;

  for (const auto& [method, table] : by_method) {
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(scored.size());
    std::vector<QueryMetrics> per_query(scored.size());
    std::vector<char> present(scored.size(), 0);
#pragma omp parallel for schedule(static) if (options.parallel)
    for (std::ptrdiff_t s = 0; s < n; ++s) {
      const std::size_t q = scored[static_cast<std::size_t>(s)];
      auto it = table.find(q);
      if (it == table.end()) continue;
      present[static_cast<std::size_t>(s)] = 1;
      per_query[static_cast<std::size_t>(s)] = score_query(it->second->ranked_ids, gold[q], options);
    }

    EvalRow row;
    row.method = method;
    row.n_queries = scored.size();
    std::size_t missing = 0;
    std::size_t timed = 0;
    double latency = 0.0;
    QueryMetrics sum;
    for (std::size_t s = 0; s < scored.size(); ++s) {
      if (!present[s]) {
        ++missing;
        continue;
      }
      sum.hit_low += per_query[s].hit_low;
      sum.hit_high += per_query[s].hit_high;
      sum.recall += per_query[s].recall;
      sum.rr += per_query[s].rr;
      latency += table.at(scored[s])->latency_ms;
      ++timed;
    }
    const double denom = static_cast<double>(scored.size());
    row.hit_at_1 = sum.hit_low / denom * 100.0;
    row.hit_at_5 = sum.hit_high / denom * 100.0;
    row.recall_at_50 = sum.recall / denom * 100.0;
    row.mrr = sum.rr / denom * 100.0;
    row.mean_latency_ms = timed == 0 ? 0.0 : latency / static_cast<double>(timed);
    if (missing > 0) {
      report.warnings.push_back("MissingMethodRuns: " + method + " has no run for " +
                                std::to_string(missing) + " quer" + (missing == 1 ? "y" : "ies"));
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

std::string to_csv(const EvalReport& report) {
  const auto& o = report.options;
  std::string out = "method,hit_at_" + std::to_string(o.hit_k_low) + ",hit_at_" +
                    std::to_string(o.hit_k_high) + ",recall_at_" + std::to_string(o.recall_k) +
                    ",mrr,mean_latency_ms,n_queries\n";
  for (const auto& r : report.rows) {
    out += r.method + "," + fmt2(r.hit_at_1) + "," + fmt2(r.hit_at_5) + "," +
           fmt2(r.recall_at_50) + "," + fmt2(r.mrr) + "," + fmt2(r.mean_latency_ms) + "," +
           std::to_string(r.n_queries) + "\n";
  }
  if (report.excluded_queries > 0) {
    out += "# excluded_queries," + std::to_string(report.excluded_queries) + "\n";
  }
  return out;
}

nlohmann::json to_json(const EvalReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"method", r.method},
                    {"hit_at_" + std::to_string(report.options.hit_k_low), r.hit_at_1},
                    {"hit_at_" + std::to_string(report.options.hit_k_high), r.hit_at_5},
                    {"recall_at_" + std::to_string(report.options.recall_k), r.recall_at_50},
                    {"mrr", r.mrr},
                    {"mean_latency_ms", r.mean_latency_ms},
                    {"n_queries", r.n_queries}});
  }
  return {{"rows", std::move(rows)},
          {"excluded_queries", report.excluded_queries},
          {"warnings", report.warnings}};
}

}  // namespace gxs
