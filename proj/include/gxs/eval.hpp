#pragma once

#include <chrono>
#include <cstddef>
#include <set>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "gxs/corpus.hpp"
#include "gxs/ranked_list.hpp"

namespace gxs {

using GoldSet = std::set<std::string>;

/// 1 iff one of the first min(k, len) ids is gold. Throws EmptyGold / BadParam.
int hit_at_k(std::span<const std::string> ranked, const GoldSet& gold, std::size_t k);

/// |top-k ∩ gold| / |gold|.
double recall_at_k(std::span<const std::string> ranked, const GoldSet& gold, std::size_t k);

/// 1 / first gold rank (1-based); 0 when no gold id is present.
double reciprocal_rank(std::span<const std::string> ranked, const GoldSet& gold);

struct RunRecord {
  std::string query_id;
  std::string method;
  std::vector<std::string> ranked_ids;
  double latency_ms = 0.0;
};

struct EvalRow {
  std::string method;
  double hit_at_1 = 0.0;
  double hit_at_5 = 0.0;
  double recall_at_50 = 0.0;
  double mrr = 0.0;
  double mean_latency_ms = 0.0;
  std::size_t n_queries = 0;
};

struct EvalOptions {
  std::size_t hit_k_low = 1;
  std::size_t hit_k_high = 5;
  std::size_t recall_k = 50;
  /// Shard the per-query metrics over OpenMP threads; results are identical.
  bool parallel = false;
  /// When set, gold ids outside this corpus are dropped before scoring.
  const Corpus* corpus = nullptr;
};

struct EvalReport {
  std::vector<EvalRow> rows;  // sorted by method name
  std::size_t excluded_queries = 0;
  std::vector<std::string> warnings;
  EvalOptions options;
};

/// Averages per-query metrics x100 per method. Throws UnknownQuery for runs
/// referencing a missing query. A method without a run for some query scores
/// zero there and records a MissingMethodRuns warning.
EvalReport evaluate(std::span<const RunRecord> runs, std::span<const QueryRecord> queries,
                    const EvalOptions& options = {});

/// Header `method,hit_at_1,hit_at_5,recall_at_50,mrr,mean_latency_ms,n_queries`
/// (k values follow the options) and two-decimal floats. When queries were
/// excluded a trailing `# excluded_queries,N` line is appended.
std::string to_csv(const EvalReport& report);
nlohmann::json to_json(const EvalReport& report);

/// Wall-clock (steady clock) duration of `fn()` in milliseconds.
template <class Fn>
auto timed_search(Fn&& fn) {
  const auto start = std::chrono::steady_clock::now();
  auto result = std::forward<Fn>(fn)();
  const auto stop = std::chrono::steady_clock::now();
  const double ms = std::chrono::duration<double, std::milli>(stop - start).count();
  return std::make_pair(std::move(result), ms);
}

}  // namespace gxs
