// Acceptance suite: one PASS/FAIL line per primary criterion. Exit status is
// non-zero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "gxs/corpus.hpp"
#include "gxs/dense.hpp"
#include "gxs/embed.hpp"
#include "gxs/engine.hpp"
#include "gxs/error.hpp"
#include "gxs/eval.hpp"
#include "gxs/lexical.hpp"
#include "gxs/rerank.hpp"
#include "gxs/service.hpp"
#include "hash_golden.inc"
#include "test_support.hpp"

namespace {

using namespace gxs;
using nlohmann::json;
namespace oracle = gxs::testing::oracle;
using Clock = std::chrono::steady_clock;

/// Collects the first few failure messages of one criterion.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (ok) return;
    ++failures_;
    if (notes_.size() < 5) notes_.push_back(what);
  }
  bool ok() const { return failures_ == 0; }
  std::string summary() const {
    std::string s = std::to_string(failures_) + " violation(s)";
    for (const auto& n : notes_) s += "; " + n;
    return s;
  }
  std::string detail;

 private:
  std::size_t failures_ = 0;
  std::vector<std::string> notes_;
};

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

std::string fmt(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// ---------------------------------------------------------------------------

struct MetricCase {
  std::vector<std::string> ranked;
  GoldSet gold;
};

std::vector<MetricCase> metric_cases() {
  std::mt19937_64 rng(20240601);
  std::vector<std::string> pool;
  for (int i = 0; i < 120; ++i) pool.push_back("wf" + std::to_string(i));
  std::vector<MetricCase> out;
  for (int c = 0; c < 1000; ++c) {
    std::shuffle(pool.begin(), pool.end(), rng);
    MetricCase m;
    m.ranked.assign(pool.begin(), pool.begin() + 50);
    std::shuffle(pool.begin(), pool.end(), rng);
    const std::size_t g = 1 + rng() % 10;
    // Bias half the cases toward gold near the top of the ranking.
    if (c % 2 == 0) {
      m.gold.insert(m.ranked[rng() % 8]);
      for (std::size_t i = 1; i < g; ++i) m.gold.insert(pool[i]);
    } else {
      m.gold.insert(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(g));
    }
    out.push_back(std::move(m));
  }
  return out;
}

Check metric_oracle_equivalence() {
  Check check;
  const auto start = Clock::now();
  const auto cases = metric_cases();
  double s_h1 = 0, s_h5 = 0, s_r50 = 0, s_mrr = 0;
  double o_h1 = 0, o_h5 = 0, o_r50 = 0, o_mrr = 0;
  std::vector<QueryRecord> queries;
  std::vector<RunRecord> runs;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const auto& c = cases[i];
    const double h1 = hit_at_k(c.ranked, c.gold, 1), h5 = hit_at_k(c.ranked, c.gold, 5);
    const double r50 = recall_at_k(c.ranked, c.gold, 50), rr = reciprocal_rank(c.ranked, c.gold);
    const double oh1 = oracle::hit(c.ranked, c.gold, 1), oh5 = oracle::hit(c.ranked, c.gold, 5);
    const double or50 = oracle::recall(c.ranked, c.gold, 50), orr = oracle::rr(c.ranked, c.gold);
    check.expect(h1 == oh1 && h5 == oh5 && r50 == or50 && rr == orr,
                 "case " + std::to_string(i) + " differs from oracle");
    s_h1 += h1, s_h5 += h5, s_r50 += r50, s_mrr += rr;
    o_h1 += oh1, o_h5 += oh5, o_r50 += or50, o_mrr += orr;
    QueryRecord q;
    q.query_id = "q" + std::to_string(i);
    q.text = "q";
    q.gold_workflow_ids = c.gold;
    queries.push_back(std::move(q));
    runs.push_back({"q" + std::to_string(i), "m", c.ranked, 0.0});
  }
  const double n = static_cast<double>(cases.size());
  const auto report = evaluate(runs, queries);
  const auto& row = report.rows.at(0);
  check.expect(std::abs(row.hit_at_1 - 100 * o_h1 / n) <= 1e-12, "mean hit@1");
  check.expect(std::abs(row.hit_at_5 - 100 * o_h5 / n) <= 1e-12, "mean hit@5");
  check.expect(std::abs(row.recall_at_50 - 100 * o_r50 / n) <= 1e-12, "mean recall@50");
  check.expect(std::abs(row.mrr - 100 * o_mrr / n) <= 1e-12, "mean MRR");
  check.expect(std::abs(s_mrr - o_mrr) <= 1e-12 && s_h1 == o_h1 && s_h5 == o_h5 &&
                   std::abs(s_r50 - o_r50) <= 1e-12,
               "summed metrics");
  const double secs = seconds_since(start);
  check.expect(secs < 5.0, "runtime " + fmt(secs) + " s");
  check.detail = "1000 cases, MRR " + fmt(row.mrr, 4) + ", " + fmt(secs) + " s";
  return check;
}

Check metric_invariants() {
  Check check;
  std::size_t checked = 0;
  for (const auto& c : metric_cases()) {
    const std::size_t K = c.ranked.size();
    const double h1 = hit_at_k(c.ranked, c.gold, 1);
    const double h5 = hit_at_k(c.ranked, c.gold, 5);
    const double hK = hit_at_k(c.ranked, c.gold, K);
    const double mrr = reciprocal_rank(c.ranked, c.gold);
    check.expect(h1 <= h5 && h5 <= hK, "hit@1 <= hit@5 <= hit@K");
    check.expect(h1 <= mrr && mrr <= hK, "hit@1 <= MRR <= hit@K");
    for (std::size_t k = 1; k < K; ++k) {
      check.expect(recall_at_k(c.ranked, c.gold, k) <= recall_at_k(c.ranked, c.gold, k + 1),
                   "recall@k non-decreasing");
    }
    ++checked;
  }
  check.detail = std::to_string(checked) + " cases";
  return check;
}

Corpus title_corpus(const std::vector<std::pair<std::string, std::string>>& docs) {
  std::vector<Workflow> wfs;
  for (const auto& [id, text] : docs) {
    Workflow w;
    w.id = id;
    w.title = text;
    wfs.push_back(std::move(w));
  }
  return Corpus(std::move(wfs));
}

double score_in(const RankedList& list, const std::string& id) {
  for (const auto& e : list) {
    if (e.id == id) return e.score;
  }
  return NAN;
}

Check lexical_fixtures() {
  Check check;
  const FieldConfig title_only{true, false, false};
  // Single-letter terms are below the two-character token minimum, so the
  // fixtures use doubled letters with the same structure.
  const std::vector<std::pair<std::string, std::string>> bm_docs = {
      {"d1", "aa bb"}, {"d2", "aa aa bb"}, {"d3", "cc dd"}};
  const auto bm = build_bm25(title_corpus(bm_docs), title_only, 1.5, 0.75);
  const auto list = bm25_search(bm, "aa", 3);
  const double idf = std::log(1.0 + (3 - 2 + 0.5) / (2 + 0.5));
  const double avgdl = 7.0 / 3.0;
  const double hand_d1 = idf * 1 * 2.5 / (1 + 1.5 * (0.25 + 0.75 * 2 / avgdl));
  const double hand_d2 = idf * 2 * 2.5 / (2 + 1.5 * (0.25 + 0.75 * 3 / avgdl));
  std::vector<std::vector<std::string>> toks;
  for (const auto& [id, t] : bm_docs) toks.push_back(tokenize(t));
  const auto orc = oracle::bm25(toks, {"aa"}, 1.5, 0.75);
  check.expect(std::abs(score_in(list, "d1") - hand_d1) <= 1e-9, "bm25 d1 vs hand");
  check.expect(std::abs(score_in(list, "d2") - hand_d2) <= 1e-9, "bm25 d2 vs hand");
  check.expect(std::abs(score_in(list, "d1") - orc[0]) <= 1e-9, "bm25 d1 vs oracle");
  check.expect(std::abs(score_in(list, "d2") - orc[1]) <= 1e-9, "bm25 d2 vs oracle");
  check.expect(score_in(list, "d3") == 0.0, "bm25 d3 exactly 0");
  check.expect(list.ids() == std::vector<std::string>{"d2", "d1", "d3"}, "bm25 order d2>d1>d3");
  check.expect(std::abs(bm.idf[*bm.vocab.find("cc")] - std::log(8.0 / 3.0)) <= 1e-12,
               "bm25 idf ln(8/3)");

  const auto tf = build_tfidf(title_corpus({{"d1", "align reads"}, {"d2", "variant calling"}}),
                              title_only);
  const auto tl = tfidf_search(tf, "align reads", 2);
  check.expect(tl.size() == 2 && tl[0].id == "d1", "tfidf d1 first");
  check.expect(std::abs(score_in(tl, "d1") - 1.0) <= 1e-9, "tfidf d1 cosine 1");
  check.expect(score_in(tl, "d2") == 0.0, "tfidf d2 exactly 0");
  const auto orc_tf = oracle::tfidf_cosine({{"align", "reads"}, {"variant", "calling"}},
                                           {"align", "reads"});
  check.expect(std::abs(score_in(tl, "d1") - orc_tf[0]) <= 1e-9, "tfidf vs oracle");

  const auto one = build_tfidf(title_corpus({{"d", "aa bb"}}), title_only);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  check.expect(one.doc_vectors[0].size() == 2 &&
                   std::abs(one.doc_vectors[0][0].weight - inv_sqrt2) <= 1e-12 &&
                   std::abs(one.doc_vectors[0][1].weight - inv_sqrt2) <= 1e-12 &&
                   one.idf[0] == 1.0 && one.idf[1] == 1.0,
               "single-doc vector (1/sqrt2, 1/sqrt2)");
  check.detail = "bm25 d2=" + fmt(score_in(list, "d2"), 6) + " d1=" + fmt(score_in(list, "d1"), 6);
  return check;
}

Check self_retrieval() {
  Check check;
  const auto start = Clock::now();
  auto corpus = std::make_shared<const Corpus>(testing::fixture_corpus());
  EngineOptions opts;
  opts.methods = {Method::tfidf, Method::bm25, Method::fuzzy, Method::dense};
  const auto engine = SearchEngine::build(corpus, std::make_shared<HashEmbedder>(256), opts);
  std::string detail;
  for (Method m : opts.methods) {
    double rr_sum = 0;
    for (const auto& w : corpus->workflows()) {
      const auto list = engine->search(m, w.title, corpus->size());
      const auto ids = list.ids();
      rr_sum += oracle::rr(ids, {w.id});
      check.expect(!ids.empty() && ids[0] == w.id,
                   std::string(to_string(m)) + ": " + w.id + " not at rank 1");
    }
    const double mrr = rr_sum / static_cast<double>(corpus->size());
    check.expect(mrr == 1.0, std::string(to_string(m)) + " MRR " + fmt(mrr));
    detail += std::string(to_string(m)) + " MRR=" + fmt(mrr, 2) + " ";
  }
  const double secs = seconds_since(start);
  check.expect(secs < 2.0, "runtime " + fmt(secs) + " s");
  check.detail = detail + fmt(secs) + " s";
  return check;
}

Check dense_vs_oracle() {
  Check check;
  std::mt19937_64 rng(4242);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::string> ids;
    std::vector<EmbeddingVector> vecs;
    for (int i = 0; i < 50; ++i) {
      ids.push_back("d" + std::to_string((i * 17) % 50));
      vecs.push_back({testing::random_unit(rng, 32)});
    }
    vecs[11] = vecs[29];  // exact tie resolved by id
    const auto idx = DenseIndex::from_vectors(ids, vecs);
    const auto q = testing::random_unit(rng, 32);
    std::vector<double> scores;
    for (std::size_t i = 0; i < 50; ++i) {
      const auto row = idx.row(i);
      scores.push_back(oracle::dot(std::vector<double>(row.begin(), row.end()), q));
    }
    check.expect(dense_search(idx, EmbeddingVector{q}, 50).ids() == oracle::full_sort(scores, ids),
                 "dense order trial " + std::to_string(trial));

    std::vector<std::vector<EmbeddingVector>> groups;
    std::vector<std::vector<std::vector<double>>> raw;
    for (int i = 0; i < 50; ++i) {
      groups.emplace_back();
      raw.emplace_back();
      for (std::size_t c = 0, n = 1 + rng() % 4; c < n; ++c) {
        raw.back().push_back(testing::random_unit(rng, 32));
        groups.back().push_back({raw.back().back()});
      }
    }
    const auto mv = MultiVectorIndex::from_groups(ids, groups);
    for (const auto& e : multivector_search(mv, EmbeddingVector{q}, 50)) {
      const auto pos = static_cast<std::size_t>(std::find(ids.begin(), ids.end(), e.id) - ids.begin());
      double best = -2;
      for (const auto& r : raw[pos]) best = std::max(best, oracle::cos(q, r));
      check.expect(std::abs(e.score - best) <= 1e-9, "multivector score");
    }
    std::vector<std::vector<double>> qrows;
    std::vector<EmbeddingVector> qtoks;
    for (std::size_t r = 0, n = 1 + rng() % 5; r < n; ++r) {
      qrows.push_back(testing::random_unit(rng, 32));
      qtoks.push_back({qrows.back()});
    }
    for (const auto& e : late_interaction_search(mv, qtoks, 50, false)) {
      const auto pos = static_cast<std::size_t>(std::find(ids.begin(), ids.end(), e.id) - ids.begin());
      check.expect(std::abs(e.score - oracle::maxsim(qrows, raw[pos])) <= 1e-9, "MaxSim score");
    }
  }
  check.detail = "100 indexes x 50 docs, dim 32";
  return check;
}

Check rerank_fuzz() {
  Check check;
  std::vector<Workflow> wfs;
  for (int i = 0; i < 30; ++i) {
    Workflow w;
    w.id = "wf-" + std::to_string(i);
    w.title = "Workflow " + std::to_string(i);
    w.description = std::string(static_cast<std::size_t>(50 + 40 * i), 'd');
    wfs.push_back(std::move(w));
  }
  const Corpus corpus(std::move(wfs));
  std::map<std::string, std::size_t> kinds;
  std::size_t fallbacks = 0;
  for (std::uint64_t t = 0; t < 500; ++t) {
    std::mt19937_64 rng(t);
    std::vector<ScoredId> entries;
    const std::size_t n = 1 + rng() % corpus.size();
    std::vector<std::size_t> order(corpus.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i = 0; i < n; ++i) {
      entries.push_back({corpus[order[i]].id, static_cast<double>(rng() % 5)});
    }
    std::sort(entries.begin(), entries.end(), ranks_before);
    const RankedList stage1 = RankedList::from_ordered(entries);
    testing::AdversarialChat chat(t * 7919 + 1, corpus.ids());
    RerankConfig cfg;
    cfg.candidates_k = 1 + rng() % 50;
    cfg.prompt_char_budget = (t % 4 == 0) ? 900 : 48000;
    try {
      const auto out = rerank("adversarial query", stage1, corpus, &chat, cfg);
      ++kinds[chat.last_kind()];
      auto a = out.list.ids();
      auto b = stage1.ids();
      std::sort(a.begin(), a.end());
      std::sort(b.begin(), b.end());
      check.expect(a == b, "not a permutation (" + chat.last_kind() + ")");
      if (!out.used_llm) {
        ++fallbacks;
        check.expect(out.list == stage1, "fallback changed order (" + chat.last_kind() + ")");
      }
    } catch (const std::exception& e) {
      check.expect(false, std::string("exception: ") + e.what());
    } catch (...) {
      check.expect(false, "non-standard exception");
    }
  }
  check.detail = "500 transcripts, " + std::to_string(fallbacks) + " fallbacks, " +
                 std::to_string(kinds.size()) + " last-reply kinds";
  return check;
}

std::vector<QueryRecord> parse_jsonl(const std::string& text) {
  std::vector<QueryRecord> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) out.push_back(query_from_json(json::parse(line)));
  }
  return out;
}

Check benchmark_determinism() {
  Check check;
  testing::TempDir a, b, lo, hi;
  const auto ra = testing::run_fixture_pipeline(a.path(), 0.2, 2, 7);
  const auto rb = testing::run_fixture_pipeline(b.path(), 0.2, 2, 7);
  check.expect(ra.ok, "run 1 failed: " + ra.failure);
  check.expect(rb.ok, "run 2 failed: " + rb.failure);
  if (!ra.ok || !rb.ok) return check;
  check.expect(ra.queries_jsonl == rb.queries_jsonl, "queries JSONL differs");
  check.expect(ra.report_csv == rb.report_csv, "report CSV differs");
  const auto queries = parse_jsonl(ra.queries_jsonl);
  check.expect(queries.size() == 12, std::to_string(queries.size()) + " queries, expected 12");
  for (const auto& q : queries) {
    check.expect(!q.seed_ids.empty(), q.query_id + " has no seeds");
    check.expect(std::includes(q.gold_workflow_ids.begin(), q.gold_workflow_ids.end(),
                               q.seed_ids.begin(), q.seed_ids.end()),
                 q.query_id + " seeds not in gold");
  }
  const auto rl = testing::run_fixture_pipeline(lo.path(), 0.1, 2, 7);
  const auto rh = testing::run_fixture_pipeline(hi.path(), 0.3, 2, 7);
  check.expect(rl.ok && rh.ok, "tau sweep failed: " + rl.failure + rh.failure);
  std::size_t strict = 0;
  if (rl.ok && rh.ok) {
    const auto ql = parse_jsonl(rl.queries_jsonl);
    const auto qh = parse_jsonl(rh.queries_jsonl);
    check.expect(ql.size() == qh.size(), "tau sweep query count");
    for (std::size_t i = 0; i < std::min(ql.size(), qh.size()); ++i) {
      check.expect(ql[i].query_id == qh[i].query_id, "tau sweep query order");
      check.expect(std::includes(ql[i].gold_workflow_ids.begin(), ql[i].gold_workflow_ids.end(),
                                 qh[i].gold_workflow_ids.begin(), qh[i].gold_workflow_ids.end()),
                   ql[i].query_id + ": gold(0.3) not within gold(0.1)");
      if (ql[i].gold_workflow_ids.size() > qh[i].gold_workflow_ids.size()) ++strict;
    }
  }
  check.detail = std::to_string(queries.size()) + " queries, " + std::to_string(strict) +
                 " strictly larger at tau=0.1";
  return check;
}

Check hash_golden_vectors() {
  Check check;
  for (const auto& g : hash_golden()) {
    const auto v1 = hash_embed(g.text, 256);
    const auto v2 = hash_embed(g.text, 256);
    check.expect(v1.dim() == 256 && v2.dim() == 256, "dimension");
    check.expect(std::memcmp(v1.values.data(), v2.values.data(), 256 * sizeof(double)) == 0,
                 std::string("not bit-identical: ") + g.text);
    check.expect(std::abs(v1.norm() - 1.0) <= 1e-6, std::string("norm: ") + g.text);
    std::vector<double> expect(256, 0.0);
    for (const auto& [bucket, value] : g.buckets) expect[bucket] = value;
    double max_err = 0;
    for (std::size_t i = 0; i < 256; ++i) max_err = std::max(max_err, std::abs(v1.values[i] - expect[i]));
    check.expect(max_err <= 1e-12, std::string("golden mismatch: ") + g.text);
  }
  check.detail = std::to_string(hash_golden().size()) + " strings";
  return check;
}

httplib::Result post_search(httplib::Client& cli, const json& body) {
  return cli.Post("/api/search", body.dump(), "application/json");
}

Check service_contract() {
  Check check;
  {
    auto cfg = testing::fixture_service_config();
    cfg.rerank.endpoint = "http://127.0.0.1:" + std::to_string(testing::closed_port()) + "/v1/chat";
    cfg.rerank.model_name = "offline";
    cfg.rerank.timeout_s = 2;
    testing::RunningService svc(cfg);
    httplib::Client cli("127.0.0.1", svc.port());
    cli.set_read_timeout(30, 0);

    auto h = cli.Get("/health");
    check.expect(h && h->status == 200, "/health status");
    if (h) {
      const json j = json::parse(h->body, nullptr, false);
      check.expect(j.value("status", "") == "ok" && j.value("corpus_size", 0) == 20 &&
                       j.value("index_ready", false),
                   "/health body " + h->body);
    }

    const Corpus corpus = testing::fixture_corpus();
    for (const auto& w : corpus.workflows()) {
      auto r = post_search(cli, {{"query", w.title}, {"method", "tfidf"}, {"k", 5}});
      const bool ok = r && r->status == 200;
      check.expect(ok, "search status for " + w.id);
      if (!ok) continue;
      const json j = json::parse(r->body);
      check.expect(j["results"].size() == 5 && j["results"][0]["id"] == w.id &&
                       j["results"][0]["rank"] == 1,
                   w.id + " not at rank 1");
      for (const char* key : {"timings", "used_llm", "warnings"}) {
        check.expect(j.contains(key), std::string("missing ") + key);
      }
    }

    auto e = post_search(cli, {{"query", ""}, {"k", 5}});
    check.expect(e && e->status == 400 &&
                     json::parse(e->body, nullptr, false).value("code", "") == "empty_query",
                 "empty query contract");

    auto rr = post_search(cli, {{"query", "variant calling"}, {"k", 5}, {"rerank", true}});
    auto plain = post_search(cli, {{"query", "variant calling"}, {"k", 5}});
    check.expect(rr && rr->status == 200, "rerank fallback status");
    if (rr && plain) {
      const json j = json::parse(rr->body);
      check.expect(j["used_llm"] == false, "used_llm should be false");
      check.expect(j["warnings"].size() == 1, "expected exactly 1 warning");
      check.expect(j["results"] == json::parse(plain->body)["results"], "fallback not stage-1 order");
    }

    auto wf = cli.Get("/api/workflows/fx-var-02");
    check.expect(wf && wf->status == 200 &&
                     json::parse(wf->body, nullptr, false).value("id", "") == "fx-var-02",
                 "workflow metadata");
    auto ga = cli.Get("/api/workflows/fx-var-02/ga");
    check.expect(ga && ga->status == 200 &&
                     ga->get_header_value("Content-Disposition") ==
                         "attachment; filename=\"fx-var-02.ga\"",
                 "ga download");
    auto nf = cli.Get("/api/workflows/missing-id");
    check.expect(nf && nf->status == 404, "unknown id 404");
    auto gone = cli.Get("/api/workflows/fx-prot-05/ga");
    check.expect(gone && gone->status == 410, "missing ga 410");

    std::size_t fuzz_5xx = 0;
    for (const auto& body : testing::malformed_search_bodies(99, 100)) {
      auto r = cli.Post("/api/search", body, "application/json");
      if (!r || r->status >= 500) ++fuzz_5xx;
    }
    check.expect(fuzz_5xx == 0, std::to_string(fuzz_5xx) + " fuzz bodies got 5xx");
  }

  // Latency envelope over a 1,000-document synthetic corpus.
  testing::TempDir dir;
  const Corpus big = testing::synthetic_corpus(1000, 31337);
  save_corpus(big, dir / "big.json");
  auto cfg = testing::fixture_service_config();
  cfg.corpus_path = dir / "big.json";
  cfg.engine.methods = {Method::tfidf, Method::bm25, Method::fuzzy};
  testing::RunningService svc(cfg);
  httplib::Client cli("127.0.0.1", svc.port());
  std::mt19937_64 rng(5);
  std::string detail;
  for (const char* method : {"tfidf", "bm25", "fuzzy"}) {
    double total_ms = 0;
    const int n = 50;
    for (int i = 0; i < n; ++i) {
      const auto& w = big[rng() % big.size()];
      const std::string q = w.title + " " + w.description.substr(0, 40);
      const auto t0 = Clock::now();
      auto r = post_search(cli, {{"query", q}, {"method", method}, {"k", 10}});
      total_ms += seconds_since(t0) * 1000.0;
      check.expect(r && r->status == 200, std::string("latency search failed: ") + method);
    }
    const double mean = total_ms / n;
    check.expect(mean < 50.0, std::string(method) + " mean latency " + fmt(mean) + " ms");
    detail += std::string(method) + " " + fmt(mean, 2) + " ms ";
  }
  check.detail = "1000 docs: " + detail;
  return check;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Check()> run;
  };
  const std::vector<Criterion> criteria = {
      {"metric-oracle-equivalence", metric_oracle_equivalence},
      {"metric-invariants", metric_invariants},
      {"lexical-fixtures", lexical_fixtures},
      {"self-retrieval", self_retrieval},
      {"dense-vs-oracle", dense_vs_oracle},
      {"rerank-robustness-fuzz", rerank_fuzz},
      {"benchmark-determinism", benchmark_determinism},
      {"hash-embedder-golden", hash_golden_vectors},
      {"service-contract", service_contract},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Check result;
    try {
      result = c.run();
    } catch (const std::exception& e) {
      result.expect(false, std::string("uncaught: ") + e.what());
    }
    if (result.ok()) {
      std::printf("PASS %s (%s)\n", c.name, result.detail.c_str());
    } else {
      ++failed;
      std::printf("FAIL %s (%s)\n", c.name, result.summary().c_str());
    }
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - static_cast<std::size_t>(failed),
              criteria.size());
  return failed == 0 ? 0 : 1;
}
