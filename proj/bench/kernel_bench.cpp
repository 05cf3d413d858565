// Serial reference kernels against their OpenMP counterparts on a synthetic
// corpus. Run with --benchmark_filter to pick a kernel family.

#include <benchmark/benchmark.h>

#include <map>
#include <memory>
#include <vector>

#include "gxs/dense.hpp"
#include "gxs/embed.hpp"
#include "gxs/kernels.hpp"
#include "gxs/lexical.hpp"
#include "gxs/textprep.hpp"
#include "test_support.hpp"

namespace {

using namespace gxs;

struct Fixture {
  Corpus corpus;
  TfidfIndex tfidf;
  Bm25Index bm25;
  FuzzyIndex fuzzy;
  DenseIndex dense;
  SparseVector tfidf_query;
  std::vector<TermId> bm25_terms;
  std::vector<std::u32string> fuzzy_query;
  std::vector<double> dense_query;

  explicit Fixture(std::size_t n) : corpus(testing::synthetic_corpus(n, 11)) {
    const std::string query = corpus[0].title + " " + corpus[n / 2].description.substr(0, 60);
    tfidf = build_tfidf(corpus);
    bm25 = build_bm25(corpus);
    fuzzy = build_fuzzy(corpus);
    HashEmbedder embedder(256);
    dense = build_dense_index(corpus, embedder);
    tfidf_query = tfidf_query_vector(tfidf, query);
    bm25_terms = bm25_query_terms(bm25, query);
    fuzzy_query = token_set(query);
    dense_query = embedder.embed_one(query).values;
  }
};

const Fixture& fixture(std::size_t n) {
  static std::map<std::size_t, std::unique_ptr<Fixture>> cache;
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<Fixture>(n);
  return *slot;
}

template <typename Kernel>
void run(benchmark::State& state, Kernel kernel) {
  const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
  std::vector<double> out(f.corpus.size());
  for (auto _ : state) {
    kernel(f, out);
    benchmark::DoNotOptimize(out.data());
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(out.size()));
}

void BM_DenseSerial(benchmark::State& s) {
  run(s, [](const Fixture& f, std::vector<double>& o) { kernels::serial::dense_scores(f.dense, f.dense_query, o); });
}
void BM_DenseOmp(benchmark::State& s) {
  run(s, [](const Fixture& f, std::vector<double>& o) { kernels::omp::dense_scores(f.dense, f.dense_query, o); });
}
void BM_TfidfSerial(benchmark::State& s) {
  run(s, [](const Fixture& f, std::vector<double>& o) { kernels::serial::tfidf_scores(f.tfidf, f.tfidf_query, o); });
}
void BM_TfidfOmp(benchmark::State& s) {
  run(s, [](const Fixture& f, std::vector<double>& o) { kernels::omp::tfidf_scores(f.tfidf, f.tfidf_query, o); });
}
void BM_Bm25Serial(benchmark::State& s) {
  run(s, [](const Fixture& f, std::vector<double>& o) { kernels::serial::bm25_scores(f.bm25, f.bm25_terms, o); });
}
void BM_Bm25Omp(benchmark::State& s) {
  run(s, [](const Fixture& f, std::vector<double>& o) { kernels::omp::bm25_scores(f.bm25, f.bm25_terms, o); });
}
void BM_FuzzySerial(benchmark::State& s) {
  run(s, [](const Fixture& f, std::vector<double>& o) { kernels::serial::fuzzy_scores(f.fuzzy, f.fuzzy_query, o); });
}
void BM_FuzzyOmp(benchmark::State& s) {
  run(s, [](const Fixture& f, std::vector<double>& o) { kernels::omp::fuzzy_scores(f.fuzzy, f.fuzzy_query, o); });
}

}  // namespace

BENCHMARK(BM_DenseSerial)->Arg(1000)->Arg(10000);
BENCHMARK(BM_DenseOmp)->Arg(1000)->Arg(10000);
BENCHMARK(BM_TfidfSerial)->Arg(1000)->Arg(10000);
BENCHMARK(BM_TfidfOmp)->Arg(1000)->Arg(10000);
BENCHMARK(BM_Bm25Serial)->Arg(1000)->Arg(10000);
BENCHMARK(BM_Bm25Omp)->Arg(1000)->Arg(10000);
BENCHMARK(BM_FuzzySerial)->Arg(1000)->Arg(10000);
BENCHMARK(BM_FuzzyOmp)->Arg(1000)->Arg(10000);

BENCHMARK_MAIN();
