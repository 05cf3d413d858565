#pragma once

// Per-document scoring kernels. `omp` is what the search paths call; `serial`
// is the straightforward reference the tests and benchmarks compare against.
// Both sum in the same order, so their outputs are bit-identical.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "gxs/dense.hpp"
#include "gxs/lexical.hpp"

namespace gxs::kernels {

namespace serial {

void dense_scores(const DenseIndex& index, std::span<const double> query, std::span<double> out);
void multivector_scores(const MultiVectorIndex& index, std::span<const double> query,
                        std::span<double> out);
/// `query_rows` is row-major with index.dim columns.
void late_interaction_scores(const TokenMatrixIndex& index, std::span<const double> query_rows,
                             bool pooled, std::span<double> out);
/// Term-at-a-time accumulation over the document vectors.
void tfidf_scores(const TfidfIndex& index, const SparseVector& query, std::span<double> out);
/// Term-at-a-time accumulation over postings.
void bm25_scores(const Bm25Index& index, std::span<const TermId> terms, std::span<double> out);
void fuzzy_scores(const FuzzyIndex& index, const std::vector<std::u32string>& query_tokens,
                  std::span<double> out);

}  // namespace serial

namespace omp {

void dense_scores(const DenseIndex& index, std::span<const double> query, std::span<double> out);
void multivector_scores(const MultiVectorIndex& index, std::span<const double> query,
                        std::span<double> out);
void late_interaction_scores(const TokenMatrixIndex& index, std::span<const double> query_rows,
                             bool pooled, std::span<double> out);
/// Document-at-a-time sparse merge, parallel over documents.
void tfidf_scores(const TfidfIndex& index, const SparseVector& query, std::span<double> out);
/// Document-at-a-time lookups into sorted per-doc term counts.
void bm25_scores(const Bm25Index& index, std::span<const TermId> terms, std::span<double> out);
void fuzzy_scores(const FuzzyIndex& index, const std::vector<std::u32string>& query_tokens,
                  std::span<double> out);

}  // namespace omp

/// One BM25 summand; shared so both kernels agree to the last bit.
inline double bm25_term_weight(double idf, double tf, double doc_len, double avgdl, double k1,
                               double b) {
  const double norm = avgdl > 0.0 ? doc_len / avgdl : 0.0;
  return idf * (tf * (k1 + 1.0)) / (tf + k1 * (1.0 - b + b * norm));
}

}  // namespace gxs::kernels
