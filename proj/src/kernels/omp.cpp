#include <algorithm>
#include <cstdint>

#include <omp.h>

#include "gxs/kernels.hpp"
#include "kernels/common.hpp"

namespace gxs::kernels::omp {

namespace {

// Below this many documents the fork/join costs more than it saves.
constexpr std::int64_t kParallelThreshold = 256;

}  // namespace

void dense_scores(const DenseIndex& index, std::span<const double> query, std::span<double> out) {
  detail::check_query(index.dim, query);
  detail::check_out(index.size(), out);
  const auto n = static_cast<std::int64_t>(index.size());
  const double* m = index.matrix.data();
  const double* q = query.data();
  const std::size_t dim = index.dim;
#pragma omp parallel for schedule(static) if (n >= kParallelThreshold)
  for (std::int64_t i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = detail::dot(m + static_cast<std::size_t>(i) * dim, q, dim);
  }
}

void multivector_scores(const MultiVectorIndex& index, std::span<const double> query,
                        std::span<double> out) {
  detail::check_query(index.dim, query);
  detail::check_out(index.size(), out);
  const auto n = static_cast<std::int64_t>(index.size());
#pragma omp parallel for schedule(dynamic, 16) if (n >= kParallelThreshold)
  for (std::int64_t di = 0; di < n; ++di) {
    const auto d = static_cast<std::size_t>(di);
    double best = -INFINITY;
    for (std::size_t r = index.offsets[d]; r < index.offsets[d + 1]; ++r) {
      best = std::max(best, detail::dot(index.rows.data() + r * index.dim, query.data(), index.dim));
    }
    out[d] = best;
  }
}

void late_interaction_scores(const TokenMatrixIndex& index, std::span<const double> query_rows,
                             bool pooled, std::span<double> out) {
  if (index.dim == 0 || query_rows.empty() || query_rows.size() % index.dim != 0) {
    throw Error(ErrorCode::DimMismatch, "query token matrix does not match index dimension");
  }
  detail::check_out(index.size(), out);
  const auto pooled_query =
      detail::pooled_mean(query_rows.data(), 0, query_rows.size() / index.dim, index.dim);
  const auto n = static_cast<std::int64_t>(index.size());
#pragma omp parallel for schedule(dynamic, 16) if (n >= kParallelThreshold)
  for (std::int64_t d = 0; d < n; ++d) {
    out[static_cast<std::size_t>(d)] = detail::late_interaction_doc(
        index, static_cast<std::size_t>(d), query_rows, pooled_query, pooled);
  }
}

void tfidf_scores(const TfidfIndex& index, const SparseVector& query, std::span<double> out) {
  detail::check_out(index.doc_vectors.size(), out);
  const auto n = static_cast<std::int64_t>(index.doc_vectors.size());
#pragma omp parallel for schedule(static) if (n >= kParallelThreshold)
  for (std::int64_t d = 0; d < n; ++d) {
    out[static_cast<std::size_t>(d)] =
        detail::tfidf_doc(index.doc_vectors[static_cast<std::size_t>(d)], query);
  }
}

void bm25_scores(const Bm25Index& index, std::span<const TermId> terms, std::span<double> out) {
  detail::check_out(index.doc_ids.size(), out);
  const auto n = static_cast<std::int64_t>(index.doc_ids.size());
#pragma omp parallel for schedule(static) if (n >= kParallelThreshold)
  for (std::int64_t di = 0; di < n; ++di) {
    const auto d = static_cast<std::size_t>(di);
    const auto& row = index.doc_terms[d];
    double s = 0.0;
    for (TermId t : terms) {
      auto it = std::lower_bound(row.begin(), row.end(), t,
                                 [](const TermCount& c, TermId id) { return c.term < id; });
      if (it == row.end() || it->term != t) continue;
      s += bm25_term_weight(index.idf[t], it->tf, index.doc_lengths[d], index.avgdl, index.k1,
                            index.b);
    }
    out[d] = s;
  }
}

void fuzzy_scores(const FuzzyIndex& index, const std::vector<std::u32string>& query_tokens,
                  std::span<double> out) {
  detail::check_out(index.doc_tokens.size(), out);
  const auto n = static_cast<std::int64_t>(index.doc_tokens.size());
#pragma omp parallel for schedule(dynamic, 8) if (n >= 32)
  for (std::int64_t d = 0; d < n; ++d) {
    out[static_cast<std::size_t>(d)] =
        token_set_ratio(query_tokens, index.doc_tokens[static_cast<std::size_t>(d)]);
  }
}

}  // namespace gxs::kernels::omp
