#include <algorithm>

#include "gxs/kernels.hpp"
#include "kernels/common.hpp"

namespace gxs::kernels::serial {

void dense_scores(const DenseIndex& index, std::span<const double> query, std::span<double> out) {
  detail::check_query(index.dim, query);
  detail::check_out(index.size(), out);
  for (std::size_t i = 0; i < index.size(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < index.dim; ++j) s += index.matrix[i * index.dim + j] * query[j];
    out[i] = s;
  }
}

void multivector_scores(const MultiVectorIndex& index, std::span<const double> query,
                        std::span<double> out) {
  detail::check_query(index.dim, query);
  detail::check_out(index.size(), out);
  for (std::size_t d = 0; d < index.size(); ++d) {
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
  for (std::size_t d = 0; d < index.size(); ++d) {
    out[d] = detail::late_interaction_doc(index, d, query_rows, pooled_query, pooled);
  }
}

void tfidf_scores(const TfidfIndex& index, const SparseVector& query, std::span<double> out) {
  detail::check_out(index.doc_vectors.size(), out);
  std::fill(out.begin(), out.end(), 0.0);
  // Term at a time: every doc receives its contributions in ascending term order.
  for (const auto& q : query) {
    for (std::size_t d = 0; d < index.doc_vectors.size(); ++d) {
      const auto& vec = index.doc_vectors[d];
      auto it = std::lower_bound(vec.begin(), vec.end(), q.term,
                                 [](const SparseEntry& e, TermId t) { return e.term < t; });
      if (it != vec.end() && it->term == q.term) out[d] += q.weight * it->weight;
    }
  }
}

void bm25_scores(const Bm25Index& index, std::span<const TermId> terms, std::span<double> out) {
  detail::check_out(index.doc_ids.size(), out);
  std::fill(out.begin(), out.end(), 0.0);
  for (TermId t : terms) {
    for (const Posting& p : index.postings[t]) {
      out[p.doc] += bm25_term_weight(index.idf[t], p.tf, index.doc_lengths[p.doc], index.avgdl,
                                     index.k1, index.b);
    }
  }
}

void fuzzy_scores(const FuzzyIndex& index, const std::vector<std::u32string>& query_tokens,
                  std::span<double> out) {
  detail::check_out(index.doc_tokens.size(), out);
  for (std::size_t d = 0; d < index.doc_tokens.size(); ++d) {
    out[d] = token_set_ratio(query_tokens, index.doc_tokens[d]);
  }
}

}  // namespace gxs::kernels::serial
