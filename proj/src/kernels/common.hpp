#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "gxs/dense.hpp"
#include "gxs/error.hpp"
#include "gxs/lexical.hpp"

namespace gxs::kernels::detail {

inline double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

inline void check_out(std::size_t expected, std::span<double> out) {
  if (out.size() != expected) throw Error(ErrorCode::BadParam, "score buffer has wrong length");
}

inline void check_query(std::size_t dim, std::span<const double> query) {
  if (query.size() != dim) throw Error(ErrorCode::DimMismatch, "query dimension mismatch");
}

/// Renormalized mean of rows [begin, end) of a row-major matrix.
inline std::vector<double> pooled_mean(const double* rows, std::size_t begin, std::size_t end,
                                       std::size_t dim) {
  std::vector<double> mean(dim, 0.0);
  for (std::size_t r = begin; r < end; ++r) {
    for (std::size_t j = 0; j < dim; ++j) mean[j] += rows[r * dim + j];
  }
  double sq = 0.0;
  for (double v : mean) sq += v * v;
  if (sq > 0.0) {
    const double inv = 1.0 / std::sqrt(sq);
    for (double& v : mean) v *= inv;
  }
  return mean;
}

/// Score of one document for late interaction; shared by both kernels.
inline double late_interaction_doc(const TokenMatrixIndex& index, std::size_t d,
                                   std::span<const double> query_rows,
                                   const std::vector<double>& pooled_query, bool pooled) {
  const std::size_t dim = index.dim;
  const std::size_t begin = index.offsets[d];
  const std::size_t end = index.offsets[d + 1];
  if (pooled) {
    const auto mean = pooled_mean(index.rows.data(), begin, end, dim);
    return dot(pooled_query.data(), mean.data(), dim);
  }
  const std::size_t nq = query_rows.size() / dim;
  double total = 0.0;
  for (std::size_t q = 0; q < nq; ++q) {
    double best = -INFINITY;
    for (std::size_t r = begin; r < end; ++r) {
      best = std::max(best, dot(query_rows.data() + q * dim, index.rows.data() + r * dim, dim));
    }
    total += best;
  }
  return total;
}

inline double tfidf_doc(const SparseVector& d, const SparseVector& q) {
  double s = 0.0;
  auto qi = q.begin();
  auto di = d.begin();
  while (qi != q.end() && di != d.end()) {
    if (qi->term < di->term) {
      ++qi;
    } else if (di->term < qi->term) {
      ++di;
    } else {
      s += qi->weight * di->weight;
      ++qi;
      ++di;
    }
  }
  return s;
}

}  // namespace gxs::kernels::detail
