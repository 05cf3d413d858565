#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "gxs/embed.hpp"
#include "gxs/ranked_list.hpp"
#include "gxs/textprep.hpp"

namespace gxs {

class Corpus;

/// Row-major matrix of unit (or zero) rows, one per document.
struct DenseIndex {
  std::size_t dim = 0;
  std::vector<double> matrix;
  std::vector<std::string> doc_ids;

  std::size_t size() const noexcept { return doc_ids.size(); }
  std::span<const double> row(std::size_t i) const {
    return {matrix.data() + i * dim, dim};
  }

  /// Validates dims and normalizes every row.
  static DenseIndex from_vectors(std::vector<std::string> ids,
                                 const std::vector<EmbeddingVector>& vectors);
};

/// Chunk rows grouped by owning document: doc d owns rows
/// [offsets[d], offsets[d + 1]). Every document owns at least one row.
struct MultiVectorIndex {
  std::size_t dim = 0;
  std::vector<double> rows;
  std::vector<std::size_t> offsets;
  std::vector<std::string> doc_ids;

  std::size_t size() const noexcept { return doc_ids.size(); }
  std::size_t row_count() const noexcept { return dim == 0 ? 0 : rows.size() / dim; }
  std::span<const double> row(std::size_t r) const { return {rows.data() + r * dim, dim}; }

  static MultiVectorIndex from_groups(std::vector<std::string> ids,
                                      const std::vector<std::vector<EmbeddingVector>>& groups);
};

/// Per-token vectors for late interaction; same layout as MultiVectorIndex.
using TokenMatrixIndex = MultiVectorIndex;

/// Cosine similarity; 0 if either side is all-zero. Throws DimMismatch.
double cosine(std::span<const double> u, std::span<const double> v);
double cosine(const EmbeddingVector& u, const EmbeddingVector& v);

/// Exact flat top-k. A zero query yields an empty list.
RankedList dense_search(const DenseIndex& index, const EmbeddingVector& query, std::size_t k);

/// Document score = max cosine over its chunks.
RankedList multivector_search(const MultiVectorIndex& index, const EmbeddingVector& query,
                              std::size_t k);

/// pooled = false: sum over query rows of the max cosine against doc rows.
/// pooled = true: cosine of the renormalized row means.
double late_interaction_score(const std::vector<EmbeddingVector>& query_tokens,
                              const std::vector<EmbeddingVector>& doc_tokens, bool pooled);

RankedList late_interaction_search(const TokenMatrixIndex& index,
                                   const std::vector<EmbeddingVector>& query_tokens,
                                   std::size_t k, bool pooled);

DenseIndex build_dense_index(const Corpus& corpus, Embedder& embedder,
                             const FieldConfig& cfg = {});

MultiVectorIndex build_multivector_index(const Corpus& corpus, Embedder& embedder,
                                         const FieldConfig& cfg = {}, std::size_t window = 128,
                                         std::size_t stride = 64);

/// One row per token of doc_text; a document without tokens gets one zero row.
TokenMatrixIndex build_token_index(const Corpus& corpus, Embedder& embedder,
                                   const FieldConfig& cfg = {});

/// Embeds each token of `text` separately (late-interaction query side).
std::vector<EmbeddingVector> embed_tokens(std::string_view text, Embedder& embedder);

}  // namespace gxs
