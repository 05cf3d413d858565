#include "gxs/dense.hpp"

#include <algorithm>
#include <cmath>

#include "gxs/corpus.hpp"
#include "gxs/error.hpp"
#include "gxs/kernels.hpp"

namespace gxs {

namespace {

void check_k(std::size_t k) {
  if (k < 1) throw Error(ErrorCode::BadParam, "k must be >= 1");
}

std::vector<double> normalized(const EmbeddingVector& v) {
  std::vector<double> out = v.values;
  l2_normalize(out);
  return out;
}

}  // namespace

DenseIndex DenseIndex::from_vectors(std::vector<std::string> ids,
                                    const std::vector<EmbeddingVector>& vectors) {
  if (ids.size() != vectors.size()) {
    throw Error(ErrorCode::BadParam, "ids and vectors differ in length");
  }
  DenseIndex index;
  index.doc_ids = std::move(ids);
  if (vectors.empty()) return index;
  index.dim = vectors.front().dim();
  if (index.dim == 0) throw Error(ErrorCode::BadDim, "zero-dimensional vectors");
  index.matrix.reserve(vectors.size() * index.dim);
  for (const auto& v : vectors) {
    if (v.dim() != index.dim) throw Error(ErrorCode::DimMismatch, "vectors differ in dimension");
    const auto row = normalized(v);
    index.matrix.insert(index.matrix.end(), row.begin(), row.end());
  }
  return index;
}

MultiVectorIndex MultiVectorIndex::from_groups(
    std::vector<std::string> ids, const std::vector<std::vector<EmbeddingVector>>& groups) {
  if (ids.size() != groups.size()) {
    throw Error(ErrorCode::BadParam, "ids and vector groups differ in length");
  }
  MultiVectorIndex index;
  index.doc_ids = std::move(ids);
  index.offsets.push_back(0);
  for (const auto& g : groups) {
    if (g.empty()) throw Error(ErrorCode::EmptyMatrix, "every document needs at least one vector");
    for (const auto& v : g) {
      if (index.dim == 0) index.dim = v.dim();
      if (v.dim() != index.dim || v.dim() == 0) {
        throw Error(ErrorCode::DimMismatch, "vectors differ in dimension");
      }
      const auto row = normalized(v);
      index.rows.insert(index.rows.end(), row.begin(), row.end());
    }
    index.offsets.push_back(index.offsets.back() + g.size());
  }
  return index;
}

double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw Error(ErrorCode::DimMismatch, "cosine of unequal dimensions");
  double dot = 0.0;
  double nu = 0.0;
  double nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0.0 || nv == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(nu) * std::sqrt(nv)), -1.0, 1.0);
}

double cosine(const EmbeddingVector& u, const EmbeddingVector& v) {
  return cosine(std::span<const double>(u.values), std::span<const double>(v.values));
}

RankedList dense_search(const DenseIndex& index, const EmbeddingVector& query, std::size_t k) {
  check_k(k);
  if (index.size() == 0) throw Error(ErrorCode::EmptyIndex, "dense index is empty");
  if (query.dim() != index.dim) throw Error(ErrorCode::DimMismatch, "query dimension mismatch");
  if (query.is_zero()) return {};
  const auto q = normalized(query);
  std::vector<double> scores(index.size());
  kernels::omp::dense_scores(index, q, scores);
  return RankedList::top_k(scores, index.doc_ids, k);
}

RankedList multivector_search(const MultiVectorIndex& index, const EmbeddingVector& query,
                              std::size_t k) {
  check_k(k);
  if (index.size() == 0) throw Error(ErrorCode::EmptyIndex, "multivector index is empty");
  if (query.dim() != index.dim) throw Error(ErrorCode::DimMismatch, "query dimension mismatch");
  if (query.is_zero()) return {};
  const auto q = normalized(query);
  std::vector<double> scores(index.size());
  kernels::omp::multivector_scores(index, q, scores);
  return RankedList::top_k(scores, index.doc_ids, k);
}

double late_interaction_score(const std::vector<EmbeddingVector>& query_tokens,
                              const std::vector<EmbeddingVector>& doc_tokens, bool pooled) {
  if (query_tokens.empty() || doc_tokens.empty()) {
    throw Error(ErrorCode::EmptyMatrix, "late interaction needs non-empty matrices");
  }
  const std::size_t dim = query_tokens.front().dim();
  for (const auto& v : query_tokens) {
    if (v.dim() != dim) throw Error(ErrorCode::DimMismatch, "query token dims differ");
  }
  for (const auto& v : doc_tokens) {
    if (v.dim() != dim) throw Error(ErrorCode::DimMismatch, "doc token dims differ");
  }
  if (pooled) {
    auto mean = [dim](const std::vector<EmbeddingVector>& rows) {
      std::vector<double> m(dim, 0.0);
      for (const auto& r : rows) {
        const auto n = normalized(r);
        for (std::size_t j = 0; j < dim; ++j) m[j] += n[j];
      }
      return m;
    };
    return cosine(std::span<const double>(mean(query_tokens)),
                  std::span<const double>(mean(doc_tokens)));
  }
  double total = 0.0;
  for (const auto& q : query_tokens) {
    double best = -INFINITY;
    for (const auto& d : doc_tokens) best = std::max(best, cosine(q, d));
    total += best;
  }
  return total;
}

RankedList late_interaction_search(const TokenMatrixIndex& index,
                                   const std::vector<EmbeddingVector>& query_tokens,
                                   std::size_t k, bool pooled) {
  check_k(k);
  if (index.size() == 0) throw Error(ErrorCode::EmptyIndex, "token index is empty");
  std::vector<double> rows;
  for (const auto& v : query_tokens) {
    if (v.dim() != index.dim) throw Error(ErrorCode::DimMismatch, "query dimension mismatch");
    if (v.is_zero()) continue;
    const auto n = normalized(v);
    rows.insert(rows.end(), n.begin(), n.end());
  }
  if (rows.empty()) return {};
  std::vector<double> scores(index.size());
  kernels::omp::late_interaction_scores(index, rows, pooled, scores);
  return RankedList::top_k(scores, index.doc_ids, k);
}

DenseIndex build_dense_index(const Corpus& corpus, Embedder& embedder, const FieldConfig& cfg) {
  if (corpus.empty()) throw Error(ErrorCode::EmptyCorpus, "cannot index an empty corpus");
  std::vector<std::string> texts;
  texts.reserve(corpus.size());
  for (const auto& w : corpus.workflows()) texts.push_back(doc_text(w, cfg));
  return DenseIndex::from_vectors(corpus.ids(), embedder.embed(texts));
}

MultiVectorIndex build_multivector_index(const Corpus& corpus, Embedder& embedder,
                                         const FieldConfig& cfg, std::size_t window,
                                         std::size_t stride) {
  if (corpus.empty()) throw Error(ErrorCode::EmptyCorpus, "cannot index an empty corpus");
  std::vector<std::string> all_chunks;
  std::vector<std::size_t> counts;
  for (const auto& w : corpus.workflows()) {
    auto chunks = chunk_text(doc_text(w, cfg), window, stride);
    counts.push_back(chunks.size());
    for (auto& c : chunks) all_chunks.push_back(std::move(c));
  }
  auto vectors = embedder.embed(all_chunks);
  std::vector<std::vector<EmbeddingVector>> groups;
  std::size_t pos = 0;
  for (std::size_t n : counts) {
    groups.emplace_back(std::make_move_iterator(vectors.begin() + static_cast<std::ptrdiff_t>(pos)),
                        std::make_move_iterator(vectors.begin() +
                                                static_cast<std::ptrdiff_t>(pos + n)));
    pos += n;
  }
  return MultiVectorIndex::from_groups(corpus.ids(), groups);
}

std::vector<EmbeddingVector> embed_tokens(std::string_view text, Embedder& embedder) {
  const TokenList tokens = tokenize(text);
  if (tokens.empty()) return {};
  return embedder.embed(tokens);
}

TokenMatrixIndex build_token_index(const Corpus& corpus, Embedder& embedder,
                                   const FieldConfig& cfg) {
  if (corpus.empty()) throw Error(ErrorCode::EmptyCorpus, "cannot index an empty corpus");
  std::vector<TokenList> docs;
  std::vector<std::string> flat;
  for (const auto& w : corpus.workflows()) {
    docs.push_back(tokenize(doc_text(w, cfg)));
    flat.insert(flat.end(), docs.back().begin(), docs.back().end());
  }
  auto vectors = flat.empty() ? std::vector<EmbeddingVector>{} : embedder.embed(flat);
  std::size_t dim = embedder.dim();
  if (!vectors.empty()) dim = vectors.front().dim();
  if (dim == 0) throw Error(ErrorCode::BadDim, "embedder dimension unknown");
  std::vector<std::vector<EmbeddingVector>> groups;
  std::size_t pos = 0;
  for (const auto& d : docs) {
    std::vector<EmbeddingVector> g;
    for (std::size_t i = 0; i < d.size(); ++i) g.push_back(std::move(vectors[pos + i]));
    pos += d.size();
    if (g.empty()) g.push_back({std::vector<double>(dim, 0.0)});
    groups.push_back(std::move(g));
  }
  return MultiVectorIndex::from_groups(corpus.ids(), groups);
}

}  // namespace gxs
