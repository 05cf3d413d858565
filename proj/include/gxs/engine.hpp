#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "gxs/corpus.hpp"
#include "gxs/dense.hpp"
#include "gxs/embed.hpp"
#include "gxs/index_io.hpp"
#include "gxs/lexical.hpp"
#include "gxs/ranked_list.hpp"

namespace gxs {

enum class Method {
  tfidf,
  bm25,
  fuzzy,
  dense,
  multivector,
  late_maxsim,  // token-level MaxSim
  late_pooled,  // token vectors mean-pooled
};

std::string_view to_string(Method m) noexcept;
std::optional<Method> method_from_string(std::string_view name) noexcept;
/// Throws UnknownMethod.
Method parse_method(std::string_view name);
std::vector<Method> all_methods();

struct EngineOptions {
  FieldConfig fields;
  double bm25_k1 = 1.5;
  double bm25_b = 0.75;
  std::size_t chunk_window = 128;
  std::size_t chunk_stride = 64;
  /// Indexes to build; empty means all of them.
  std::set<Method> methods;
};

/// Immutable bundle of every stage-1 index over one corpus. Concurrent
/// searches are safe as long as the embedder is.
class SearchEngine {
 public:
  /// Indexes in `prebuilt` are reused when they cover exactly this corpus
  /// with the same field selection; anything else is rebuilt.
  static std::shared_ptr<const SearchEngine> build(std::shared_ptr<const Corpus> corpus,
                                                   std::shared_ptr<Embedder> embedder,
                                                   EngineOptions options = {},
                                                   const IndexBundle* prebuilt = nullptr);

  /// Throws UnknownMethod if the index for `method` was not built.
  RankedList search(Method method, std::string_view query, std::size_t k) const;

  bool supports(Method method) const;
  const Corpus& corpus() const noexcept { return *corpus_; }
  std::shared_ptr<const Corpus> corpus_ptr() const noexcept { return corpus_; }
  const EngineOptions& options() const noexcept { return options_; }

  const TfidfIndex* tfidf() const noexcept { return tfidf_.get(); }
  const Bm25Index* bm25() const noexcept { return bm25_.get(); }
  const DenseIndex* dense() const noexcept { return dense_.get(); }

 private:
  SearchEngine() = default;

  std::shared_ptr<const Corpus> corpus_;
  std::shared_ptr<Embedder> embedder_;
  EngineOptions options_;
  std::unique_ptr<TfidfIndex> tfidf_;
  std::unique_ptr<Bm25Index> bm25_;
  std::unique_ptr<FuzzyIndex> fuzzy_;
  std::unique_ptr<DenseIndex> dense_;
  std::unique_ptr<MultiVectorIndex> multivector_;
  std::unique_ptr<TokenMatrixIndex> tokens_;
};

}  // namespace gxs
