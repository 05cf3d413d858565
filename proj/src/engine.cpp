#include "gxs/engine.hpp"

#include <array>

#include "gxs/error.hpp"

namespace gxs {

namespace {

constexpr std::array<std::pair<Method, std::string_view>, 7> kMethodNames{{
    {Method::tfidf, "tfidf"},
    {Method::bm25, "bm25"},
    {Method::fuzzy, "fuzzy"},
    {Method::dense, "dense"},
    {Method::multivector, "multivector"},
    {Method::late_maxsim, "late_maxsim"},
    {Method::late_pooled, "late_pooled"},
}};

bool needs_embedder(Method m) {
  return m == Method::dense || m == Method::multivector || m == Method::late_maxsim ||
         m == Method::late_pooled;
}

template <class Index>
bool reusable(const std::optional<Index>& idx, const Corpus& corpus, const FieldConfig& fields) {
  return idx && idx->fields == fields && idx->doc_ids == corpus.ids();
}

}  // namespace

std::string_view to_string(Method m) noexcept {
  for (const auto& [method, name] : kMethodNames) {
    if (method == m) return name;
  }
  return "unknown";
}

std::optional<Method> method_from_string(std::string_view name) noexcept {
  for (const auto& [method, n] : kMethodNames) {
    if (n == name) return method;
  }
  return std::nullopt;
}

Method parse_method(std::string_view name) {
  if (auto m = method_from_string(name)) return *m;
  throw Error(ErrorCode::UnknownMethod, "unknown method: " + std::string(name));
}

std::vector<Method> all_methods() {
  std::vector<Method> out;
  for (const auto& entry : kMethodNames) out.push_back(entry.first);
  return out;
}

std::shared_ptr<const SearchEngine> SearchEngine::build(std::shared_ptr<const Corpus> corpus,
                                                        std::shared_ptr<Embedder> embedder,
                                                        EngineOptions options,
                                                        const IndexBundle* prebuilt) {
  if (!corpus) throw Error(ErrorCode::BadParam, "no corpus");
  if (corpus->empty()) throw Error(ErrorCode::EmptyCorpus, "cannot index an empty corpus");
  if (!options.fields.valid()) throw Error(ErrorCode::BadParam, "no document field enabled");
  if (options.methods.empty()) {
    for (Method m : all_methods()) options.methods.insert(m);
  }
  for (Method m : options.methods) {
    if (needs_embedder(m) && !embedder) {
      throw Error(ErrorCode::BadParam,
                  "method " + std::string(to_string(m)) + " needs an embedding provider");
    }
  }

  std::shared_ptr<SearchEngine> engine(new SearchEngine());
  engine->corpus_ = corpus;
  engine->embedder_ = embedder;
  engine->options_ = options;
  const auto& fields = options.fields;
  const auto wants = [&](Method m) { return options.methods.contains(m); };

  if (wants(Method::tfidf)) {
    if (prebuilt && reusable(prebuilt->tfidf, *corpus, fields)) {
      engine->tfidf_ = std::make_unique<TfidfIndex>(*prebuilt->tfidf);
    } else {
      engine->tfidf_ = std::make_unique<TfidfIndex>(build_tfidf(*corpus, fields));
    }
  }
  if (wants(Method::bm25)) {
    const bool same_params = prebuilt && prebuilt->bm25 && prebuilt->bm25->k1 == options.bm25_k1 &&
                             prebuilt->bm25->b == options.bm25_b;
    if (same_params && reusable(prebuilt->bm25, *corpus, fields)) {
      engine->bm25_ = std::make_unique<Bm25Index>(*prebuilt->bm25);
    } else {
      engine->bm25_ = std::make_unique<Bm25Index>(
          build_bm25(*corpus, fields, options.bm25_k1, options.bm25_b));
    }
  }
  if (wants(Method::fuzzy)) {
    engine->fuzzy_ = std::make_unique<FuzzyIndex>(build_fuzzy(*corpus, fields));
  }
  if (wants(Method::dense)) {
    const bool same_embedding = prebuilt && prebuilt->dense &&
                                prebuilt->dense_provider == embedder->name() &&
                                prebuilt->dense_fields == fields;
    if (same_embedding && prebuilt->dense->doc_ids == corpus->ids()) {
      engine->dense_ = std::make_unique<DenseIndex>(*prebuilt->dense);
    } else {
      engine->dense_ = std::make_unique<DenseIndex>(build_dense_index(*corpus, *embedder, fields));
    }
  }
  if (wants(Method::multivector)) {
    engine->multivector_ = std::make_unique<MultiVectorIndex>(build_multivector_index(
        *corpus, *embedder, fields, options.chunk_window, options.chunk_stride));
  }
  if (wants(Method::late_maxsim) || wants(Method::late_pooled)) {
    engine->tokens_ =
        std::make_unique<TokenMatrixIndex>(build_token_index(*corpus, *embedder, fields));
  }
  return engine;
}

bool SearchEngine::supports(Method method) const {
  switch (method) {
    case Method::tfidf: return tfidf_ != nullptr;
    case Method::bm25: return bm25_ != nullptr;
    case Method::fuzzy: return fuzzy_ != nullptr;
    case Method::dense: return dense_ != nullptr;
    case Method::multivector: return multivector_ != nullptr;
    case Method::late_maxsim:
    case Method::late_pooled: return tokens_ != nullptr && options_.methods.contains(method);
  }
  return false;
}

RankedList SearchEngine::search(Method method, std::string_view query, std::size_t k) const {
  if (!supports(method)) {
    throw Error(ErrorCode::UnknownMethod,
                "method " + std::string(to_string(method)) + " is not indexed");
  }
  switch (method) {
    case Method::tfidf: return tfidf_search(*tfidf_, query, k);
    case Method::bm25: return bm25_search(*bm25_, query, k);
    case Method::fuzzy: return fuzzy_search(*fuzzy_, query, k);
    case Method::dense:
      return dense_search(*dense_, embedder_->embed_one(std::string(query)), k);
    case Method::multivector:
      return multivector_search(*multivector_, embedder_->embed_one(std::string(query)), k);
    case Method::late_maxsim:
    case Method::late_pooled: {
      if (k < 1) throw Error(ErrorCode::BadParam, "k must be >= 1");
      const auto rows = embed_tokens(query, *embedder_);
      if (rows.empty()) return {};
      return late_interaction_search(*tokens_, rows, k, method == Method::late_pooled);
    }
  }
  throw Error(ErrorCode::UnknownMethod, "unhandled method");
}

}  // namespace gxs
