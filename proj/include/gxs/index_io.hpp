#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "gxs/dense.hpp"
#include "gxs/lexical.hpp"

namespace gxs {

// JSON sidecar for prebuilt indexes. The layout is private to this library
// and versioned; readers reject unknown versions with SchemaError.

inline constexpr int kIndexFormatVersion = 1;

nlohmann::json tfidf_to_json(const TfidfIndex& index);
TfidfIndex tfidf_from_json(const nlohmann::json& j);

nlohmann::json bm25_to_json(const Bm25Index& index);
Bm25Index bm25_from_json(const nlohmann::json& j);

nlohmann::json dense_to_json(const DenseIndex& index);
DenseIndex dense_from_json(const nlohmann::json& j);

struct IndexBundle {
  std::optional<TfidfIndex> tfidf;
  std::optional<Bm25Index> bm25;
  std::optional<DenseIndex> dense;
  /// Provider name and fields the dense rows were embedded with.
  std::string dense_provider;
  FieldConfig dense_fields;
};

void save_index_bundle(const IndexBundle& bundle, const std::filesystem::path& path);
IndexBundle load_index_bundle(const std::filesystem::path& path);

}  // namespace gxs
