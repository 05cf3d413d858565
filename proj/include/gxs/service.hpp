#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gxs/embed.hpp"
#include "gxs/engine.hpp"
#include "gxs/rerank.hpp"

namespace gxs {

class HttpTransport;

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path corpus_path;
  Method default_method = Method::tfidf;
  std::size_t default_k = 10;
  std::size_t max_k = 1000;
  bool rerank_enabled = true;
  ProviderConfig provider;
  RerankConfig rerank;
  std::size_t rerank_in_flight = 4;
  std::vector<std::string> cors_allowlist;
  std::string admin_token;
  std::optional<std::filesystem::path> ui_dir;
  EngineOptions engine;
  bool request_log = true;

  void validate() const;
};

/// Layers: defaults <- JSON config file (if given) <- environment
/// (LISTEN_ADDR, CORPUS_PATH, ADMIN_TOKEN, EMBED_*, RERANK_*).
ServiceConfig load_service_config(const std::optional<std::filesystem::path>& path);
ServiceConfig service_config_from_json(const nlohmann::json& j, ServiceConfig base = {});
void apply_env_overrides(ServiceConfig& cfg);

/// One immutable generation of the corpus and its indexes.
struct IndexSnapshot {
  std::shared_ptr<const SearchEngine> engine;
  std::filesystem::path corpus_dir;  // relative ga_path values resolve here
};

using SnapshotBuilder = std::function<std::shared_ptr<const IndexSnapshot>(const ServiceConfig&)>;

/// Loads the corpus at cfg.corpus_path and builds every configured index.
std::shared_ptr<const IndexSnapshot> build_snapshot(const ServiceConfig& cfg,
                                                    std::shared_ptr<HttpTransport> http);

/// JSON search API over an atomically swapped index snapshot.
class SearchService {
 public:
  /// `http` is used for embedding and reranking calls (default: httplib);
  /// `builder` overrides snapshot construction (default: build_snapshot).
  explicit SearchService(ServiceConfig cfg, std::shared_ptr<HttpTransport> http = nullptr,
                         SnapshotBuilder builder = {});
  ~SearchService();

  SearchService(const SearchService&) = delete;
  SearchService& operator=(const SearchService&) = delete;

  /// Synchronous (re)build and swap.
  void build_index();
  /// Starts an initial build on a background thread.
  void start_background_build();
  bool index_ready() const;
  std::size_t corpus_size() const;

  /// Binds cfg.host:cfg.port (port 0 picks a free port). Returns the port.
  int bind();
  /// Serves until stop(); call bind() first.
  void serve();
  void stop();
  /// Blocks until the server accepts connections.
  void wait_until_ready() const;

  const ServiceConfig& config() const noexcept;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace gxs
