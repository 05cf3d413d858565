#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gxs {

class HttpTransport;

/// Unit-norm vector, or all zeros for text without features.
struct EmbeddingVector {
  std::vector<double> values;

  std::size_t dim() const noexcept { return values.size(); }
  bool is_zero() const noexcept;
  double norm() const noexcept;

  bool operator==(const EmbeddingVector&) const = default;
};

/// Scales to unit length in place; zero vectors stay zero.
void l2_normalize(std::vector<double>& values);

enum class ProviderKind { hash, remote };

struct ProviderConfig {
  ProviderKind kind = ProviderKind::hash;
  std::optional<std::string> endpoint;
  std::optional<std::string> model_name;
  std::optional<std::string> api_key;
  std::size_t dim = 256;  // hash: output size; remote: expected size, 0 = accept server's
  std::size_t batch_size = 64;
  int max_retries = 3;
  std::chrono::milliseconds retry_backoff{200};
  std::chrono::milliseconds timeout{60000};
  std::size_t max_in_flight = 1;

  /// Throws BadParam/BadDim on violated invariants.
  void validate() const;
};

/// Reads EMBED_API_URL, EMBED_API_KEY, EMBED_MODEL, EMBED_DIM. A URL switches
/// to remote and, unless EMBED_DIM is set, accepts whatever size the server returns.
ProviderConfig provider_config_from_env(ProviderConfig base = {});

std::uint64_t fnv1a64(std::string_view bytes) noexcept;

/// Feature-hashing embedder: tokens (weight 1) and character 3-grams of each
/// token (weight 0.5) hashed with FNV-1a into `dim` signed buckets.
EmbeddingVector hash_embed(std::string_view text, std::size_t dim = 256);

struct RemoteStats {
  std::size_t http_calls = 0;
  std::size_t retries = 0;
};

/// OpenAI-compatible embeddings client. Batches of at most batch_size texts,
/// results in input order, each vector L2-normalized.
std::vector<EmbeddingVector> remote_embed(const std::vector<std::string>& texts,
                                          const ProviderConfig& cfg, HttpTransport& http,
                                          RemoteStats* stats = nullptr);

/// Overlapping token windows [0, window), [stride, stride + window), ...
/// Text with at most `window` tokens yields exactly one chunk.
std::vector<std::string> chunk_text(std::string_view text, std::size_t window = 128,
                                    std::size_t stride = 64);

class Embedder {
 public:
  virtual ~Embedder() = default;

  /// 0 when not known until the first call (remote, unconfigured dim).
  virtual std::size_t dim() const = 0;
  virtual std::string name() const = 0;
  virtual std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) = 0;

  EmbeddingVector embed_one(const std::string& text);
};

class HashEmbedder final : public Embedder {
 public:
  explicit HashEmbedder(std::size_t dim = 256);

  std::size_t dim() const override { return dim_; }
  std::string name() const override;
  std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override;

 private:
  std::size_t dim_;
};

class RemoteEmbedder final : public Embedder {
 public:
  RemoteEmbedder(ProviderConfig cfg, std::shared_ptr<HttpTransport> http);

  std::size_t dim() const override { return cfg_.dim != 0 ? cfg_.dim : learned_dim_.load(); }
  std::string name() const override;
  std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override;

  RemoteStats stats() const;

 private:
  ProviderConfig cfg_;
  std::shared_ptr<HttpTransport> http_;
  std::atomic<std::size_t> learned_dim_{0};
  std::atomic<std::size_t> calls_{0};
  std::atomic<std::size_t> retries_{0};
};

std::shared_ptr<Embedder> make_embedder(const ProviderConfig& cfg,
                                        std::shared_ptr<HttpTransport> http = nullptr);

}  // namespace gxs
