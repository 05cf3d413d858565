#include "gxs/embed.hpp"

#include <cmath>
#include <cstdlib>
#include <future>
#include <thread>

#include <nlohmann/json.hpp>

#include "gxs/error.hpp"
#include "gxs/http.hpp"
#include "gxs/textprep.hpp"

namespace gxs {

using nlohmann::json;

bool EmbeddingVector::is_zero() const noexcept {
  for (double v : values) {
    if (v != 0.0) return false;
  }
  return true;
}

double EmbeddingVector::norm() const noexcept {
  double sq = 0.0;
  for (double v : values) sq += v * v;
  return std::sqrt(sq);
}

void l2_normalize(std::vector<double>& values) {
  double sq = 0.0;
  for (double v : values) sq += v * v;
  if (sq <= 0.0) return;
  const double inv = 1.0 / std::sqrt(sq);
  for (double& v : values) v *= inv;
}

EmbeddingVector Embedder::embed_one(const std::string& text) {
  auto out = embed({text});
  if (out.size() != 1) throw Error(ErrorCode::SchemaError, "embedder returned no vector");
  return std::move(out.front());
}

// ---------------------------------------------------------------------------
// Provider configuration

void ProviderConfig::validate() const {
  if (kind == ProviderKind::hash) {
    if (dim < 8) throw Error(ErrorCode::BadDim, "hash embedder dim must be >= 8");
  } else {
    if (!endpoint || endpoint->empty() || !model_name || model_name->empty()) {
      throw Error(ErrorCode::BadParam, "remote provider needs endpoint and model_name");
    }
    if (dim != 0 && dim < 8) throw Error(ErrorCode::BadDim, "embedding dim must be >= 8");
  }
  if (batch_size < 1) throw Error(ErrorCode::BadParam, "batch_size must be >= 1");
  if (max_retries < 0) throw Error(ErrorCode::BadParam, "max_retries must be >= 0");
  if (max_in_flight < 1) throw Error(ErrorCode::BadParam, "max_in_flight must be >= 1");
}

ProviderConfig provider_config_from_env(ProviderConfig base) {
  auto env = [](const char* name) -> std::optional<std::string> {
    const char* v = std::getenv(name);
    if (v == nullptr || *v == '\0') return std::nullopt;
    return std::string(v);
  };
  if (auto url = env("EMBED_API_URL")) {
    base.kind = ProviderKind::remote;
    base.endpoint = *url;
    base.dim = 0;
  }
  if (auto key = env("EMBED_API_KEY")) base.api_key = *key;
  if (auto model = env("EMBED_MODEL")) base.model_name = *model;
  if (auto dim = env("EMBED_DIM")) {
    try {
      base.dim = static_cast<std::size_t>(std::stoul(*dim));
    } catch (const std::exception&) {
      throw Error(ErrorCode::BadDim, "EMBED_DIM is not a number: " + *dim);
    }
  }
  return base;
}

// ---------------------------------------------------------------------------
// Hash embedder

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

EmbeddingVector hash_embed(std::string_view text, std::size_t dim) {
  if (dim < 8) throw Error(ErrorCode::BadDim, "hash embedder dim must be >= 8");
  std::vector<double> v(dim, 0.0);
  auto add = [&](std::string_view feature, double weight) {
    const std::uint64_t h = fnv1a64(feature);
    const double sign = (h >> 63) == 0 ? 1.0 : -1.0;
    v[h % dim] += sign * weight;
  };
  for (const auto& token : tokenize(text)) {
    add(token, 1.0);
    const std::u32string cps = to_utf32(token);
    for (std::size_t i = 0; i + 3 <= cps.size(); ++i) add(to_utf8(cps.substr(i, 3)), 0.5);
  }
  l2_normalize(v);
  return {std::move(v)};
}

HashEmbedder::HashEmbedder(std::size_t dim) : dim_(dim) {
  if (dim < 8) throw Error(ErrorCode::BadDim, "hash embedder dim must be >= 8");
}

std::string HashEmbedder::name() const { return "hash-" + std::to_string(dim_); }

std::vector<EmbeddingVector> HashEmbedder::embed(const std::vector<std::string>& texts) {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(hash_embed(t, dim_));
  return out;
}

// ---------------------------------------------------------------------------
// Remote embedder

namespace {

struct BatchResult {
  std::vector<EmbeddingVector> vectors;
  std::size_t calls = 0;
  std::size_t retries = 0;
};

std::vector<EmbeddingVector> parse_embeddings(const std::string& body, std::size_t expected) {
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("data") || !j["data"].is_array()) {
    throw Error(ErrorCode::SchemaError, "embedding response lacks a \"data\" array");
  }
  const json& data = j["data"];
  if (data.size() != expected) {
    throw Error(ErrorCode::SchemaError, "embedding response has " + std::to_string(data.size()) +
                                            " items, expected " + std::to_string(expected));
  }
  std::vector<EmbeddingVector> out(expected);
  std::vector<bool> filled(expected, false);
  for (std::size_t pos = 0; pos < data.size(); ++pos) {
    const json& item = data[pos];
    if (!item.is_object() || !item.contains("embedding") || !item["embedding"].is_array()) {
      throw Error(ErrorCode::SchemaError, "embedding item without an \"embedding\" array");
    }
    std::size_t slot = pos;
    if (auto idx = item.find("index"); idx != item.end()) {
      if (!idx->is_number_integer() || idx->get<long long>() < 0 ||
          static_cast<std::size_t>(idx->get<long long>()) >= expected) {
        throw Error(ErrorCode::SchemaError, "embedding item has an invalid index");
      }
      slot = static_cast<std::size_t>(idx->get<long long>());
    }
    if (filled[slot]) throw Error(ErrorCode::SchemaError, "duplicate embedding index");
    filled[slot] = true;
    std::vector<double> values;
    values.reserve(item["embedding"].size());
    for (const auto& x : item["embedding"]) {
      if (!x.is_number()) throw Error(ErrorCode::SchemaError, "non-numeric embedding value");
      values.push_back(x.get<double>());
    }
    if (values.empty()) throw Error(ErrorCode::SchemaError, "empty embedding");
    l2_normalize(values);
    out[slot].values = std::move(values);
  }
  const std::size_t dim = out.front().dim();
  for (const auto& v : out) {
    if (v.dim() != dim) throw Error(ErrorCode::SchemaError, "ragged embeddings in response");
  }
  return out;
}

BatchResult embed_batch(const std::vector<std::string>& texts, const ProviderConfig& cfg,
                        HttpTransport& http) {
  json body;
  body["model"] = *cfg.model_name;
  body["input"] = texts;
  const std::string payload = body.dump(-1, ' ', false, json::error_handler_t::replace);
  HttpHeaders headers{{"Accept", "application/json"}};
  if (cfg.api_key && !cfg.api_key->empty()) {
    headers.emplace_back("Authorization", "Bearer " + *cfg.api_key);
  }

  BatchResult result;
  for (int attempt = 0;; ++attempt) {
    const bool last = attempt >= cfg.max_retries;
    std::optional<Error> failure;
    ++result.calls;
    HttpResponse resp;
    try {
      resp = http.post(*cfg.endpoint, payload, headers, cfg.timeout);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NetworkError) throw;
      failure = e;
    }
    if (!failure) {
      if (resp.status == 200) {
        result.vectors = parse_embeddings(resp.body, texts.size());
        return result;
      }
      if (resp.status == 401 || resp.status == 403) {
        throw Error(ErrorCode::AuthError, "embedding endpoint rejected credentials (HTTP " +
                                              std::to_string(resp.status) + ")");
      }
      if (resp.status == 429) {
        failure.emplace(ErrorCode::RateLimited, "embedding endpoint rate limited (HTTP 429)");
      } else if (resp.status >= 500) {
        failure.emplace(ErrorCode::NetworkError,
                        "embedding endpoint failed (HTTP " + std::to_string(resp.status) + ")");
      } else {
        throw Error(ErrorCode::NetworkError,
                    "embedding endpoint returned HTTP " + std::to_string(resp.status));
      }
    }
    if (last) throw *failure;
    ++result.retries;
    std::this_thread::sleep_for(cfg.retry_backoff * (1LL << std::min(attempt, 16)));
  }
}

}  // namespace

std::vector<EmbeddingVector> remote_embed(const std::vector<std::string>& texts,
                                          const ProviderConfig& cfg, HttpTransport& http,
                                          RemoteStats* stats) {
  if (cfg.kind != ProviderKind::remote) {
    throw Error(ErrorCode::BadParam, "remote_embed requires a remote provider config");
  }
  cfg.validate();

  std::vector<std::vector<std::string>> batches;
  for (std::size_t i = 0; i < texts.size(); i += cfg.batch_size) {
    const std::size_t end = std::min(texts.size(), i + cfg.batch_size);
    batches.emplace_back(texts.begin() + static_cast<std::ptrdiff_t>(i),
                         texts.begin() + static_cast<std::ptrdiff_t>(end));
  }

  std::vector<BatchResult> results(batches.size());
  for (std::size_t wave = 0; wave < batches.size(); wave += cfg.max_in_flight) {
    const std::size_t wave_end = std::min(batches.size(), wave + cfg.max_in_flight);
    if (wave_end - wave == 1) {
      results[wave] = embed_batch(batches[wave], cfg, http);
      continue;
    }
    std::vector<std::future<BatchResult>> futures;
    for (std::size_t b = wave; b < wave_end; ++b) {
      futures.push_back(std::async(std::launch::async, [&, b] {
        return embed_batch(batches[b], cfg, http);
      }));
    }
    for (std::size_t b = wave; b < wave_end; ++b) results[b] = futures[b - wave].get();
  }

  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  std::size_t dim = 0;
  for (auto& r : results) {
    if (stats != nullptr) {
      stats->http_calls += r.calls;
      stats->retries += r.retries;
    }
    for (auto& v : r.vectors) {
      if (dim == 0) dim = v.dim();
      if (v.dim() != dim || (cfg.dim != 0 && v.dim() != cfg.dim)) {
        throw Error(ErrorCode::SchemaError, "embedding dimension differs from expected");
      }
      out.push_back(std::move(v));
    }
  }
  return out;
}

RemoteEmbedder::RemoteEmbedder(ProviderConfig cfg, std::shared_ptr<HttpTransport> http)
    : cfg_(std::move(cfg)), http_(std::move(http)) {
  if (cfg_.kind != ProviderKind::remote) {
    throw Error(ErrorCode::BadParam, "RemoteEmbedder needs a remote provider config");
  }
  cfg_.validate();
  if (!http_) http_ = std::make_shared<HttplibTransport>();
}

std::string RemoteEmbedder::name() const { return "remote:" + cfg_.model_name.value_or(""); }

std::vector<EmbeddingVector> RemoteEmbedder::embed(const std::vector<std::string>& texts) {
  if (texts.empty()) return {};
  RemoteStats s;
  auto out = remote_embed(texts, cfg_, *http_, &s);
  calls_ += s.http_calls;
  retries_ += s.retries;
  if (!out.empty()) {
    std::size_t expected = 0;
    learned_dim_.compare_exchange_strong(expected, out.front().dim());
    if (dim() != out.front().dim()) {
      throw Error(ErrorCode::SchemaError, "embedding dimension changed between calls");
    }
  }
  return out;
}

RemoteStats RemoteEmbedder::stats() const { return {calls_.load(), retries_.load()}; }

std::shared_ptr<Embedder> make_embedder(const ProviderConfig& cfg,
                                        std::shared_ptr<HttpTransport> http) {
  cfg.validate();
  if (cfg.kind == ProviderKind::hash) return std::make_shared<HashEmbedder>(cfg.dim);
  return std::make_shared<RemoteEmbedder>(cfg, std::move(http));
}

// ---------------------------------------------------------------------------
// Chunking

std::vector<std::string> chunk_text(std::string_view text, std::size_t window,
                                    std::size_t stride) {
  if (stride < 1 || stride > window) {
    throw Error(ErrorCode::BadParam, "chunking requires 1 <= stride <= window");
  }
  const TokenList tokens = tokenize(text);
  auto join = [&](std::size_t begin, std::size_t end) {
    std::string out;
    for (std::size_t i = begin; i < end; ++i) {
      if (i > begin) out += ' ';
      out += tokens[i];
    }
    return out;
  };
  if (tokens.size() <= window) return {join(0, tokens.size())};
  std::vector<std::string> chunks;
  for (std::size_t start = 0; start < tokens.size(); start += stride) {
    chunks.push_back(join(start, std::min(tokens.size(), start + window)));
  }
  return chunks;
}

}  // namespace gxs
