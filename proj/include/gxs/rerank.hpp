#pragma once

#include <chrono>
#include <cstddef>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gxs/ranked_list.hpp"

namespace gxs {

class Corpus;
class HttpTransport;

struct RerankConfig {
  std::string endpoint;
  std::string model_name;
  std::string api_key;
  std::size_t candidates_k = 50;
  double timeout_s = 60.0;
  double temperature = 0.0;
  /// Prompts longer than this are split into sequential candidate batches.
  std::size_t prompt_char_budget = 48000;

  void validate() const;
};

/// Reads RERANK_API_URL, RERANK_API_KEY, RERANK_MODEL over `base`.
RerankConfig rerank_config_from_env(RerankConfig base = {});

/// Single-turn chat completion. Implementations throw on any failure.
class ChatClient {
 public:
  virtual ~ChatClient() = default;
  virtual std::string complete(const std::string& prompt) = 0;
};

/// OpenAI-compatible chat-completions client; reads choices[0].message.content.
class RemoteChatClient final : public ChatClient {
 public:
  RemoteChatClient(RerankConfig cfg, std::shared_ptr<HttpTransport> http);
  std::string complete(const std::string& prompt) override;

 private:
  RerankConfig cfg_;
  std::shared_ptr<HttpTransport> http_;
};

struct RerankCandidate {
  std::string id;
  std::string title;
  std::string description;
};

inline constexpr std::size_t kPromptDescriptionChars = 600;

/// Throws TooManyCandidates when candidates exceed `max_candidates`, BadParam
/// when empty.
std::string build_rerank_prompt(std::string_view query,
                                std::span<const RerankCandidate> candidates,
                                std::size_t max_candidates = 50);

/// Strict JSON first, then a lenient pair scan. Scores clamped to [0, 1],
/// unknown ids dropped, first occurrence wins. Throws Unparseable when
/// nothing is recovered.
std::map<std::string, double> parse_scores(std::string_view response,
                                           std::span<const std::string> candidate_ids);

struct RerankOutcome {
  RankedList list;
  bool used_llm = false;
  std::map<std::string, double> per_id_scores;
  std::vector<std::string> warnings;
};

/// Never throws on client behaviour; the worst case is stage-1 passthrough.
/// Scored candidates come first by (llm score desc, stage-1 score desc, id asc)
/// with the llm score as list score; unscored ones follow in stage-1 order
/// with score 0.
RerankOutcome rerank(std::string_view query, const RankedList& stage1, const Corpus& corpus,
                     ChatClient* client, const RerankConfig& cfg);

}  // namespace gxs
