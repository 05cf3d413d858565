#include "gxs/rerank.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <optional>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "gxs/corpus.hpp"
#include "gxs/error.hpp"
#include "gxs/http.hpp"
#include "gxs/textprep.hpp"

namespace gxs {

using nlohmann::json;

void RerankConfig::validate() const {
  if (candidates_k < 1) throw Error(ErrorCode::BadParam, "candidates_k must be >= 1");
  if (!(timeout_s > 0.0)) throw Error(ErrorCode::BadParam, "timeout_s must be > 0");
  if (prompt_char_budget < 1) throw Error(ErrorCode::BadParam, "prompt_char_budget must be >= 1");
}

RerankConfig rerank_config_from_env(RerankConfig base) {
  auto env = [](const char* name) -> std::optional<std::string> {
    const char* v = std::getenv(name);
    if (v == nullptr || *v == '\0') return std::nullopt;
    return std::string(v);
  };
  if (auto v = env("RERANK_API_URL")) base.endpoint = *v;
  if (auto v = env("RERANK_API_KEY")) base.api_key = *v;
  if (auto v = env("RERANK_MODEL")) base.model_name = *v;
  return base;
}

// ---------------------------------------------------------------------------
// Chat-completions client

RemoteChatClient::RemoteChatClient(RerankConfig cfg, std::shared_ptr<HttpTransport> http)
    : cfg_(std::move(cfg)), http_(std::move(http)) {
  cfg_.validate();
  if (cfg_.endpoint.empty()) throw Error(ErrorCode::BadParam, "reranker endpoint not configured");
  if (!http_) http_ = std::make_shared<HttplibTransport>();
}

std::string RemoteChatClient::complete(const std::string& prompt) {
  json body;
  body["model"] = cfg_.model_name;
  body["messages"] = json::array({{{"role", "user"}, {"content", prompt}}});
  body["temperature"] = cfg_.temperature;
  HttpHeaders headers{{"Accept", "application/json"}};
  if (!cfg_.api_key.empty()) headers.emplace_back("Authorization", "Bearer " + cfg_.api_key);

  const auto timeout = std::chrono::milliseconds(static_cast<long long>(cfg_.timeout_s * 1000.0));
  HttpResponse resp = http_->post(
      cfg_.endpoint, body.dump(-1, ' ', false, json::error_handler_t::replace), headers, timeout);
  if (resp.status == 401 || resp.status == 403) {
    throw Error(ErrorCode::AuthError, "reranker rejected credentials");
  }
  if (resp.status != 200) {
    throw Error(ErrorCode::ClientError, "reranker returned HTTP " + std::to_string(resp.status));
  }
  json j = json::parse(resp.body, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::SchemaError, "reranker response is not JSON");
  const json* content = nullptr;
  if (j.is_object() && j.contains("choices") && j["choices"].is_array() && !j["choices"].empty()) {
    const json& choice = j["choices"][0];
    if (choice.is_object() && choice.contains("message") && choice["message"].is_object()) {
      auto it = choice["message"].find("content");
      if (it != choice["message"].end() && it->is_string()) content = &*it;
    }
  }
  if (content == nullptr) {
    throw Error(ErrorCode::SchemaError, "reranker response lacks choices[0].message.content");
  }
  return content->get<std::string>();
}

// ---------------------------------------------------------------------------
// Prompt

std::string build_rerank_prompt(std::string_view query,
                                std::span<const RerankCandidate> candidates,
                                std::size_t max_candidates) {
  if (candidates.empty()) throw Error(ErrorCode::BadParam, "no candidates to rerank");
  if (candidates.size() > max_candidates) {
    throw Error(ErrorCode::TooManyCandidates,
                std::to_string(candidates.size()) + " candidates exceed the limit of " +
                    std::to_string(max_candidates));
  }
  std::string p;
  p += "You are an expert in Galaxy bioinformatics workflows. Score each workflow's relevance "
       "to the query from 0.0 to 1.0, where 1.0 means the workflow directly accomplishes the "
       "user's task.\n\n";
  p += "Query: ";
  p += query;
  p += "\n\nCandidate workflows:\n";
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& c = candidates[i];
    bool cut = false;
    std::string desc = truncate_utf8(c.description, kPromptDescriptionChars, &cut);
    if (cut) desc += "…";
    p += std::to_string(i + 1) + ". [" + c.id + "] " + c.title + " — " + desc + "\n";
  }
  p += "\nAnswer ONLY with JSON of the form "
       "{\"scores\":[{\"id\":\"<workflow id>\",\"score\":<number between 0.0 and 1.0>}]} "
       "with one entry per candidate id, and no other text.";
  return p;
}

// ---------------------------------------------------------------------------
// Score parsing

namespace {

double clamp_score(double s) {
  if (!(s == s)) return 0.0;  // NaN
  return std::clamp(s, 0.0, 1.0);
}

std::optional<std::string> id_value(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return v.dump();
  return std::nullopt;
}

std::optional<double> score_value(const json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    double d = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), d);
    if (ec == std::errc() && ptr == s.data() + s.size()) return d;
  }
  return std::nullopt;
}

using ScorePairs = std::vector<std::pair<std::string, double>>;

std::optional<ScorePairs> strict_parse(std::string_view text) {
  json j = json::parse(text.begin(), text.end(), nullptr, false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;
  auto it = j.find("scores");
  if (it == j.end() || !it->is_array()) return std::nullopt;
  ScorePairs out;
  for (const auto& e : *it) {
    if (!e.is_object() || !e.contains("id") || !e.contains("score")) continue;
    auto id = id_value(e["id"]);
    auto score = score_value(e["score"]);
    if (id && score) out.emplace_back(*id, *score);
  }
  return out;
}

std::size_t skip_ws(std::string_view s, std::size_t i) {
  while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\n' || s[i] == '\r')) ++i;
  return i;
}

// Position just after `"key"` followed by optional whitespace and ':'.
std::optional<std::size_t> find_key(std::string_view obj, std::string_view key) {
  const std::string quoted = "\"" + std::string(key) + "\"";
  std::size_t from = 0;
  while (true) {
    const std::size_t at = obj.find(quoted, from);
    if (at == std::string_view::npos) return std::nullopt;
    std::size_t i = skip_ws(obj, at + quoted.size());
    if (i < obj.size() && obj[i] == ':') return skip_ws(obj, i + 1);
    from = at + 1;
  }
}

std::optional<std::string> scan_string(std::string_view s, std::size_t i) {
  if (i >= s.size() || s[i] != '"') return std::nullopt;
  std::size_t j = i + 1;
  while (j < s.size() && s[j] != '"') j += (s[j] == '\\') ? 2 : 1;
  if (j >= s.size()) return std::nullopt;
  json v = json::parse(s.substr(i, j - i + 1), nullptr, false);
  if (v.is_discarded() || !v.is_string()) return std::nullopt;
  return v.get<std::string>();
}

std::optional<double> scan_number(std::string_view s, std::size_t i) {
  bool quoted = false;
  if (i < s.size() && s[i] == '"') {
    quoted = true;
    ++i;
  }
  std::size_t j = i;
  while (j < s.size() && (std::isdigit(static_cast<unsigned char>(s[j])) || s[j] == '.' ||
                          s[j] == '-' || s[j] == '+' || s[j] == 'e' || s[j] == 'E')) {
    ++j;
  }
  if (j == i) return std::nullopt;
  double d = 0.0;
  auto [ptr, ec] = std::from_chars(s.data() + i, s.data() + j, d);
  if (ptr == s.data() + i) return std::nullopt;
  if (ec == std::errc::result_out_of_range) d = (s[i] == '-') ? -1.0 : 1.0;
  else if (ec != std::errc()) return std::nullopt;
  (void)quoted;
  return d;
}

// Flat `{...}` segments containing both keys, in either order.
ScorePairs lenient_scan(std::string_view text) {
  ScorePairs out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t open = text.find('{', pos);
    if (open == std::string_view::npos) break;
    const std::size_t next = text.find_first_of("{}", open + 1);
    if (next == std::string_view::npos) break;
    if (text[next] == '{') {
      pos = next;
      continue;
    }
    const std::string_view obj = text.substr(open, next - open + 1);
    pos = next + 1;
    auto id_at = find_key(obj, "id");
    auto score_at = find_key(obj, "score");
    if (!id_at || !score_at) continue;
    std::optional<std::string> id = scan_string(obj, *id_at);
    if (!id) {
      // Bare integer ids.
      auto n = scan_number(obj, *id_at);
      if (n && *n == static_cast<double>(static_cast<long long>(*n))) {
        id = std::to_string(static_cast<long long>(*n));
      }
    }
    auto score = scan_number(obj, *score_at);
    if (id && score) out.emplace_back(*id, *score);
  }
  return out;
}

}  // namespace

std::map<std::string, double> parse_scores(std::string_view response,
                                           std::span<const std::string> candidate_ids) {
  std::optional<ScorePairs> pairs = strict_parse(response);
  if (!pairs || pairs->empty()) {
    const std::size_t first = response.find('{');
    const std::size_t last = response.rfind('}');
    if (first != std::string_view::npos && last != std::string_view::npos && last > first) {
      pairs = strict_parse(response.substr(first, last - first + 1));
    }
  }
  if (!pairs || pairs->empty()) pairs = lenient_scan(response);

  const std::unordered_set<std::string> allowed(candidate_ids.begin(), candidate_ids.end());
  std::map<std::string, double> out;
  for (const auto& [id, score] : *pairs) {
    if (!allowed.contains(id)) continue;
    out.emplace(id, clamp_score(score));  // first occurrence wins
  }
  if (out.empty()) throw Error(ErrorCode::Unparseable, "no candidate scores in reranker output");
  return out;
}

// ---------------------------------------------------------------------------
// Reranking

namespace {

std::vector<std::vector<RerankCandidate>> split_by_budget(std::string_view query,
                                                          std::vector<RerankCandidate> cands,
                                                          std::size_t budget,
                                                          std::size_t max_per_batch) {
  std::vector<std::vector<RerankCandidate>> batches;
  std::vector<RerankCandidate> current;
  for (auto& c : cands) {
    current.push_back(std::move(c));
    const bool too_long = build_rerank_prompt(query, current, max_per_batch).size() > budget;
    if (too_long && current.size() > 1) {
      RerankCandidate last = std::move(current.back());
      current.pop_back();
      batches.push_back(std::move(current));
      current = {std::move(last)};
    }
  }
  if (!current.empty()) batches.push_back(std::move(current));
  return batches;
}

RerankOutcome passthrough(const RankedList& stage1, std::vector<std::string> warnings) {
  RerankOutcome out;
  out.list = stage1;
  out.used_llm = false;
  out.warnings = std::move(warnings);
  return out;
}

}  // namespace

RerankOutcome rerank(std::string_view query, const RankedList& stage1, const Corpus& corpus,
                     ChatClient* client, const RerankConfig& cfg) {
  if (stage1.empty()) return passthrough(stage1, {});
  if (client == nullptr) return passthrough(stage1, {"reranker not configured; stage-1 order kept"});

  std::vector<std::string> warnings;
  std::size_t limit = std::max<std::size_t>(cfg.candidates_k, 1);
  const std::size_t head = std::min(limit, stage1.size());

  std::vector<RerankCandidate> cands;
  std::vector<std::string> head_ids;
  for (std::size_t i = 0; i < head; ++i) {
    const auto& id = stage1[i].id;
    head_ids.push_back(id);
    if (const Workflow* w = corpus.find(id)) {
      cands.push_back({id, w->title, w->description});
    } else {
      cands.push_back({id, "", ""});
    }
  }

  std::map<std::string, double> scores;
  try {
    const auto batches = split_by_budget(query, std::move(cands),
                                         std::max<std::size_t>(cfg.prompt_char_budget, 1), limit);
    for (const auto& batch : batches) {
      std::vector<std::string> ids;
      for (const auto& c : batch) ids.push_back(c.id);
      try {
        const std::string response = client->complete(build_rerank_prompt(query, batch, limit));
        for (const auto& [id, s] : parse_scores(response, ids)) scores.emplace(id, s);
      } catch (const std::exception& e) {
        warnings.push_back(std::string("reranker batch failed: ") + e.what());
      } catch (...) {
        warnings.push_back("reranker batch failed: unknown error");
      }
    }
  } catch (const std::exception& e) {
    warnings.push_back(std::string("reranker failed: ") + e.what());
    scores.clear();
  }

  if (scores.empty()) {
    if (warnings.empty()) warnings.push_back("reranker produced no scores");
    std::vector<std::string> folded{warnings.front()};
    for (std::size_t i = 1; i < warnings.size(); ++i) folded.front() += "; " + warnings[i];
    return passthrough(stage1, std::move(folded));
  }

  struct Item {
    std::size_t stage1_pos;
    double llm;
  };
  std::vector<Item> scored;
  std::vector<std::size_t> unscored;
  for (std::size_t i = 0; i < head; ++i) {
    auto it = scores.find(stage1[i].id);
    if (it != scores.end()) {
      scored.push_back({i, it->second});
    } else {
      unscored.push_back(i);
    }
  }
  std::sort(scored.begin(), scored.end(), [&](const Item& a, const Item& b) {
    if (a.llm != b.llm) return a.llm > b.llm;
    const auto& sa = stage1[a.stage1_pos];
    const auto& sb = stage1[b.stage1_pos];
    if (sa.score != sb.score) return sa.score > sb.score;
    return sa.id < sb.id;
  });

  std::vector<ScoredId> entries;
  entries.reserve(stage1.size());
  for (const auto& item : scored) entries.push_back({stage1[item.stage1_pos].id, item.llm});
  for (std::size_t i : unscored) entries.push_back({stage1[i].id, 0.0});
  for (std::size_t i = head; i < stage1.size(); ++i) entries.push_back({stage1[i].id, 0.0});

  if (!unscored.empty()) {
    warnings.push_back(std::to_string(unscored.size()) +
                       " candidate(s) received no reranker score and follow in stage-1 order");
  }
  if (stage1.size() > head) {
    warnings.push_back(std::to_string(stage1.size() - head) +
                       " candidate(s) beyond candidates_k were not sent to the reranker");
  }

  RerankOutcome out;
  out.list = RankedList::from_ordered(std::move(entries));
  out.used_llm = true;
  out.per_id_scores = std::move(scores);
  out.warnings = std::move(warnings);
  return out;
}

}  // namespace gxs
