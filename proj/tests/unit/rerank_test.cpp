#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "gxs/corpus.hpp"
#include "gxs/error.hpp"
#include "gxs/rerank.hpp"
#include "test_support.hpp"

namespace gxs {
namespace {

using nlohmann::json;
using testing::MockHttp;
using testing::RecordedRequest;
using testing::ScriptedChat;

Corpus small_corpus(std::size_t n) {
  std::vector<Workflow> wfs;
  for (std::size_t i = 0; i < n; ++i) {
    Workflow w;
    w.id = "w" + std::to_string(i);
    w.title = "Title " + std::to_string(i);
    w.description = "Description of workflow " + std::to_string(i);
    wfs.push_back(w);
  }
  return Corpus(std::move(wfs));
}

RankedList stage1_of(const Corpus& c) {
  std::vector<ScoredId> e;
  for (std::size_t i = 0; i < c.size(); ++i) {
    e.push_back({c[i].id, 1.0 - static_cast<double>(i) / static_cast<double>(c.size() + 1)});
  }
  return RankedList::from_ordered(e);
}

std::string scores_json(const std::vector<std::pair<std::string, double>>& s) {
  json arr = json::array();
  for (const auto& [id, v] : s) arr.push_back({{"id", id}, {"score", v}});
  return json{{"scores", arr}}.dump();
}

std::vector<std::string> sorted_ids(const RankedList& l) {
  auto ids = l.ids();
  std::sort(ids.begin(), ids.end());
  return ids;
}

TEST(RerankPrompt, ContentAndLimits) {
  std::vector<RerankCandidate> c{{"a", "Alpha", std::string(700, 'x')}, {"b", "Beta", "short"}};
  const auto p = build_rerank_prompt("my query", c);
  EXPECT_NE(p.find("Query: my query"), std::string::npos);
  EXPECT_NE(p.find("1. [a] Alpha"), std::string::npos);
  EXPECT_NE(p.find("2. [b] Beta"), std::string::npos);
  EXPECT_NE(p.find(std::string(600, 'x') + "…"), std::string::npos);
  EXPECT_EQ(p.find(std::string(601, 'x')), std::string::npos);
  EXPECT_NE(p.find("{\"scores\""), std::string::npos);

  std::vector<RerankCandidate> many(51, RerankCandidate{"x", "", ""});
  try {
    build_rerank_prompt("q", many);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooManyCandidates);
  }
  EXPECT_THROW(build_rerank_prompt("q", std::vector<RerankCandidate>{}), Error);
}

TEST(ParseScores, StrictLenientAndClamp) {
  const std::vector<std::string> ids{"a", "b", "c"};
  auto s = parse_scores(R"({"scores":[{"id":"a","score":0.2},{"id":"b","score":1.5}]})", ids);
  EXPECT_DOUBLE_EQ(s.at("a"), 0.2);
  EXPECT_DOUBLE_EQ(s.at("b"), 1.0);

  s = parse_scores("Here you go: {\"scores\":[{\"id\":\"c\",\"score\":-2}]} thanks", ids);
  EXPECT_DOUBLE_EQ(s.at("c"), 0.0);

  s = parse_scores(R"({"scores":[{"id":"a","score":0.9},{"id":"a","score":0.1},{"id":"zz","score":1}]})",
                   ids);
  EXPECT_EQ(s.size(), 1u);
  EXPECT_DOUBLE_EQ(s.at("a"), 0.9);

  s = parse_scores(R"(garbage {"score": 0.7, "id": "b"} more {"id":"a","score":0.3)", ids);
  EXPECT_DOUBLE_EQ(s.at("b"), 0.7);

  for (const char* bad : {"", "nothing", "{}", R"({"scores":[{"id":"ghost","score":1}]})"}) {
    try {
      parse_scores(bad, ids);
      ADD_FAILURE() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::Unparseable);
    }
  }
}

TEST(Rerank, LastCandidateScoredHighestMovesFirst) {
  const Corpus c = small_corpus(5);
  const auto s1 = stage1_of(c);
  ScriptedChat chat([](std::size_t, const std::string&) {
    return scores_json({{"w0", 0.1}, {"w1", 0.2}, {"w2", 0.3}, {"w3", 0.4}, {"w4", 1.0}});
  });
  const auto out = rerank("q", s1, c, &chat, {});
  EXPECT_TRUE(out.used_llm);
  EXPECT_EQ(out.list[0].id, "w4");
  EXPECT_DOUBLE_EQ(out.list[0].score, 1.0);
  EXPECT_EQ(out.list.ids(), (std::vector<std::string>{"w4", "w3", "w2", "w1", "w0"}));
  EXPECT_TRUE(out.warnings.empty());
}

TEST(Rerank, TimeoutFallsBackWithOneWarning) {
  const Corpus c = small_corpus(5);
  const auto s1 = stage1_of(c);
  ScriptedChat chat([](std::size_t, const std::string&) -> std::string {
    throw Error(ErrorCode::NetworkError, "timed out");
  });
  const auto out = rerank("q", s1, c, &chat, {});
  EXPECT_FALSE(out.used_llm);
  EXPECT_EQ(out.list, s1);
  EXPECT_EQ(out.warnings.size(), 1u);
}

TEST(Rerank, NullClientPassthrough) {
  const Corpus c = small_corpus(3);
  const auto out = rerank("q", stage1_of(c), c, nullptr, {});
  EXPECT_FALSE(out.used_llm);
  EXPECT_EQ(out.list, stage1_of(c));
  EXPECT_EQ(out.warnings.size(), 1u);
}

TEST(Rerank, TiesBreakByStage1ThenId) {
  const Corpus c = small_corpus(4);
  const auto s1 = stage1_of(c);
  ScriptedChat chat([](std::size_t, const std::string&) {
    return scores_json({{"w3", 0.5}, {"w1", 0.5}, {"w2", 0.9}, {"w0", 0.5}});
  });
  const auto out = rerank("q", s1, c, &chat, {});
  EXPECT_EQ(out.list.ids(), (std::vector<std::string>{"w2", "w0", "w1", "w3"}));
}

TEST(Rerank, PartialScoresAndCandidateLimit) {
  const Corpus c = small_corpus(8);
  const auto s1 = stage1_of(c);
  ScriptedChat chat([](std::size_t, const std::string& prompt) {
    EXPECT_EQ(prompt.find("[w5]"), std::string::npos);
    return scores_json({{"w2", 0.8}});
  });
  RerankConfig cfg;
  cfg.candidates_k = 5;
  const auto out = rerank("q", s1, c, &chat, cfg);
  EXPECT_TRUE(out.used_llm);
  EXPECT_EQ(out.list.ids(), (std::vector<std::string>{"w2", "w0", "w1", "w3", "w4", "w5", "w6", "w7"}));
  EXPECT_EQ(out.list[1].score, 0.0);
  EXPECT_EQ(out.warnings.size(), 2u);
}

TEST(Rerank, BudgetSplitsIntoBatches) {
  const Corpus c = small_corpus(6);
  const auto s1 = stage1_of(c);
  ScriptedChat chat([](std::size_t, const std::string& prompt) {
    std::vector<std::pair<std::string, double>> s;
    for (int i = 0; i < 6; ++i) {
      const std::string id = "w" + std::to_string(i);
      if (prompt.find("[" + id + "]") != std::string::npos) s.emplace_back(id, i / 10.0);
    }
    return scores_json(s);
  });
  RerankConfig cfg;
  cfg.prompt_char_budget = 600;
  const auto out = rerank("q", s1, c, &chat, cfg);
  EXPECT_GT(chat.calls(), 1u);
  for (const auto& p : chat.prompts()) EXPECT_LE(p.size(), 600u);
  EXPECT_EQ(out.list.ids(), (std::vector<std::string>{"w5", "w4", "w3", "w2", "w1", "w0"}));
}

TEST(Rerank, AdversarialFuzzAlwaysPermutation) {
  const Corpus c = small_corpus(12);
  const auto s1 = stage1_of(c);
  const auto ids = c.ids();
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    testing::AdversarialChat chat(seed, ids);
    RerankConfig cfg;
    cfg.candidates_k = 1 + seed % 12;
    cfg.prompt_char_budget = seed % 3 == 0 ? 400 : 48000;
    RerankOutcome out;
    ASSERT_NO_THROW(out = rerank("query", s1, c, &chat, cfg)) << chat.last_kind();
    ASSERT_EQ(sorted_ids(out.list), sorted_ids(s1)) << chat.last_kind();
    ASSERT_EQ(out.list.size(), s1.size());
    if (!out.used_llm) ASSERT_EQ(out.list, s1);
    for (const auto& e : out.list) {
      ASSERT_GE(e.score, 0.0);
      ASSERT_LE(e.score, 1.0 + 1e-12);
      ASSERT_FALSE(std::isnan(e.score));
    }
  }
}

TEST(RemoteChat, WireFormatAndErrors) {
  RerankConfig cfg;
  cfg.endpoint = "http://llm.test/v1/chat/completions";
  cfg.model_name = "gpt";
  cfg.api_key = "k";
  auto http = std::make_shared<MockHttp>([](const RecordedRequest& r) {
    const json body = json::parse(r.body);
    EXPECT_EQ(body["model"], "gpt");
    EXPECT_EQ(body["messages"][0]["role"], "user");
    EXPECT_EQ(body["messages"][0]["content"], "hello");
    return HttpResponse{200, R"({"choices":[{"message":{"role":"assistant","content":"hi"}}]})"};
  });
  RemoteChatClient client(cfg, http);
  EXPECT_EQ(client.complete("hello"), "hi");

  auto expect_code = [&](HttpResponse resp, ErrorCode code) {
    auto h = std::make_shared<MockHttp>([resp](const RecordedRequest&) { return resp; });
    RemoteChatClient cl(cfg, h);
    try {
      cl.complete("x");
      ADD_FAILURE();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), code);
    }
  };
  expect_code({401, ""}, ErrorCode::AuthError);
  expect_code({500, ""}, ErrorCode::ClientError);
  expect_code({200, "{}"}, ErrorCode::SchemaError);
}

TEST(RerankConfig, Validation) {
  RerankConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.candidates_k = 0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = {};
  cfg.timeout_s = 0;
  EXPECT_THROW(cfg.validate(), Error);
}

}  // namespace
}  // namespace gxs
