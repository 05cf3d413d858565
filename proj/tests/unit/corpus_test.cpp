#include <gtest/gtest.h>

#include <random>

#include "gxs/corpus.hpp"
#include "gxs/error.hpp"
#include "test_support.hpp"

namespace gxs {
namespace {

using testing::MockHttp;
using testing::RecordedRequest;
using testing::TempDir;

template <class Fn>
ErrorCode code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected gxs::Error";
  return ErrorCode::NotFound;
}

TEST(ParseGa, Examples) {
  auto d = parse_ga(
      R"({"name":"WF1","annotation":"demo","steps":{"0":{"tool_id":"hisat2"},"1":{"tool_id":"featurecounts"}}})");
  EXPECT_EQ(d.title, "WF1");
  EXPECT_EQ(d.description, "demo");
  EXPECT_EQ(d.tools, (std::vector<std::string>{"hisat2", "featurecounts"}));

  d = parse_ga(R"({"name":"X","steps":{}})");
  EXPECT_EQ(d.title, "X");
  EXPECT_EQ(d.description, "");
  EXPECT_TRUE(d.tools.empty());

  d = parse_ga(R"({"name":"Y","steps":{"0":{"tool_id":"t"},"1":{"tool_id":"t"},"2":{}}})");
  EXPECT_EQ(d.title, "Y");
  EXPECT_EQ(d.tools, (std::vector<std::string>{"t"}));
}

TEST(ParseGa, NumericStepOrderAndNullTools) {
  auto d = parse_ga(
      R"({"steps":{"10":{"tool_id":"c"},"2":{"tool_id":"b"},"0":{"tool_id":null},"1":{"tool_id":"a"}}})");
  EXPECT_EQ(d.tools, (std::vector<std::string>{"a", "b", "c"}));
}

TEST(ParseGa, Malformed) {
  EXPECT_EQ(code_of([] { parse_ga("not json"); }), ErrorCode::MalformedGa);
  EXPECT_EQ(code_of([] { parse_ga(R"({"steps":[]})"); }), ErrorCode::MalformedGa);
  EXPECT_EQ(code_of([] { parse_ga("[1,2]"); }), ErrorCode::MalformedGa);
  EXPECT_EQ(code_of([] { parse_ga(""); }), ErrorCode::MalformedGa);
}

TEST(ParseGa, TotalOverArbitraryBytes) {
  std::mt19937_64 rng(5);
  const std::string seed =
      R"({"name":"WF","annotation":"a","steps":{"0":{"tool_id":"x"},"1":{"tool_id":"y"}}})";
  std::uniform_int_distribution<int> byte(0, 255);
  for (int i = 0; i < 3000; ++i) {
    std::string s = seed;
    const int edits = 1 + i % 6;
    for (int e = 0; e < edits; ++e) {
      std::uniform_int_distribution<std::size_t> pos(0, s.size());
      const std::size_t p = pos(rng);
      switch (rng() % 3) {
        case 0:
          if (p < s.size()) s[p] = static_cast<char>(byte(rng));
          break;
        case 1:
          s.insert(p, 1, static_cast<char>(byte(rng)));
          break;
        default:
          if (p < s.size()) s.erase(p, 1);
      }
    }
    try {
      (void)parse_ga(s);
    } catch (const Error& e) {
      ASSERT_EQ(e.code(), ErrorCode::MalformedGa) << s;
    }
  }
}

TEST(Corpus, DuplicateAndEmptyIds) {
  Workflow a;
  a.id = "a";
  EXPECT_EQ(code_of([&] { Corpus({a, a}); }), ErrorCode::DuplicateId);
  Workflow empty;
  EXPECT_EQ(code_of([&] { Corpus({empty}); }), ErrorCode::SchemaError);
}

TEST(Corpus, IndexIsBijection) {
  const Corpus c = testing::synthetic_corpus(50, 3);
  for (std::size_t i = 0; i < c.size(); ++i) {
    ASSERT_EQ(c.position(c[i].id), i);
    ASSERT_EQ(c.find(c[i].id), &c[i]);
  }
  EXPECT_FALSE(c.contains("nope"));
}

TEST(DedupTools, KeepsFirstDropsEmpty) {
  EXPECT_EQ(dedup_tools({"b", "", "a", "b", "c", "a"}), (std::vector<std::string>{"b", "a", "c"}));
}

Corpus three_workflows() {
  Workflow a{"a", "Title A", "desc", {"t1", "t2"}, "topic", WorkflowSource::published_api, "x.ga"};
  Workflow b{"b", "Title B", "", {}, std::nullopt, WorkflowSource::training_repo, std::nullopt};
  Workflow c{"c", "Café", "unicode 中", {"t"}, "t", WorkflowSource::local_file, "/abs/c.ga"};
  return Corpus({a, b, c});
}

TEST(CorpusIo, RoundTrip) {
  TempDir dir;
  const Corpus c = three_workflows();
  save_corpus(c, dir / "c.json");
  EXPECT_EQ(load_corpus(dir / "c.json"), c);
}

TEST(CorpusIo, RoundTripSynthetic) {
  TempDir dir;
  const Corpus c = testing::synthetic_corpus(200, 9);
  save_corpus(c, dir / "c.json");
  EXPECT_EQ(load_corpus(dir / "c.json"), c);
}

TEST(CorpusIo, Errors) {
  TempDir dir;
  write_file(dir / "dup.json",
             R"({"workflows":[{"id":"a","title":"","description":"","tools":[],"topic":null,"source":"local_file","ga_path":null},)"
             R"({"id":"a","title":"","description":"","tools":[],"topic":null,"source":"local_file","ga_path":null}]})");
  EXPECT_EQ(code_of([&] { load_corpus(dir / "dup.json"); }), ErrorCode::DuplicateId);
  write_file(dir / "noid.json",
             R"({"workflows":[{"title":"","description":"","tools":[],"source":"local_file"}]})");
  EXPECT_EQ(code_of([&] { load_corpus(dir / "noid.json"); }), ErrorCode::SchemaError);
  write_file(dir / "bad.json", "{");
  EXPECT_EQ(code_of([&] { load_corpus(dir / "bad.json"); }), ErrorCode::SchemaError);
  EXPECT_EQ(code_of([&] { load_corpus(dir / "missing.json"); }), ErrorCode::IoError);
}

TEST(QueriesIo, RoundTrip) {
  TempDir dir;
  QueryRecord q;
  q.query_id = "q1";
  q.text = "rna seq";
  q.topic = "t";
  q.seed_ids = {"a"};
  q.gold_workflow_ids = {"a", "b"};
  q.provenance = {{"mode", "template"}};
  QueryRecord r;
  r.query_id = "q2";
  r.text = "x";
  r.seed_ids = {};
  r.gold_workflow_ids = {"c"};
  save_queries({q, r}, dir / "q.jsonl");
  const auto loaded = load_queries(dir / "q.jsonl");
  ASSERT_EQ(loaded.size(), 2u);
  EXPECT_EQ(loaded[0], q);
  EXPECT_EQ(loaded[1], r);
}

TEST(FetchPublished, MapsFieldsAndPages) {
  MockHttp http([](const RecordedRequest& req) -> HttpResponse {
    if (req.url.find("offset=0") != std::string::npos) {
      return {200, R"([{"id":"abc","name":"RNA-seq","annotation":"DESeq2 pipeline"},{"id":"def","name":"V"}])"};
    }
    return {200, "[]"};
  });
  FetchOptions opts;
  opts.page_size = 2;
  const auto wfs = fetch_published(http, "http://galaxy.test", opts);
  ASSERT_EQ(wfs.size(), 2u);
  EXPECT_EQ(wfs[0].id, "abc");
  EXPECT_EQ(wfs[0].title, "RNA-seq");
  EXPECT_EQ(wfs[0].description, "DESeq2 pipeline");
  EXPECT_EQ(wfs[0].source, WorkflowSource::published_api);
  EXPECT_EQ(wfs[1].description, "");
  EXPECT_NE(http.requests()[0].url.find("show_published=True"), std::string::npos);
}

TEST(FetchPublished, EmptyAndErrors) {
  MockHttp empty([](const RecordedRequest&) { return HttpResponse{200, "[]"}; });
  EXPECT_TRUE(fetch_published(empty, "http://g").empty());

  MockHttp fail([](const RecordedRequest&) { return HttpResponse{500, "oops"}; });
  EXPECT_EQ(code_of([&] { fetch_published(fail, "http://g"); }), ErrorCode::NetworkError);

  MockHttp schema([](const RecordedRequest&) { return HttpResponse{200, R"([{"name":"x"}])"}; });
  EXPECT_EQ(code_of([&] { fetch_published(schema, "http://g"); }), ErrorCode::SchemaError);

  MockHttp obj([](const RecordedRequest&) { return HttpResponse{200, R"({"a":1})"}; });
  EXPECT_EQ(code_of([&] { fetch_published(obj, "http://g"); }), ErrorCode::SchemaError);
}

TEST(FetchPublished, PageLimitStops) {
  MockHttp http([](const RecordedRequest& req) {
    const auto pos = req.url.find("offset=");
    const std::string off = req.url.substr(pos + 7, req.url.find('&', pos) - pos - 7);
    return HttpResponse{200, R"([{"id":"w)" + off + R"("}])"};
  });
  FetchOptions opts;
  opts.page_limit = 3;
  opts.page_size = 1;
  EXPECT_EQ(fetch_published(http, "http://g", opts).size(), 3u);
  EXPECT_EQ(http.calls(), 3u);
}

TEST(IngestTraining, PathMappingAndDescriptions) {
  TempDir root;
  const auto tut = root / "transcriptomics" / "ref-based";
  std::filesystem::create_directories(tut / "workflows");
  write_file(tut / "workflows" / "wf.ga",
             R"({"name":"Ref based","annotation":"ignored","steps":{"0":{"tool_id":"hisat2"}}})");
  write_file(tut / "data-library.yml",
             "destination:\n  type: library\n  name: GTN\nitems:\n- name: Transcriptomics\n"
             "  description: topic level\n  items:\n  - name: Reference-based RNA-Seq\n"
             "    description: tutorial level text\n");
  const auto other = root / "proteomics" / "lfq";
  std::filesystem::create_directories(other);
  write_file(other / "a.ga", R"({"name":"LFQ","steps":{}})");
  write_file(other / "broken.ga", "{nope");

  IngestStats stats;
  const auto wfs = ingest_training_dir(root.path(), &stats);
  ASSERT_EQ(wfs.size(), 2u);
  EXPECT_EQ(stats.parsed, 2u);
  EXPECT_EQ(stats.skipped, 1u);
  const Workflow* rna = nullptr;
  for (const auto& w : wfs) {
    if (w.id == "transcriptomics/ref-based/workflows/wf.ga") rna = &w;
  }
  ASSERT_NE(rna, nullptr);
  EXPECT_EQ(rna->topic, "transcriptomics");
  EXPECT_EQ(rna->description, "tutorial level text");
  EXPECT_EQ(rna->source, WorkflowSource::training_repo);
  EXPECT_EQ(rna->tools, (std::vector<std::string>{"hisat2"}));
  for (const auto& w : wfs) {
    if (w.id == "proteomics/lfq/a.ga") {
      EXPECT_EQ(w.topic, "proteomics");
      EXPECT_EQ(w.description, "");
    }
  }
}

TEST(IngestTraining, ManyTopicsCountMatches) {
  TempDir root;
  std::size_t n = 0;
  for (int t = 0; t < 27; ++t) {
    for (int f = 0; f < 3 + t % 4; ++f) {
      const auto dir = root / ("topic" + std::to_string(t)) / ("tut" + std::to_string(f));
      std::filesystem::create_directories(dir);
      write_file(dir / "w.ga", R"({"name":"n","steps":{}})");
      ++n;
    }
  }
  const auto wfs = ingest_training_dir(root.path());
  EXPECT_EQ(wfs.size(), n);
  std::set<std::string> topics;
  for (const auto& w : wfs) topics.insert(*w.topic);
  EXPECT_EQ(topics.size(), 27u);
}

TEST(IngestTraining, EmptyAndUnreadable) {
  TempDir root;
  std::filesystem::create_directories(root / "topic" / "tut");
  EXPECT_TRUE(ingest_training_dir(root.path()).empty());
  EXPECT_EQ(code_of([&] { ingest_training_dir(root / "missing"); }), ErrorCode::IoError);
}

TEST(DataLibrary, LookupOrder) {
  EXPECT_EQ(data_library_description("description: top"), "top");
  EXPECT_EQ(data_library_description("items:\n- description: topic\n"), "topic");
  EXPECT_EQ(data_library_description(": : :"), "");
  EXPECT_EQ(data_library_description(""), "");
}

TEST(IngestGaDir, FixtureFiles) {
  IngestStats stats;
  const auto wfs = ingest_ga_dir(testing::fixture_dir() / "ga", &stats);
  EXPECT_EQ(wfs.size(), 19u);
  EXPECT_EQ(stats.skipped, 0u);
  for (const auto& w : wfs) {
    EXPECT_EQ(w.source, WorkflowSource::local_file);
    EXPECT_FALSE(w.title.empty());
  }
}

}  // namespace
}  // namespace gxs
