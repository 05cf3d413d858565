// gxsearch: command line front end for ingestion, indexing, search,
// benchmark generation, evaluation and the HTTP service.

#include <CLI11.hpp>

#include <csignal>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "gxs/benchgen.hpp"
#include "gxs/corpus.hpp"
#include "gxs/engine.hpp"
#include "gxs/error.hpp"
#include "gxs/eval.hpp"
#include "gxs/http.hpp"
#include "gxs/index_io.hpp"
#include "gxs/rerank.hpp"
#include "gxs/service.hpp"

namespace {

using nlohmann::json;

constexpr int kExitUsage = 1;
constexpr int kExitPipeline = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string dump(const json& j) { return j.dump(-1, ' ', false, json::error_handler_t::replace); }

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

gxs::Method method_arg(const std::string& name) {
  return gxs::parse_method(name);
}

std::shared_ptr<gxs::ChatClient> chat_from_env(std::shared_ptr<gxs::HttpTransport> http) {
  gxs::RerankConfig cfg = gxs::rerank_config_from_env();
  if (cfg.endpoint.empty()) return nullptr;
  return std::make_shared<gxs::RemoteChatClient>(cfg, std::move(http));
}

std::shared_ptr<gxs::Embedder> embedder_from_env(std::shared_ptr<gxs::HttpTransport> http) {
  return gxs::make_embedder(gxs::provider_config_from_env(), std::move(http));
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

json read_json(const std::string& path) {
  json j = json::parse(gxs::read_file(path), nullptr, false);
  if (j.is_discarded()) throw gxs::Error(gxs::ErrorCode::SchemaError, "not a JSON document: " + path);
  return j;
}

std::string model_dump(const gxs::TopicModel& model) {
  return dump(gxs::topic_model_to_json(model)) + "\n";
}

// ---------------------------------------------------------------------------

struct IngestArgs {
  std::string api = "https://usegalaxy.eu";
  std::string ga_dir;
  std::string ga_out;
  std::string out;
  int page_limit = 10;
  int page_size = 100;
};

int run_ingest(const IngestArgs& a) {
  std::vector<gxs::Workflow> workflows;
  if (!a.ga_dir.empty()) {
    gxs::IngestStats stats;
    workflows = gxs::ingest_ga_dir(a.ga_dir, &stats);
    std::cerr << "parsed " << stats.parsed << " .ga files, skipped " << stats.skipped << "\n";
  } else {
    auto http = std::make_shared<gxs::HttplibTransport>();
    workflows = gxs::fetch_published(*http, a.api, {a.page_limit, a.page_size});
    if (!a.ga_out.empty()) {
      std::filesystem::create_directories(a.ga_out);
      for (auto& w : workflows) {
        try {
          const auto bytes = gxs::download_ga(*http, a.api, w.id);
          const auto path = std::filesystem::absolute(std::filesystem::path(a.ga_out) / (w.id + ".ga"));
          gxs::write_file(path, bytes);
          w.ga_path = path.string();
        } catch (const gxs::Error& e) {
          std::cerr << "warning: download of " << w.id << " failed: " << e.what() << "\n";
        }
      }
    }
    std::cerr << "fetched " << workflows.size() << " published workflows\n";
  }
  gxs::save_corpus(gxs::Corpus(std::move(workflows)), a.out);
  return 0;
}

int run_ingest_training(const std::string& root, const std::string& out) {
  gxs::IngestStats stats;
  auto workflows = gxs::ingest_training_dir(root, &stats);
  std::cerr << "parsed " << stats.parsed << " workflows, skipped " << stats.skipped << "\n";
  gxs::save_corpus(gxs::Corpus(std::move(workflows)), out);
  return 0;
}

int run_index(const std::string& corpus_path, std::string out) {
  if (out.empty()) out = corpus_path + ".index.json";
  auto corpus = std::make_shared<const gxs::Corpus>(gxs::load_corpus(corpus_path));
  auto embedder = embedder_from_env(nullptr);
  gxs::EngineOptions opts;
  opts.methods = {gxs::Method::tfidf, gxs::Method::bm25, gxs::Method::dense};
  auto engine = gxs::SearchEngine::build(corpus, embedder, opts);
  gxs::IndexBundle bundle;
  bundle.tfidf = *engine->tfidf();
  bundle.bm25 = *engine->bm25();
  bundle.dense = *engine->dense();
  bundle.dense_provider = embedder->name();
  bundle.dense_fields = opts.fields;
  gxs::save_index_bundle(bundle, out);
  std::cerr << "wrote " << out << "\n";
  return 0;
}

struct SearchArgs {
  std::string corpus;
  std::string method = "tfidf";
  std::size_t k = 10;
  bool rerank = false;
  bool json_out = false;
  std::string query;
};

int run_search(const SearchArgs& a) {
  const gxs::Method method = method_arg(a.method);
  auto corpus = std::make_shared<const gxs::Corpus>(gxs::load_corpus(a.corpus));
  auto http = std::make_shared<gxs::HttplibTransport>();
  gxs::EngineOptions opts;
  opts.methods = {method};

  std::optional<gxs::IndexBundle> prebuilt;
  const std::filesystem::path sidecar = a.corpus + ".index.json";
  if (std::filesystem::exists(sidecar)) prebuilt = gxs::load_index_bundle(sidecar);
  auto engine = gxs::SearchEngine::build(corpus, embedder_from_env(http), opts,
                                         prebuilt ? &*prebuilt : nullptr);

  gxs::RerankConfig rcfg = gxs::rerank_config_from_env();
  const std::size_t depth = a.rerank ? std::max(a.k, rcfg.candidates_k) : a.k;
  gxs::RankedList list = engine->search(method, a.query, depth);
  if (a.rerank) {
    auto chat = chat_from_env(http);
    auto outcome = gxs::rerank(a.query, list, *corpus, chat.get(), rcfg);
    for (const auto& w : outcome.warnings) std::cerr << "warning: " << w << "\n";
    list = std::move(outcome.list);
  }
  list.truncate(a.k);

  std::size_t rank = 0;
  if (a.json_out) {
    for (const auto& e : list) {
      const gxs::Workflow* w = corpus->find(e.id);
      std::cout << dump({{"rank", ++rank}, {"id", e.id}, {"score", e.score},
                         {"title", w ? w->title : ""}})
                << "\n";
    }
    return 0;
  }
  std::printf("%-5s %-9s %-40s %s\n", "rank", "score", "id", "title");
  for (const auto& e : list) {
    const gxs::Workflow* w = corpus->find(e.id);
    std::printf("%-5zu %-9s %-40s %s\n", ++rank, fixed(e.score, 4).c_str(), e.id.c_str(),
                w ? w->title.c_str() : "");
  }
  return 0;
}

struct ClusterArgs {
  std::string corpus;
  std::string out;
  std::size_t topics = 70;
  std::uint64_t seed = 0;
  std::size_t top_n = 10;
};

int run_cluster(const ClusterArgs& a) {
  const gxs::Corpus corpus = gxs::load_corpus(a.corpus);
  auto embedder = embedder_from_env(nullptr);
  const gxs::TopicModel model = gxs::build_topic_model(corpus, *embedder, a.topics, a.seed, a.top_n);
  gxs::write_file(a.out, model_dump(model));
  std::cerr << "clustered " << corpus.size() << " workflows into " << model.k << " topics\n";
  return 0;
}

struct GenArgs {
  std::string corpus;
  std::string topic_model;
  std::string out;
  std::string mode = "template";
  std::size_t n = 3;
  std::uint64_t seed = 0;
};

int run_genqueries(const GenArgs& a) {
  const gxs::Corpus corpus = gxs::load_corpus(a.corpus);
  const auto model = gxs::topic_model_from_json(read_json(a.topic_model));
  gxs::SynthesisOptions opts;
  opts.queries_per_topic = a.n;
  opts.mode = a.mode == "llm" ? gxs::QueryMode::llm : gxs::QueryMode::template_;
  opts.seed = a.seed;
  std::shared_ptr<gxs::ChatClient> chat;
  if (opts.mode == gxs::QueryMode::llm) {
    chat = chat_from_env(std::make_shared<gxs::HttplibTransport>());
    if (!chat) throw UsageError("llm mode needs RERANK_API_URL (chat endpoint) to be set");
    opts.model_name = gxs::rerank_config_from_env().model_name;
  }
  const auto queries = gxs::synthesize_queries(corpus, model, opts, chat.get());
  gxs::save_queries(queries, a.out);
  std::cerr << "wrote " << queries.size() << " queries\n";
  return 0;
}

struct GoldArgs {
  std::string corpus;
  std::string topic_model;
  std::string queries;
  std::string out;
  double tau = 0.2;
  std::size_t min_overlap = 2;
};

int run_goldgen(const GoldArgs& a) {
  const gxs::Corpus corpus = gxs::load_corpus(a.corpus);
  const auto model = gxs::topic_model_from_json(read_json(a.topic_model));
  auto queries = gxs::load_queries(a.queries);
  gxs::fill_gold(queries, corpus, model, {a.tau, a.min_overlap});
  gxs::save_queries(queries, a.out.empty() ? a.queries : a.out);
  return 0;
}

struct EvalArgs {
  std::string corpus;
  std::string queries;
  std::string methods = "tfidf,bm25,fuzzy,dense";
  std::string out;
  std::size_t depth = 50;
  bool rerank = false;
  bool no_latency = false;
  bool json_out = false;
};

int run_eval(const EvalArgs& a) {
  std::vector<gxs::Method> methods;
  for (const auto& name : split_commas(a.methods)) methods.push_back(method_arg(name));
  if (methods.empty()) throw UsageError("--methods lists no method");

  auto corpus = std::make_shared<const gxs::Corpus>(gxs::load_corpus(a.corpus));
  const auto queries = gxs::load_queries(a.queries);
  auto http = std::make_shared<gxs::HttplibTransport>();
  gxs::EngineOptions opts;
  opts.methods.insert(methods.begin(), methods.end());
  auto engine = gxs::SearchEngine::build(corpus, embedder_from_env(http), opts);

  gxs::EvalOptions eval_opts;
  eval_opts.corpus = corpus.get();
  const std::size_t depth = std::max(a.depth, eval_opts.recall_k);
  gxs::RerankConfig rcfg = gxs::rerank_config_from_env();
  auto chat = a.rerank ? chat_from_env(http) : nullptr;

  std::vector<gxs::RunRecord> runs;
  for (const auto& q : queries) {
    for (gxs::Method m : methods) {
      auto [list, ms] = gxs::timed_search([&] { return engine->search(m, q.text, depth); });
      runs.push_back({q.query_id, std::string(gxs::to_string(m)), list.ids(), a.no_latency ? 0.0 : ms});
      if (a.rerank) {
        auto [outcome, rms] = gxs::timed_search(
            [&] { return gxs::rerank(q.text, list, *corpus, chat.get(), rcfg); });
        runs.push_back({q.query_id, std::string(gxs::to_string(m)) + "+rerank", outcome.list.ids(),
                        a.no_latency ? 0.0 : ms + rms});
      }
    }
  }

  const gxs::EvalReport report = gxs::evaluate(runs, queries, eval_opts);
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
  const std::string text = a.json_out ? dump(gxs::to_json(report)) + "\n" : gxs::to_csv(report);
  if (a.out.empty()) {
    std::cout << text;
  } else {
    gxs::write_file(a.out, text);
  }
  return 0;
}

struct ServeArgs {
  std::string config;
  std::string corpus;
  std::string listen;
  std::string ui_dir;
};

int run_serve(const ServeArgs& a) {
  std::optional<std::filesystem::path> cfg_path;
  if (!a.config.empty()) cfg_path = a.config;
  gxs::ServiceConfig cfg = gxs::load_service_config(cfg_path);
  if (!a.corpus.empty()) cfg.corpus_path = a.corpus;
  if (!a.listen.empty()) {
    const auto colon = a.listen.rfind(':');
    if (colon == std::string::npos) throw UsageError("--listen expects host:port");
    cfg.host = a.listen.substr(0, colon);
    cfg.port = std::stoi(a.listen.substr(colon + 1));
  }
  if (!a.ui_dir.empty()) cfg.ui_dir = a.ui_dir;
  if (cfg.corpus_path.empty()) throw UsageError("no corpus configured (--corpus or CORPUS_PATH)");

  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  gxs::SearchService service(cfg);
  const int port = service.bind();
  std::cerr << "listening on " << cfg.host << ":" << port << "\n";
  service.start_background_build();

  std::thread([&service, signals] {
    int sig = 0;
    sigwait(&signals, &sig);
    service.stop();
  }).detach();
  service.serve();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Galaxy workflow search: ingestion, retrieval, benchmarks and evaluation"};
  app.require_subcommand(1);

  IngestArgs ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Fetch published workflows or parse a .ga directory");
  c_ingest->add_option("--api", ingest.api, "Galaxy server base URL")->capture_default_str();
  c_ingest->add_option("--ga-dir", ingest.ga_dir, "Parse local .ga files instead of the API");
  c_ingest->add_option("--ga-out", ingest.ga_out, "Download each workflow's .ga file here");
  c_ingest->add_option("--page-limit", ingest.page_limit, "Maximum pages to fetch")->capture_default_str();
  c_ingest->add_option("--page-size", ingest.page_size, "Workflows per page")->capture_default_str();
  c_ingest->add_option("--out", ingest.out, "Corpus file to write")->required();

  std::string training_root, training_out;
  auto* c_training = app.add_subcommand("ingest-training", "Parse a training-material checkout");
  c_training->add_option("--root", training_root, "Path to the topics/ directory")->required();
  c_training->add_option("--out", training_out, "Corpus file to write")->required();

  std::string index_corpus, index_out;
  auto* c_index = app.add_subcommand("index", "Precompute lexical and dense indexes");
  c_index->add_option("--corpus", index_corpus, "Corpus file")->required();
  c_index->add_option("--out", index_out, "Index file (default: <corpus>.index.json)");

  SearchArgs search;
  auto* c_search = app.add_subcommand("search", "Search the corpus");
  c_search->add_option("--corpus", search.corpus, "Corpus file (or CORPUS_PATH)")->envname("CORPUS_PATH")->required();
  c_search->add_option("--method", search.method, "tfidf|bm25|fuzzy|dense|multivector|late_maxsim|late_pooled")
      ->capture_default_str();
  c_search->add_option("--k", search.k, "Number of results")->capture_default_str()->check(CLI::PositiveNumber);
  c_search->add_flag("--rerank", search.rerank, "Rerank candidates with the configured LLM");
  c_search->add_flag("--json", search.json_out, "One JSON object per result line");
  c_search->add_option("query", search.query, "Query text")->required();

  ClusterArgs cluster;
  auto* c_cluster = app.add_subcommand("cluster", "Cluster workflows into topics");
  c_cluster->add_option("--corpus", cluster.corpus, "Corpus file")->required();
  c_cluster->add_option("--topics", cluster.topics, "Number of topics")->capture_default_str()->check(CLI::PositiveNumber);
  c_cluster->add_option("--seed", cluster.seed, "Random seed")->capture_default_str();
  c_cluster->add_option("--top-n", cluster.top_n, "Keywords per topic")->capture_default_str();
  c_cluster->add_option("--out", cluster.out, "Topic model file to write")->required();

  GenArgs gen;
  auto* c_gen = app.add_subcommand("genqueries", "Synthesize benchmark queries per topic");
  c_gen->add_option("--corpus", gen.corpus, "Corpus file")->required();
  c_gen->add_option("--topic-model", gen.topic_model, "Topic model from `cluster`")->required();
  c_gen->add_option("--mode", gen.mode, "llm|template")->capture_default_str()
      ->check(CLI::IsMember({"llm", "template"}));
  c_gen->add_option("--n", gen.n, "Queries per topic")->capture_default_str()->check(CLI::PositiveNumber);
  c_gen->add_option("--seed", gen.seed, "Seed recorded in provenance")->capture_default_str();
  c_gen->add_option("--out", gen.out, "Queries JSONL to write")->required();

  GoldArgs gold;
  auto* c_gold = app.add_subcommand("goldgen", "Expand gold sets by tf-idf and keyword overlap");
  c_gold->add_option("--corpus", gold.corpus, "Corpus file")->required();
  c_gold->add_option("--topic-model", gold.topic_model, "Topic model from `cluster`")->required();
  c_gold->add_option("--queries", gold.queries, "Queries JSONL")->required();
  c_gold->add_option("--tau", gold.tau, "Tf-idf cosine threshold")->capture_default_str();
  c_gold->add_option("--min-overlap", gold.min_overlap, "Shared-token threshold")->capture_default_str();
  c_gold->add_option("--out", gold.out, "Output JSONL (default: rewrite --queries)");

  EvalArgs ev;
  auto* c_eval = app.add_subcommand("eval", "Evaluate retrieval methods against a query set");
  c_eval->add_option("--corpus", ev.corpus, "Corpus file")->required();
  c_eval->add_option("--queries", ev.queries, "Queries JSONL with gold sets")->required();
  c_eval->add_option("--methods", ev.methods, "Comma-separated methods")->capture_default_str();
  c_eval->add_option("--k", ev.depth, "Retrieval depth per query (at least 50)")->capture_default_str();
  c_eval->add_flag("--rerank", ev.rerank, "Also evaluate <method>+rerank runs");
  c_eval->add_flag("--no-latency", ev.no_latency, "Report latency as 0 for reproducible output");
  c_eval->add_flag("--json", ev.json_out, "Write JSON instead of CSV");
  c_eval->add_option("--out", ev.out, "Report file (default: stdout)");

  ServeArgs serve;
  auto* c_serve = app.add_subcommand("serve", "Run the HTTP search service");
  c_serve->add_option("--config", serve.config, "JSON config file");
  c_serve->add_option("--corpus", serve.corpus, "Corpus file (overrides config)");
  c_serve->add_option("--listen", serve.listen, "host:port (overrides config)");
  c_serve->add_option("--ui-dir", serve.ui_dir, "Static UI directory to mount at /");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*c_ingest) return run_ingest(ingest);
    if (*c_training) return run_ingest_training(training_root, training_out);
    if (*c_index) return run_index(index_corpus, index_out);
    if (*c_search) return run_search(search);
    if (*c_cluster) return run_cluster(cluster);
    if (*c_gen) return run_genqueries(gen);
    if (*c_gold) return run_goldgen(gold);
    if (*c_eval) return run_eval(ev);
    if (*c_serve) return run_serve(serve);
  } catch (const UsageError& e) {
    std::cerr << "error: usage: " << e.what() << "\n";
    return kExitUsage;
  } catch (const gxs::Error& e) {
    std::cerr << "error: " << gxs::error_code_name(e.code()) << ": " << e.what() << "\n";
    const bool user_fault = e.code() == gxs::ErrorCode::BadParam || e.code() == gxs::ErrorCode::UnknownMethod;
    return user_fault ? kExitUsage : kExitPipeline;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
    return kExitPipeline;
  }
  return kExitUsage;
}
