#include "gxs/service.hpp"

#include <httplib.h>

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <semaphore>
#include <thread>

#include "gxs/corpus.hpp"
#include "gxs/error.hpp"
#include "gxs/eval.hpp"
#include "gxs/http.hpp"
#include "gxs/index_io.hpp"
#include "gxs/textprep.hpp"

namespace gxs {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Configuration

void ServiceConfig::validate() const {
  if (port < 0 || port > 65535) throw Error(ErrorCode::BadParam, "port outside [0, 65535]");
  if (default_k < 1) throw Error(ErrorCode::BadParam, "default_k must be >= 1");
  if (max_k < default_k) throw Error(ErrorCode::BadParam, "max_k must be >= default_k");
  if (rerank_in_flight < 1) throw Error(ErrorCode::BadParam, "rerank_in_flight must be >= 1");
  if (!engine.fields.valid()) throw Error(ErrorCode::BadParam, "no document field enabled");
  if (!engine.methods.empty() && !engine.methods.contains(default_method)) {
    throw Error(ErrorCode::BadParam, "default method is not among the indexed methods");
  }
  provider.validate();
  rerank.validate();
}

namespace {

std::pair<std::string, int> split_listen(const std::string& addr, const std::string& host,
                                         int port) {
  const auto colon = addr.rfind(':');
  std::string h = host;
  std::string p = addr;
  if (colon != std::string::npos) {
    h = addr.substr(0, colon);
    p = addr.substr(colon + 1);
    if (h.empty()) h = host;
  }
  if (p.empty()) return {h, port};
  char* end = nullptr;
  const long v = std::strtol(p.c_str(), &end, 10);
  if (end == p.c_str() || *end != '\0' || v < 0 || v > 65535) {
    throw Error(ErrorCode::BadParam, "invalid listen address: " + addr);
  }
  return {h, static_cast<int>(v)};
}

}  // namespace

ServiceConfig service_config_from_json(const json& j, ServiceConfig cfg) {
  if (!j.is_object()) throw Error(ErrorCode::SchemaError, "service config must be an object");
  try {
    if (j.contains("listen")) {
      std::tie(cfg.host, cfg.port) = split_listen(j["listen"].get<std::string>(), cfg.host, cfg.port);
    }
    if (j.contains("host")) cfg.host = j["host"].get<std::string>();
    if (j.contains("port")) cfg.port = j["port"].get<int>();
    if (j.contains("corpus_path")) cfg.corpus_path = j["corpus_path"].get<std::string>();
    if (j.contains("default_method")) {
      cfg.default_method = parse_method(j["default_method"].get<std::string>());
    }
    if (j.contains("default_k")) cfg.default_k = j["default_k"].get<std::size_t>();
    if (j.contains("max_k")) cfg.max_k = j["max_k"].get<std::size_t>();
    if (j.contains("rerank_enabled")) cfg.rerank_enabled = j["rerank_enabled"].get<bool>();
    if (j.contains("rerank_in_flight")) cfg.rerank_in_flight = j["rerank_in_flight"].get<std::size_t>();
    if (j.contains("cors_allowlist")) {
      cfg.cors_allowlist = j["cors_allowlist"].get<std::vector<std::string>>();
    }
    if (j.contains("admin_token")) cfg.admin_token = j["admin_token"].get<std::string>();
    if (j.contains("ui_dir") && !j["ui_dir"].is_null()) cfg.ui_dir = j["ui_dir"].get<std::string>();
    if (j.contains("request_log")) cfg.request_log = j["request_log"].get<bool>();

    if (j.contains("provider")) {
      const json& p = j["provider"];
      auto& pc = cfg.provider;
      if (p.contains("kind")) {
        const auto kind = p["kind"].get<std::string>();
        if (kind == "hash") {
          pc.kind = ProviderKind::hash;
        } else if (kind == "remote") {
          pc.kind = ProviderKind::remote;
        } else {
          throw Error(ErrorCode::SchemaError, "unknown provider kind: " + kind);
        }
      }
      if (p.contains("endpoint")) pc.endpoint = p["endpoint"].get<std::string>();
      if (p.contains("model")) pc.model_name = p["model"].get<std::string>();
      if (p.contains("api_key")) pc.api_key = p["api_key"].get<std::string>();
      if (p.contains("dim")) pc.dim = p["dim"].get<std::size_t>();
      if (p.contains("batch_size")) pc.batch_size = p["batch_size"].get<std::size_t>();
      if (p.contains("max_retries")) pc.max_retries = p["max_retries"].get<int>();
      if (p.contains("timeout_ms")) pc.timeout = std::chrono::milliseconds(p["timeout_ms"].get<long>());
      if (p.contains("max_in_flight")) pc.max_in_flight = p["max_in_flight"].get<std::size_t>();
    }
    if (j.contains("rerank")) {
      const json& r = j["rerank"];
      auto& rc = cfg.rerank;
      if (r.contains("endpoint")) rc.endpoint = r["endpoint"].get<std::string>();
      if (r.contains("model")) rc.model_name = r["model"].get<std::string>();
      if (r.contains("api_key")) rc.api_key = r["api_key"].get<std::string>();
      if (r.contains("candidates_k")) rc.candidates_k = r["candidates_k"].get<std::size_t>();
      if (r.contains("timeout_s")) rc.timeout_s = r["timeout_s"].get<double>();
      if (r.contains("prompt_char_budget")) {
        rc.prompt_char_budget = r["prompt_char_budget"].get<std::size_t>();
      }
    }
    if (j.contains("engine")) {
      const json& e = j["engine"];
      auto& ec = cfg.engine;
      if (e.contains("fields")) {
        ec.fields.use_title = e["fields"].value("title", ec.fields.use_title);
        ec.fields.use_description = e["fields"].value("description", ec.fields.use_description);
        ec.fields.use_tools = e["fields"].value("tools", ec.fields.use_tools);
      }
      if (e.contains("bm25_k1")) ec.bm25_k1 = e["bm25_k1"].get<double>();
      if (e.contains("bm25_b")) ec.bm25_b = e["bm25_b"].get<double>();
      if (e.contains("chunk_window")) ec.chunk_window = e["chunk_window"].get<std::size_t>();
      if (e.contains("chunk_stride")) ec.chunk_stride = e["chunk_stride"].get<std::size_t>();
      if (e.contains("methods")) {
        ec.methods.clear();
        for (const auto& m : e["methods"]) ec.methods.insert(parse_method(m.get<std::string>()));
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaError, std::string("invalid service config: ") + e.what());
  }
  return cfg;
}

void apply_env_overrides(ServiceConfig& cfg) {
  auto env = [](const char* name) -> const char* {
    const char* v = std::getenv(name);
    return (v != nullptr && *v != '\0') ? v : nullptr;
  };
  if (const char* v = env("LISTEN_ADDR")) std::tie(cfg.host, cfg.port) = split_listen(v, cfg.host, cfg.port);
  if (const char* v = env("CORPUS_PATH")) cfg.corpus_path = v;
  if (const char* v = env("ADMIN_TOKEN")) cfg.admin_token = v;
  cfg.provider = provider_config_from_env(cfg.provider);
  cfg.rerank = rerank_config_from_env(cfg.rerank);
}

ServiceConfig load_service_config(const std::optional<std::filesystem::path>& path) {
  ServiceConfig cfg;
  if (path) {
    const json j = json::parse(read_file(*path), nullptr, false);
    if (j.is_discarded()) throw Error(ErrorCode::SchemaError, "config is not JSON: " + path->string());
    cfg = service_config_from_json(j, cfg);
  }
  apply_env_overrides(cfg);
  cfg.validate();
  return cfg;
}

std::shared_ptr<const IndexSnapshot> build_snapshot(const ServiceConfig& cfg,
                                                    std::shared_ptr<HttpTransport> http) {
  auto corpus = std::make_shared<const Corpus>(load_corpus(cfg.corpus_path));
  auto embedder = make_embedder(cfg.provider, std::move(http));

  std::optional<IndexBundle> prebuilt;
  std::filesystem::path sidecar = cfg.corpus_path;
  sidecar += ".index.json";
  std::error_code ec;
  if (std::filesystem::exists(sidecar, ec)) {
    try {
      prebuilt = load_index_bundle(sidecar);
    } catch (const std::exception& e) {
      std::clog << "ignoring index sidecar " << sidecar << ": " << e.what() << "\n";
    }
  }

  auto snap = std::make_shared<IndexSnapshot>();
  snap->engine = SearchEngine::build(corpus, embedder, cfg.engine, prebuilt ? &*prebuilt : nullptr);
  snap->corpus_dir = std::filesystem::absolute(cfg.corpus_path).parent_path();
  return snap;
}

// ---------------------------------------------------------------------------
// Server

namespace {

thread_local std::chrono::steady_clock::time_point t_request_start;

std::string dump(const json& j) { return j.dump(-1, ' ', false, json::error_handler_t::replace); }

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(dump(body), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view code,
                const std::string& message) {
  send_json(res, status, {{"code", code}, {"message", message}});
}

std::string percent_encode(std::string_view s) {
  static const char* hex = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out += static_cast<char>(c);
    } else {
      out += '%';
      out += hex[c >> 4];
      out += hex[c & 15];
    }
  }
  return out;
}

std::string sanitize_filename(std::string_view id) {
  std::string out;
  for (unsigned char c : id) {
    out += (std::isalnum(c) || c == '.' || c == '-' || c == '_') ? static_cast<char>(c) : '_';
  }
  if (out.empty() || out.front() == '.') out.insert(out.begin(), '_');
  return out;
}

bool tokens_equal(std::string_view a, std::string_view b) {
  unsigned char diff = a.size() == b.size() ? 0 : 1;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff |= static_cast<unsigned char>(a[i] ^ (i < b.size() ? b[i] : 0));
  }
  return diff == 0;
}

std::string ga_url(const Workflow& w) {
  return "/api/workflows/" + percent_encode(w.id) + "/ga";
}

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyQuery:
    case ErrorCode::UnknownMethod:
    case ErrorCode::BadParam: return 400;
    case ErrorCode::NotFound: return 404;
    default: return 502;
  }
}

}  // namespace

struct SearchService::Impl {
  ServiceConfig cfg;
  std::shared_ptr<HttpTransport> http;
  SnapshotBuilder builder;
  std::shared_ptr<ChatClient> chat;
  std::counting_semaphore<> rerank_slots;

  httplib::Server server;
  mutable std::mutex snap_mu;
  std::shared_ptr<const IndexSnapshot> snapshot;
  std::atomic<std::size_t> corpus_size{0};
  std::atomic<bool> rebuilding{false};
  std::mutex thread_mu;
  std::thread worker;
  std::string last_build_error;

  Impl(ServiceConfig c, std::shared_ptr<HttpTransport> h, SnapshotBuilder b)
      : cfg(std::move(c)),
        http(std::move(h)),
        builder(std::move(b)),
        rerank_slots(static_cast<std::ptrdiff_t>(std::max<std::size_t>(cfg.rerank_in_flight, 1))) {}

  std::shared_ptr<const IndexSnapshot> current() const {
    std::lock_guard lock(snap_mu);
    return snapshot;
  }

  void rebuild() {
    auto snap = builder(cfg);
    if (!snap || !snap->engine) throw Error(ErrorCode::EmptyIndex, "snapshot builder returned nothing");
    const std::size_t n = snap->engine->corpus().size();
    {
      std::lock_guard lock(snap_mu);
      snapshot = std::move(snap);
      last_build_error.clear();
    }
    corpus_size = n;
  }

  // Runs a rebuild on the worker thread; the caller has already set `rebuilding`.
  void launch_rebuild() {
    std::lock_guard lock(thread_mu);
    if (worker.joinable()) worker.join();
    worker = std::thread([this] {
      try {
        rebuild();
      } catch (const std::exception& e) {
        std::clog << "index build failed: " << e.what() << "\n";
        std::lock_guard lock(snap_mu);
        last_build_error = e.what();
      }
      rebuilding = false;
    });
  }

  void handle_health(httplib::Response& res) {
    json body = {{"status", "ok"},
                 {"corpus_size", corpus_size.load()},
                 {"index_ready", current() != nullptr}};
    {
      std::lock_guard lock(snap_mu);
      if (!last_build_error.empty()) body["last_build_error"] = last_build_error;
    }
    send_json(res, 200, body);
  }

  void handle_search(const httplib::Request& req, httplib::Response& res) {
    const json body = json::parse(req.body, nullptr, false);
    if (body.is_discarded()) return send_error(res, 400, "malformed_json", "request body is not JSON");
    if (!body.is_object()) return send_error(res, 400, "bad_request", "request body must be an object");

    std::string query;
    if (body.contains("query") && !body["query"].is_null()) {
      if (!body["query"].is_string()) return send_error(res, 400, "bad_request", "query must be a string");
      query = body["query"].get<std::string>();
    }
    if (normalize(query).empty()) return send_error(res, 400, "empty_query", "query is empty");

    std::size_t k = cfg.default_k;
    if (body.contains("k") && !body["k"].is_null()) {
      const json& jk = body["k"];
      if (!jk.is_number_integer() || jk.get<long long>() < 1) {
        return send_error(res, 400, "bad_request", "k must be a positive integer");
      }
      if (jk.get<unsigned long long>() > cfg.max_k) {
        return send_error(res, 400, "bad_request", "k exceeds " + std::to_string(cfg.max_k));
      }
      k = jk.get<std::size_t>();
    }

    Method method = cfg.default_method;
    if (body.contains("method") && !body["method"].is_null()) {
      if (!body["method"].is_string()) return send_error(res, 400, "bad_request", "method must be a string");
      const auto name = body["method"].get<std::string>();
      auto m = method_from_string(name);
      if (!m) return send_error(res, 400, "unknown_method", "unknown method: " + name);
      method = *m;
    }

    bool want_rerank = false;
    if (body.contains("rerank") && !body["rerank"].is_null()) {
      if (!body["rerank"].is_boolean()) return send_error(res, 400, "bad_request", "rerank must be a boolean");
      want_rerank = body["rerank"].get<bool>();
    }

    const auto snap = current();
    if (!snap) return send_error(res, 503, "index_not_ready", "index is still being built");
    const SearchEngine& engine = *snap->engine;
    if (!engine.supports(method)) {
      return send_error(res, 400, "unknown_method",
                        "method not indexed: " + std::string(to_string(method)));
    }

    std::vector<std::string> warnings;
    const std::size_t stage1_k = want_rerank ? std::max(k, cfg.rerank.candidates_k) : k;
    RankedList list;
    double retrieval_ms = 0.0;
    try {
      std::tie(list, retrieval_ms) = timed_search([&] { return engine.search(method, query, stage1_k); });
    } catch (const Error& e) {
      return send_error(res, status_for(e.code()), error_code_name(e.code()), e.what());
    }

    json rerank_ms = nullptr;
    bool used_llm = false;
    if (want_rerank) {
      if (!cfg.rerank_enabled) {
        warnings.push_back("reranking is disabled on this server; stage-1 order kept");
      } else {
        rerank_slots.acquire();
        auto [outcome, ms] = timed_search(
            [&] { return gxs::rerank(query, list, engine.corpus(), chat.get(), cfg.rerank); });
        rerank_slots.release();
        rerank_ms = ms;
        used_llm = outcome.used_llm;
        list = std::move(outcome.list);
        for (auto& w : outcome.warnings) warnings.push_back(std::move(w));
      }
    }
    list.truncate(k);

    json results = json::array();
    std::size_t rank = 0;
    for (const auto& entry : list) {
      const Workflow* w = engine.corpus().find(entry.id);
      json r = {{"id", entry.id},
                {"title", w ? w->title : ""},
                {"description", w ? w->description : ""},
                {"score", entry.score},
                {"rank", ++rank}};
      r["ga_url"] = (w && w->ga_path) ? json(ga_url(*w)) : json(nullptr);
      results.push_back(std::move(r));
    }
    send_json(res, 200,
              {{"results", std::move(results)},
               {"timings", {{"retrieval_ms", retrieval_ms}, {"rerank_ms", rerank_ms}}},
               {"used_llm", used_llm},
               {"method", to_string(method)},
               {"warnings", warnings}});
  }

  void handle_workflow(std::string id, httplib::Response& res) {
    const auto snap = current();
    if (!snap) return send_error(res, 503, "index_not_ready", "index is still being built");
    const Workflow* w = snap->engine->corpus().find(id);
    if (w == nullptr) return send_error(res, 404, "not_found", "no workflow with id " + id);
    json doc = workflow_to_json(*w);
    doc.erase("ga_path");
    doc["ga_url"] = w->ga_path ? json(ga_url(*w)) : json(nullptr);
    send_json(res, 200, doc);
  }

  void handle_ga(const std::string& id, httplib::Response& res) {
    const auto snap = current();
    if (!snap) return send_error(res, 503, "index_not_ready", "index is still being built");
    const Corpus& corpus = snap->engine->corpus();
    const Workflow* w = corpus.find(id);
    if (w == nullptr) {
      // An id that itself ends in "/ga" asks for metadata.
      if (corpus.find(id + "/ga") != nullptr) return handle_workflow(id + "/ga", res);
      return send_error(res, 404, "not_found", "no workflow with id " + id);
    }
    if (!w->ga_path) return send_error(res, 410, "ga_unavailable", "workflow has no .ga file");
    std::filesystem::path path = *w->ga_path;
    if (path.is_relative()) path = snap->corpus_dir / path;
    std::string bytes;
    try {
      bytes = read_file(path);
    } catch (const Error&) {
      return send_error(res, 410, "ga_unavailable", ".ga file is missing on the server");
    }
    res.status = 200;
    res.set_header("Content-Disposition",
                   "attachment; filename=\"" + sanitize_filename(id) + ".ga\"");
    res.set_content(std::move(bytes), "application/json");
  }

  void handle_reindex(const httplib::Request& req, httplib::Response& res) {
    const std::string token = req.get_header_value("X-Admin-Token");
    if (cfg.admin_token.empty() || !tokens_equal(token, cfg.admin_token)) {
      return send_error(res, 401, "unauthorized", "missing or invalid admin token");
    }
    bool expected = false;
    if (!rebuilding.compare_exchange_strong(expected, true)) {
      return send_error(res, 409, "reindex_in_progress", "a rebuild is already running");
    }
    launch_rebuild();
    send_json(res, 202, {{"status", "accepted"}});
  }

  bool origin_allowed(const std::string& origin) const {
    for (const auto& allowed : cfg.cors_allowlist) {
      if (allowed == "*" || allowed == origin) return true;
    }
    return false;
  }

  void install_routes() {
    server.set_payload_max_length(1 << 20);

    server.set_pre_routing_handler([](const httplib::Request&, httplib::Response&) {
      t_request_start = std::chrono::steady_clock::now();
      return httplib::Server::HandlerResponse::Unhandled;
    });

    server.set_post_routing_handler([this](const httplib::Request& req, httplib::Response& res) {
      const std::string origin = req.get_header_value("Origin");
      if (!origin.empty() && origin_allowed(origin)) {
        res.set_header("Access-Control-Allow-Origin", origin);
        res.set_header("Vary", "Origin");
      }
    });

    server.Options(R"(/api/.*)", [this](const httplib::Request& req, httplib::Response& res) {
      const std::string origin = req.get_header_value("Origin");
      res.status = 204;
      if (!origin.empty() && origin_allowed(origin)) {
        res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type, X-Admin-Token");
        res.set_header("Access-Control-Max-Age", "600");
      }
    });

    server.Get("/health", [this](const httplib::Request&, httplib::Response& res) { handle_health(res); });
    server.Post("/api/search", [this](const httplib::Request& req, httplib::Response& res) {
      handle_search(req, res);
    });
    server.Get(R"(/api/workflows/(.+)/ga)", [this](const httplib::Request& req, httplib::Response& res) {
      handle_ga(req.matches[1].str(), res);
    });
    server.Get(R"(/api/workflows/(.+))", [this](const httplib::Request& req, httplib::Response& res) {
      handle_workflow(req.matches[1].str(), res);
    });
    server.Post("/api/reindex", [this](const httplib::Request& req, httplib::Response& res) {
      handle_reindex(req, res);
    });

    if (cfg.ui_dir) {
      if (!server.set_mount_point("/", cfg.ui_dir->string())) {
        std::clog << "ui directory not mounted: " << *cfg.ui_dir << "\n";
      }
    }

    server.set_exception_handler(
        [](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
          try {
            if (ep) std::rethrow_exception(ep);
          } catch (const Error& e) {
            return send_error(res, status_for(e.code()), error_code_name(e.code()), e.what());
          } catch (const std::exception& e) {
            return send_error(res, 500, "internal", e.what());
          } catch (...) {
          }
          send_error(res, 500, "internal", "unexpected failure");
        });

    server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
      if (!res.body.empty()) return;
      const char* code = res.status == 404 ? "not_found" : "http_error";
      send_error(res, res.status, code, httplib::status_message(res.status));
    });

    if (cfg.request_log) {
      server.set_logger([](const httplib::Request& req, const httplib::Response& res) {
        const double ms = std::chrono::duration<double, std::milli>(
                              std::chrono::steady_clock::now() - t_request_start)
                              .count();
        const json line = {{"method", req.method}, {"path", req.path}, {"status", res.status}, {"ms", ms}};
        std::clog << dump(line) << "\n";
      });
    }
  }
};

SearchService::SearchService(ServiceConfig cfg, std::shared_ptr<HttpTransport> http,
                             SnapshotBuilder builder) {
  cfg.validate();
  if (!http) http = std::make_shared<HttplibTransport>();
  if (!builder) {
    builder = [http](const ServiceConfig& c) { return build_snapshot(c, http); };
  }
  impl_ = std::make_unique<Impl>(std::move(cfg), http, std::move(builder));
  if (!impl_->cfg.rerank.endpoint.empty()) {
    impl_->chat = std::make_shared<RemoteChatClient>(impl_->cfg.rerank, http);
  }
  if (!impl_->cfg.corpus_path.empty()) {
    impl_->corpus_size = load_corpus(impl_->cfg.corpus_path).size();
  }
  impl_->install_routes();
}

SearchService::~SearchService() {
  stop();
  std::lock_guard lock(impl_->thread_mu);
  if (impl_->worker.joinable()) impl_->worker.join();
}

void SearchService::build_index() {
  impl_->rebuild();
}

void SearchService::start_background_build() {
  bool expected = false;
  if (!impl_->rebuilding.compare_exchange_strong(expected, true)) return;
  impl_->launch_rebuild();
}

bool SearchService::index_ready() const { return impl_->current() != nullptr; }

std::size_t SearchService::corpus_size() const { return impl_->corpus_size.load(); }

int SearchService::bind() {
  const auto& c = impl_->cfg;
  if (c.port == 0) {
    const int port = impl_->server.bind_to_any_port(c.host);
    if (port < 0) throw Error(ErrorCode::IoError, "cannot bind " + c.host);
    return port;
  }
  if (!impl_->server.bind_to_port(c.host, c.port)) {
    throw Error(ErrorCode::IoError, "cannot bind " + c.host + ":" + std::to_string(c.port));
  }
  return c.port;
}

void SearchService::serve() { impl_->server.listen_after_bind(); }

void SearchService::stop() {
  if (impl_->server.is_running()) impl_->server.stop();
}

void SearchService::wait_until_ready() const { impl_->server.wait_until_ready(); }

const ServiceConfig& SearchService::config() const noexcept { return impl_->cfg; }

}  // namespace gxs
