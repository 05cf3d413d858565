#include "gxs/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iostream>
#include <sstream>
#include <unordered_set>

#include <yaml-cpp/yaml.h>

#include "gxs/error.hpp"
#include "gxs/http.hpp"

namespace gxs {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(WorkflowSource source) noexcept {
  switch (source) {
    case WorkflowSource::published_api: return "published_api";
    case WorkflowSource::training_repo: return "training_repo";
    case WorkflowSource::local_file: return "local_file";
  }
  return "local_file";
}

WorkflowSource workflow_source_from_string(std::string_view name) {
  if (name == "published_api") return WorkflowSource::published_api;
  if (name == "training_repo") return WorkflowSource::training_repo;
  if (name == "local_file") return WorkflowSource::local_file;
  throw Error(ErrorCode::SchemaError, "unknown workflow source: " + std::string(name));
}

std::vector<std::string> dedup_tools(std::vector<std::string> tools) {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (auto& t : tools) {
    if (t.empty()) continue;
    if (seen.insert(t).second) out.push_back(std::move(t));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Corpus

Corpus::Corpus(std::vector<Workflow> workflows) : workflows_(std::move(workflows)) {
  index_.reserve(workflows_.size());
  for (std::size_t i = 0; i < workflows_.size(); ++i) {
    auto& w = workflows_[i];
    if (w.id.empty()) throw Error(ErrorCode::SchemaError, "workflow with empty id");
    w.tools = dedup_tools(std::move(w.tools));
    if (!index_.emplace(w.id, i).second) {
      throw Error(ErrorCode::DuplicateId, "duplicate workflow id: " + w.id);
    }
  }
}

const Workflow* Corpus::find(std::string_view id) const {
  auto pos = position(id);
  return pos ? &workflows_[*pos] : nullptr;
}

std::optional<std::size_t> Corpus::position(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> Corpus::ids() const {
  std::vector<std::string> out;
  out.reserve(workflows_.size());
  for (const auto& w : workflows_) out.push_back(w.id);
  return out;
}

// ---------------------------------------------------------------------------
// .ga parsing

namespace {

std::string optional_string_field(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return {};
  if (!it->is_string()) {
    throw Error(ErrorCode::MalformedGa, std::string("\"") + key + "\" is not a string");
  }
  return it->get<std::string>();
}

// Numeric keys ascending, then any non-numeric keys lexicographically.
bool step_key_less(const std::string& a, const std::string& b) {
  auto as_number = [](const std::string& s) -> std::optional<unsigned long long> {
    unsigned long long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
    return v;
  };
  auto na = as_number(a);
  auto nb = as_number(b);
  if (na && nb) return *na != *nb ? *na < *nb : a < b;
  if (na != nb) return na.has_value();
  return a < b;
}

}  // namespace

WorkflowDraft parse_ga(std::string_view bytes) {
  json doc = json::parse(bytes.begin(), bytes.end(), nullptr, false);
  if (doc.is_discarded()) throw Error(ErrorCode::MalformedGa, "not valid JSON");
  if (!doc.is_object()) throw Error(ErrorCode::MalformedGa, "top level is not an object");

  WorkflowDraft draft;
  draft.title = optional_string_field(doc, "name");
  draft.description = optional_string_field(doc, "annotation");

  auto steps = doc.find("steps");
  if (steps == doc.end()) return draft;
  if (!steps->is_object()) throw Error(ErrorCode::MalformedGa, "\"steps\" is not a map");

  std::vector<std::string> keys;
  keys.reserve(steps->size());
  for (auto it = steps->begin(); it != steps->end(); ++it) keys.push_back(it.key());
  std::sort(keys.begin(), keys.end(), step_key_less);

  std::vector<std::string> tools;
  for (const auto& key : keys) {
    const json& step = (*steps)[key];
    if (!step.is_object()) continue;
    auto tool = step.find("tool_id");
    if (tool == step.end() || !tool->is_string()) continue;
    tools.push_back(tool->get<std::string>());
  }
  draft.tools = dedup_tools(std::move(tools));
  return draft;
}

// ---------------------------------------------------------------------------
// Galaxy API

namespace {

std::string trim_base(std::string base) {
  while (!base.empty() && base.back() == '/') base.pop_back();
  return base;
}

constexpr std::chrono::milliseconds kApiTimeout{30000};

}  // namespace

std::vector<Workflow> fetch_published(HttpTransport& http, const std::string& api_base,
                                      const FetchOptions& options) {
  if (options.page_limit < 1 || options.page_size < 1) {
    throw Error(ErrorCode::BadParam, "page_limit and page_size must be >= 1");
  }
  const std::string base = trim_base(api_base);
  std::vector<Workflow> out;
  std::unordered_set<std::string> seen;
  for (int page = 0; page < options.page_limit; ++page) {
    const std::string url = base + "/api/workflows?show_published=True&limit=" +
                            std::to_string(options.page_size) +
                            "&offset=" + std::to_string(page * options.page_size);
    HttpResponse resp = http.get(url, {{"Accept", "application/json"}}, kApiTimeout);
    if (resp.status != 200) {
      throw Error(ErrorCode::NetworkError,
                  "GET " + url + " returned HTTP " + std::to_string(resp.status));
    }
    json body = json::parse(resp.body, nullptr, false);
    if (body.is_discarded() || !body.is_array()) {
      throw Error(ErrorCode::SchemaError, "published workflow list is not a JSON array");
    }
    for (const auto& item : body) {
      if (!item.is_object() || !item.contains("id") || !item["id"].is_string() ||
          item["id"].get<std::string>().empty()) {
        throw Error(ErrorCode::SchemaError, "workflow entry without a string \"id\"");
      }
      Workflow w;
      w.id = item["id"].get<std::string>();
      if (auto it = item.find("name"); it != item.end() && it->is_string()) w.title = *it;
      if (auto it = item.find("annotation"); it != item.end() && it->is_string()) {
        w.description = *it;
      }
      w.source = WorkflowSource::published_api;
      if (seen.insert(w.id).second) out.push_back(std::move(w));
    }
    if (body.size() < static_cast<std::size_t>(options.page_size)) break;
  }
  return out;
}

std::string download_ga(HttpTransport& http, const std::string& api_base, const std::string& id) {
  const std::string url =
      trim_base(api_base) + "/api/workflows/" + id + "/download?format=json-download";
  HttpResponse resp = http.get(url, {{"Accept", "application/json"}}, kApiTimeout);
  if (resp.status != 200) {
    throw Error(ErrorCode::NetworkError,
                "GET " + url + " returned HTTP " + std::to_string(resp.status));
  }
  return resp.body;
}

// ---------------------------------------------------------------------------
// Training repository

std::string data_library_description(std::string_view yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml_text));
  } catch (const YAML::Exception&) {
    return {};
  }
  auto description_of = [](const YAML::Node& node) -> std::string {
    if (!node.IsMap()) return {};
    const YAML::Node d = node["description"];
    if (d && d.IsScalar()) return d.as<std::string>();
    return {};
  };
  if (!root.IsMap()) return {};

  // Tutorial-level entry (items[].items[]) wins over the topic-level entry
  // (items[]), which wins over a bare top-level description.
  const YAML::Node items = root["items"];
  if (items && items.IsSequence()) {
    std::string topic_level;
    for (const auto& topic : items) {
      const YAML::Node inner = topic.IsMap() ? topic["items"] : YAML::Node();
      if (inner && inner.IsSequence()) {
        for (const auto& tutorial : inner) {
          std::string d = description_of(tutorial);
          if (!d.empty()) return d;
        }
      }
      if (topic_level.empty()) topic_level = description_of(topic);
    }
    if (!topic_level.empty()) return topic_level;
  }
  return description_of(root);
}

namespace {

std::optional<std::string> find_description(const fs::path& ga_file, const fs::path& stop_dir) {
  std::error_code ec;
  for (fs::path dir = ga_file.parent_path();; dir = dir.parent_path()) {
    const fs::path candidate = dir / "data-library.yml";
    if (fs::is_regular_file(candidate, ec)) {
      try {
        return data_library_description(read_file(candidate));
      } catch (const Error&) {
        return std::nullopt;
      }
    }
    if (dir == stop_dir || !dir.has_parent_path() || dir == dir.parent_path()) break;
    if (dir.lexically_relative(stop_dir).string().rfind("..", 0) == 0) break;
  }
  return std::nullopt;
}

std::vector<fs::path> sorted_ga_files(const fs::path& root) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) {
    throw Error(ErrorCode::IoError, "not a readable directory: " + root.string());
  }
  std::vector<fs::path> files;
  fs::recursive_directory_iterator it(root, fs::directory_options::skip_permission_denied, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot read " + root.string() + ": " + ec.message());
  for (; it != fs::recursive_directory_iterator(); it.increment(ec)) {
    if (ec) throw Error(ErrorCode::IoError, "cannot read " + root.string() + ": " + ec.message());
    if (it->is_regular_file(ec) && it->path().extension() == ".ga") files.push_back(it->path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

void note_skip(IngestStats* stats, const fs::path& p, const std::string& why) {
  std::clog << "skip " << p.string() << ": " << why << '\n';
  if (stats != nullptr) {
    ++stats->skipped;
    stats->skipped_paths.push_back(p.string());
  }
}

}  // namespace

std::vector<Workflow> ingest_training_dir(const fs::path& root, IngestStats* stats) {
  std::vector<Workflow> out;
  for (const fs::path& file : sorted_ga_files(root)) {
    const fs::path rel = file.lexically_relative(root);
    std::vector<fs::path> parts(rel.begin(), rel.end());
    if (parts.size() < 2) {
      note_skip(stats, file, "not inside a topic folder");
      continue;
    }
    WorkflowDraft draft;
    try {
      draft = parse_ga(read_file(file));
    } catch (const Error& e) {
      note_skip(stats, file, e.what());
      continue;
    }
    const fs::path tutorial_dir = parts.size() >= 3 ? root / parts[0] / parts[1] : root / parts[0];
    Workflow w;
    w.id = rel.generic_string();
    w.title = std::move(draft.title);
    w.description = find_description(file, tutorial_dir).value_or("");
    w.tools = std::move(draft.tools);
    w.topic = parts[0].string();
    w.source = WorkflowSource::training_repo;
    w.ga_path = fs::absolute(file).lexically_normal().string();
    out.push_back(std::move(w));
    if (stats != nullptr) ++stats->parsed;
  }
  return out;
}

std::vector<Workflow> ingest_ga_dir(const fs::path& dir, IngestStats* stats) {
  std::vector<Workflow> out;
  for (const fs::path& file : sorted_ga_files(dir)) {
    WorkflowDraft draft;
    try {
      draft = parse_ga(read_file(file));
    } catch (const Error& e) {
      note_skip(stats, file, e.what());
      continue;
    }
    Workflow w;
    w.id = file.lexically_relative(dir).generic_string();
    w.title = std::move(draft.title);
    w.description = std::move(draft.description);
    w.tools = std::move(draft.tools);
    w.source = WorkflowSource::local_file;
    w.ga_path = fs::absolute(file).lexically_normal().string();
    out.push_back(std::move(w));
    if (stats != nullptr) ++stats->parsed;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Persistence

namespace {

ordered_json optional_to_json(const std::optional<std::string>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

std::string require_string(const json& j, const char* key, bool required) {
  auto it = j.find(key);
  if (it == j.end()) {
    if (required) throw Error(ErrorCode::SchemaError, std::string("missing \"") + key + "\"");
    return {};
  }
  if (!it->is_string()) {
    throw Error(ErrorCode::SchemaError, std::string("\"") + key + "\" must be a string");
  }
  return it->get<std::string>();
}

std::optional<std::string> nullable_string(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) {
    throw Error(ErrorCode::SchemaError, std::string("\"") + key + "\" must be a string or null");
  }
  return it->get<std::string>();
}

std::vector<std::string> string_array(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) return {};
  if (!it->is_array()) {
    throw Error(ErrorCode::SchemaError, std::string("\"") + key + "\" must be an array");
  }
  std::vector<std::string> out;
  for (const auto& v : *it) {
    if (!v.is_string()) {
      throw Error(ErrorCode::SchemaError, std::string("\"") + key + "\" must hold strings");
    }
    out.push_back(v.get<std::string>());
  }
  return out;
}

json parse_json_file(const fs::path& path) {
  const std::string text = read_file(path);
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::SchemaError, path.string() + " is not valid JSON");
  return j;
}

}  // namespace

ordered_json workflow_to_json(const Workflow& w) {
  ordered_json j;
  j["id"] = w.id;
  j["title"] = w.title;
  j["description"] = w.description;
  j["tools"] = w.tools;
  j["topic"] = optional_to_json(w.topic);
  j["source"] = std::string(to_string(w.source));
  j["ga_path"] = optional_to_json(w.ga_path);
  return j;
}

Workflow workflow_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::SchemaError, "workflow entry is not an object");
  Workflow w;
  w.id = require_string(j, "id", true);
  w.title = require_string(j, "title", false);
  w.description = require_string(j, "description", false);
  w.tools = string_array(j, "tools");
  w.topic = nullable_string(j, "topic");
  if (auto src = nullable_string(j, "source")) w.source = workflow_source_from_string(*src);
  w.ga_path = nullable_string(j, "ga_path");
  return w;
}

ordered_json corpus_to_json(const Corpus& corpus) {
  ordered_json arr = ordered_json::array();
  for (const auto& w : corpus.workflows()) arr.push_back(workflow_to_json(w));
  ordered_json j;
  j["workflows"] = std::move(arr);
  return j;
}

Corpus corpus_from_json(const json& j) {
  if (!j.is_object() || !j.contains("workflows") || !j["workflows"].is_array()) {
    throw Error(ErrorCode::SchemaError, "corpus must be an object with a \"workflows\" array");
  }
  std::vector<Workflow> workflows;
  workflows.reserve(j["workflows"].size());
  for (const auto& item : j["workflows"]) workflows.push_back(workflow_from_json(item));
  return Corpus(std::move(workflows));
}

void save_corpus(const Corpus& corpus, const fs::path& path) {
  write_file(path, corpus_to_json(corpus).dump(2) + "\n");
}

Corpus load_corpus(const fs::path& path) { return corpus_from_json(parse_json_file(path)); }

ordered_json query_to_json(const QueryRecord& q) {
  ordered_json j;
  j["query_id"] = q.query_id;
  j["text"] = q.text;
  j["topic"] = optional_to_json(q.topic);
  j["seed_ids"] = std::vector<std::string>(q.seed_ids.begin(), q.seed_ids.end());
  j["gold_workflow_ids"] =
      std::vector<std::string>(q.gold_workflow_ids.begin(), q.gold_workflow_ids.end());
  if (!q.provenance.empty()) j["provenance"] = ordered_json::parse(q.provenance.dump());
  return j;
}

QueryRecord query_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::SchemaError, "query record is not an object");
  QueryRecord q;
  q.query_id = require_string(j, "query_id", true);
  q.text = require_string(j, "text", true);
  if (q.text.empty()) throw Error(ErrorCode::SchemaError, "query text is empty: " + q.query_id);
  q.topic = nullable_string(j, "topic");
  for (auto& s : string_array(j, "seed_ids")) q.seed_ids.insert(std::move(s));
  for (auto& s : string_array(j, "gold_workflow_ids")) q.gold_workflow_ids.insert(std::move(s));
  if (auto it = j.find("provenance"); it != j.end() && it->is_object()) q.provenance = *it;
  return q;
}

void save_queries(const std::vector<QueryRecord>& queries, const fs::path& path) {
  std::string out;
  for (const auto& q : queries) {
    out += query_to_json(q).dump();
    out += '\n';
  }
  write_file(path, out);
}

std::vector<QueryRecord> load_queries(const fs::path& path) {
  std::istringstream in(read_file(path));
  std::vector<QueryRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      throw Error(ErrorCode::SchemaError,
                  path.string() + ":" + std::to_string(lineno) + " is not valid JSON");
    }
    out.push_back(query_from_json(j));
  }
  return out;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  return ss.str();
}

void write_file(const fs::path& path, std::string_view content) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot replace " + path.string() + ": " + ec.message());
}

}  // namespace gxs
