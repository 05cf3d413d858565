#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

namespace gxs {

class HttpTransport;

enum class WorkflowSource { published_api, training_repo, local_file };

std::string_view to_string(WorkflowSource source) noexcept;
WorkflowSource workflow_source_from_string(std::string_view name);

struct Workflow {
  std::string id;
  std::string title;
  std::string description;
  std::vector<std::string> tools;
  std::optional<std::string> topic;
  WorkflowSource source = WorkflowSource::local_file;
  std::optional<std::string> ga_path;

  bool operator==(const Workflow&) const = default;
};

/// Drops empty entries and later duplicates, keeping first-occurrence order.
std::vector<std::string> dedup_tools(std::vector<std::string> tools);

/// Ordered, id-indexed collection of workflows. Immutable once built; safe to
/// share between concurrent readers.
class Corpus {
 public:
  Corpus() = default;
  /// Throws DuplicateId or SchemaError (empty id).
  explicit Corpus(std::vector<Workflow> workflows);

  const std::vector<Workflow>& workflows() const noexcept { return workflows_; }
  std::size_t size() const noexcept { return workflows_.size(); }
  bool empty() const noexcept { return workflows_.empty(); }

  const Workflow& operator[](std::size_t pos) const { return workflows_[pos]; }
  const Workflow* find(std::string_view id) const;
  std::optional<std::size_t> position(std::string_view id) const;
  bool contains(std::string_view id) const { return position(id).has_value(); }

  std::vector<std::string> ids() const;

  bool operator==(const Corpus& other) const { return workflows_ == other.workflows_; }

 private:
  std::vector<Workflow> workflows_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct QueryRecord {
  std::string query_id;
  std::string text;
  std::optional<std::string> topic;
  std::set<std::string> seed_ids;
  std::set<std::string> gold_workflow_ids;
  /// Generation provenance (mode, model, seed, thresholds); free-form object.
  nlohmann::json provenance = nlohmann::json::object();

  bool operator==(const QueryRecord&) const = default;
};

struct WorkflowDraft {
  std::string title;
  std::string description;
  std::vector<std::string> tools;
};

/// Extracts name/annotation/step tool ids from a Galaxy `.ga` document.
/// Total over arbitrary bytes: returns a draft or throws MalformedGa.
WorkflowDraft parse_ga(std::string_view bytes);

struct FetchOptions {
  int page_limit = 10;
  int page_size = 100;
};

/// Pages through `<api_base>/api/workflows?show_published=True`.
std::vector<Workflow> fetch_published(HttpTransport& http, const std::string& api_base,
                                      const FetchOptions& options = {});

/// Raw `.ga` bytes from `<api_base>/api/workflows/<id>/download?format=json-download`.
std::string download_ga(HttpTransport& http, const std::string& api_base, const std::string& id);

struct IngestStats {
  std::size_t parsed = 0;
  std::size_t skipped = 0;
  std::vector<std::string> skipped_paths;
};

/// Walks `<root>/<topic>/<tutorial>/.../*.ga`. The description comes from the
/// nearest `data-library.yml` between the `.ga` file and its tutorial folder.
std::vector<Workflow> ingest_training_dir(const std::filesystem::path& root,
                                          IngestStats* stats = nullptr);

/// Parses every `*.ga` under `dir` (recursive) into local_file workflows.
std::vector<Workflow> ingest_ga_dir(const std::filesystem::path& dir,
                                    IngestStats* stats = nullptr);

/// Description lookup used by ingest_training_dir, exposed for tests.
std::string data_library_description(std::string_view yaml_text);

nlohmann::ordered_json workflow_to_json(const Workflow& w);
Workflow workflow_from_json(const nlohmann::json& j);

nlohmann::ordered_json corpus_to_json(const Corpus& corpus);
Corpus corpus_from_json(const nlohmann::json& j);

void save_corpus(const Corpus& corpus, const std::filesystem::path& path);
Corpus load_corpus(const std::filesystem::path& path);

nlohmann::ordered_json query_to_json(const QueryRecord& q);
QueryRecord query_from_json(const nlohmann::json& j);

/// JSON Lines, one record per line, written in the given order.
void save_queries(const std::vector<QueryRecord>& queries, const std::filesystem::path& path);
std::vector<QueryRecord> load_queries(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace gxs
