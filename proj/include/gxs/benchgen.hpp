#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "gxs/corpus.hpp"
#include "gxs/embed.hpp"
#include "gxs/textprep.hpp"

namespace gxs {

class ChatClient;
struct TfidfIndex;

struct ClusterResult {
  std::vector<std::size_t> assignments;
  std::vector<EmbeddingVector> centroids;
  /// Mean cosine to the assigned centroid after each iteration.
  std::vector<double> objective;
  std::size_t iterations = 0;
};

/// Spherical k-means with seeded k-means++ init, run `restarts` times from one
/// random stream; the run with the highest final objective wins (earliest on
/// ties). Deterministic in (vectors, k, seed). Throws TooFewPoints when
/// |vectors| < k.
ClusterResult cluster_topics(const std::vector<EmbeddingVector>& vectors, std::size_t k,
                             std::uint64_t seed, std::size_t max_iterations = 100,
                             std::size_t restarts = 10);

struct Keyword {
  std::string term;
  double weight = 0.0;

  bool operator==(const Keyword&) const = default;
};

/// Class-based tf-idf: W = tf(t, c) * ln(1 + A / f(t)), A = mean tokens per class.
/// Weights use every token; English function words are not offered as keywords.
std::vector<std::vector<Keyword>> ctfidf_keywords(const Corpus& corpus,
                                                  std::span<const std::size_t> assignments,
                                                  std::size_t k, std::size_t top_n,
                                                  const FieldConfig& cfg = {});

bool is_stopword(std::string_view token) noexcept;

struct TopicModel {
  std::size_t k = 0;
  std::uint64_t seed = 0;
  std::string provider;
  std::map<std::string, std::size_t> assignments;
  std::vector<EmbeddingVector> centroids;
  std::vector<std::vector<Keyword>> keywords;
  /// Up to three member ids per topic, closest to the centroid first.
  std::vector<std::vector<std::string>> exemplars;

  std::vector<std::string> members(std::size_t topic) const;
  std::string label(std::size_t topic) const;
};

TopicModel build_topic_model(const Corpus& corpus, Embedder& embedder, std::size_t k,
                             std::uint64_t seed, std::size_t top_n = 10,
                             const FieldConfig& cfg = {});

nlohmann::json topic_model_to_json(const TopicModel& model);
TopicModel topic_model_from_json(const nlohmann::json& j);

enum class QueryMode { llm, template_ };

std::string_view to_string(QueryMode mode) noexcept;

struct ExampleWorkflow {
  std::string title;
  std::string description;
};

struct QueryGenOptions {
  int max_reprompts = 3;
};

/// Exactly n queries. Template mode throws InsufficientKeywords with fewer
/// than two keywords; llm mode throws ClientError when the client fails or
/// cannot produce n lines after re-prompting.
std::vector<std::string> generate_queries(std::span<const std::string> keywords,
                                          std::span<const ExampleWorkflow> examples,
                                          std::size_t n, QueryMode mode,
                                          ChatClient* client = nullptr,
                                          const QueryGenOptions& options = {});

std::string build_query_prompt(std::span<const std::string> keywords,
                               std::span<const ExampleWorkflow> examples, std::size_t n);

/// Lines trimmed, list markers stripped, blanks dropped.
std::vector<std::string> parse_query_lines(std::string_view response);

struct GoldParams {
  double tau = 0.2;
  std::size_t min_keyword_overlap = 2;

  void validate() const;
};

/// seeds ∪ {w in topic members : tfidf cosine >= tau or shared tokens >= m}.
std::set<std::string> build_ground_truth(std::string_view query,
                                         const std::set<std::string>& seed_ids,
                                         std::span<const std::string> topic_member_ids,
                                         const Corpus& corpus, const TfidfIndex& tfidf,
                                         const GoldParams& params);

struct SynthesisOptions {
  std::size_t queries_per_topic = 3;
  QueryMode mode = QueryMode::template_;
  std::string model_name;
  std::uint64_t seed = 0;
};

/// One batch of queries per topic, seeded with the topic exemplars. Gold sets
/// start as the seeds; fill_gold expands them.
std::vector<QueryRecord> synthesize_queries(const Corpus& corpus, const TopicModel& model,
                                            const SynthesisOptions& options,
                                            ChatClient* client = nullptr);

void fill_gold(std::vector<QueryRecord>& queries, const Corpus& corpus, const TopicModel& model,
               const GoldParams& params, const FieldConfig& cfg = {});

}  // namespace gxs
