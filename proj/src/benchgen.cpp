#include "gxs/benchgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <limits>
#include <random>
#include <unordered_map>
#include <unordered_set>

#include "gxs/error.hpp"
#include "gxs/lexical.hpp"
#include "gxs/rerank.hpp"

namespace gxs {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Spherical k-means

namespace {

using Matrix = std::vector<std::vector<double>>;

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Uniform in [0, 1) from the top 53 bits, independent of the standard
// library's distribution implementations.
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::vector<std::size_t> kmeanspp_init(const Matrix& x, std::size_t k, std::mt19937_64& rng) {
  const std::size_t n = x.size();
  std::vector<std::size_t> chosen;
  std::vector<bool> taken(n, false);
  std::size_t first = std::min(n - 1, static_cast<std::size_t>(uniform01(rng) * n));
  chosen.push_back(first);
  taken[first] = true;

  std::vector<double> dist(n);
  for (std::size_t i = 0; i < n; ++i) dist[i] = std::max(0.0, 1.0 - dot(x[i], x[first]));

  while (chosen.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += taken[i] ? 0.0 : dist[i];
    std::size_t pick = n;
    if (total > 0.0) {
      const double target = uniform01(rng) * total;
      double cum = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (taken[i] || dist[i] <= 0.0) continue;
        cum += dist[i];
        pick = i;
        if (cum > target) break;
      }
    }
    if (pick == n) {
      for (std::size_t i = 0; i < n; ++i) {
        if (!taken[i]) {
          pick = i;
          break;
        }
      }
    }
    chosen.push_back(pick);
    taken[pick] = true;
    for (std::size_t i = 0; i < n; ++i) {
      dist[i] = std::min(dist[i], std::max(0.0, 1.0 - dot(x[i], x[pick])));
    }
  }
  return chosen;
}

std::vector<std::size_t> assign_all(const Matrix& x, const Matrix& centroids) {
  std::vector<std::size_t> out(x.size(), 0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centroids.size(); ++c) {
      const double s = dot(x[i], centroids[c]);
      if (s > best) {
        best = s;
        out[i] = c;
      }
    }
  }
  return out;
}

Matrix recompute(const Matrix& x, std::vector<std::size_t>& assign, std::size_t k,
                 const Matrix& previous) {
  const std::size_t dim = x.front().size();
  Matrix centroids(k, std::vector<double>(dim, 0.0));
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    ++counts[assign[i]];
    for (std::size_t j = 0; j < dim; ++j) centroids[assign[i]][j] += x[i][j];
  }
  for (auto& c : centroids) l2_normalize(c);

  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] != 0) continue;
    // Farthest point from its own centroid, taken from a cluster that can spare it.
    std::size_t far = x.size();
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (counts[assign[i]] < 2) continue;
      const double s = dot(x[i], centroids[assign[i]]);
      if (s < worst) {
        worst = s;
        far = i;
      }
    }
    if (far == x.size()) {
      centroids[c] = previous[c];
      continue;
    }
    const std::size_t from = assign[far];
    --counts[from];
    assign[far] = c;
    counts[c] = 1;
    centroids[c] = x[far];
    l2_normalize(centroids[c]);
    std::vector<double> rebuilt(dim, 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (assign[i] != from) continue;
      for (std::size_t j = 0; j < dim; ++j) rebuilt[j] += x[i][j];
    }
    l2_normalize(rebuilt);
    centroids[from] = std::move(rebuilt);
  }
  return centroids;
}

double objective(const Matrix& x, const std::vector<std::size_t>& assign, const Matrix& centroids) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += dot(x[i], centroids[assign[i]]);
  return s / static_cast<double>(x.size());
}

}  // namespace

ClusterResult cluster_topics(const std::vector<EmbeddingVector>& vectors, std::size_t k,
                             std::uint64_t seed, std::size_t max_iterations,
                             std::size_t restarts) {
  if (k < 1) throw Error(ErrorCode::BadParam, "k must be >= 1");
  if (vectors.size() < k) {
    throw Error(ErrorCode::TooFewPoints, std::to_string(vectors.size()) +
                                             " vectors cannot form " + std::to_string(k) +
                                             " clusters");
  }
  const std::size_t dim = vectors.front().dim();
  if (dim == 0) throw Error(ErrorCode::BadDim, "zero-dimensional vectors");
  Matrix x;
  x.reserve(vectors.size());
  for (const auto& v : vectors) {
    if (v.dim() != dim) throw Error(ErrorCode::DimMismatch, "vectors differ in dimension");
    x.push_back(v.values);
    l2_normalize(x.back());
  }

  std::mt19937_64 rng(seed);
  ClusterResult best;
  Matrix best_centroids;
  for (std::size_t run = 0; run < std::max<std::size_t>(restarts, 1); ++run) {
    Matrix centroids;
    for (std::size_t i : kmeanspp_init(x, k, rng)) centroids.push_back(x[i]);

    ClusterResult result;
    std::vector<std::size_t> assign = assign_all(x, centroids);
    for (std::size_t it = 1; it <= std::max<std::size_t>(max_iterations, 1); ++it) {
      centroids = recompute(x, assign, k, centroids);
      result.objective.push_back(objective(x, assign, centroids));
      result.iterations = it;
      std::vector<std::size_t> next = assign_all(x, centroids);
      if (next == assign) break;
      assign = std::move(next);
    }
    result.assignments = std::move(assign);
    if (run == 0 || result.objective.back() > best.objective.back()) {
      best = std::move(result);
      best_centroids = std::move(centroids);
    }
  }

  for (auto& c : best_centroids) best.centroids.push_back({std::move(c)});
  return best;
}

// ---------------------------------------------------------------------------
// c-TF-IDF

bool is_stopword(std::string_view token) noexcept {
  static const std::unordered_set<std::string_view> words = {
      "a",     "about", "after", "all",   "also",  "an",    "and",   "any",   "are",  "as",
      "at",    "be",    "been",  "before", "being", "between", "both", "but",  "by",   "can",
      "could", "do",    "does",  "each",  "either", "for",  "from",  "had",   "has",  "have",
      "he",    "her",   "here",  "his",   "how",   "i",     "if",    "in",    "into", "is",
      "it",    "its",   "may",   "more",  "most",  "no",    "not",   "of",    "on",   "one",
      "only",  "or",    "other", "our",   "out",   "over",  "per",   "she",   "should", "so",
      "some",  "such",  "than",  "that",  "the",   "their", "them",  "then",  "there", "these",
      "they",  "this",  "those", "through", "to",  "under", "up",    "upon",  "us",   "use",
      "used",  "using", "via",   "was",   "we",    "were",  "what",  "when",  "where", "which",
      "while", "who",   "will",  "with",  "within", "without", "would", "you", "your"};
  return words.contains(token);
}

std::vector<std::vector<Keyword>> ctfidf_keywords(const Corpus& corpus,
                                                  std::span<const std::size_t> assignments,
                                                  std::size_t k, std::size_t top_n,
                                                  const FieldConfig& cfg) {
  if (assignments.size() != corpus.size()) {
    throw Error(ErrorCode::BadParam, "assignments do not cover the corpus");
  }
  if (k < 1) throw Error(ErrorCode::BadParam, "k must be >= 1");
  std::vector<std::map<std::string, double>> tf(k);
  std::unordered_map<std::string, double> total;
  double tokens = 0.0;
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    if (assignments[d] >= k) throw Error(ErrorCode::BadParam, "assignment outside [0, k)");
    for (auto& t : tokenize(doc_text(corpus[d], cfg))) {
      tf[assignments[d]][t] += 1.0;
      total[t] += 1.0;
      tokens += 1.0;
    }
  }
  const double avg = tokens / static_cast<double>(k);

  std::vector<std::vector<Keyword>> out(k);
  for (std::size_t c = 0; c < k; ++c) {
    auto& kw = out[c];
    for (const auto& [term, count] : tf[c]) {
      if (is_stopword(term)) continue;
      kw.push_back({term, count * std::log(1.0 + avg / total[term])});
    }
    std::sort(kw.begin(), kw.end(), [](const Keyword& a, const Keyword& b) {
      if (a.weight != b.weight) return a.weight > b.weight;
      return a.term < b.term;
    });
    if (kw.size() > top_n) kw.resize(top_n);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Topic model

std::vector<std::string> TopicModel::members(std::size_t topic) const {
  std::vector<std::string> out;
  for (const auto& [id, t] : assignments) {
    if (t == topic) out.push_back(id);
  }
  return out;
}

std::string TopicModel::label(std::size_t topic) const {
  char buf[32];
  std::snprintf(buf, sizeof buf, "topic_%02zu", topic);
  return buf;
}

TopicModel build_topic_model(const Corpus& corpus, Embedder& embedder, std::size_t k,
                             std::uint64_t seed, std::size_t top_n, const FieldConfig& cfg) {
  if (corpus.empty()) throw Error(ErrorCode::EmptyCorpus, "cannot cluster an empty corpus");
  std::vector<std::string> texts;
  for (const auto& w : corpus.workflows()) texts.push_back(doc_text(w, cfg));
  std::vector<EmbeddingVector> vectors = embedder.embed(texts);
  for (auto& v : vectors) l2_normalize(v.values);

  ClusterResult clusters = cluster_topics(vectors, k, seed);

  TopicModel model;
  model.k = k;
  model.seed = seed;
  model.provider = embedder.name();
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    model.assignments.emplace(corpus[d].id, clusters.assignments[d]);
  }
  model.centroids = clusters.centroids;
  model.keywords = ctfidf_keywords(corpus, clusters.assignments, k, top_n, cfg);

  model.exemplars.resize(k);
  for (std::size_t c = 0; c < k; ++c) {
    std::vector<std::pair<double, std::string>> ranked;
    for (std::size_t d = 0; d < corpus.size(); ++d) {
      if (clusters.assignments[d] != c) continue;
      ranked.emplace_back(dot(vectors[d].values, clusters.centroids[c].values), corpus[d].id);
    }
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });
    for (std::size_t i = 0; i < ranked.size() && i < 3; ++i) {
      model.exemplars[c].push_back(ranked[i].second);
    }
  }
  return model;
}

json topic_model_to_json(const TopicModel& model) {
  json j;
  j["k"] = model.k;
  j["seed"] = model.seed;
  j["provider"] = model.provider;
  j["assignments"] = json::object();
  for (const auto& [id, t] : model.assignments) j["assignments"][id] = t;
  j["centroids"] = json::array();
  for (const auto& c : model.centroids) j["centroids"].push_back(c.values);
  j["keywords"] = json::array();
  for (const auto& kws : model.keywords) {
    json arr = json::array();
    for (const auto& kw : kws) arr.push_back({{"term", kw.term}, {"weight", kw.weight}});
    j["keywords"].push_back(std::move(arr));
  }
  j["exemplars"] = model.exemplars;
  return j;
}

TopicModel topic_model_from_json(const json& j) {
  try {
    TopicModel m;
    m.k = j.at("k").get<std::size_t>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.provider = j.value("provider", "");
    for (const auto& [id, t] : j.at("assignments").items()) {
      const auto topic = t.get<std::size_t>();
      if (topic >= m.k) throw Error(ErrorCode::SchemaError, "topic index outside [0, k)");
      m.assignments.emplace(id, topic);
    }
    for (const auto& c : j.at("centroids")) m.centroids.push_back({c.get<std::vector<double>>()});
    for (const auto& kws : j.at("keywords")) {
      std::vector<Keyword> list;
      for (const auto& kw : kws) list.push_back({kw.at("term").get<std::string>(),
                                                 kw.at("weight").get<double>()});
      m.keywords.push_back(std::move(list));
    }
    m.exemplars = j.at("exemplars").get<std::vector<std::vector<std::string>>>();
    if (m.keywords.size() != m.k || m.exemplars.size() != m.k) {
      throw Error(ErrorCode::SchemaError, "topic model lists do not match k");
    }
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaError, std::string("invalid topic model: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Query generation

std::string_view to_string(QueryMode mode) noexcept {
  return mode == QueryMode::llm ? "llm" : "template";
}

namespace {

constexpr std::string_view kPatterns[] = {
    "how do i {a} {b} in galaxy",
    "workflow for {a} analysis",
    "{a} {b} pipeline tutorial",
    "galaxy workflow to process {a} data with {b}",
    "{a} and {b} analysis workflow",
    "find a workflow for {b} {a}",
};

std::string fill(std::string_view pattern, const std::string& a, const std::string& b) {
  std::string out;
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    if (pattern.compare(i, 3, "{a}") == 0) {
      out += a;
      i += 2;
    } else if (pattern.compare(i, 3, "{b}") == 0) {
      out += b;
      i += 2;
    } else {
      out += pattern[i];
    }
  }
  return out;
}

std::vector<std::string> template_queries(std::span<const std::string> keywords, std::size_t n) {
  std::vector<std::string> kw;
  for (const auto& k : keywords) {
    if (!k.empty() && std::find(kw.begin(), kw.end(), k) == kw.end()) kw.push_back(k);
  }
  if (kw.size() < 2) {
    throw Error(ErrorCode::InsufficientKeywords, "template queries need at least two keywords");
  }
  const std::size_t K = kw.size();
  const std::size_t P = std::size(kPatterns);
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  const std::size_t limit = P * K * (K - 1) + n;
  for (std::size_t i = 0; out.size() < n && i < limit; ++i) {
    const std::size_t a = i % K;
    const std::size_t offset = 1 + (i / K) % (K - 1);
    const std::size_t b = (a + offset) % K;
    std::string q = fill(kPatterns[i % P], kw[a], kw[b]);
    if (seen.insert(q).second) out.push_back(std::move(q));
  }
  for (std::size_t v = 2; out.size() < n; ++v) {
    std::string q = out[out.size() % std::max<std::size_t>(1, P)] + " variant " + std::to_string(v);
    if (seen.insert(q).second) out.push_back(std::move(q));
  }
  return out;
}

std::string trim(std::string_view s) {
  const auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && ws(s[b])) ++b;
  while (e > b && ws(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

std::string strip_marker(std::string line) {
  static const std::string_view bullets[] = {"- ", "* ", "• ", "· "};
  for (auto bullet : bullets) {
    if (line.rfind(bullet, 0) == 0) return trim(line.substr(bullet.size()));
  }
  std::size_t i = 0;
  while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
  if (i > 0 && i < line.size() && (line[i] == '.' || line[i] == ')')) {
    return trim(line.substr(i + 1));
  }
  return line;
}

std::string strip_quotes(std::string line) {
  if (line.size() >= 2 && ((line.front() == '"' && line.back() == '"') ||
                           (line.front() == '\'' && line.back() == '\''))) {
    return trim(line.substr(1, line.size() - 2));
  }
  return line;
}

}  // namespace

std::vector<std::string> parse_query_lines(std::string_view response) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= response.size()) {
    std::size_t end = response.find('\n', start);
    if (end == std::string_view::npos) end = response.size();
    std::string line = strip_quotes(strip_marker(trim(response.substr(start, end - start))));
    if (!line.empty()) out.push_back(std::move(line));
    start = end + 1;
  }
  return out;
}

std::string build_query_prompt(std::span<const std::string> keywords,
                               std::span<const ExampleWorkflow> examples, std::size_t n) {
  std::string p = "You help scientists find Galaxy bioinformatics workflows.\n";
  p += "Topic keywords: ";
  for (std::size_t i = 0; i < keywords.size(); ++i) {
    if (i) p += ", ";
    p += keywords[i];
  }
  p += "\n";
  if (!examples.empty()) {
    p += "Example workflows from this topic:\n";
    for (const auto& ex : examples.first(std::min<std::size_t>(examples.size(), 3))) {
      bool cut = false;
      std::string desc = truncate_utf8(ex.description, kPromptDescriptionChars, &cut);
      if (cut) desc += "…";
      p += "- " + ex.title;
      if (!desc.empty()) p += ": " + desc;
      p += "\n";
    }
  }
  p += "Write queries a researcher might type when looking for such a workflow. Output " +
       std::to_string(n) + " concise search queries, one per line, with no numbering.";
  return p;
}

std::vector<std::string> generate_queries(std::span<const std::string> keywords,
                                          std::span<const ExampleWorkflow> examples,
                                          std::size_t n, QueryMode mode, ChatClient* client,
                                          const QueryGenOptions& options) {
  if (n < 1) throw Error(ErrorCode::BadParam, "n must be >= 1");
  if (mode == QueryMode::template_) return template_queries(keywords, n);
  if (client == nullptr) throw Error(ErrorCode::BadParam, "llm mode needs a chat client");

  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  std::string last_error;
  const int attempts = 1 + std::max(0, options.max_reprompts);
  for (int attempt = 0; attempt < attempts && out.size() < n; ++attempt) {
    std::string prompt = build_query_prompt(keywords, examples, n - out.size());
    if (!out.empty()) {
      prompt += "\nDo not repeat any of these queries:\n";
      for (const auto& q : out) prompt += "- " + q + "\n";
    }
    std::string response;
    try {
      response = client->complete(prompt);
    } catch (const std::exception& e) {
      last_error = e.what();
      continue;
    }
    for (auto& line : parse_query_lines(response)) {
      if (out.size() == n) break;
      if (seen.insert(line).second) out.push_back(std::move(line));
    }
  }
  if (out.size() < n) {
    std::string msg = "query generation produced " + std::to_string(out.size()) + " of " +
                      std::to_string(n) + " queries";
    if (!last_error.empty()) msg += " (" + last_error + ")";
    throw Error(ErrorCode::ClientError, msg);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Ground truth

void GoldParams::validate() const {
  if (!(tau > 0.0)) throw Error(ErrorCode::BadParam, "tau must be > 0");
  if (min_keyword_overlap < 1) throw Error(ErrorCode::BadParam, "min_keyword_overlap must be >= 1");
}

std::set<std::string> build_ground_truth(std::string_view query,
                                         const std::set<std::string>& seed_ids,
                                         std::span<const std::string> topic_member_ids,
                                         const Corpus& corpus, const TfidfIndex& tfidf,
                                         const GoldParams& params) {
  params.validate();
  for (const auto& s : seed_ids) {
    if (!corpus.contains(s)) throw Error(ErrorCode::UnknownSeed, "seed id not in corpus: " + s);
  }
  std::set<std::string> gold = seed_ids;
  const SparseVector qv = tfidf_query_vector(tfidf, query);
  const TokenList qt = tokenize(query);
  const std::unordered_set<std::string> query_tokens(qt.begin(), qt.end());

  for (const auto& id : topic_member_ids) {
    if (gold.contains(id)) continue;
    const auto pos = corpus.position(id);
    if (!pos) continue;
    std::size_t doc = *pos;
    if (doc >= tfidf.doc_ids.size() || tfidf.doc_ids[doc] != id) {
      auto it = std::find(tfidf.doc_ids.begin(), tfidf.doc_ids.end(), id);
      if (it == tfidf.doc_ids.end()) continue;
      doc = static_cast<std::size_t>(it - tfidf.doc_ids.begin());
    }
    if (!qv.empty() && tfidf_cosine(tfidf, qv, doc) >= params.tau) {
      gold.insert(id);
      continue;
    }
    const TokenList dt = tokenize(doc_text(corpus[*pos], tfidf.fields));
    const std::unordered_set<std::string> doc_tokens(dt.begin(), dt.end());
    std::size_t shared = 0;
    for (const auto& t : query_tokens) shared += doc_tokens.count(t);
    if (shared >= params.min_keyword_overlap) gold.insert(id);
  }
  return gold;
}

std::vector<QueryRecord> synthesize_queries(const Corpus& corpus, const TopicModel& model,
                                            const SynthesisOptions& options, ChatClient* client) {
  std::vector<QueryRecord> out;
  for (std::size_t t = 0; t < model.k; ++t) {
    if (model.members(t).empty()) continue;
    std::vector<std::string> keywords;
    if (t < model.keywords.size()) {
      for (const auto& kw : model.keywords[t]) keywords.push_back(kw.term);
    }
    std::vector<ExampleWorkflow> examples;
    std::set<std::string> seeds;
    if (t < model.exemplars.size()) {
      for (const auto& id : model.exemplars[t]) {
        const Workflow* w = corpus.find(id);
        if (w == nullptr) continue;
        examples.push_back({w->title, w->description});
        seeds.insert(id);
      }
    }

    std::vector<std::string> texts;
    try {
      texts = generate_queries(keywords, examples, options.queries_per_topic, options.mode, client);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::InsufficientKeywords) throw;
      std::clog << "skipping " << model.label(t) << ": " << e.what() << "\n";
      continue;
    }

    for (std::size_t i = 0; i < texts.size(); ++i) {
      char id[48];
      std::snprintf(id, sizeof id, "t%02zu_q%zu", t, i);
      QueryRecord q;
      q.query_id = id;
      q.text = texts[i];
      q.topic = model.label(t);
      q.seed_ids = seeds;
      q.gold_workflow_ids = seeds;
      q.provenance = json::object();
      q.provenance["mode"] = std::string(to_string(options.mode));
      q.provenance["model"] = options.mode == QueryMode::llm ? options.model_name : "";
      q.provenance["seed"] = options.seed;
      q.provenance["topic_keywords"] = keywords;
      out.push_back(std::move(q));
    }
  }
  return out;
}

void fill_gold(std::vector<QueryRecord>& queries, const Corpus& corpus, const TopicModel& model,
               const GoldParams& params, const FieldConfig& cfg) {
  params.validate();
  const TfidfIndex tfidf = build_tfidf(corpus, cfg);
  std::map<std::string, std::vector<std::string>> members_by_label;
  for (std::size_t t = 0; t < model.k; ++t) members_by_label[model.label(t)] = model.members(t);

  for (auto& q : queries) {
    std::vector<std::string> members;
    if (q.topic) {
      auto it = members_by_label.find(*q.topic);
      if (it != members_by_label.end()) members = it->second;
    }
    q.gold_workflow_ids = build_ground_truth(q.text, q.seed_ids, members, corpus, tfidf, params);
    if (!q.provenance.is_object()) q.provenance = json::object();
    q.provenance["tau"] = params.tau;
    q.provenance["min_keyword_overlap"] = params.min_keyword_overlap;
  }
}

}  // namespace gxs
