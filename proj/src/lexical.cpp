#include "gxs/lexical.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <unordered_map>

#include "gxs/corpus.hpp"
#include "gxs/error.hpp"
#include "gxs/kernels.hpp"

namespace gxs {

const TermId* Vocabulary::find(std::string_view term) const {
  auto it = ids.find(std::string(term));
  return it == ids.end() ? nullptr : &it->second;
}

namespace {

void check_k(std::size_t k) {
  if (k < 1) throw Error(ErrorCode::BadParam, "k must be >= 1");
}

std::vector<TokenList> tokenize_corpus(const Corpus& corpus, const FieldConfig& cfg) {
  if (!cfg.valid()) throw Error(ErrorCode::BadParam, "FieldConfig enables no field");
  std::vector<TokenList> docs;
  docs.reserve(corpus.size());
  for (const auto& w : corpus.workflows()) docs.push_back(tokenize(doc_text(w, cfg)));
  return docs;
}

Vocabulary build_vocabulary(const std::vector<TokenList>& docs) {
  std::vector<std::string> terms;
  for (const auto& d : docs) terms.insert(terms.end(), d.begin(), d.end());
  std::sort(terms.begin(), terms.end());
  terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
  Vocabulary vocab;
  vocab.ids.reserve(terms.size());
  for (std::size_t i = 0; i < terms.size(); ++i) vocab.ids.emplace(terms[i], static_cast<TermId>(i));
  vocab.terms = std::move(terms);
  return vocab;
}

// Known-term counts keyed by id, ascending.
std::map<TermId, std::uint32_t> count_terms(const Vocabulary& vocab, const TokenList& tokens) {
  std::map<TermId, std::uint32_t> counts;
  for (const auto& t : tokens) {
    if (const TermId* id = vocab.find(t)) ++counts[*id];
  }
  return counts;
}

SparseVector weigh_and_normalize(const std::map<TermId, std::uint32_t>& counts,
                                 const std::vector<double>& idf) {
  SparseVector v;
  v.reserve(counts.size());
  double sq = 0.0;
  for (const auto& [term, tf] : counts) {
    const double w = static_cast<double>(tf) * idf[term];
    v.push_back({term, w});
    sq += w * w;
  }
  if (sq > 0.0) {
    const double inv = 1.0 / std::sqrt(sq);
    for (auto& e : v) e.weight *= inv;
  }
  return v;
}

RankedList zero_list(const std::vector<std::string>& ids, std::size_t k) {
  std::vector<double> zeros(ids.size(), 0.0);
  return RankedList::top_k(zeros, ids, k);
}

}  // namespace

// ---------------------------------------------------------------------------
// TF-IDF

TfidfIndex build_tfidf(const Corpus& corpus, const FieldConfig& cfg) {
  if (corpus.empty()) throw Error(ErrorCode::EmptyCorpus, "cannot index an empty corpus");
  const auto docs = tokenize_corpus(corpus, cfg);

  TfidfIndex index;
  index.vocab = build_vocabulary(docs);
  index.fields = cfg;
  index.doc_ids = corpus.ids();

  std::vector<std::uint32_t> df(index.vocab.size(), 0);
  std::vector<std::map<TermId, std::uint32_t>> counts;
  counts.reserve(docs.size());
  for (const auto& d : docs) {
    counts.push_back(count_terms(index.vocab, d));
    for (const auto& [term, tf] : counts.back()) ++df[term];
  }

  const double n = static_cast<double>(docs.size());
  index.idf.resize(df.size());
  for (std::size_t t = 0; t < df.size(); ++t) {
    index.idf[t] = std::log((1.0 + n) / (1.0 + static_cast<double>(df[t]))) + 1.0;
  }
  index.doc_vectors.reserve(docs.size());
  for (const auto& c : counts) index.doc_vectors.push_back(weigh_and_normalize(c, index.idf));
  return index;
}

SparseVector tfidf_query_vector(const TfidfIndex& index, std::string_view query) {
  return weigh_and_normalize(count_terms(index.vocab, tokenize(query)), index.idf);
}

double tfidf_cosine(const TfidfIndex& index, const SparseVector& query, std::size_t doc) {
  const SparseVector& d = index.doc_vectors.at(doc);
  double dot = 0.0;
  auto qi = query.begin();
  auto di = d.begin();
  while (qi != query.end() && di != d.end()) {
    if (qi->term < di->term) {
      ++qi;
    } else if (di->term < qi->term) {
      ++di;
    } else {
      dot += qi->weight * di->weight;
      ++qi;
      ++di;
    }
  }
  return dot;
}

RankedList tfidf_search(const TfidfIndex& index, std::string_view query, std::size_t k,
                        EmptyQueryPolicy policy) {
  check_k(k);
  const SparseVector q = tfidf_query_vector(index, query);
  if (q.empty()) {
    if (policy == EmptyQueryPolicy::error) {
      throw Error(ErrorCode::EmptyQuery, "query has no indexed terms");
    }
    return zero_list(index.doc_ids, k);
  }
  std::vector<double> scores(index.doc_ids.size(), 0.0);
  kernels::omp::tfidf_scores(index, q, scores);
  return RankedList::top_k(scores, index.doc_ids, k);
}

// ---------------------------------------------------------------------------
// BM25

Bm25Index build_bm25(const Corpus& corpus, const FieldConfig& cfg, double k1, double b) {
  if (corpus.empty()) throw Error(ErrorCode::EmptyCorpus, "cannot index an empty corpus");
  if (!(k1 > 0.0) || !(b >= 0.0 && b <= 1.0)) {
    throw Error(ErrorCode::BadParam, "BM25 requires k1 > 0 and 0 <= b <= 1");
  }
  const auto docs = tokenize_corpus(corpus, cfg);

  Bm25Index index;
  index.vocab = build_vocabulary(docs);
  index.fields = cfg;
  index.k1 = k1;
  index.b = b;
  index.doc_ids = corpus.ids();
  index.doc_freq.assign(index.vocab.size(), 0);
  index.postings.resize(index.vocab.size());
  index.doc_terms.reserve(docs.size());
  index.doc_lengths.reserve(docs.size());

  double total = 0.0;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    const auto counts = count_terms(index.vocab, docs[d]);
    std::vector<TermCount> row;
    row.reserve(counts.size());
    for (const auto& [term, tf] : counts) {
      row.push_back({term, tf});
      ++index.doc_freq[term];
      index.postings[term].push_back({static_cast<std::uint32_t>(d), tf});
    }
    index.doc_terms.push_back(std::move(row));
    index.doc_lengths.push_back(static_cast<std::uint32_t>(docs[d].size()));
    total += static_cast<double>(docs[d].size());
  }
  index.avgdl = total / static_cast<double>(docs.size());

  const double n = static_cast<double>(docs.size());
  index.idf.resize(index.doc_freq.size());
  for (std::size_t t = 0; t < index.doc_freq.size(); ++t) {
    const double df = index.doc_freq[t];
    index.idf[t] = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
  }
  return index;
}

std::vector<TermId> bm25_query_terms(const Bm25Index& index, std::string_view query) {
  std::vector<TermId> terms;
  for (const auto& t : tokenize(query)) {
    if (const TermId* id = index.vocab.find(t)) terms.push_back(*id);
  }
  std::sort(terms.begin(), terms.end());
  terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
  return terms;
}

RankedList bm25_search(const Bm25Index& index, std::string_view query, std::size_t k,
                       EmptyQueryPolicy policy) {
  check_k(k);
  if (tokenize(query).empty()) {
    if (policy == EmptyQueryPolicy::error) {
      throw Error(ErrorCode::EmptyQuery, "query has no tokens");
    }
    return zero_list(index.doc_ids, k);
  }
  const auto terms = bm25_query_terms(index, query);
  std::vector<double> scores(index.doc_ids.size(), 0.0);
  kernels::omp::bm25_scores(index, terms, scores);
  return RankedList::top_k(scores, index.doc_ids, k);
}

// ---------------------------------------------------------------------------
// Fuzzy token-set ratio

namespace {

// Bit-parallel LCS length (Hyyro). `pattern` should be the shorter string.
std::size_t lcs_length(std::u32string_view pattern, std::u32string_view text) {
  const std::size_t m = pattern.size();
  if (m == 0 || text.empty()) return 0;
  const std::size_t words = (m + 63) / 64;

  std::vector<std::uint64_t> ascii(128 * words, 0);
  std::unordered_map<char32_t, std::vector<std::uint64_t>> other;
  for (std::size_t i = 0; i < m; ++i) {
    const char32_t c = pattern[i];
    std::uint64_t* row;
    if (c < 128) {
      row = &ascii[c * words];
    } else {
      auto& v = other[c];
      if (v.empty()) v.assign(words, 0);
      row = v.data();
    }
    row[i / 64] |= std::uint64_t{1} << (i % 64);
  }

  static const std::vector<std::uint64_t> kNone;
  std::vector<std::uint64_t> v(words, ~std::uint64_t{0});
  for (char32_t c : text) {
    const std::uint64_t* match = nullptr;
    if (c < 128) {
      match = &ascii[c * words];
    } else if (auto it = other.find(c); it != other.end()) {
      match = it->second.data();
    } else {
      continue;  // U = 0 leaves V unchanged
    }
    std::uint64_t carry = 0;
    for (std::size_t w = 0; w < words; ++w) {
      const std::uint64_t u = v[w] & match[w];
      const std::uint64_t x = v[w];
      const std::uint64_t sum = x + u + carry;
      carry = (sum < x || (carry && sum == x)) ? 1 : 0;
      v[w] = sum | (x & ~u);
    }
  }
  std::size_t zeros = 0;
  for (std::size_t w = 0; w < words; ++w) {
    std::uint64_t bits = ~v[w];
    if (w == words - 1 && m % 64 != 0) bits &= (std::uint64_t{1} << (m % 64)) - 1;
    zeros += static_cast<std::size_t>(std::popcount(bits));
  }
  return zeros;
}

std::u32string join_tokens(const std::vector<std::u32string>& parts) {
  std::u32string out;
  for (const auto& p : parts) {
    if (p.empty()) continue;
    if (!out.empty()) out.push_back(U' ');
    out += p;
  }
  return out;
}

}  // namespace

double indel_ratio(std::u32string_view x, std::u32string_view y) {
  const std::size_t total = x.size() + y.size();
  if (total == 0) return 100.0;
  const std::size_t lcs = x.size() <= y.size() ? lcs_length(x, y) : lcs_length(y, x);
  // |x| + |y| - indel = 2 * lcs
  return 100.0 * static_cast<double>(2 * lcs) / static_cast<double>(total);
}

std::vector<std::u32string> token_set(std::string_view text) {
  const std::u32string norm = to_utf32(normalize(text));
  std::vector<std::u32string> tokens;
  std::size_t start = 0;
  while (start < norm.size()) {
    std::size_t end = norm.find(U' ', start);
    if (end == std::u32string::npos) end = norm.size();
    if (end > start) tokens.emplace_back(norm.substr(start, end - start));
    start = end + 1;
  }
  std::sort(tokens.begin(), tokens.end());
  tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
  return tokens;
}

double token_set_ratio(const std::vector<std::u32string>& a,
                       const std::vector<std::u32string>& b) {
  if (a.empty() && b.empty()) return 100.0;
  if (a.empty() || b.empty()) return 0.0;

  std::vector<std::u32string> inter;
  std::vector<std::u32string> only_a;
  std::vector<std::u32string> only_b;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(inter));
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(only_a));
  std::set_difference(b.begin(), b.end(), a.begin(), a.end(), std::back_inserter(only_b));

  const std::u32string s_i = join_tokens(inter);
  const std::u32string s_1 = join_tokens({s_i, join_tokens(only_a)});
  const std::u32string s_2 = join_tokens({s_i, join_tokens(only_b)});
  return std::max({indel_ratio(s_i, s_1), indel_ratio(s_i, s_2), indel_ratio(s_1, s_2)});
}

double token_set_ratio(std::string_view a, std::string_view b) {
  return token_set_ratio(token_set(a), token_set(b));
}

FuzzyIndex build_fuzzy(const Corpus& corpus, const FieldConfig& cfg) {
  if (!cfg.valid()) throw Error(ErrorCode::BadParam, "FieldConfig enables no field");
  FuzzyIndex index;
  index.fields = cfg;
  index.doc_ids = corpus.ids();
  index.doc_tokens.reserve(corpus.size());
  for (const auto& w : corpus.workflows()) index.doc_tokens.push_back(token_set(doc_text(w, cfg)));
  return index;
}

RankedList fuzzy_search(const FuzzyIndex& index, std::string_view query, std::size_t k) {
  check_k(k);
  const auto q = token_set(query);
  std::vector<double> scores(index.doc_ids.size(), 0.0);
  kernels::omp::fuzzy_scores(index, q, scores);
  return RankedList::top_k(scores, index.doc_ids, k);
}

RankedList fuzzy_search(const Corpus& corpus, const FieldConfig& cfg, std::string_view query,
                        std::size_t k) {
  return fuzzy_search(build_fuzzy(corpus, cfg), query, k);
}

}  // namespace gxs
