#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "gxs/ranked_list.hpp"
#include "gxs/textprep.hpp"

namespace gxs {

class Corpus;

using TermId = std::uint32_t;

/// What a lexical search does when the query has no usable terms.
enum class EmptyQueryPolicy {
  zero_scores,  // every document scores 0; first k by id
  error,        // throw Error(EmptyQuery)
};

struct SparseEntry {
  TermId term;
  double weight;

  bool operator==(const SparseEntry&) const = default;
};

/// Sorted by term id, no repeated terms.
using SparseVector = std::vector<SparseEntry>;

/// Vocabulary shared by the lexical indexes. Term ids follow lexicographic
/// term order, so two builds over the same corpus agree bit-for-bit.
struct Vocabulary {
  std::vector<std::string> terms;
  std::unordered_map<std::string, TermId> ids;

  const TermId* find(std::string_view term) const;
  std::size_t size() const noexcept { return terms.size(); }

  bool operator==(const Vocabulary& o) const { return terms == o.terms; }
};

/// Smoothed tf-idf: w = tf * (ln((1+N)/(1+df)) + 1), each doc L2-normalized.
struct TfidfIndex {
  Vocabulary vocab;
  std::vector<double> idf;
  std::vector<SparseVector> doc_vectors;
  std::vector<std::string> doc_ids;
  FieldConfig fields;

  bool operator==(const TfidfIndex&) const = default;
};

struct TermCount {
  TermId term;
  std::uint32_t tf;

  bool operator==(const TermCount&) const = default;
};

struct Posting {
  std::uint32_t doc;
  std::uint32_t tf;

  bool operator==(const Posting&) const = default;
};

/// Okapi BM25 statistics. idf = ln(1 + (N - df + 0.5) / (df + 0.5)).
struct Bm25Index {
  Vocabulary vocab;
  std::vector<std::uint32_t> doc_freq;
  std::vector<double> idf;
  std::vector<std::vector<TermCount>> doc_terms;  // per doc, sorted by term
  std::vector<std::vector<Posting>> postings;     // per term, sorted by doc
  std::vector<std::uint32_t> doc_lengths;
  double avgdl = 0.0;
  double k1 = 1.5;
  double b = 0.75;
  std::vector<std::string> doc_ids;
  FieldConfig fields;

  bool operator==(const Bm25Index&) const = default;
};

/// Per-document sorted unique token sets for token_set_ratio scoring.
struct FuzzyIndex {
  std::vector<std::vector<std::u32string>> doc_tokens;
  std::vector<std::string> doc_ids;
  FieldConfig fields;
};

TfidfIndex build_tfidf(const Corpus& corpus, const FieldConfig& cfg = {});

/// Query weighted with the index idf and L2-normalized; unknown terms dropped.
SparseVector tfidf_query_vector(const TfidfIndex& index, std::string_view query);

/// Cosine between a query and one indexed document.
double tfidf_cosine(const TfidfIndex& index, const SparseVector& query, std::size_t doc);

RankedList tfidf_search(const TfidfIndex& index, std::string_view query, std::size_t k,
                        EmptyQueryPolicy policy = EmptyQueryPolicy::zero_scores);

Bm25Index build_bm25(const Corpus& corpus, const FieldConfig& cfg = {}, double k1 = 1.5,
                     double b = 0.75);

/// Unique known query terms in ascending id order.
std::vector<TermId> bm25_query_terms(const Bm25Index& index, std::string_view query);

RankedList bm25_search(const Bm25Index& index, std::string_view query, std::size_t k,
                       EmptyQueryPolicy policy = EmptyQueryPolicy::zero_scores);

/// 100 * (|x| + |y| - indel(x, y)) / (|x| + |y|); 100 for two empty strings.
double indel_ratio(std::u32string_view x, std::u32string_view y);

/// Sorted unique space-separated tokens of normalize(text), any length.
std::vector<std::u32string> token_set(std::string_view text);

double token_set_ratio(std::string_view a, std::string_view b);
double token_set_ratio(const std::vector<std::u32string>& a, const std::vector<std::u32string>& b);

FuzzyIndex build_fuzzy(const Corpus& corpus, const FieldConfig& cfg = {});
RankedList fuzzy_search(const FuzzyIndex& index, std::string_view query, std::size_t k);
RankedList fuzzy_search(const Corpus& corpus, const FieldConfig& cfg, std::string_view query,
                        std::size_t k);

}  // namespace gxs
