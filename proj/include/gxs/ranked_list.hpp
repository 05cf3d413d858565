#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace gxs {

struct ScoredId {
  std::string id;
  double score = 0.0;

  bool operator==(const ScoredId&) const = default;
};

/// True when `a` ranks strictly before `b`: higher score first, then smaller id.
inline bool ranks_before(const ScoredId& a, const ScoredId& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.id < b.id;
}

/// Ordered (id, score) pairs, descending by score with ties broken by
/// ascending id. Every retriever and the reranker produce one of these.
class RankedList {
 public:
  RankedList() = default;

  /// Takes entries already in final order (used by the reranker, which has
  /// its own ordering key). Duplicate ids are rejected with BadParam.
  static RankedList from_ordered(std::vector<ScoredId> entries);

  /// Top-k of `scores[i]` for `ids[i]` under the ranking rule.
  static RankedList top_k(std::span<const double> scores, std::span<const std::string> ids,
                          std::size_t k);

  const std::vector<ScoredId>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  const ScoredId& operator[](std::size_t i) const { return entries_[i]; }
  auto begin() const noexcept { return entries_.begin(); }
  auto end() const noexcept { return entries_.end(); }

  std::vector<std::string> ids() const;
  void truncate(std::size_t k);

  /// Checks descending-score/ascending-id order and id uniqueness.
  bool well_ordered() const;

  bool operator==(const RankedList&) const = default;

 private:
  std::vector<ScoredId> entries_;
};

}  // namespace gxs
