#include "gxs/ranked_list.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_set>

#include "gxs/error.hpp"

namespace gxs {

RankedList RankedList::from_ordered(std::vector<ScoredId> entries) {
  std::unordered_set<std::string> seen;
  for (const auto& e : entries) {
    if (!seen.insert(e.id).second) {
      throw Error(ErrorCode::BadParam, "duplicate id in ranked list: " + e.id);
    }
  }
  RankedList list;
  list.entries_ = std::move(entries);
  return list;
}

RankedList RankedList::top_k(std::span<const double> scores, std::span<const std::string> ids,
                             std::size_t k) {
  if (scores.size() != ids.size()) {
    throw Error(ErrorCode::BadParam, "scores and ids differ in length");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto before = [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return ids[a] < ids[b];
  };
  const std::size_t n = std::min(k, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n), order.end(),
                    before);
  RankedList list;
  list.entries_.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    list.entries_.push_back({ids[order[i]], scores[order[i]]});
  }
  return list;
}

std::vector<std::string> RankedList::ids() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.id);
  return out;
}

void RankedList::truncate(std::size_t k) {
  if (entries_.size() > k) entries_.resize(k);
}

bool RankedList::well_ordered() const {
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (!seen.insert(entries_[i].id).second) return false;
    if (i > 0 && !ranks_before(entries_[i - 1], entries_[i])) return false;
  }
  return true;
}

}  // namespace gxs
