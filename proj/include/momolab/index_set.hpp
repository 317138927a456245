#pragma once

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <utility>
#include <vector>

namespace momolab {

// A subset of {1, ..., horizon} stored as a bitmap. The sets this project
// extracts are dense (complement has small harmonic mass), so a bitmap beats
// an element vector by an order of magnitude in memory and makes the exact
// set-identity checks (containment, piecewise agreement) cheap word-wise ops.
class IndexSet {
 public:
  IndexSet() : horizon_(0) {}
  explicit IndexSet(int64_t horizon);

  static IndexSet full(int64_t horizon);
  static IndexSet from_elements(const std::vector<int64_t>& elems, int64_t horizon);
  static IndexSet of(std::initializer_list<int64_t> elems, int64_t horizon);
  // pred(n) for n in [1, horizon]
  static IndexSet from_predicate(int64_t horizon, const std::function<bool(int64_t)>& pred);
  // closed intervals [lo, hi]
  static IndexSet from_intervals(const std::vector<std::pair<int64_t, int64_t>>& intervals,
                                 int64_t horizon);

  int64_t horizon() const { return horizon_; }
  bool contains(int64_t n) const {
    if (n < 1 || n > horizon_) return false;
    return (words_[static_cast<size_t>(n >> 6)] >> (n & 63)) & 1u;
  }
  void insert(int64_t n);
  void erase(int64_t n);

  int64_t count_upto(int64_t N) const;  // |S ∩ [1, N]|
  int64_t size() const { return count_upto(horizon_); }
  bool empty() const { return size() == 0; }

  // smallest member >= n, or -1
  int64_t next(int64_t n) const;
  std::vector<int64_t> elements() const;
  std::vector<int64_t> largest(int64_t k) const;  // up to k largest, ascending

  // set algebra on min(horizon) range
  IndexSet intersect(const IndexSet& other) const;
  IndexSet unite(const IndexSet& other) const;
  // this ∩ [lo, hi] ⊆ other ∩ [lo, hi]
  bool subset_of(const IndexSet& other, int64_t lo, int64_t hi) const;
  bool agrees_with(const IndexSet& other, int64_t lo, int64_t hi) const;
  bool operator==(const IndexSet& other) const;

  // maximal runs of consecutive members, as closed intervals
  std::vector<std::pair<int64_t, int64_t>> intervals() const;

  template <class F>
  void for_each(F f) const {
    for (int64_t n = next(1); n != -1; n = next(n + 1)) f(n);
  }

 private:
  int64_t horizon_;
  std::vector<uint64_t> words_;
};

}  // namespace momolab
