#include "momolab/index_set.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>

namespace momolab {

IndexSet::IndexSet(int64_t horizon) : horizon_(horizon) {
  if (horizon < 0) throw std::invalid_argument("IndexSet: negative horizon");
  words_.assign(static_cast<size_t>(horizon / 64 + 1), 0);
}

IndexSet IndexSet::full(int64_t horizon) {
  IndexSet s(horizon);
  for (int64_t n = 1; n <= horizon; ++n) s.insert(n);
  return s;
}

IndexSet IndexSet::from_elements(const std::vector<int64_t>& elems, int64_t horizon) {
  IndexSet s(horizon);
  for (int64_t n : elems) s.insert(n);
  return s;
}

IndexSet IndexSet::of(std::initializer_list<int64_t> elems, int64_t horizon) {
  IndexSet s(horizon);
  for (int64_t n : elems) s.insert(n);
  return s;
}

IndexSet IndexSet::from_predicate(int64_t horizon, const std::function<bool(int64_t)>& pred) {
  IndexSet s(horizon);
  for (int64_t n = 1; n <= horizon; ++n)
    if (pred(n)) s.insert(n);
  return s;
}

IndexSet IndexSet::from_intervals(const std::vector<std::pair<int64_t, int64_t>>& intervals,
                                  int64_t horizon) {
  IndexSet s(horizon);
  for (auto [lo, hi] : intervals)
    for (int64_t n = std::max<int64_t>(lo, 1); n <= std::min(hi, horizon); ++n) s.insert(n);
  return s;
}

void IndexSet::insert(int64_t n) {
  if (n < 1 || n > horizon_) throw std::out_of_range("IndexSet::insert: out of [1, horizon]");
  words_[static_cast<size_t>(n >> 6)] |= uint64_t{1} << (n & 63);
}

void IndexSet::erase(int64_t n) {
  if (n < 1 || n > horizon_) return;
  words_[static_cast<size_t>(n >> 6)] &= ~(uint64_t{1} << (n & 63));
}

int64_t IndexSet::count_upto(int64_t N) const {
  if (N < 1) return 0;
  N = std::min(N, horizon_);
  int64_t full_words = N >> 6;
  int64_t count = 0;
  for (int64_t w = 0; w < full_words; ++w) count += std::popcount(words_[static_cast<size_t>(w)]);
  // partial word: bits 0 .. (N & 63)
  uint64_t mask = (N & 63) == 63 ? ~uint64_t{0} : ((uint64_t{1} << ((N & 63) + 1)) - 1);
  count += std::popcount(words_[static_cast<size_t>(full_words)] & mask);
  return count;  // bit 0 is never set
}

int64_t IndexSet::next(int64_t n) const {
  if (n < 1) n = 1;
  if (n > horizon_) return -1;
  size_t w = static_cast<size_t>(n >> 6);
  uint64_t word = words_[w] & (~uint64_t{0} << (n & 63));
  while (true) {
    if (word != 0) {
      int64_t m = static_cast<int64_t>(w) * 64 + std::countr_zero(word);
      return m <= horizon_ ? m : -1;
    }
    if (++w >= words_.size()) return -1;
    word = words_[w];
  }
}

std::vector<int64_t> IndexSet::elements() const {
  std::vector<int64_t> out;
  for_each([&](int64_t n) { out.push_back(n); });
  return out;
}

std::vector<int64_t> IndexSet::largest(int64_t k) const {
  std::vector<int64_t> out;
  for (int64_t n = horizon_; n >= 1 && static_cast<int64_t>(out.size()) < k; --n)
    if (contains(n)) out.push_back(n);
  std::reverse(out.begin(), out.end());
  return out;
}

IndexSet IndexSet::intersect(const IndexSet& other) const {
  IndexSet out(std::min(horizon_, other.horizon_));
  for (size_t w = 0; w < out.words_.size(); ++w) out.words_[w] = words_[w] & other.words_[w];
  // mask stray bits above the shared horizon
  for (int64_t n = out.horizon_ + 1; n <= static_cast<int64_t>(out.words_.size()) * 64 - 1; ++n)
    out.erase(n);
  return out;
}

IndexSet IndexSet::unite(const IndexSet& other) const {
  IndexSet out(std::min(horizon_, other.horizon_));
  for (size_t w = 0; w < out.words_.size(); ++w) out.words_[w] = words_[w] | other.words_[w];
  for (int64_t n = out.horizon_ + 1; n <= static_cast<int64_t>(out.words_.size()) * 64 - 1; ++n)
    out.erase(n);
  return out;
}

bool IndexSet::subset_of(const IndexSet& other, int64_t lo, int64_t hi) const {
  lo = std::max<int64_t>(lo, 1);
  hi = std::min({hi, horizon_, other.horizon_});
  for (int64_t n = next(lo); n != -1 && n <= hi; n = next(n + 1))
    if (!other.contains(n)) return false;
  return true;
}

bool IndexSet::agrees_with(const IndexSet& other, int64_t lo, int64_t hi) const {
  lo = std::max<int64_t>(lo, 1);
  hi = std::min({hi, horizon_, other.horizon_});
  for (int64_t n = lo; n <= hi; ++n)
    if (contains(n) != other.contains(n)) return false;
  return true;
}

bool IndexSet::operator==(const IndexSet& other) const {
  return horizon_ == other.horizon_ && agrees_with(other, 1, horizon_);
}

std::vector<std::pair<int64_t, int64_t>> IndexSet::intervals() const {
  std::vector<std::pair<int64_t, int64_t>> out;
  int64_t n = next(1);
  while (n != -1) {
    int64_t lo = n;
    int64_t hi = n;
    while (hi < horizon_ && contains(hi + 1)) ++hi;
    out.emplace_back(lo, hi);
    n = next(hi + 1);
  }
  return out;
}

}  // namespace momolab
