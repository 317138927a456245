#include "momolab/dynsys.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "momolab/index_set.hpp"

namespace momolab {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

ObservableSystem make_rotation(double alpha, double x0, int64_t m) {
  return ObservableSystem(
      [alpha, x0, m](int64_t n) {
        long double phase = fmodl(static_cast<long double>(x0) +
                                      static_cast<long double>(n) * static_cast<long double>(alpha),
                                  1.0L);
        phase = fmodl(phase * static_cast<long double>(m), 1.0L);
        double t = static_cast<double>(phase);
        return std::complex<double>(std::cos(kTwoPi * t), std::sin(kTwoPi * t));
      },
      1.0);
}

int thue_morse_bit(int64_t n) {
  return std::popcount(static_cast<uint64_t>(n)) & 1;
}

ObservableSystem make_thue_morse(int64_t offset, std::complex<double> w0, std::complex<double> w1) {
  if (offset < 0) throw std::invalid_argument("make_thue_morse: offset must be >= 0");
  double bound = std::max(std::abs(w0), std::abs(w1));
  return ObservableSystem(
      [offset, w0, w1](int64_t n) { return thue_morse_bit(n + offset) ? w1 : w0; }, bound);
}

ObservableSystem make_bfree(const MultipleBase& base, int64_t table_horizon) {
  auto members = std::make_shared<IndexSet>(bfree_set(base, table_horizon));
  const bool zero_is_free = base.generators.empty();
  return ObservableSystem(
      [members, table_horizon, zero_is_free](int64_t n) -> std::complex<double> {
        if (n == 0) return zero_is_free ? 1.0 : 0.0;
        if (n < 0 || n > table_horizon)
          throw std::out_of_range("bfree observable: n beyond the sieve horizon");
        return members->contains(n) ? 1.0 : 0.0;
      },
      1.0);
}

BlockPartition::BlockPartition(std::vector<int64_t> points, int64_t min_final_gap)
    : b_(std::move(points)) {
  if (b_.size() < 2) throw std::invalid_argument("BlockPartition: need at least two points");
  if (b_.front() != 1) throw std::invalid_argument("BlockPartition: b_1 must be 1");
  for (size_t i = 0; i + 1 < b_.size(); ++i)
    if (b_[i] >= b_[i + 1]) throw std::invalid_argument("BlockPartition: points must increase strictly");
  gap_floor_.assign(b_.size() - 1, 0);
  int64_t suffix_min = b_.back() - b_[b_.size() - 2];
  for (size_t i = b_.size() - 1; i-- > 0;) {
    suffix_min = std::min(suffix_min, b_[i + 1] - b_[i]);
    gap_floor_[i] = suffix_min;
  }
  if (gap_floor_.back() < min_final_gap) low_gap_warning_ = true;
}

BlockPartition BlockPartition::squares(int64_t count) {
  std::vector<int64_t> pts;
  for (int64_t k = 1; k <= count + 1; ++k) pts.push_back(k * k);
  return BlockPartition(std::move(pts));
}

BlockPartition BlockPartition::unit(int64_t count) {
  std::vector<int64_t> pts;
  for (int64_t k = 1; k <= count + 1; ++k) pts.push_back(k);
  return BlockPartition(std::move(pts));
}

int64_t BlockPartition::point(int64_t k) const {
  if (k < 1 || k > points()) throw std::out_of_range("BlockPartition::point");
  return b_[static_cast<size_t>(k - 1)];
}

int64_t BlockPartition::gap_floor(int64_t k) const {
  if (k < 1 || k > blocks()) throw std::out_of_range("BlockPartition::gap_floor");
  return gap_floor_[static_cast<size_t>(k - 1)];
}

int64_t BlockPartition::block_of(int64_t n) const {
  if (n < b_.front() || n >= b_.back()) throw std::out_of_range("BlockPartition::block_of");
  auto it = std::upper_bound(b_.begin(), b_.end(), n);
  return static_cast<int64_t>(it - b_.begin());  // b_{k} <= n < b_{k+1}
}

ObservableSystem make_block_orbit(const BlockPartition& partition,
                                  std::vector<ObservableSystem> block_systems) {
  if (static_cast<int64_t>(block_systems.size()) != partition.blocks())
    throw std::invalid_argument("make_block_orbit: one system per block required");
  double bound = 0.0;
  for (const auto& sys : block_systems) bound = std::max(bound, sys.bound());
  auto state = std::make_shared<std::pair<BlockPartition, std::vector<ObservableSystem>>>(
      partition, std::move(block_systems));
  return ObservableSystem(
      [state](int64_t n) {
        int64_t k = state->first.block_of(n);
        return state->second[static_cast<size_t>(k - 1)].eval(n - state->first.point(k));
      },
      bound);
}

std::complex<double> PhaseSigma3::value() const {
  switch (j) {
    case 0: return {1.0, 0.0};
    case 1: return {-0.5, 0.86602540378443864676};
    default: return {-0.5, -0.86602540378443864676};
  }
}

PhaseSigma3 align_to_cone(std::complex<double> z) {
  if (z == std::complex<double>(0.0, 0.0)) return {0};
  constexpr double kThird = 1.0471975511965977462;  // pi/3
  constexpr double kBoundaryTol = 1e-12;
  int best = 0;
  double best_abs_arg = 1e300;
  for (int j = 0; j < 3; ++j) {
    double a = std::abs(std::arg(PhaseSigma3{j}.value() * z));
    if (a <= kThird + kBoundaryTol) return {j};  // smallest j wins ties
    if (a < best_abs_arg) {
      best_abs_arg = a;
      best = j;
    }
  }
  return {best};  // unreachable for finite z; kept for float safety
}

}  // namespace momolab
