#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

#include "momolab/arith.hpp"

namespace momolab {

// A bounded complex observable read along an orbit: n -> f(T^n x). Evaluation
// is deterministic and admits n = 0 (block constructions restart orbits at
// their left endpoints). Immutable after construction.
class ObservableSystem {
 public:
  ObservableSystem() = default;
  ObservableSystem(std::function<std::complex<double>(int64_t)> eval, double bound)
      : eval_(std::move(eval)), bound_(bound) {}

  std::complex<double> eval(int64_t n) const { return eval_(n); }
  double bound() const { return bound_; }

 private:
  std::function<std::complex<double>(int64_t)> eval_;
  double bound_ = 0.0;
};

// eval(n) = exp(2 pi i m (x0 + n alpha)). The phase is reduced mod 1 in long
// double before exponentiating so the error stays flat out to n ~ 1e9.
ObservableSystem make_rotation(double alpha, double x0, int64_t m);

// t(0) = 0, t(2n) = t(n), t(2n+1) = 1 - t(n); equivalently popcount parity.
int thue_morse_bit(int64_t n);

// eval(n) = w_{t(n + offset)}, |w0|, |w1| <= 1.
ObservableSystem make_thue_morse(int64_t offset, std::complex<double> w0, std::complex<double> w1);

// eval(n) = indicator of the B-free set, precomputed to table_horizon.
// Throws std::out_of_range past the horizon. eval(0) is 1 only for an empty
// base (every generator divides 0).
ObservableSystem make_bfree(const MultipleBase& base, int64_t table_horizon);

// Strictly increasing block endpoints b_1 < b_2 < ... with b_1 = 1. Block k
// is [b_k, b_{k+1}). gap_floor(k) = min_{j>=k} (b_{j+1} - b_j) is the finite
// witness of gaps tending to infinity: it is non-decreasing by construction,
// and the constructor flags partitions whose final gap floor is below the
// requested minimum.
class BlockPartition {
 public:
  explicit BlockPartition(std::vector<int64_t> points, int64_t min_final_gap = 0);

  // b_k = k^2 for k = 1..count+1 (count blocks)
  static BlockPartition squares(int64_t count);
  // b_k = k (unit blocks)
  static BlockPartition unit(int64_t count);

  int64_t point(int64_t k) const;      // b_k, 1-based, k <= points()
  int64_t points() const { return static_cast<int64_t>(b_.size()); }
  int64_t blocks() const { return static_cast<int64_t>(b_.size()) - 1; }
  int64_t gap_floor(int64_t k) const;  // 1-based, k <= blocks()
  bool low_gap_warning() const { return low_gap_warning_; }

  // k with b_k <= n < b_{k+1}; throws std::out_of_range for n < b_1 or
  // n >= b_{points}.
  int64_t block_of(int64_t n) const;

 private:
  std::vector<int64_t> b_;
  std::vector<int64_t> gap_floor_;
  bool low_gap_warning_ = false;
};

// eval(n) = block_systems[k].eval(n - b_k) on block k. One system per block.
ObservableSystem make_block_orbit(const BlockPartition& partition,
                                  std::vector<ObservableSystem> block_systems);

// A third root of unity e^{2 pi i j / 3}.
struct PhaseSigma3 {
  int j = 0;
  std::complex<double> value() const;
};

// Smallest j such that value()*z lies in the closed cone
// {0} ∪ {arg in [-pi/3, pi/3]}.
PhaseSigma3 align_to_cone(std::complex<double> z);

}  // namespace momolab
