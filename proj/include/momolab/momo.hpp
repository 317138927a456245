#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "momolab/averaging.hpp"
#include "momolab/dynsys.hpp"

namespace momolab {

enum class Normalization { cesaro, logarithmic };
enum class Phi { identity, square };

struct MomoStat {
  int64_t K = 0;
  double value = 0.0;
  Normalization normalization = Normalization::cesaro;
};

struct WindowStatConfig {
  int64_t H = 1;
  Phi phi = Phi::identity;
  std::vector<int64_t> checkpoints;  // optional; used by trajectory callers
};

// (1/N) sum_{n<=N} weights(n) f(T^n x)
std::complex<double> weighted_cesaro(const ObservableSystem& system, const RealSeq& weights,
                                     int64_t N);

// (1/log N) sum_{n<=N} weights(n) f(T^n x) / n
std::complex<double> weighted_log(const ObservableSystem& system, const RealSeq& weights,
                                  int64_t N);

// max over the family of |weighted_cesaro|; a certified lower bound of the
// sup-norm average over a grid of starting points.
double uniform_norm_avg(std::span<const ObservableSystem> family, const RealSeq& weights,
                        int64_t N);

// Block statistic over [b_k, b_{k+1}), k <= K, orbits restarted per block:
//   cesaro:       (1/b_{K+1})    sum_k |sum_n w(n) f_k(n - b_k)|
//   logarithmic:  (1/log b_{K+1}) sum_k |sum_n w(n) f_k(n - b_k) / n|
MomoStat strong_momo_stat(const BlockPartition& partition,
                          std::span<const ObservableSystem> block_systems, const RealSeq& weights,
                          int64_t K, Normalization normalization);

// The telescoping identity behind block/uniform equivalence, on a plain
// (non-restarted) orbit:
//   (1/b_{k+1}) sum_{b_k<=n<b_{k+1}}  ==  (1/b_{k+1}) sum_{n<b_{k+1}}
//                                        - (b_k/b_{k+1}) (1/b_k) sum_{n<b_k}
struct TelescopePair {
  std::complex<double> lhs;
  std::complex<double> rhs;
};
TelescopePair telescoping_check(const RealSeq& weights, const ObservableSystem& system, int64_t k,
                                const BlockPartition& partition);

// (1/log N) sum_{n<=N} (1/n) phi(|(1/H) sum_{1<=h<=H} v_{n+h}|).
// Values must be defined up to N + H.
double window_stat(const Seq& values, const WindowStatConfig& config, int64_t N);

// One streaming pass over increasing checkpoints.
std::vector<double> window_stat_trajectory(const Seq& values, int64_t H, Phi phi,
                                           std::span<const int64_t> checkpoints);

// window_stat with phi = square; the second-moment statistic used by the
// prime number theorem pipeline.
double chowla2_window(const Seq& c, int64_t H, int64_t N);

// |D_H(alpha)|^2 / H^2 with D_H = sum_{h<=H} e(h alpha); the closed form the
// square-window statistic of a pure character must match.
double dirichlet_kernel_sq(double alpha, int64_t H);

}  // namespace momolab
