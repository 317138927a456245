#include "momolab/momo.hpp"

#include <cmath>
#include <stdexcept>

#include "momolab/kahan.hpp"

namespace momolab {

std::complex<double> weighted_cesaro(const ObservableSystem& system, const RealSeq& weights,
                                     int64_t N) {
  if (N < 1) throw std::invalid_argument("weighted_cesaro: N must be >= 1");
  KahanComplex acc;
  for (int64_t n = 1; n <= N; ++n) acc.add(weights(n) * system.eval(n));
  return acc.value() / static_cast<double>(N);
}

std::complex<double> weighted_log(const ObservableSystem& system, const RealSeq& weights,
                                  int64_t N) {
  if (N < 2) throw std::domain_error("weighted_log: N must be >= 2");
  KahanComplex acc;
  for (int64_t n = 1; n <= N; ++n) acc.add(weights(n) * system.eval(n) / static_cast<double>(n));
  return acc.value() / std::log(static_cast<double>(N));
}

double uniform_norm_avg(std::span<const ObservableSystem> family, const RealSeq& weights,
                        int64_t N) {
  if (family.empty()) throw std::invalid_argument("uniform_norm_avg: empty family");
  double best = 0.0;
  for (const auto& system : family)
    best = std::max(best, std::abs(weighted_cesaro(system, weights, N)));
  return best;
}

MomoStat strong_momo_stat(const BlockPartition& partition,
                          std::span<const ObservableSystem> block_systems, const RealSeq& weights,
                          int64_t K, Normalization normalization) {
  if (K < 1 || K > partition.blocks())
    throw std::invalid_argument("strong_momo_stat: K outside [1, blocks]");
  if (static_cast<int64_t>(block_systems.size()) < K)
    throw std::invalid_argument("strong_momo_stat: need a system per block");
  KahanSum total;
  for (int64_t k = 1; k <= K; ++k) {
    const int64_t lo = partition.point(k);
    const int64_t hi = partition.point(k + 1);  // exclusive
    const ObservableSystem& sys = block_systems[static_cast<size_t>(k - 1)];
    KahanComplex block;
    for (int64_t n = lo; n < hi; ++n) {
      std::complex<double> term = weights(n) * sys.eval(n - lo);
      if (normalization == Normalization::logarithmic) term /= static_cast<double>(n);
      block.add(term);
    }
    total.add(std::abs(block.value()));
  }
  const double b_top = static_cast<double>(partition.point(K + 1));
  const double norm =
      normalization == Normalization::cesaro ? 1.0 / b_top : 1.0 / std::log(b_top);
  return MomoStat{K, norm * total.value(), normalization};
}

TelescopePair telescoping_check(const RealSeq& weights, const ObservableSystem& system, int64_t k,
                                const BlockPartition& partition) {
  const int64_t b_k = partition.point(k);
  const int64_t b_next = partition.point(k + 1);
  KahanComplex prefix_low;   // sum over [1, b_k)
  KahanComplex prefix_high;  // sum over [1, b_{k+1})
  KahanComplex inner;        // sum over [b_k, b_{k+1})
  for (int64_t n = 1; n < b_next; ++n) {
    std::complex<double> term = weights(n) * system.eval(n);
    prefix_high.add(term);
    if (n < b_k) prefix_low.add(term);
    if (n >= b_k) inner.add(term);
  }
  const double b_top = static_cast<double>(b_next);
  std::complex<double> lhs = inner.value() / b_top;
  std::complex<double> rhs = prefix_high.value() / b_top -
                             (static_cast<double>(b_k) / b_top) *
                                 (prefix_low.value() / static_cast<double>(b_k));
  return {lhs, rhs};
}

namespace {

double apply_phi(Phi phi, double s) {
  return phi == Phi::square ? s * s : s;
}

}  // namespace

std::vector<double> window_stat_trajectory(const Seq& values, int64_t H, Phi phi,
                                           std::span<const int64_t> checkpoints) {
  if (H < 1) throw std::invalid_argument("window_stat_trajectory: H must be >= 1");
  if (checkpoints.empty()) return {};
  std::vector<double> out;
  out.reserve(checkpoints.size());
  const int64_t last = checkpoints.back();

  // sliding window sum over (n, n+H]; re-summed periodically so add/subtract
  // drift cannot accumulate over 1e9 steps
  constexpr int64_t kRefresh = 1024;
  KahanComplex window;
  for (int64_t h = 1; h <= H; ++h) window.add(values(1 + h));
  std::complex<double> win = window.value();

  KahanSum stat;
  size_t next_cp = 0;
  for (int64_t n = 1; n <= last; ++n) {
    if (n > 1) {
      win += values(n + H) - values(n);
      if (n % kRefresh == 0) {
        KahanComplex fresh;
        for (int64_t h = 1; h <= H; ++h) fresh.add(values(n + h));
        win = fresh.value();
      }
    }
    stat.add(apply_phi(phi, std::abs(win / static_cast<double>(H))) / static_cast<double>(n));
    while (next_cp < checkpoints.size() && checkpoints[next_cp] == n) {
      if (n < 2) throw std::domain_error("window_stat_trajectory: checkpoint below 2");
      out.push_back(stat.value() / std::log(static_cast<double>(n)));
      ++next_cp;
    }
  }
  return out;
}

double window_stat(const Seq& values, const WindowStatConfig& config, int64_t N) {
  if (N < 2) throw std::domain_error("window_stat: N must be >= 2");
  const int64_t cps[1] = {N};
  return window_stat_trajectory(values, config.H, config.phi, cps)[0];
}

double chowla2_window(const Seq& c, int64_t H, int64_t N) {
  return window_stat(c, WindowStatConfig{H, Phi::square, {}}, N);
}

double dirichlet_kernel_sq(double alpha, int64_t H) {
  KahanComplex kernel;
  for (int64_t h = 1; h <= H; ++h) {
    double t = 6.283185307179586476925286766559 * std::fmod(static_cast<double>(h) * alpha, 1.0);
    kernel.add({std::cos(t), std::sin(t)});
  }
  double d = std::abs(kernel.value());
  return d * d / (static_cast<double>(H) * static_cast<double>(H));
}

}  // namespace momolab
