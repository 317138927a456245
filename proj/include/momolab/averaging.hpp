#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "momolab/index_set.hpp"

namespace momolab {

// Sequences are pull-based: index -> value, 1-based. Nothing is materialized
// beyond the sieve tables.
using Seq = std::function<std::complex<double>(int64_t)>;
using RealSeq = std::function<double(int64_t)>;

// (1/N) sum_{n<=N} a_n
std::complex<double> cesaro_avg(const Seq& a, int64_t N);

// (1/log N) sum_{n<=N} a_n / n; natural log. Throws std::domain_error for N < 2.
std::complex<double> log_avg(const Seq& a, int64_t N);

// Abel summation: sum_{n<=N} a_n/n  ==  sum_{n<=N-1} (s_n/n)/(n+1) + s_N/N,
// s_n the partial sums. Both sides evaluated independently in one pass.
struct SbpResult {
  std::complex<double> lhs;
  std::complex<double> rhs;
};
SbpResult summation_by_parts(const Seq& a, int64_t N);

// (1/log N) sum_{n<=N, n in S} 1/n. The finite-N reading of the logarithmic
// density; it may exceed 1 by the harmonic excess H_N/log N - 1.
double log_density_at(const IndexSet& S, int64_t N);

// |S ∩ [1,N]| / N
double natural_density_at(const IndexSet& S, int64_t N);

// one streaming pass over increasing checkpoints
std::vector<double> log_density_trajectory(const IndexSet& S, std::span<const int64_t> checkpoints);
std::vector<double> natural_density_trajectory(const IndexSet& S, std::span<const int64_t> checkpoints);

// The three bound terms from the Cesàro-to-logarithmic transfer decomposition,
// with E_n the running Cesàro average and C = max_{n<=N} |E_n|:
//   head     = C / log N
//   off_good = (C/log N) * sum_{n<=N, n not in good} 1/n
//   on_good  = |(1/log N) * sum_{n<=N, n in good} E_n/(n+1)|
// head + off_good + on_good >= |log_avg(a, N)| up to rounding.
struct TransferDiagnostic {
  double head = 0.0;
  double off_good = 0.0;
  double on_good = 0.0;
  double sum() const { return head + off_good + on_good; }
};
TransferDiagnostic transfer_diagnostic(const Seq& a, const IndexSet& good, int64_t N);

// Aligned Cesàro / logarithmic trajectories of one sequence.
struct AveragingReport {
  std::vector<int64_t> checkpoints;
  std::vector<std::complex<double>> cesaro;
  std::vector<std::complex<double>> log;

  static AveragingReport over(const Seq& a, std::span<const int64_t> checkpoints);
  // columns: N, re(cesaro), im(cesaro), re(log), im(log)
  void write_csv(std::ostream& out) const;
};

// 1-2-5 ladder from 10 up to and including the horizon.
std::vector<int64_t> default_checkpoints(int64_t horizon);

// H_N = sum_{n<=N} 1/n
double harmonic_number(int64_t N);

}  // namespace momolab
