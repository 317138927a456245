#include "momolab/averaging.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "momolab/kahan.hpp"

namespace momolab {

std::complex<double> cesaro_avg(const Seq& a, int64_t N) {
  if (N < 1) throw std::invalid_argument("cesaro_avg: N must be >= 1");
  KahanComplex acc;
  for (int64_t n = 1; n <= N; ++n) acc.add(a(n));
  return acc.value() / static_cast<double>(N);
}

std::complex<double> log_avg(const Seq& a, int64_t N) {
  if (N < 2) throw std::domain_error("log_avg: N must be >= 2 (log N <= 0 at N = 1)");
  KahanComplex acc;
  for (int64_t n = 1; n <= N; ++n) acc.add(a(n) / static_cast<double>(n));
  return acc.value() / std::log(static_cast<double>(N));
}

SbpResult summation_by_parts(const Seq& a, int64_t N) {
  if (N < 1) throw std::invalid_argument("summation_by_parts: N must be >= 1");
  KahanComplex lhs;
  KahanComplex rhs;
  KahanComplex partial;  // s_n
  for (int64_t n = 1; n <= N; ++n) {
    std::complex<double> an = a(n);
    lhs.add(an / static_cast<double>(n));
    partial.add(an);
    if (n <= N - 1)
      rhs.add(partial.value() / static_cast<double>(n) / static_cast<double>(n + 1));
  }
  rhs.add(partial.value() / static_cast<double>(N));
  return {lhs.value(), rhs.value()};
}

double log_density_at(const IndexSet& S, int64_t N) {
  if (N < 2) throw std::invalid_argument("log_density_at: N must be >= 2");
  if (N > S.horizon()) throw std::out_of_range("log_density_at: N beyond the set horizon");
  KahanSum acc;
  for (int64_t n = S.next(1); n != -1 && n <= N; n = S.next(n + 1))
    acc.add(1.0 / static_cast<double>(n));
  return acc.value() / std::log(static_cast<double>(N));
}

double natural_density_at(const IndexSet& S, int64_t N) {
  if (N < 1) throw std::invalid_argument("natural_density_at: N must be >= 1");
  if (N > S.horizon()) throw std::out_of_range("natural_density_at: N beyond the set horizon");
  return static_cast<double>(S.count_upto(N)) / static_cast<double>(N);
}

std::vector<double> log_density_trajectory(const IndexSet& S, std::span<const int64_t> checkpoints) {
  std::vector<double> out;
  out.reserve(checkpoints.size());
  KahanSum acc;
  int64_t n = S.next(1);
  for (int64_t cp : checkpoints) {
    if (cp > S.horizon()) throw std::out_of_range("log_density_trajectory: checkpoint beyond horizon");
    while (n != -1 && n <= cp) {
      acc.add(1.0 / static_cast<double>(n));
      n = S.next(n + 1);
    }
    out.push_back(acc.value() / std::log(static_cast<double>(cp)));
  }
  return out;
}

std::vector<double> natural_density_trajectory(const IndexSet& S, std::span<const int64_t> checkpoints) {
  std::vector<double> out;
  out.reserve(checkpoints.size());
  for (int64_t cp : checkpoints) out.push_back(natural_density_at(S, cp));
  return out;
}

TransferDiagnostic transfer_diagnostic(const Seq& a, const IndexSet& good, int64_t N) {
  if (N < 2) throw std::invalid_argument("transfer_diagnostic: N must be >= 2");
  const double logN = std::log(static_cast<double>(N));
  KahanComplex partial;
  KahanSum off_weight;     // sum of 1/n over the complement of good
  KahanComplex on_sum;     // sum of E_n/(n+1) over good
  double sup_cesaro = 0.0;  // C = max_n |E_n|
  for (int64_t n = 1; n <= N; ++n) {
    partial.add(a(n));
    std::complex<double> mean = partial.value() / static_cast<double>(n);
    sup_cesaro = std::max(sup_cesaro, std::abs(mean));
    if (good.contains(n))
      on_sum.add(mean / static_cast<double>(n + 1));
    else
      off_weight.add(1.0 / static_cast<double>(n));
  }
  TransferDiagnostic d;
  d.head = sup_cesaro / logN;
  d.off_good = sup_cesaro / logN * off_weight.value();
  d.on_good = std::abs(on_sum.value()) / logN;
  return d;
}

AveragingReport AveragingReport::over(const Seq& a, std::span<const int64_t> checkpoints) {
  AveragingReport report;
  report.checkpoints.assign(checkpoints.begin(), checkpoints.end());
  KahanComplex plain;
  KahanComplex harmonic;
  size_t next_cp = 0;
  int64_t last = checkpoints.empty() ? 0 : checkpoints.back();
  for (int64_t n = 1; n <= last; ++n) {
    std::complex<double> an = a(n);
    plain.add(an);
    harmonic.add(an / static_cast<double>(n));
    while (next_cp < checkpoints.size() && checkpoints[next_cp] == n) {
      report.cesaro.push_back(plain.value() / static_cast<double>(n));
      report.log.push_back(n >= 2 ? harmonic.value() / std::log(static_cast<double>(n))
                                  : harmonic.value());
      ++next_cp;
    }
  }
  return report;
}

void AveragingReport::write_csv(std::ostream& out) const {
  out << "N,re_cesaro,im_cesaro,re_log,im_log\n";
  char buf[256];
  for (size_t i = 0; i < checkpoints.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%lld,%.17g,%.17g,%.17g,%.17g\n",
                  static_cast<long long>(checkpoints[i]), cesaro[i].real(), cesaro[i].imag(),
                  log[i].real(), log[i].imag());
    out << buf;
  }
}

std::vector<int64_t> default_checkpoints(int64_t horizon) {
  std::vector<int64_t> cps;
  for (int64_t base = 10; base <= horizon; base *= 10) {
    for (int64_t m : {1, 2, 5}) {
      int64_t v = base * m;
      if (v <= horizon) cps.push_back(v);
    }
    if (base > horizon / 10) break;
  }
  if (cps.empty() || cps.back() != horizon) cps.push_back(horizon);
  std::sort(cps.begin(), cps.end());
  cps.erase(std::unique(cps.begin(), cps.end()), cps.end());
  return cps;
}

double harmonic_number(int64_t N) {
  KahanSum acc;
  for (int64_t n = 1; n <= N; ++n) acc.add(1.0 / static_cast<double>(n));
  return acc.value();
}

}  // namespace momolab
