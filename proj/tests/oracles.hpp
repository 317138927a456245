// Independent reference implementations used only by the tests. Everything
// here is deliberately naive (trial division, direct summation) so it shares
// no code path with the library it checks.
#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

namespace oracle {

// mu(n) by trial division
inline int mobius_trial(int64_t n) {
  if (n < 1) return 0;
  int factors = 0;
  for (int64_t p = 2; p * p <= n; ++p) {
    if (n % p == 0) {
      n /= p;
      if (n % p == 0) return 0;
      ++factors;
    }
  }
  if (n > 1) ++factors;
  return (factors % 2 == 0) ? 1 : -1;
}

// Lambda(n) by trial division: log p when n is a power of the prime p
inline double lambda_trial(int64_t n) {
  if (n < 2) return 0.0;
  for (int64_t p = 2; p * p <= n; ++p) {
    if (n % p == 0) {
      while (n % p == 0) n /= p;
      return n == 1 ? std::log(static_cast<double>(p)) : 0.0;
    }
  }
  return std::log(static_cast<double>(n));  // n itself is prime
}

inline bool is_prime_trial(int64_t n) {
  if (n < 2) return false;
  for (int64_t p = 2; p * p <= n; ++p)
    if (n % p == 0) return false;
  return true;
}

// simple independent prime list
inline std::vector<int64_t> primes_upto(int64_t n) {
  std::vector<int64_t> out;
  std::vector<uint8_t> comp(static_cast<size_t>(n) + 1, 0);
  for (int64_t i = 2; i <= n; ++i) {
    if (comp[static_cast<size_t>(i)]) continue;
    out.push_back(i);
    for (int64_t j = i + i; j <= n; j += i) comp[static_cast<size_t>(j)] = 1;
  }
  return out;
}

// psi(x) from an independent prime enumeration
inline double psi_from_primes(int64_t x) {
  double total = 0.0;
  for (int64_t p : primes_upto(x)) {
    double lp = std::log(static_cast<double>(p));
    for (int64_t q = p; q <= x; q *= p) {
      total += lp;
      if (q > x / p) break;
    }
  }
  return total;
}

// plain direct double summation, no compensation
template <class F>
double direct_sum(int64_t from, int64_t to, F term) {
  double s = 0.0;
  for (int64_t n = from; n <= to; ++n) s += term(n);
  return s;
}

template <class F>
std::complex<double> direct_csum(int64_t from, int64_t to, F term) {
  std::complex<double> s = 0.0;
  for (int64_t n = from; n <= to; ++n) s += term(n);
  return s;
}

// deterministic xorshift for test data
struct Rng {
  uint64_t s;
  explicit Rng(uint64_t seed) : s(seed ? seed : 1) {}
  uint64_t next_u64() {
    s ^= s << 13;
    s ^= s >> 7;
    s ^= s << 17;
    return s;
  }
  double next01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  // uniform in [-1, 1]
  double next_pm1() { return 2.0 * next01() - 1.0; }
};

}  // namespace oracle
