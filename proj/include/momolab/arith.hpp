#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "momolab/index_set.hpp"

namespace momolab {

// Cached arithmetic functions on [1, n_max]: Möbius mu, von Mangoldt lambda
// (natural log units), and the square-free indicator. Built once by a
// segmented sieve, immutable afterwards; queries are plain array reads.
struct ArithTable {
  int64_t n_max = 0;
  std::vector<int8_t> mu;      // mu[n] ∈ {-1, 0, +1}, index 0 unused
  std::vector<double> lambda;  // lambda[p^k] = log p, else 0
  IndexSet sqfree;             // {n : mu[n] != 0}
};

// Memory guard: per-n cost is 1 byte mu + 8 bytes lambda + 1 bit flag.
inline constexpr int64_t kDefaultTableBudgetBytes = int64_t{2} << 30;

// Segmented sieve over blocks of `block_size`; the result does not depend on
// the partition. Throws std::length_error when the table would exceed
// `budget_bytes`, std::invalid_argument on bad arguments.
ArithTable build_arith_table(int64_t n_max, int64_t block_size,
                             int64_t budget_bytes = kDefaultTableBudgetBytes);

// M(x) = sum_{n<=x} mu(n). Throws std::out_of_range unless 1 <= x <= n_max.
int64_t mertens(const ArithTable& table, int64_t x);

// psi(x) = sum_{n<=x} lambda(n), compensated accumulation.
double chebyshev_psi(const ArithTable& table, int64_t x);

// Prefix sums M(0..n_max) for pipelines that evaluate M at many points.
std::vector<int32_t> mertens_prefix(const ArithTable& table);

// The generator set B of a set of multiples. Normalization sorts, removes
// duplicates, drops generators < 2 and generators > truncation horizon.
struct MultipleBase {
  std::vector<int64_t> generators;

  static MultipleBase from_list(std::vector<int64_t> gens, int64_t truncate_at);
  // {p^2 : p prime, p^2 <= n_max}
  static MultipleBase prime_squares(int64_t n_max);
  // drop generators divisible by an earlier one
  MultipleBase primitive() const;
};

// The B-free integers in [1, n_max]: no divisor in the generator set.
// Empty base gives the full set.
IndexSet bfree_set(const MultipleBase& base, int64_t n_max);

// Binary cache: header (magic, version, n_max), 2-bit mu codes packed four
// per byte, then raw 64-bit lambda values. Round-trips bit-exactly.
void save_table(const ArithTable& table, const std::string& path);
ArithTable load_table(const std::string& path);

}  // namespace momolab
