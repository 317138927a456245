#include "momolab/arith.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "momolab/kahan.hpp"

namespace momolab {

namespace {

int64_t isqrt64(int64_t n) {
  if (n < 0) return 0;
  auto r = static_cast<int64_t>(std::sqrt(static_cast<double>(n)));
  while ((r + 1) * (r + 1) <= n) ++r;
  while (r * r > n) --r;
  return r;
}

// odd/even flags for primes up to `limit`, simple Eratosthenes
std::vector<int64_t> primes_upto(int64_t limit) {
  std::vector<int64_t> primes;
  if (limit < 2) return primes;
  std::vector<uint8_t> composite(static_cast<size_t>(limit) + 1, 0);
  for (int64_t i = 2; i * i <= limit; ++i)
    if (!composite[static_cast<size_t>(i)])
      for (int64_t j = i * i; j <= limit; j += i) composite[static_cast<size_t>(j)] = 1;
  for (int64_t i = 2; i <= limit; ++i)
    if (!composite[static_cast<size_t>(i)]) primes.push_back(i);
  return primes;
}

}  // namespace

ArithTable build_arith_table(int64_t n_max, int64_t block_size, int64_t budget_bytes) {
  if (n_max < 1) throw std::invalid_argument("build_arith_table: n_max must be >= 1");
  if (block_size < 1) throw std::invalid_argument("build_arith_table: block_size must be >= 1");
  // 1 byte mu + 8 bytes lambda + 1/8 byte flag, plus slack for the block state
  int64_t need = n_max * 10 + (block_size * 9);
  if (need > budget_bytes)
    throw std::length_error("build_arith_table: n_max exceeds the memory budget");

  ArithTable table;
  table.n_max = n_max;
  table.mu.assign(static_cast<size_t>(n_max) + 1, 1);
  table.mu[0] = 0;
  table.lambda.assign(static_cast<size_t>(n_max) + 1, 0.0);
  table.sqfree = IndexSet(n_max);

  const int64_t root = isqrt64(n_max);
  const std::vector<int64_t> small_primes = primes_upto(root);

  // lambda at proper prime powers p^k, k >= 1, p <= sqrt(n_max); primes above
  // the root are recognized per block below (their only power in range is p).
  for (int64_t p : small_primes) {
    double lp = std::log(static_cast<double>(p));
    for (int64_t q = p; q <= n_max; q *= p) {
      table.lambda[static_cast<size_t>(q)] = lp;
      if (q > n_max / p) break;  // q*p would overflow past n_max
    }
  }

  std::vector<int64_t> rem(static_cast<size_t>(block_size));
  std::vector<int8_t> sign(static_cast<size_t>(block_size));
  std::vector<uint8_t> squarefull(static_cast<size_t>(block_size));

  for (int64_t lo = 1; lo <= n_max; lo += block_size) {
    const int64_t hi = std::min(lo + block_size - 1, n_max);
    const int64_t len = hi - lo + 1;
    for (int64_t i = 0; i < len; ++i) {
      rem[static_cast<size_t>(i)] = lo + i;
      sign[static_cast<size_t>(i)] = 1;
      squarefull[static_cast<size_t>(i)] = 0;
    }
    for (int64_t p : small_primes) {
      if (p > hi) break;
      int64_t first = ((lo + p - 1) / p) * p;
      for (int64_t n = first; n <= hi; n += p) {
        size_t i = static_cast<size_t>(n - lo);
        int k = 0;
        while (rem[i] % p == 0) {
          rem[i] /= p;
          ++k;
        }
        sign[i] = static_cast<int8_t>(-sign[i]);
        if (k >= 2) squarefull[i] = 1;
      }
    }
    for (int64_t i = 0; i < len; ++i) {
      const int64_t n = lo + i;
      size_t idx = static_cast<size_t>(i);
      if (rem[idx] > 1) {
        // exactly one prime factor above sqrt(n_max) remains
        sign[idx] = static_cast<int8_t>(-sign[idx]);
        if (rem[idx] == n && n > 1) table.lambda[static_cast<size_t>(n)] = std::log(static_cast<double>(n));
      }
      if (n == 1) {
        table.mu[1] = 1;
        table.sqfree.insert(1);
        continue;
      }
      if (squarefull[idx]) {
        table.mu[static_cast<size_t>(n)] = 0;
      } else {
        table.mu[static_cast<size_t>(n)] = sign[idx];
        table.sqfree.insert(n);
      }
    }
  }
  return table;
}

int64_t mertens(const ArithTable& table, int64_t x) {
  if (x < 1 || x > table.n_max) throw std::out_of_range("mertens: x outside [1, n_max]");
  int64_t sum = 0;
  for (int64_t n = 1; n <= x; ++n) sum += table.mu[static_cast<size_t>(n)];
  return sum;
}

double chebyshev_psi(const ArithTable& table, int64_t x) {
  if (x < 1 || x > table.n_max) throw std::out_of_range("chebyshev_psi: x outside [1, n_max]");
  KahanSum acc;
  for (int64_t n = 1; n <= x; ++n) acc.add(table.lambda[static_cast<size_t>(n)]);
  return acc.value();
}

std::vector<int32_t> mertens_prefix(const ArithTable& table) {
  std::vector<int32_t> prefix(static_cast<size_t>(table.n_max) + 1, 0);
  int32_t running = 0;
  for (int64_t n = 1; n <= table.n_max; ++n) {
    running += table.mu[static_cast<size_t>(n)];
    prefix[static_cast<size_t>(n)] = running;
  }
  return prefix;
}

MultipleBase MultipleBase::from_list(std::vector<int64_t> gens, int64_t truncate_at) {
  std::sort(gens.begin(), gens.end());
  gens.erase(std::unique(gens.begin(), gens.end()), gens.end());
  std::vector<int64_t> kept;
  for (int64_t g : gens)
    if (g >= 2 && g <= truncate_at) kept.push_back(g);
  return MultipleBase{std::move(kept)};
}

MultipleBase MultipleBase::prime_squares(int64_t n_max) {
  std::vector<int64_t> gens;
  for (int64_t p : primes_upto(isqrt64(n_max))) gens.push_back(p * p);
  return MultipleBase{std::move(gens)};
}

MultipleBase MultipleBase::primitive() const {
  std::vector<int64_t> kept;
  for (int64_t g : generators) {
    bool divisible = false;
    for (int64_t h : kept)
      if (g % h == 0) {
        divisible = true;
        break;
      }
    if (!divisible) kept.push_back(g);
  }
  return MultipleBase{std::move(kept)};
}

IndexSet bfree_set(const MultipleBase& base, int64_t n_max) {
  if (n_max < 1) throw std::invalid_argument("bfree_set: n_max must be >= 1");
  std::vector<uint8_t> has_divisor(static_cast<size_t>(n_max) + 1, 0);
  for (int64_t g : base.generators) {
    if (g > n_max) continue;
    for (int64_t n = g; n <= n_max; n += g) has_divisor[static_cast<size_t>(n)] = 1;
  }
  IndexSet out(n_max);
  for (int64_t n = 1; n <= n_max; ++n)
    if (!has_divisor[static_cast<size_t>(n)]) out.insert(n);
  return out;
}

namespace {
constexpr uint32_t kCacheMagic = 0x4D4C5431;  // "MLT1"
constexpr uint32_t kCacheVersion = 1;
}  // namespace

void save_table(const ArithTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_table: cannot open " + path);
  uint64_t n_max = static_cast<uint64_t>(table.n_max);
  out.write(reinterpret_cast<const char*>(&kCacheMagic), sizeof kCacheMagic);
  out.write(reinterpret_cast<const char*>(&kCacheVersion), sizeof kCacheVersion);
  out.write(reinterpret_cast<const char*>(&n_max), sizeof n_max);
  // 2-bit codes mu+1 ∈ {0,1,2}, four per byte, n = 1..n_max
  std::vector<uint8_t> packed((static_cast<size_t>(table.n_max) + 3) / 4, 0);
  for (int64_t n = 1; n <= table.n_max; ++n) {
    uint8_t code = static_cast<uint8_t>(table.mu[static_cast<size_t>(n)] + 1);
    packed[static_cast<size_t>((n - 1) / 4)] |= static_cast<uint8_t>(code << (2 * ((n - 1) % 4)));
  }
  out.write(reinterpret_cast<const char*>(packed.data()), static_cast<std::streamsize>(packed.size()));
  out.write(reinterpret_cast<const char*>(table.lambda.data() + 1),
            static_cast<std::streamsize>(sizeof(double) * static_cast<size_t>(table.n_max)));
  if (!out) throw std::runtime_error("save_table: write failed for " + path);
}

ArithTable load_table(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_table: cannot open " + path);
  uint32_t magic = 0, version = 0;
  uint64_t n_max = 0;
  in.read(reinterpret_cast<char*>(&magic), sizeof magic);
  in.read(reinterpret_cast<char*>(&version), sizeof version);
  in.read(reinterpret_cast<char*>(&n_max), sizeof n_max);
  if (!in || magic != kCacheMagic) throw std::runtime_error("load_table: bad magic in " + path);
  if (version != kCacheVersion) throw std::runtime_error("load_table: unsupported version");

  ArithTable table;
  table.n_max = static_cast<int64_t>(n_max);
  table.mu.assign(static_cast<size_t>(n_max) + 1, 0);
  table.lambda.assign(static_cast<size_t>(n_max) + 1, 0.0);
  table.sqfree = IndexSet(table.n_max);

  std::vector<uint8_t> packed((n_max + 3) / 4, 0);
  in.read(reinterpret_cast<char*>(packed.data()), static_cast<std::streamsize>(packed.size()));
  in.read(reinterpret_cast<char*>(table.lambda.data() + 1),
          static_cast<std::streamsize>(sizeof(double) * n_max));
  if (!in) throw std::runtime_error("load_table: truncated file " + path);

  for (int64_t n = 1; n <= table.n_max; ++n) {
    uint8_t code = (packed[static_cast<size_t>((n - 1) / 4)] >> (2 * ((n - 1) % 4))) & 3u;
    table.mu[static_cast<size_t>(n)] = static_cast<int8_t>(static_cast<int>(code) - 1);
    if (table.mu[static_cast<size_t>(n)] != 0) table.sqfree.insert(n);
  }
  return table;
}

}  // namespace momolab
