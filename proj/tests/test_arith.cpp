#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <numeric>

#include "momolab/arith.hpp"
#include "oracles.hpp"

using namespace momolab;

TEST_CASE("mu values on [1,10]") {
  ArithTable t = build_arith_table(10, 4);
  const int expected[10] = {1, -1, -1, 0, -1, 1, -1, 0, 0, 1};
  for (int64_t n = 1; n <= 10; ++n) {
    CHECK(t.mu[static_cast<size_t>(n)] == expected[n - 1]);
    CHECK(t.sqfree.contains(n) == (expected[n - 1] != 0));
  }
}

TEST_CASE("n_max = 1") {
  ArithTable t = build_arith_table(1, 1);
  CHECK(t.mu[1] == 1);
  CHECK(t.lambda[1] == 0.0);
  CHECK(t.sqfree.contains(1));
}

TEST_CASE("table independent of block size") {
  ArithTable ref = build_arith_table(10, 10);
  for (int64_t bs : {int64_t{1}, int64_t{3}}) {
    ArithTable t = build_arith_table(10, bs);
    CHECK(t.mu == ref.mu);
    CHECK(t.lambda == ref.lambda);
    CHECK(t.sqfree == ref.sqfree);
  }
  ArithTable big = build_arith_table(10000, 10000);
  oracle::Rng rng(7);
  for (int trial = 0; trial < 6; ++trial) {
    int64_t bs = 1 + static_cast<int64_t>(rng.next01() * 9000);
    ArithTable t = build_arith_table(10000, bs);
    CHECK(t.mu == big.mu);
    CHECK(t.lambda == big.lambda);
  }
}

TEST_CASE("capacity error") {
  CHECK_THROWS_AS(build_arith_table(1000000, 1024, /*budget_bytes=*/1000), std::length_error);
  CHECK_THROWS_AS(build_arith_table(0, 1), std::invalid_argument);
  CHECK_THROWS_AS(build_arith_table(10, 0), std::invalid_argument);
}

TEST_CASE("sieve equals trial division to 2*10^4") {
  ArithTable t = build_arith_table(20000, 4096);
  for (int64_t n = 1; n <= 20000; ++n) {
    CHECK(t.mu[static_cast<size_t>(n)] == oracle::mobius_trial(n));
    CHECK(t.lambda[static_cast<size_t>(n)] == oracle::lambda_trial(n));
  }
}

TEST_CASE("mobius sum identity sum_{d|n} mu(d) = [n=1]") {
  ArithTable t = build_arith_table(10000, 512);
  for (int64_t n = 1; n <= 10000; ++n) {
    int64_t s = 0;
    for (int64_t d = 1; d * d <= n; ++d) {
      if (n % d != 0) continue;
      s += t.mu[static_cast<size_t>(d)];
      if (d != n / d) s += t.mu[static_cast<size_t>(n / d)];
    }
    CHECK(s == (n == 1 ? 1 : 0));
  }
}

TEST_CASE("multiplicativity on random coprime pairs") {
  ArithTable t = build_arith_table(100000, 8192);
  oracle::Rng rng(42);
  int tested = 0;
  while (tested < 1000) {
    auto a = static_cast<int64_t>(2 + rng.next01() * 400);
    auto b = static_cast<int64_t>(2 + rng.next01() * 200);
    if (std::gcd(a, b) != 1 || a * b > t.n_max) continue;
    CHECK(t.mu[static_cast<size_t>(a * b)] ==
          t.mu[static_cast<size_t>(a)] * t.mu[static_cast<size_t>(b)]);
    ++tested;
  }
}

TEST_CASE("mertens") {
  ArithTable t = build_arith_table(10000, 1024);
  CHECK(mertens(t, 10) == -1);
  CHECK(mertens(t, 1) == 1);
  int64_t direct = 0;
  for (int64_t n = 1; n <= 10000; ++n) direct += oracle::mobius_trial(n);
  CHECK(mertens(t, 10000) == direct);
  CHECK(direct == -23);  // frozen from the trial-division oracle
  CHECK_THROWS_AS(mertens(t, 10001), std::out_of_range);

  auto prefix = mertens_prefix(t);
  CHECK(prefix[10] == -1);
  CHECK(prefix[10000] == -23);
}

TEST_CASE("chebyshev psi") {
  ArithTable t = build_arith_table(100000, 8192);
  // psi(10) = 3 log2 + 2 log3 + log5 + log7
  double expected = 3 * std::log(2.0) + 2 * std::log(3.0) + std::log(5.0) + std::log(7.0);
  CHECK(chebyshev_psi(t, 10) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(chebyshev_psi(t, 1) == 0.0);
  double independent = oracle::psi_from_primes(100000);
  CHECK(chebyshev_psi(t, 100000) == doctest::Approx(independent).epsilon(1e-12));
  CHECK(chebyshev_psi(t, 100000) / 100000.0 > 0.9);
  CHECK(chebyshev_psi(t, 100000) / 100000.0 < 1.1);
  CHECK_THROWS_AS(chebyshev_psi(t, 0), std::out_of_range);
}

TEST_CASE("bfree sets") {
  MultipleBase b23 = MultipleBase::from_list({2, 3}, 10);
  IndexSet s = bfree_set(b23, 10);
  CHECK(s.elements() == std::vector<int64_t>{1, 5, 7});

  IndexSet all = bfree_set(MultipleBase{}, 5);
  CHECK(all.elements() == std::vector<int64_t>{1, 2, 3, 4, 5});

  MultipleBase squares = MultipleBase::prime_squares(10);
  CHECK(squares.generators == std::vector<int64_t>{4, 9});
  IndexSet sq = bfree_set(squares, 10);
  CHECK(sq.size() == 7);
  CHECK(sq.elements() == std::vector<int64_t>{1, 2, 3, 5, 6, 7, 10});
}

TEST_CASE("bfree with prime squares equals the squarefree flags") {
  ArithTable t = build_arith_table(100000, 16384);
  IndexSet sq = bfree_set(MultipleBase::prime_squares(100000), 100000);
  CHECK(sq == t.sqfree);
}

TEST_CASE("base normalization") {
  MultipleBase b = MultipleBase::from_list({9, 3, 3, 1, 20, 100}, 50);
  CHECK(b.generators == std::vector<int64_t>{3, 9, 20});
  CHECK(b.primitive().generators == std::vector<int64_t>{3, 20});
}

TEST_CASE("binary cache round-trip") {
  ArithTable t = build_arith_table(12345, 1000);
  std::string path = (std::filesystem::temp_directory_path() / "momolab_table_test.bin").string();
  save_table(t, path);
  ArithTable r = load_table(path);
  CHECK(r.n_max == t.n_max);
  CHECK(r.mu == t.mu);
  CHECK(r.lambda == t.lambda);
  CHECK(r.sqfree == t.sqfree);
  std::filesystem::remove(path);
}
