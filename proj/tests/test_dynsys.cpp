#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "momolab/dynsys.hpp"
#include "oracles.hpp"

using namespace momolab;
using std::complex;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("rotation") {
  auto constant = make_rotation(0.37, 0.11, 0);
  for (int64_t n : {0, 1, 7, 1000})
    CHECK(std::abs(constant.eval(n) - complex<double>(1.0, 0.0)) < 1e-15);

  double alpha = 0.234;
  auto r = make_rotation(alpha, 0.0, 1);
  CHECK(std::abs(r.eval(1) - std::polar(1.0, 2 * kPi * alpha)) < 1e-14);

  auto half = make_rotation(0.5, 0.0, 1);
  for (int64_t n = 0; n <= 20; ++n)
    CHECK(std::abs(half.eval(n) - complex<double>(n % 2 == 0 ? 1.0 : -1.0, 0.0)) < 1e-13);
}

TEST_CASE("rotation phase accuracy at large n") {
  // reduction happens in long double; compare against direct mod arithmetic
  double alpha = 0.61803398874989485;
  auto r = make_rotation(alpha, 0.25, 3);
  int64_t n = 999999937;
  long double ph = fmodl(0.25L + static_cast<long double>(n) * static_cast<long double>(alpha), 1.0L);
  ph = fmodl(ph * 3.0L, 1.0L);
  auto expected = std::polar(1.0, 2 * kPi * static_cast<double>(ph));
  CHECK(std::abs(r.eval(n) - expected) < 1e-9);
  CHECK(std::abs(std::abs(r.eval(n)) - 1.0) < 1e-15);
}

TEST_CASE("thue_morse bits") {
  const int expected[8] = {0, 1, 1, 0, 1, 0, 0, 1};
  for (int64_t n = 0; n < 8; ++n) CHECK(thue_morse_bit(n) == expected[n]);
  for (int64_t n = 0; n <= 100000; ++n) {
    CHECK(thue_morse_bit(2 * n) == thue_morse_bit(n));
    CHECK(thue_morse_bit(2 * n + 1) == 1 - thue_morse_bit(n));
  }
}

TEST_CASE("thue_morse observable") {
  complex<double> c{0.3, -0.4};
  auto constant = make_thue_morse(0, c, c);
  for (int64_t n : {0, 1, 5, 31}) CHECK(constant.eval(n) == c);

  auto tm = make_thue_morse(1, {1.0, 0.0}, {-1.0, 0.0});
  CHECK(tm.eval(0) == complex<double>(-1.0, 0.0));  // t(1) = 1 -> w1

  auto plain = make_thue_morse(0, {1.0, 0.0}, {-1.0, 0.0});
  for (int64_t n = 0; n < 64; ++n)
    CHECK(plain.eval(n) == complex<double>(thue_morse_bit(n) ? -1.0 : 1.0, 0.0));
}

TEST_CASE("bfree observable") {
  auto evens_free = make_bfree(MultipleBase::from_list({2}, 100), 100);
  CHECK(evens_free.eval(3) == complex<double>(1.0, 0.0));
  CHECK(evens_free.eval(4) == complex<double>(0.0, 0.0));

  auto all = make_bfree(MultipleBase{}, 10);
  for (int64_t n = 0; n <= 10; ++n) CHECK(all.eval(n) == complex<double>(1.0, 0.0));

  auto b23 = make_bfree(MultipleBase::from_list({2, 3}, 100), 100);
  const double expected[10] = {1, 0, 0, 0, 1, 0, 1, 0, 0, 0};
  for (int64_t n = 1; n <= 10; ++n) CHECK(b23.eval(n).real() == expected[n - 1]);
  CHECK(b23.eval(0) == complex<double>(0.0, 0.0));  // every generator divides 0
  CHECK_THROWS_AS(b23.eval(101), std::out_of_range);
}

TEST_CASE("bounds hold on random queries") {
  oracle::Rng rng(17);
  auto rot = make_rotation(0.77, 0.2, 5);
  auto tm = make_thue_morse(3, {0.6, 0.3}, {-0.2, 0.9});
  auto bf = make_bfree(MultipleBase::from_list({2, 3, 25}, 100000), 100000);
  for (int trial = 0; trial < 10000; ++trial) {
    auto n = static_cast<int64_t>(rng.next01() * 99999) + 1;
    CHECK(std::abs(rot.eval(n)) <= rot.bound() + 1e-12);
    CHECK(std::abs(tm.eval(n)) <= tm.bound() + 1e-12);
    CHECK(std::abs(bf.eval(n)) <= bf.bound() + 1e-12);
  }
}

TEST_CASE("block partition") {
  BlockPartition p({1, 3, 7, 20});
  CHECK(p.blocks() == 3);
  CHECK(p.point(1) == 1);
  CHECK(p.gap_floor(1) == 2);  // min(2, 4, 13)
  CHECK(p.gap_floor(2) == 4);
  CHECK(p.gap_floor(3) == 13);
  // gap_floor is non-decreasing
  for (int64_t k = 1; k < p.blocks(); ++k) CHECK(p.gap_floor(k) <= p.gap_floor(k + 1));
  CHECK(p.block_of(1) == 1);
  CHECK(p.block_of(6) == 2);
  CHECK(p.block_of(19) == 3);
  CHECK_THROWS_AS(p.block_of(0), std::out_of_range);
  CHECK_THROWS_AS(p.block_of(20), std::out_of_range);

  CHECK_THROWS_AS(BlockPartition({2, 5}), std::invalid_argument);   // must start at 1
  CHECK_THROWS_AS(BlockPartition({1, 5, 5}), std::invalid_argument);

  BlockPartition warned({1, 2, 3, 4}, /*min_final_gap=*/5);
  CHECK(warned.low_gap_warning());
  BlockPartition fine({1, 10, 30}, 5);
  CHECK(!fine.low_gap_warning());

  BlockPartition sq = BlockPartition::squares(3);
  CHECK(sq.point(1) == 1);
  CHECK(sq.point(4) == 16);
}

TEST_CASE("block orbit: single block is the orbit shifted by one") {
  auto base = make_rotation(0.31, 0.05, 2);
  const int64_t N = 50;
  BlockPartition single({1, N + 1});
  auto orbit = make_block_orbit(single, {base});
  for (int64_t n = 1; n <= N; ++n) CHECK(orbit.eval(n) == base.eval(n - 1));
}

TEST_CASE("block orbit: per-block restarts at the running endpoint reproduce the shifted orbit") {
  // with block k evaluating j -> base(j + b_k - 1), the composite is
  // n -> base(n - 1) exactly, for any partition
  auto base = make_rotation(0.413, 0.0, 1);
  BlockPartition p = BlockPartition::unit(30);  // b_k = k
  std::vector<ObservableSystem> systems;
  for (int64_t k = 1; k <= p.blocks(); ++k) {
    int64_t bk = p.point(k);
    systems.emplace_back([base, bk](int64_t j) { return base.eval(j + bk - 1); }, base.bound());
  }
  auto orbit = make_block_orbit(p, systems);
  for (int64_t n = 1; n <= 30; ++n) CHECK(orbit.eval(n) == base.eval(n - 1));
}

TEST_CASE("block orbit: piecewise constants break at the squares") {
  BlockPartition p = BlockPartition::squares(5);
  std::vector<ObservableSystem> systems;
  for (int64_t k = 1; k <= 5; ++k)
    systems.emplace_back([k](int64_t) { return complex<double>(static_cast<double>(k), 0.0); }, 5.0);
  auto orbit = make_block_orbit(p, systems);
  for (int64_t n = 1; n < 36; ++n) {
    auto k = static_cast<int64_t>(std::sqrt(static_cast<double>(n)) + 1e-9);
    while ((k + 1) * (k + 1) <= n) ++k;
    CHECK(orbit.eval(n).real() == static_cast<double>(k));
  }
  CHECK_THROWS_AS(orbit.eval(0), std::out_of_range);
}

TEST_CASE("align_to_cone") {
  CHECK(align_to_cone({1.0, 0.0}).j == 0);
  CHECK(align_to_cone({0.0, 0.0}).j == 0);
  CHECK(align_to_cone({0.0, 1.0}).j == 2);  // e^{4 pi i/3} * i has argument -pi/6
}

TEST_CASE("align_to_cone lands in the closed cone on random inputs") {
  oracle::Rng rng(31);
  constexpr double kThird = kPi / 3.0;
  for (int trial = 0; trial < 1000; ++trial) {
    complex<double> z{rng.next_pm1() * 10, rng.next_pm1() * 10};
    auto e = align_to_cone(z);
    if (z == complex<double>(0.0, 0.0)) continue;
    CHECK(std::abs(std::arg(e.value() * z)) <= kThird + 1e-12);
  }
  // boundary: arg exactly pi/3 is accepted, smallest j wins
  complex<double> edge = std::polar(1.0, kPi / 3.0);
  CHECK(align_to_cone(edge).j == 0);
}
