#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "momolab/arith.hpp"
#include "momolab/averaging.hpp"
#include "oracles.hpp"

using namespace momolab;
using std::complex;

namespace {
Seq mu_seq(const ArithTable& t) {
  return [&t](int64_t n) { return complex<double>(t.mu[static_cast<size_t>(n)], 0.0); };
}
}  // namespace

TEST_CASE("cesaro_avg") {
  ArithTable t = build_arith_table(10, 10);
  CHECK(cesaro_avg(mu_seq(t), 10).real() == doctest::Approx(-0.1).epsilon(1e-15));
  CHECK(cesaro_avg([](int64_t) { return complex<double>(0.0); }, 100) == complex<double>(0.0));
  CHECK(cesaro_avg([](int64_t) { return complex<double>(1.0); }, 100).real() ==
        doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("log_avg") {
  ArithTable t = build_arith_table(10, 10);
  // sum mu(n)/n over n<=10 is 0.0904761904...; divided by log 10
  double direct = oracle::direct_sum(1, 10, [&](int64_t n) {
    return static_cast<double>(t.mu[static_cast<size_t>(n)]) / static_cast<double>(n);
  });
  double expected = direct / std::log(10.0);
  CHECK(expected == doctest::Approx(0.0392928).epsilon(1e-5));
  CHECK(log_avg(mu_seq(t), 10).real() == doctest::Approx(expected).epsilon(1e-14));
  CHECK(log_avg([](int64_t) { return complex<double>(0.0); }, 50) == complex<double>(0.0));
  double h10 = harmonic_number(10);
  CHECK(log_avg([](int64_t) { return complex<double>(1.0); }, 10).real() ==
        doctest::Approx(h10 / std::log(10.0)).epsilon(1e-14));
  CHECK_THROWS_AS(log_avg([](int64_t) { return complex<double>(1.0); }, 1), std::domain_error);
}

TEST_CASE("summation_by_parts exact examples") {
  auto ones = [](int64_t) { return complex<double>(1.0); };
  auto r = summation_by_parts(ones, 3);
  CHECK(r.lhs.real() == doctest::Approx(11.0 / 6.0).epsilon(1e-15));
  CHECK(std::abs(r.lhs - r.rhs) < 1e-15);

  auto zeros = [](int64_t) { return complex<double>(0.0); };
  auto z = summation_by_parts(zeros, 100);
  CHECK(z.lhs == complex<double>(0.0));
  CHECK(z.rhs == complex<double>(0.0));
}

TEST_CASE("summation_by_parts identity for mu at N = 10^4") {
  ArithTable t = build_arith_table(10000, 2048);
  auto r = summation_by_parts(mu_seq(t), 10000);
  CHECK(std::abs(r.lhs - r.rhs) < 1e-9);
}

TEST_CASE("summation_by_parts on random bounded sequences") {
  oracle::Rng rng(123);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<complex<double>> vals(10001);
    for (auto& v : vals) v = {rng.next_pm1(), rng.next_pm1()};
    Seq a = [&vals](int64_t n) { return vals[static_cast<size_t>(n)]; };
    auto r = summation_by_parts(a, 10000);
    CHECK(std::abs(r.lhs - r.rhs) < 1e-9);
  }
}

TEST_CASE("log identity: log_avg equals averaged Cesàro means") {
  // log N * log_avg(a, N) == E_N + sum_{n<=N-1} E_n/(n+1)
  oracle::Rng rng(5);
  std::vector<complex<double>> vals(2001);
  for (auto& v : vals) v = {rng.next_pm1(), rng.next_pm1()};
  Seq a = [&vals](int64_t n) { return vals[static_cast<size_t>(n)]; };
  const int64_t N = 2000;
  complex<double> partial = 0.0;
  complex<double> rhs = 0.0;
  for (int64_t n = 1; n <= N; ++n) {
    partial += a(n);
    complex<double> mean = partial / static_cast<double>(n);
    if (n <= N - 1) rhs += mean / static_cast<double>(n + 1);
    if (n == N) rhs += mean;
  }
  complex<double> lhs = log_avg(a, N) * std::log(static_cast<double>(N));
  CHECK(std::abs(lhs - rhs) < 1e-9);
}

TEST_CASE("log_density_at") {
  const int64_t N = 1000000;
  IndexSet odds = IndexSet::from_predicate(N, [](int64_t n) { return n % 2 == 1; });
  double reading = log_density_at(odds, N);
  double direct = oracle::direct_sum(1, N, [](int64_t n) {
    return n % 2 == 1 ? 1.0 / static_cast<double>(n) : 0.0;
  }) / std::log(static_cast<double>(N));
  CHECK(reading == doctest::Approx(direct).epsilon(1e-12));
  // the finite-N reading sits (gamma + log 2)/2 / log N above 1/2
  CHECK(reading == doctest::Approx(0.545976).epsilon(1e-4));
  CHECK(std::abs(reading - 0.5) < 0.05);

  IndexSet all = IndexSet::full(1000);
  CHECK(log_density_at(all, 1000) ==
        doctest::Approx(harmonic_number(1000) / std::log(1000.0)).epsilon(1e-13));
  IndexSet none(1000);
  CHECK(log_density_at(none, 1000) == 0.0);
  CHECK_THROWS_AS(log_density_at(none, 2000), std::out_of_range);
}

TEST_CASE("natural_density_at") {
  IndexSet odds = IndexSet::from_predicate(10, [](int64_t n) { return n % 2 == 1; });
  CHECK(natural_density_at(odds, 10) == doctest::Approx(0.5));
  IndexSet s = IndexSet::of({1, 5, 7}, 10);
  CHECK(natural_density_at(s, 10) == doctest::Approx(0.3));
  CHECK(natural_density_at(IndexSet::full(64), 64) == doctest::Approx(1.0));
}

TEST_CASE("density trajectories match pointwise evaluators") {
  IndexSet s = IndexSet::from_predicate(5000, [](int64_t n) { return n % 3 != 0; });
  std::vector<int64_t> cps = {10, 100, 1000, 5000};
  auto lt = log_density_trajectory(s, cps);
  auto nt = natural_density_trajectory(s, cps);
  for (size_t i = 0; i < cps.size(); ++i) {
    CHECK(lt[i] == doctest::Approx(log_density_at(s, cps[i])).epsilon(1e-13));
    CHECK(nt[i] == doctest::Approx(natural_density_at(s, cps[i])).epsilon(1e-15));
  }
  for (size_t i = 0; i + 1 < cps.size(); ++i)
    CHECK(s.count_upto(cps[i]) <= s.count_upto(cps[i + 1]));
  for (double d : nt) {
    CHECK(d >= 0.0);
    CHECK(d <= 1.0);
  }
}

TEST_CASE("transfer_diagnostic") {
  auto zero = [](int64_t) { return complex<double>(0.0); };
  IndexSet evens = IndexSet::from_predicate(10000, [](int64_t n) { return n % 2 == 0; });
  auto d0 = transfer_diagnostic(zero, evens, 10000);
  CHECK(d0.head == 0.0);
  CHECK(d0.off_good == 0.0);
  CHECK(d0.on_good == 0.0);

  ArithTable t = build_arith_table(10000, 4096);
  Seq mu = mu_seq(t);
  auto dmu = transfer_diagnostic(mu, IndexSet::full(10000), 10000);
  CHECK(dmu.off_good == 0.0);  // complement is empty

  // alternating sequence, good = evens: the three terms dominate |log_avg|
  Seq alt = [](int64_t n) { return complex<double>(n % 2 == 0 ? 1.0 : -1.0, 0.0); };
  auto d = transfer_diagnostic(alt, evens, 10000);
  double la = std::abs(log_avg(alt, 10000));
  CHECK(d.sum() >= la - 1e-9);
}

TEST_CASE("transfer_diagnostic dominates |log_avg| on random data") {
  oracle::Rng rng(99);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<complex<double>> vals(3001);
    for (auto& v : vals) v = {rng.next_pm1(), rng.next_pm1()};
    Seq a = [&vals](int64_t n) { return vals[static_cast<size_t>(n)]; };
    int64_t mod = 2 + static_cast<int64_t>(rng.next01() * 5);
    IndexSet good = IndexSet::from_predicate(3000, [mod](int64_t n) { return n % mod != 0; });
    auto d = transfer_diagnostic(a, good, 3000);
    CHECK(d.sum() >= std::abs(log_avg(a, 3000)) - 1e-9);
  }
}

TEST_CASE("AveragingReport CSV") {
  ArithTable t = build_arith_table(100, 100);
  std::vector<int64_t> cps = {10, 100};
  Seq mu = mu_seq(t);
  auto report = AveragingReport::over(mu, cps);
  CHECK(report.cesaro[0].real() == doctest::Approx(-0.1).epsilon(1e-15));
  CHECK(report.log[0].real() == doctest::Approx(log_avg(mu, 10).real()).epsilon(1e-14));
  std::ostringstream out;
  report.write_csv(out);
  std::string csv = out.str();
  CHECK(csv.rfind("N,re_cesaro,im_cesaro,re_log,im_log\n", 0) == 0);
  CHECK(csv.find("\n10,") != std::string::npos);
}

TEST_CASE("default_checkpoints ladder") {
  auto cps = default_checkpoints(1000000);
  CHECK(cps.front() == 10);
  CHECK(cps.back() == 1000000);
  for (size_t i = 0; i + 1 < cps.size(); ++i) CHECK(cps[i] < cps[i + 1]);
  auto odd_end = default_checkpoints(777);
  CHECK(odd_end.back() == 777);
}
