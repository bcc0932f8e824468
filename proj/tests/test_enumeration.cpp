#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <numeric>
#include <set>
#include <vector>

#include "euclid/enumeration.hpp"
#include "euclid/transfer_operator.hpp"
#include "oracles.hpp"

using namespace euclid;

TEST_CASE("pair counts") {
  CHECK(count_omega(2) == 1);
  CHECK(count_omega(3) == 3);
  CHECK(count_omega(4) == 5);
  CHECK(count_omega(10) == 31);
  CHECK(count_all_pairs(2) == 1);
  CHECK(count_all_pairs(10) == 45);
  CHECK(count_all_pairs(1000) == 499500);

  // Brute-force cross check on a moderate range.
  std::uint64_t brute = 0;
  for (std::uint64_t v = 2; v <= 500; ++v)
    for (std::uint64_t u = 1; u < v; ++u)
      if (std::gcd(u, v) == 1) ++brute;
  CHECK(count_omega(500) == brute);
}

TEST_CASE("smallest prime factor sieve") {
  SpfSieve sieve(60);
  std::vector<std::uint32_t> primes;
  for (std::uint64_t v = 2; v <= 60; ++v) {
    sieve.distinct_primes(v, primes);
    std::set<std::uint32_t> got(primes.begin(), primes.end());
    std::set<std::uint32_t> want;
    std::uint64_t m = v;
    for (std::uint64_t p = 2; p * p <= m; ++p)
      while (m % p == 0) {
        want.insert(static_cast<std::uint32_t>(p));
        m /= p;
      }
    if (m > 1) want.insert(static_cast<std::uint32_t>(m));
    CHECK((got == want));
  }
}

TEST_CASE("stream_pairs visits exactly the pair set") {
  std::set<std::pair<std::uint64_t, std::uint64_t>> reduced, all;
  stream_pairs(PairSet{12, PairKind::Reduced},
               [&](std::uint64_t u, std::uint64_t v) { reduced.emplace(u, v); });
  stream_pairs(PairSet{12, PairKind::All},
               [&](std::uint64_t u, std::uint64_t v) { all.emplace(u, v); });
  std::set<std::pair<std::uint64_t, std::uint64_t>> want_reduced, want_all;
  for (std::uint64_t v = 2; v <= 12; ++v)
    for (std::uint64_t u = 1; u < v; ++u) {
      want_all.emplace(u, v);
      if (std::gcd(u, v) == 1) want_reduced.emplace(u, v);
    }
  CHECK((reduced == want_reduced));
  CHECK((all == want_all));
}

TEST_CASE("accumulate_costs matches the brute-force oracle") {
  const std::vector<CostSpec> costs{CostSpec::unit(), CostSpec::digit_indicator(1),
                                    CostSpec(std::vector<double>{0.5, 2.25, 0.0}, 1.75)};
  const std::vector<CostReference> refs{CostReference::LogV, CostReference::LogN,
                                        CostReference::LogVOverGcd};
  const double mu = 0.7;
  int failures = 0;
  for (const auto& c : costs) {
    for (std::uint64_t n : {2ull, 3ull, 17ull, 60ull, 120ull}) {
      for (PairKind kind : {PairKind::Reduced, PairKind::All}) {
        for (CostReference ref : refs) {
          const auto got = accumulate_costs(PairSet{n, kind}, c, mu, 6, ref);
          const auto want = oracle::accumulate(n, kind, c, mu, 6, ref);
          if (got.count != want.count) ++failures;
          for (int p = 0; p <= 6; ++p) {
            if (!oracle::close_scaled(got.power_sums[static_cast<std::size_t>(p)],
                                      want.sums[static_cast<std::size_t>(p)],
                                      want.abs_sums[static_cast<std::size_t>(p)], 1e-12))
              ++failures;
          }
        }
      }
    }
  }
  CHECK(failures == 0);
}

TEST_CASE("accumulate_costs metadata and degenerate inputs") {
  const auto acc = accumulate_costs(PairSet{50, PairKind::All}, CostSpec::unit(), 0.25, 3,
                                    CostReference::LogN);
  CHECK(acc.kind == PairKind::All);
  CHECK(acc.reference == CostReference::LogN);
  CHECK(acc.mu == 0.25);
  CHECK(acc.power_sums.size() == 4);
  CHECK(acc.count == count_all_pairs(50));
  CHECK(acc.power_sums[0] == doctest::Approx(static_cast<double>(acc.count)));
  CHECK_FALSE(acc.conditioning_warning);
  CHECK(accumulate_costs(PairSet{200, PairKind::Reduced}, CostSpec::unit(), 0.8, 14,
                         CostReference::LogV)
            .conditioning_warning);

  const auto empty = accumulate_costs(PairSet{1, PairKind::Reduced}, CostSpec::unit(), 0.5, 2,
                                      CostReference::LogV);
  CHECK(empty.count == 0);
  CHECK(empty.power_sums[0] == 0.0);
  CHECK_THROWS_AS(accumulate_costs(PairSet{10, PairKind::Reduced}, CostSpec::unit(), 0.5, -1,
                                   CostReference::LogV),
                  std::invalid_argument);
}

TEST_CASE("reduced pairs make the reference choice irrelevant for v over gcd") {
  const auto a = accumulate_costs(PairSet{80, PairKind::Reduced}, CostSpec::unit(), 0.9, 4,
                                  CostReference::LogV);
  const auto b = accumulate_costs(PairSet{80, PairKind::Reduced}, CostSpec::unit(), 0.9, 4,
                                  CostReference::LogVOverGcd);
  CHECK((a.power_sums == b.power_sums));
}

TEST_CASE("worker count does not change any output bit") {
  for (PairKind kind : {PairKind::Reduced, PairKind::All}) {
    const auto w1 = accumulate_costs(PairSet{700, kind}, CostSpec::unit(), 0.84, 5,
                                     CostReference::LogV, 1);
    const auto w4 = accumulate_costs(PairSet{700, kind}, CostSpec::unit(), 0.84, 5,
                                     CostReference::LogV, 4);
    CHECK((w1.power_sums == w4.power_sums));
    CHECK(w1.count == w4.count);
  }
}

namespace {

std::complex<double> naive_dirichlet(std::complex<double> s, std::complex<double> omega,
                                     std::uint64_t n, const CostSpec& c, double mu) {
  std::complex<double> sum = 0.0;
  for (std::uint64_t v = 2; v <= n; ++v)
    for (std::uint64_t u = 1; u < v; ++u) {
      if (std::gcd(u, v) != 1) continue;
      const double C = oracle::pair_cost(u, v, c);
      const double lv = std::log(static_cast<double>(v));
      sum += std::exp(-2.0 * s * lv + omega * (C - mu * lv));
    }
  return sum;
}

std::complex<double> naive_dp(std::complex<double> s, int p, std::uint64_t n, const CostSpec& c,
                              double mu) {
  std::complex<double> sum = 0.0;
  for (std::uint64_t v = 2; v <= n; ++v)
    for (std::uint64_t u = 1; u < v; ++u) {
      if (std::gcd(u, v) != 1) continue;
      const double C = oracle::pair_cost(u, v, c);
      const double lv = std::log(static_cast<double>(v));
      sum += std::exp(-2.0 * s * lv) * std::pow(C - mu * lv, p);
    }
  return sum;
}

}  // namespace

TEST_CASE("dirichlet partial sums match direct summation") {
  const CostSpec c = CostSpec::unit();
  const double mu = mean_constant(c);

  const std::complex<double> s{1.3, 0.2};
  const std::complex<double> w{0.3, -0.1};
  const auto got = dirichlet_partial_sum(s, w, 200, c, mu);
  const auto want = naive_dirichlet(s, w, 200, c, mu);
  CHECK(std::abs(got - want) <= 1e-11 * std::abs(want));

  // omega = 0 collapses every ring term to the coprime count.
  const auto got0 = dirichlet_partial_sum(1.5, 0.0, 300, c, mu);
  const auto want0 = naive_dirichlet(1.5, 0.0, 300, c, mu);
  CHECK(std::abs(got0 - want0) <= 1e-12 * std::abs(want0));

  for (int p : {1, 2}) {
    const auto gp = dp_partial_sum(1.5, p, 200, c, mu);
    const auto wp = naive_dp(1.5, p, 200, c, mu);
    CHECK(std::abs(gp - wp) <= 1e-11 * (1.0 + std::abs(wp)));
  }
}

TEST_CASE("detail variants expose trailing ring terms") {
  const CostSpec c = CostSpec::unit();
  const double mu = mean_constant(c);
  const auto detail = dirichlet_partial_detail(1.4, 0.05, 120, c, mu, 5);
  CHECK(detail.last_rings.size() == 5);
  CHECK(detail.last_rings.front().first == 116);
  CHECK(detail.last_rings.back().first == 120);
  CHECK(std::abs(detail.sum - dirichlet_partial_sum(1.4, 0.05, 120, c, mu)) == 0.0);

  // Each exposed term equals the one-ring difference of partial sums.
  for (const auto& [v, term] : detail.last_rings) {
    const auto hi = naive_dirichlet(1.4, 0.05, v, c, mu);
    const auto lo = naive_dirichlet(1.4, 0.05, v - 1, c, mu);
    CHECK(std::abs(term - (hi - lo)) <= 1e-12 * (1.0 + std::abs(term)));
  }

  const auto dpd = dp_partial_detail(1.6, 2, 90, c, mu, 3);
  CHECK(dpd.last_rings.size() == 3);
  for (const auto& [v, term] : dpd.last_rings) {
    const auto hi = naive_dp(1.6, 2, v, c, mu);
    const auto lo = naive_dp(1.6, 2, v - 1, c, mu);
    CHECK(std::abs(term - (hi - lo)) <= 1e-11 * (1.0 + std::abs(term)));
  }

  CHECK(dirichlet_partial_detail(1.4, 0.0, 50, c, mu, 0).last_rings.empty());
}

TEST_CASE("dirichlet sums are deterministic across worker counts") {
  const CostSpec c = CostSpec::unit();
  const double mu = mean_constant(c);
  const auto a = dirichlet_partial_sum({1.2, 0.1}, {0.2, 0.0}, 400, c, mu, 1);
  const auto b = dirichlet_partial_sum({1.2, 0.1}, {0.2, 0.0}, 400, c, mu, 3);
  CHECK(a.real() == b.real());
  CHECK(a.imag() == b.imag());
}
