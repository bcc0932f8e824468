#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "euclid/transfer_operator.hpp"

using namespace euclid;
using cplx = std::complex<double>;

namespace {
const CostSpec kUnit = CostSpec::unit();
const CostSpec kDigit1 = CostSpec::digit_indicator(1);
}  // namespace

TEST_CASE("closed-form constants") {
  // 20-digit references computed with arbitrary-precision arithmetic.
  CHECK(entropy_constant() == doctest::Approx(2.3731382208312509056).epsilon(1e-15));
  CHECK(f0_constant() == doctest::Approx(0.72134752044448170368).epsilon(1e-15));

  const double mu = mean_constant(kUnit);
  CHECK(mu == doctest::Approx(12.0 * std::numbers::ln2 / (std::numbers::pi * std::numbers::pi))
                  .epsilon(1e-14));
  CHECK(mu == doctest::Approx(0.84276591327219451691).epsilon(1e-13));

  // Indicator of digit 1: mu = (2/h) * log2(4/3).
  const double mu1 = mean_constant(kDigit1);
  CHECK(mu1 == doctest::Approx(2.0 / entropy_constant() * std::log2(4.0 / 3.0))
                   .epsilon(1e-14));
  CHECK(mu1 == doctest::Approx(0.34977945712194258394).epsilon(1e-13));
}

TEST_CASE("leading eigenvalue at (1,0) is 1") {
  DiscParams params;
  params.M = 24;
  const SpectralData sp =
      leading_spectrum(assemble(1.0, 0.0, kUnit, mean_constant(kUnit), params,
                                OperatorVariant::FullL));
  CHECK(std::abs(sp.lambda1 - 1.0) <= 1e-8);
  CHECK(sp.gap_ok);
  CHECK(sp.residual <= 1e-10);
  // Normalization pins the eigenfunction value at z = 0 to exactly 1.
  CHECK(std::abs(evaluate_at_zero(sp.eigvec) - 1.0) <= 1e-12);
}

TEST_CASE("subdominant eigenvalue is stable under refinement") {
  DiscParams coarse;
  coarse.M = 24;
  coarse.N_max = 10000;
  DiscParams fine;
  fine.M = 48;
  fine.N_max = 20000;
  const double mu = mean_constant(kUnit);
  const double l2a =
      leading_spectrum(assemble(1.0, 0.0, kUnit, mu, coarse, OperatorVariant::FullL))
          .lambda2_modulus;
  const double l2b =
      leading_spectrum(assemble(1.0, 0.0, kUnit, mu, fine, OperatorVariant::FullL))
          .lambda2_modulus;
  CHECK(std::abs(l2a - l2b) <= 1e-6);
  CHECK(l2a == doctest::Approx(0.3036630029).epsilon(1e-6));
}

TEST_CASE("invariant density is fixed by the operator") {
  DiscParams params;
  const auto a = invariant_density_coefficients(params.M);
  Eigen::VectorXcd xi(params.M);
  for (int k = 0; k < params.M; ++k) xi(k) = a[static_cast<std::size_t>(k)];
  const OperatorMatrix L =
      assemble(1.0, 0.0, kUnit, 0.0, params, OperatorVariant::FullL);
  // Coefficient recovery divides by r^k, so rounding noise in the top rows is
  // amplified by 2^k; only the low-order block is sharp.
  CHECK((L.entries * xi - xi).norm() <= 1e-5 * xi.norm());
  CHECK((L.entries * xi - xi).head(16).norm() <= 1e-9);

  // The normalized leading eigenfunction equals the density up to the value
  // at zero: xi(0) = 1/log 2.
  const SpectralData sp = leading_spectrum(L);
  for (int k = 0; k < 8; ++k) {
    CHECK(sp.eigvec(k).real() ==
          doctest::Approx(a[static_cast<std::size_t>(k)] * std::numbers::ln2).epsilon(1e-9));
    CHECK(std::abs(sp.eigvec(k).imag()) <= 1e-12);
  }
}

TEST_CASE("derivative estimates recover entropy and centering") {
  DiscParams params;
  const double mu = mean_constant(kUnit);
  const DerivativeEstimates d = lambda_derivatives(kUnit, mu, params);
  CHECK_FALSE(d.richardson_warning);
  CHECK(std::abs(-d.lambda_s - entropy_constant()) <= 1e-5);
  CHECK(std::abs(d.lambda_omega) <= 1e-6);
  CHECK(d.lambda_omegaomega > 0.0);

  // Same centering property for the digit-1 indicator cost.
  const DerivativeEstimates d1 = lambda_derivatives(kDigit1, mean_constant(kDigit1), params);
  CHECK(std::abs(d1.lambda_omega) <= 1e-6);

  CHECK_THROWS_AS(lambda_derivatives(kUnit, mu, params, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(lambda_derivatives(kUnit, mu, params, 0.5), std::invalid_argument);
}

TEST_CASE("variance constant is self-converged") {
  // Second derivatives are noise-limited for large M: the 2^k recovery
  // amplification feeds through the h^-2 difference quotient, so the stable
  // regime is moderate M. M >= 48 visibly drifts (3e-4 and worse).
  DiscParams coarse;
  coarse.M = 24;
  DiscParams fine;
  fine.M = 32;
  fine.N_max = 20000;
  const double va = variance_constant(kUnit, coarse);
  const double vb = variance_constant(kUnit, fine);
  CHECK(std::abs(va - vb) <= 1e-4);
  CHECK(va == doctest::Approx(0.5160631344).epsilon(1e-5));
}

TEST_CASE("discretized final-digit functional matches the closed form") {
  DiscParams params;
  CHECK(std::abs(f0_constant_discretized(params) - f0_constant()) <= 1e-8);
}

TEST_CASE("assemble validates its inputs") {
  DiscParams params;
  CHECK_THROWS_AS(assemble(0.5, 0.0, kUnit, 0.8, params, OperatorVariant::FullL),
                  std::invalid_argument);
  CHECK_THROWS_AS(assemble(1.0, 0.6, kUnit, 0.8, params, OperatorVariant::FullL),
                  std::invalid_argument);
  DiscParams bad = params;
  bad.M = 3;
  CHECK_THROWS_AS(assemble(1.0, 0.0, kUnit, 0.8, bad, OperatorVariant::FullL),
                  std::invalid_argument);
  bad = params;
  bad.M = 80;
  CHECK_THROWS_AS(assemble(1.0, 0.0, kUnit, 0.8, bad, OperatorVariant::FullL),
                  std::invalid_argument);
  bad = params;
  bad.r = 0.7;
  CHECK_THROWS_AS(assemble(1.0, 0.0, kUnit, 0.8, bad, OperatorVariant::FullL),
                  std::invalid_argument);
  bad = params;
  bad.oversample = 1;
  CHECK_THROWS_AS(assemble(1.0, 0.0, kUnit, 0.8, bad, OperatorVariant::FullL),
                  std::invalid_argument);
  bad = params;
  bad.N_max = 32;  // too small for the tail correction
  CHECK_THROWS_AS(assemble(1.0, 0.0, kUnit, 0.8, bad, OperatorVariant::FullL),
                  std::invalid_argument);
  bad.tail_mode = TailMode::Drop;  // but fine when the tail is dropped
  CHECK_NOTHROW(assemble(1.0, 0.0, kUnit, 0.8, bad, OperatorVariant::FullL));
}

TEST_CASE("tail correction beats plain truncation") {
  DiscParams drop;
  drop.N_max = 128;
  drop.tail_mode = TailMode::Drop;
  DiscParams corrected = drop;
  corrected.tail_mode = TailMode::FirstOrderTail;
  const double mu = mean_constant(kUnit);
  const auto ld = assemble(1.0, 0.0, kUnit, mu, drop, OperatorVariant::FullL);
  const auto lc = assemble(1.0, 0.0, kUnit, mu, corrected, OperatorVariant::FullL);
  CHECK(lc.truncation_estimate < ld.truncation_estimate / 100.0);
  CHECK(ld.truncation_flag);

  const double gap_drop =
      std::abs(leading_spectrum(ld).lambda1 - 1.0);
  const double gap_corr =
      std::abs(leading_spectrum(lc).lambda1 - 1.0);
  CHECK(gap_corr < gap_drop / 100.0);
  CHECK(gap_corr <= 5e-9);
}

TEST_CASE("no spectral gap is reported or thrown") {
  OperatorMatrix fake;
  fake.entries = Eigen::MatrixXcd::Identity(6, 6);
  CHECK_THROWS_AS(leading_spectrum(fake), std::runtime_error);
  const SpectralData sp = leading_spectrum(fake, true);
  CHECK_FALSE(sp.gap_ok);
}

TEST_CASE("eigenvalues contract strictly inside the critical strip") {
  DiscParams params;
  const double mu = mean_constant(kUnit);
  const auto sp = leading_spectrum(
      assemble(cplx(1.0, 0.5), 0.0, kUnit, mu, params, OperatorVariant::FullL), true);
  CHECK(std::abs(sp.lambda1) < 1.0);
}

TEST_CASE("monte carlo variance diagnostic") {
  const double mu = mean_constant(kUnit);
  const BirkhoffEstimate a = variance_birkhoff_estimate(kUnit, mu, 1000, 30000, 42, 1);
  const BirkhoffEstimate b = variance_birkhoff_estimate(kUnit, mu, 1000, 30000, 42, 3);
  CHECK(a.estimate == b.estimate);  // workers cannot change the stream
  CHECK(a.std_error == b.std_error);

  const BirkhoffEstimate c = variance_birkhoff_estimate(kUnit, mu, 1000, 30000, 43, 1);
  CHECK(a.estimate != c.estimate);  // the seed does

  CHECK(std::abs(a.estimate - 0.516) <= 0.05 * 0.516 + 4.0 * a.std_error);
  // The centered step observable has mean near zero.
  CHECK(std::abs(a.psi_mean) <= 5.0 * a.psi_mean_std_error + 1e-3);

  CHECK_THROWS_AS(variance_birkhoff_estimate(kUnit, mu, 0, 100, 1), std::invalid_argument);
  CHECK_THROWS_AS(variance_birkhoff_estimate(kUnit, mu, 10, 0, 1), std::invalid_argument);
}
