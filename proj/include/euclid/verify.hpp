#pragma once

#include <complex>
#include <cstdint>
#include <limits>

#include "euclid/cf_core.hpp"
#include "euclid/transfer_operator.hpp"

namespace euclid {

// One finite-truncation check of a series identity. lhs is the operator-side
// value, rhs the enumeration-side value, except where noted on the producing
// operation. bound is the documented tolerance for abs_gap (NaN when the
// check is exact up to basis error).
struct IdentityReport {
  std::complex<double> lhs{0.0, 0.0};
  std::complex<double> rhs{0.0, 0.0};
  double abs_gap = 0.0;
  double bound = std::numeric_limits<double>::quiet_NaN();

  // configuration echo
  std::complex<double> s{0.0, 0.0};
  std::complex<double> omega{0.0, 0.0};
  int depth = -1;
  std::uint64_t digit_bound = 0;
  std::uint64_t n_enum = 0;
  int k_max = -1;
  int p = 0;
  DiscParams params{};
};

// Partial sum of (F L^k 1)(0) over k <= k_max together with the resolvent
// evaluation (F (I-L)^{-1} 1)(0) and a geometric bound on the dropped tail.
struct Resummation {
  std::complex<double> value{0.0, 0.0};
  std::complex<double> resolvent{0.0, 0.0};
  double tail_bound = 0.0;
  double lambda1_modulus = 0.0;
  int k_max = 0;
};

// Exact finite identity: (F L^depth 1)(0) with both operators truncated to
// digits <= digit_bound equals the sum of v^{-2s} exp(omega (C - mu log v))
// over all digit tuples (a_1..a_{depth+1}), a_i <= digit_bound, last >= 2.
// The gap measures only basis discretization error.
IdentityReport depth_identity(int depth, std::uint64_t digit_bound, std::complex<double> s,
                              std::complex<double> omega, const CostSpec& c, double mu,
                              const DiscParams& params = {}, unsigned workers = 1);

Resummation geometric_resummation_detail(std::complex<double> s, std::complex<double> omega,
                                         const CostSpec& c, double mu, int k_max,
                                         const DiscParams& params = {});

// Checked wrapper: throws if the partial sum and the resolvent evaluation
// disagree beyond the geometric tail bound plus 1e-8.
std::complex<double> geometric_resummation(std::complex<double> s, std::complex<double> omega,
                                           const CostSpec& c, double mu, int k_max,
                                           const DiscParams& params = {});

// Dirichlet series over rings truncated at v <= n_enum (lhs) against the
// operator power sum (rhs). bound = empirical enumeration tail (inflated x4)
// + geometric operator tail.
IdentityReport series_identity(std::complex<double> s, std::complex<double> omega,
                               const CostSpec& c, double mu, std::uint64_t n_enum, int k_max,
                               const DiscParams& params = {}, unsigned workers = 1);

// Centered p-th power sums (lhs) against the p-th omega-derivative of the
// resummation at omega = 0, by central differences with Richardson
// extrapolation (rhs). p = 0 degenerates to series_identity at omega = 0.
IdentityReport dp_identity(int p, std::complex<double> s, const CostSpec& c, double mu,
                           std::uint64_t n_enum, const DiscParams& params = {},
                           unsigned workers = 1);

}  // namespace euclid
