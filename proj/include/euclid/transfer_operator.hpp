#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "euclid/cf_core.hpp"

namespace euclid {

// The weighted transfer operator acts on functions holomorphic on the disc
// |z - 2/3| < 1 as (Lf)(z) = sum_n e^{omega c(n)} (z+n)^{-(2s+mu*omega)} f(1/(z+n)),
// summed over digits n >= 1; the final-digit variant F starts at n = 2.
enum class OperatorVariant { FullL, TailF };

enum class TailMode { Drop, FirstOrderTail };

struct DiscParams {
  int M = 32;              // Taylor coefficients kept, basis e_j(z) = (z - 2/3)^j
  double r = 0.5;          // radius of the sampling circle about 2/3
  int oversample = 2;      // sample count Q = oversample * M
  std::uint64_t N_max = 10000;  // digit series truncated at n <= N_max
  TailMode tail_mode = TailMode::FirstOrderTail;
  double max_omega = 0.5;  // assemble rejects |omega| beyond this
};

struct OperatorMatrix {
  Eigen::MatrixXcd entries;  // column j = Taylor coefficients of the image of e_j
  std::complex<double> s;
  std::complex<double> omega;
  double mu = 0.0;
  DiscParams params;
  OperatorVariant variant = OperatorVariant::FullL;
  double truncation_estimate = 0.0;  // estimated size of what the tail handling misses
  bool truncation_flag = false;      // estimate exceeded 1e-12 * ||entries||
};

struct SpectralData {
  std::complex<double> lambda1;
  Eigen::VectorXcd eigvec;  // scaled so the function value at z = 0 equals 1
  double lambda2_modulus = 0.0;
  double residual = 0.0;    // ||A w - lambda1 w|| / ||w||
  bool gap_ok = true;       // |lambda1| - |lambda2| >= 1e-6
  std::vector<std::complex<double>> eigenvalues;  // all of them, descending modulus
};

OperatorMatrix assemble(std::complex<double> s, std::complex<double> omega, const CostSpec& c,
                        double mu, const DiscParams& params, OperatorVariant variant);

// Dense eigensolve. Throws when the two largest moduli are closer than 1e-6
// unless allow_no_gap is set, in which case gap_ok is simply reported false.
SpectralData leading_spectrum(const OperatorMatrix& A, bool allow_no_gap = false);

std::complex<double> lambda_at(std::complex<double> s, std::complex<double> omega,
                               const CostSpec& c, double mu, const DiscParams& params);

// Mean growth constant of the total cost: (2/h) * sum_n c(n) * log2((n+1)^2/(n(n+2))),
// table part summed term by term, constant tail telescoped in closed form.
double mean_constant(const CostSpec& c);

// Entropy of the Gauss map, pi^2 / (6 log 2).
double entropy_constant();

struct DerivativeEstimates {
  double lambda_s = 0.0, lambda_s_err = 0.0;
  double lambda_omega = 0.0, lambda_omega_err = 0.0;
  double lambda_omegaomega = 0.0, lambda_omegaomega_err = 0.0;
  bool richardson_warning = false;  // some step-halving disagreement exceeded 1e-5
};

// Central differences at (s, omega) = (1, 0) with steps h and h/2 plus
// Richardson extrapolation; the err fields are the observed disagreements.
DerivativeEstimates lambda_derivatives(const CostSpec& c, double mu, const DiscParams& params,
                                       double step = 1e-3);

// sigma^2 = 2 lambda_omegaomega(1,0) / h, with mu taken from mean_constant.
double variance_constant(const CostSpec& c, const DiscParams& params);

double f0_constant();  // (F xi)(0) = 1/(2 log 2) in closed form
double f0_constant_discretized(const DiscParams& params);

struct BirkhoffEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  double psi_mean = 0.0;            // sample mean of the step observable
  double psi_mean_std_error = 0.0;
  std::uint64_t n_samples = 0;
  int n_iter = 0;
};

// Monte-Carlo diagnostic for sigma^2: samples x from the invariant measure via
// x = 2^U - 1, forms S = sum_{k<n_iter} (c(digit k) + mu log x_k) along the
// Gauss-map orbit, and returns (2/h) * mean(S^2) / n_iter. Floating-point
// orbits only shadow true ones for moderate n_iter; treat as a cross-check.
BirkhoffEstimate variance_birkhoff_estimate(const CostSpec& c, double mu, int n_iter,
                                            std::uint64_t n_samples, std::uint64_t seed,
                                            unsigned workers = 1);

// Taylor coefficients about 2/3 of the invariant density 1/((log 2)(1+z)).
std::vector<double> invariant_density_coefficients(int M);

// Value at z = 0 of the function with the given Taylor coefficients about 2/3.
std::complex<double> evaluate_at_zero(const Eigen::VectorXcd& coeffs);

}  // namespace euclid
