#include "euclid/transfer_operator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "euclid/compensated.hpp"
#include "euclid/parallel.hpp"

namespace euclid {

namespace {

constexpr double kCenter = 2.0 / 3.0;
using cplx = std::complex<double>;

void validate(const DiscParams& p, std::complex<double> s, std::complex<double> omega,
              const CostSpec& c) {
  if (s.real() <= 0.5) throw std::invalid_argument("assemble: requires Re(s) > 1/2");
  if (std::abs(omega) > p.max_omega)
    throw std::invalid_argument("assemble: |omega| exceeds the configured limit");
  if (p.M < 4 || p.M > 64) throw std::invalid_argument("assemble: M must be in [4, 64]");
  if (p.oversample < 2) throw std::invalid_argument("assemble: oversample must be >= 2");
  if (!(p.r > 0.0) || p.r >= kCenter)
    throw std::invalid_argument("assemble: r must lie in (0, 2/3) so samples keep Re(z) > 0");
  if (p.tail_mode == TailMode::FirstOrderTail) {
    if (p.N_max < 64)
      throw std::invalid_argument("assemble: N_max must be >= 64 with a tail correction");
    if (p.N_max < c.table().size())
      throw std::invalid_argument("assemble: tail correction needs N_max past the cost table");
  } else if (p.N_max < 1) {
    throw std::invalid_argument("assemble: N_max must be >= 1");
  }
}

// Sum over n > N of (z+n)^{-beta} via the midpoint Euler-Maclaurin form:
// integral from N+1/2 plus the first derivative correction. X = z + N + 1/2.
cplx tail_sum(cplx X, cplx beta) {
  const cplx Xpow = std::exp(-beta * std::log(X));  // X^{-beta}
  return Xpow * X / (beta - 1.0) - (beta / 24.0) * Xpow / X;
}

}  // namespace

std::vector<double> invariant_density_coefficients(int M) {
  // 1/((log 2)(1+z)) = (3/(5 log 2)) * sum_k (-3/5)^k (z - 2/3)^k
  std::vector<double> a(static_cast<std::size_t>(M));
  double term = 3.0 / (5.0 * std::numbers::ln2);
  for (int k = 0; k < M; ++k) {
    a[static_cast<std::size_t>(k)] = term;
    term *= -3.0 / 5.0;
  }
  return a;
}

std::complex<double> evaluate_at_zero(const Eigen::VectorXcd& coeffs) {
  // Horner evaluation of sum a_k (z - 2/3)^k at z = 0.
  cplx val = 0.0;
  for (Eigen::Index k = coeffs.size(); k-- > 0;) val = val * (-kCenter) + coeffs(k);
  return val;
}

OperatorMatrix assemble(std::complex<double> s, std::complex<double> omega, const CostSpec& c,
                        double mu, const DiscParams& params, OperatorVariant variant) {
  validate(params, s, omega, c);

  const int M = params.M;
  const int Q = params.oversample * M;
  const cplx b = 2.0 * s + mu * omega;
  const std::uint64_t n_lo = variant == OperatorVariant::FullL ? 1 : 2;
  const std::uint64_t n_hi = params.N_max;
  const bool weighted = omega != cplx(0.0, 0.0);

  // Digit weights e^{omega c(n)}: per-digit over the table, constant beyond.
  const std::size_t K = c.table().size();
  std::vector<cplx> table_weight(K, cplx(1.0, 0.0));
  if (weighted)
    for (std::size_t i = 0; i < K; ++i) table_weight[i] = std::exp(omega * c.table()[i]);
  const cplx tail_weight = weighted ? std::exp(omega * c.tail()) : cplx(1.0, 0.0);

  // Values of the image functions at the sample circle: G[q][j].
  std::vector<cplx> G(static_cast<std::size_t>(Q) * M, cplx(0.0, 0.0));
  const double two_pi = 2.0 * std::numbers::pi;

  for (int q = 0; q < Q; ++q) {
    const double theta = two_pi * q / Q;
    const cplx z = kCenter + params.r * cplx(std::cos(theta), std::sin(theta));
    cplx* row = &G[static_cast<std::size_t>(q) * M];
    for (std::uint64_t n = n_lo; n <= n_hi; ++n) {
      const cplx zn = z + static_cast<double>(n);
      const cplx y = 1.0 / zn - kCenter;     // basis argument, shifted to the center
      cplx w = std::exp(-b * std::log(zn));  // (z+n)^{-b}, principal branch
      if (weighted) w *= n <= K ? table_weight[n - 1] : tail_weight;
      for (int j = 0; j < M; ++j) {
        row[j] += w;
        w *= y;
      }
    }
    if (params.tail_mode == TailMode::FirstOrderTail) {
      // Image argument 1/(z+n) sits near 0 for n > N_max, so expand each
      // basis function about 0 to second order: e_j(y) = e_j(0) + e_j'(0) y
      // + e_j''(0)/2 y^2 + ..., with the n-sums of (z+n)^{-beta} y^i handled
      // by the Euler-Maclaurin midpoint form.
      const cplx X = z + static_cast<double>(n_hi) + 0.5;
      const cplx S0 = tail_sum(X, b);
      const cplx S1 = tail_sum(X, b + 1.0);
      const cplx S2 = tail_sum(X, b + 2.0);
      double e0 = 1.0;  // (-2/3)^j
      for (int j = 0; j < M; ++j) {
        cplx t = e0 * S0;
        if (j >= 1) t += j * (e0 / -kCenter) * S1;
        if (j >= 2) t += 0.5 * j * (j - 1) * (e0 / (kCenter * kCenter)) * S2;
        row[j] += tail_weight * t;
        e0 *= -kCenter;
      }
    }
  }

  // Taylor coefficients from the circle samples by a direct DFT, row k scaled
  // by r^{-k}. Oversampling keeps the aliasing error below the basis error.
  OperatorMatrix out;
  out.entries.resize(M, M);
  std::vector<cplx> twiddle(static_cast<std::size_t>(Q));
  for (int m = 0; m < Q; ++m)
    twiddle[static_cast<std::size_t>(m)] = std::polar(1.0, -two_pi * m / Q);
  double rk = 1.0;
  for (int k = 0; k < M; ++k) {
    for (int j = 0; j < M; ++j) {
      cplx acc = 0.0;
      for (int q = 0; q < Q; ++q)
        acc += G[static_cast<std::size_t>(q) * M + j] *
               twiddle[static_cast<std::size_t>((static_cast<long long>(k) * q) % Q)];
      out.entries(k, j) = acc / (static_cast<double>(Q) * rk);
    }
    rk *= params.r;
  }

  out.s = s;
  out.omega = omega;
  out.mu = mu;
  out.params = params;
  out.variant = variant;

  // Estimate what the tail handling leaves behind, at the sample point with
  // the slowest decay (smallest |z + N_max|).
  const cplx Xmin = cplx(kCenter - params.r, 0.0) + static_cast<double>(n_hi) + 0.5;
  if (params.tail_mode == TailMode::Drop) {
    out.truncation_estimate = std::abs(tail_weight * tail_sum(Xmin, b));
  } else {
    // Next Taylor order: max_j |C(j,3)| (2/3)^{j-3} times the (b+3)-tail,
    // plus the next Euler-Maclaurin correction of the midpoint form.
    double c3max = 0.0;
    for (int j = 3; j < M; ++j) {
      const double c3 = (j * (j - 1.0) * (j - 2.0) / 6.0) * std::pow(kCenter, j - 3);
      c3max = std::max(c3max, c3);
    }
    const double em2 = (7.0 / 5760.0) * std::abs(b * (b + 1.0) * (b + 2.0)) *
                       std::pow(std::abs(Xmin), -(b.real() + 3.0));
    out.truncation_estimate = std::abs(tail_weight) * (c3max * std::abs(tail_sum(Xmin, b + 3.0)) + em2);
  }
  out.truncation_flag = out.truncation_estimate > 1e-12 * out.entries.norm();
  return out;
}

SpectralData leading_spectrum(const OperatorMatrix& A, bool allow_no_gap) {
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(A.entries);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("leading_spectrum: eigensolver failed to converge");

  const Eigen::Index M = A.entries.rows();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(M));
  for (Eigen::Index i = 0; i < M; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b2) {
    return std::abs(es.eigenvalues()(a)) > std::abs(es.eigenvalues()(b2));
  });

  SpectralData out;
  out.eigenvalues.reserve(static_cast<std::size_t>(M));
  for (Eigen::Index i : order) out.eigenvalues.push_back(es.eigenvalues()(i));
  out.lambda1 = out.eigenvalues[0];
  out.lambda2_modulus = M > 1 ? std::abs(out.eigenvalues[1]) : 0.0;
  out.gap_ok = std::abs(out.lambda1) - out.lambda2_modulus >= 1e-6;
  if (!out.gap_ok && !allow_no_gap)
    throw std::runtime_error("leading_spectrum: no spectral gap, |l1|-|l2| < 1e-6");

  Eigen::VectorXcd w = es.eigenvectors().col(order[0]);
  const cplx val0 = evaluate_at_zero(w);
  if (std::abs(val0) < 1e-10 * w.norm())
    throw std::runtime_error("leading_spectrum: eigenfunction vanishes at z = 0");
  w /= val0;
  out.eigvec = w;
  out.residual = (A.entries * w - out.lambda1 * w).norm() / w.norm();
  return out;
}

std::complex<double> lambda_at(std::complex<double> s, std::complex<double> omega,
                               const CostSpec& c, double mu, const DiscParams& params) {
  return leading_spectrum(assemble(s, omega, c, mu, params, OperatorVariant::FullL)).lambda1;
}

double entropy_constant() {
  return std::numbers::pi * std::numbers::pi / (6.0 * std::numbers::ln2);
}

double mean_constant(const CostSpec& c) {
  // mu = (2/h) sum_n c(n) log2((n+1)^2 / (n(n+2))). The measure of the digit-n
  // cylinder is log2(1 + 1/(n(n+2))); the constant tail telescopes to
  // log2((K+2)/(K+1)).
  NeumaierSum acc;
  const auto& table = c.table();
  for (std::size_t i = 0; i < table.size(); ++i) {
    const double n = static_cast<double>(i + 1);
    acc.add(table[i] * std::log1p(1.0 / (n * (n + 2.0))));
  }
  const double K1 = static_cast<double>(table.size() + 1);
  acc.add(c.tail() * std::log1p(1.0 / K1));
  return 2.0 * acc.value() / (std::numbers::ln2 * entropy_constant());
}

DerivativeEstimates lambda_derivatives(const CostSpec& c, double mu, const DiscParams& params,
                                       double step) {
  if (!(step > 0.0) || step > 0.1)
    throw std::invalid_argument("lambda_derivatives: step must lie in (0, 0.1]");
  auto lam_s = [&](double s) { return lambda_at(cplx(s, 0.0), 0.0, c, mu, params).real(); };
  auto lam_w = [&](double w) { return lambda_at(1.0, cplx(w, 0.0), c, mu, params).real(); };

  DerivativeEstimates out;
  const double h = step;
  const double lam0 = lam_w(0.0);

  const double sp1 = lam_s(1.0 + h), sm1 = lam_s(1.0 - h);
  const double sp2 = lam_s(1.0 + h / 2), sm2 = lam_s(1.0 - h / 2);
  const double d1 = (sp1 - sm1) / (2 * h);
  const double d2 = (sp2 - sm2) / h;
  out.lambda_s = (4 * d2 - d1) / 3;
  out.lambda_s_err = std::abs(out.lambda_s - d2);

  const double wp1 = lam_w(h), wm1 = lam_w(-h);
  const double wp2 = lam_w(h / 2), wm2 = lam_w(-h / 2);
  const double e1 = (wp1 - wm1) / (2 * h);
  const double e2 = (wp2 - wm2) / h;
  out.lambda_omega = (4 * e2 - e1) / 3;
  out.lambda_omega_err = std::abs(out.lambda_omega - e2);

  const double g1 = (wp1 - 2 * lam0 + wm1) / (h * h);
  const double g2 = (wp2 - 2 * lam0 + wm2) / (h * h / 4);
  out.lambda_omegaomega = (4 * g2 - g1) / 3;
  out.lambda_omegaomega_err = std::abs(out.lambda_omegaomega - g2);

  out.richardson_warning = out.lambda_s_err > 1e-5 || out.lambda_omega_err > 1e-5 ||
                           out.lambda_omegaomega_err > 1e-5;
  return out;
}

double variance_constant(const CostSpec& c, const DiscParams& params) {
  const double mu = mean_constant(c);
  const DerivativeEstimates d = lambda_derivatives(c, mu, params);
  return 2.0 * d.lambda_omegaomega / entropy_constant();
}

double f0_constant() { return 1.0 / (2.0 * std::numbers::ln2); }

double f0_constant_discretized(const DiscParams& params) {
  const auto a = invariant_density_coefficients(params.M);
  Eigen::VectorXcd xi(params.M);
  for (int k = 0; k < params.M; ++k) xi(k) = a[static_cast<std::size_t>(k)];
  const OperatorMatrix F =
      assemble(1.0, 0.0, CostSpec::unit(), 0.0, params, OperatorVariant::TailF);
  return evaluate_at_zero(F.entries * xi).real();
}

BirkhoffEstimate variance_birkhoff_estimate(const CostSpec& c, double mu, int n_iter,
                                            std::uint64_t n_samples, std::uint64_t seed,
                                            unsigned workers) {
  if (n_iter < 1) throw std::invalid_argument("variance_birkhoff_estimate: n_iter >= 1");
  if (n_samples < 1) throw std::invalid_argument("variance_birkhoff_estimate: n_samples >= 1");

  struct Partial {
    NeumaierSum s1, s2, s4;
  };
  constexpr std::uint64_t kChunk = 8192;
  const auto& table = c.table();
  const double tail_cost = c.tail();

  auto slots = parallel_block_map<Partial>(
      0, n_samples, kChunk, workers, [] { return 0; },
      [&](std::uint64_t lo, std::uint64_t hi, Partial& part, int&) {
        // One generator per fixed-size chunk, seeded by chunk index, so the
        // sample stream does not depend on the worker count.
        std::mt19937_64 rng(seed ^ ((lo / kChunk + 1) * 0x9E3779B97F4A7C15ULL));
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        for (std::uint64_t i = lo; i < hi; ++i) {
          double x = std::exp2(unif(rng)) - 1.0;  // inverse CDF of the Gauss measure
          if (x < 1e-12) x = 1e-12;
          double S = 0.0;
          for (int k = 0; k < n_iter; ++k) {
            const double inv = 1.0 / x;
            const double digit = std::floor(inv);
            const double cost_k =
                digit <= static_cast<double>(table.size())
                    ? table[static_cast<std::size_t>(digit) - 1]
                    : tail_cost;
            S += cost_k + mu * std::log(x);
            x = inv - digit;
            // Keep the floating orbit inside (0,1); exact endpoints only
            // arise from rational inputs or roundoff.
            if (x <= 0.0) x = 1e-12;
            else if (x >= 1.0) x = 1.0 - 1e-16;
          }
          const double S2 = S * S;
          part.s1.add(S);
          part.s2.add(S2);
          part.s4.add(S2 * S2);
        }
      });

  NeumaierSum s1, s2, s4;
  for (const auto& part : slots) {
    s1.merge(part.s1);
    s2.merge(part.s2);
    s4.merge(part.s4);
  }
  const double cnt = static_cast<double>(n_samples);
  const double m1 = s1.value() / cnt;
  const double m2 = s2.value() / cnt;
  const double m4 = s4.value() / cnt;
  const double scale = 2.0 / (entropy_constant() * n_iter);

  BirkhoffEstimate out;
  out.estimate = scale * m2;
  out.std_error = scale * std::sqrt(std::max(0.0, m4 - m2 * m2) / cnt);
  out.psi_mean = m1 / n_iter;
  out.psi_mean_std_error = std::sqrt(std::max(0.0, m2 - m1 * m1) / cnt) / n_iter;
  out.n_samples = n_samples;
  out.n_iter = n_iter;
  return out;
}

}  // namespace euclid
