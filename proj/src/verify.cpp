#include "euclid/verify.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "euclid/compensated.hpp"
#include "euclid/enumeration.hpp"
#include "euclid/parallel.hpp"

namespace euclid {

namespace {

struct ComplexSum {
  NeumaierSum re, im;
  void add(std::complex<double> z) {
    re.add(z.real());
    im.add(z.imag());
  }
  void merge(const ComplexSum& o) {
    re.merge(o.re);
    im.merge(o.im);
  }
  std::complex<double> value() const { return {re.value(), im.value()}; }
};

Eigen::VectorXcd unit_function(int m) {
  Eigen::VectorXcd e = Eigen::VectorXcd::Zero(m);
  e(0) = 1.0;
  return e;
}

// Walks all digit tuples of the fixed length with entries in [1, A] and a
// final digit >= 2, carrying the continuant recursion p_k = a_k p_{k-1} +
// p_{k-2} (same for q). The derivative of the composed Moebius map at 0 is
// (-1)^len / q_len^2, which the determinant assertion pins down tuple by
// tuple.
struct TupleWalker {
  std::uint64_t A;
  int len;
  std::complex<double> two_s;
  std::complex<double> omega;
  double mu;
  const CostSpec* cost;
  std::vector<std::uint32_t>* digits;
  ComplexSum* out;
  std::uint64_t* n_leaves;

  void leaf(std::uint64_t p_prev, std::uint64_t p_cur, std::uint64_t q_prev, std::uint64_t q_cur,
            double total_cost) const {
    const __int128 det = static_cast<__int128>(p_prev) * q_cur -
                         static_cast<__int128>(p_cur) * q_prev;
    if (det != 1 && det != -1)
      throw std::logic_error("depth_identity: continuant determinant is not +-1");
    const Rational red = reconstruct(DigitSequence(*digits));
    if (red.u != p_cur || red.v != q_cur)
      throw std::logic_error("depth_identity: continuants disagree with reconstruction");
    const double log_v = std::log(static_cast<double>(q_cur));
    out->add(std::exp(-two_s * log_v + omega * (total_cost - mu * log_v)));
    ++*n_leaves;
  }

  void walk(int idx, std::uint64_t p_prev, std::uint64_t p_cur, std::uint64_t q_prev,
            std::uint64_t q_cur, double total_cost) const {
    if (idx == len) {
      leaf(p_prev, p_cur, q_prev, q_cur, total_cost);
      return;
    }
    const std::uint64_t lo = (idx == len - 1) ? 2 : 1;
    for (std::uint64_t a = lo; a <= A; ++a) {
      digits->push_back(static_cast<std::uint32_t>(a));
      walk(idx + 1, p_cur, a * p_cur + p_prev, q_cur, a * q_cur + q_prev,
           total_cost + (*cost)(a));
      digits->pop_back();
    }
  }
};

double finish_gap(IdentityReport& rep) {
  rep.abs_gap = std::abs(rep.lhs - rep.rhs);
  return rep.abs_gap;
}

// Empirical bound on the dropped enumeration tail sum over v > n: the last
// few ring terms behave like c * v^{1-2 Re(s)}, so the tail is about
// c * n^{2-2 Re(s)} / (2 Re(s) - 2); the measured constant is inflated x4.
double empirical_tail_bound(const std::vector<std::pair<std::uint64_t, std::complex<double>>>& rings,
                            std::uint64_t n, double sigma) {
  double c_hat = 0.0;
  for (const auto& [v, term] : rings)
    c_hat = std::max(c_hat,
                     std::abs(term) / std::pow(static_cast<double>(v), 1.0 - 2.0 * sigma));
  return 4.0 * c_hat * std::pow(static_cast<double>(n), 2.0 - 2.0 * sigma) /
         (2.0 * sigma - 2.0);
}

constexpr int kDpKmax = 200;

}  // namespace

IdentityReport depth_identity(int depth, std::uint64_t digit_bound, std::complex<double> s,
                              std::complex<double> omega, const CostSpec& c, double mu,
                              const DiscParams& params, unsigned workers) {
  if (depth < 0) throw std::invalid_argument("depth_identity: depth must be >= 0");
  if (digit_bound < 2) throw std::invalid_argument("depth_identity: digit bound must be >= 2");
  const int len = depth + 1;
  if (std::pow(static_cast<double>(digit_bound), len) > 1e8)
    throw std::invalid_argument("depth_identity: digit tuple count exceeds 1e8");

  DiscParams dp = params;
  dp.N_max = digit_bound;
  dp.tail_mode = TailMode::Drop;

  const OperatorMatrix L = assemble(s, omega, c, mu, dp, OperatorVariant::FullL);
  const OperatorMatrix F = assemble(s, omega, c, mu, dp, OperatorVariant::TailF);
  Eigen::VectorXcd w = unit_function(dp.M);
  for (int k = 0; k < depth; ++k) w = L.entries * w;

  IdentityReport rep;
  rep.lhs = evaluate_at_zero(F.entries * w);
  rep.s = s;
  rep.omega = omega;
  rep.depth = depth;
  rep.digit_bound = digit_bound;
  rep.params = dp;
  // The identity is exact; only basis discretization error remains, expected
  // below 1e-10 once M >= 24.
  if (dp.M >= 24) rep.bound = 1e-10;

  const std::uint64_t first_lo = (len == 1) ? 2 : 1;
  struct Scratch {
    std::vector<std::uint32_t> digits;
  };
  struct TupleSum {
    ComplexSum sum;
    std::uint64_t leaves = 0;
  };
  auto parts = parallel_block_map<TupleSum>(
      first_lo, digit_bound + 1, 4, workers, [] { return Scratch{}; },
      [&](std::uint64_t blo, std::uint64_t bhi, TupleSum& part, Scratch& sc) {
        TupleWalker walker{digit_bound, len,        2.0 * s,   omega,
                           mu,          &c,         &sc.digits, &part.sum,
                           &part.leaves};
        for (std::uint64_t a1 = blo; a1 < bhi; ++a1) {
          sc.digits.push_back(static_cast<std::uint32_t>(a1));
          walker.walk(1, 0, 1, 1, a1, c(a1));
          sc.digits.pop_back();
        }
      });
  ComplexSum total;
  for (const auto& part : parts) {
    total.merge(part.sum);
    rep.n_enum += part.leaves;
  }
  rep.rhs = total.value();
  finish_gap(rep);
  return rep;
}

Resummation geometric_resummation_detail(std::complex<double> s, std::complex<double> omega,
                                         const CostSpec& c, double mu, int k_max,
                                         const DiscParams& params) {
  if (k_max < 0) throw std::invalid_argument("geometric_resummation: k_max must be >= 0");

  const OperatorMatrix L = assemble(s, omega, c, mu, params, OperatorVariant::FullL);
  const OperatorMatrix F = assemble(s, omega, c, mu, params, OperatorVariant::TailF);
  const SpectralData spec = leading_spectrum(L, /*allow_no_gap=*/true);
  const double q = std::abs(spec.lambda1);
  if (q >= 1.0 - 1e-6)
    throw std::domain_error("geometric_resummation: spectral radius too close to 1");

  Eigen::VectorXcd w = unit_function(params.M);
  ComplexSum acc;
  std::complex<double> term{0.0, 0.0};
  for (int k = 0; k <= k_max; ++k) {
    term = evaluate_at_zero(F.entries * w);
    acc.add(term);
    if (k < k_max) w = L.entries * w;
  }

  Resummation out;
  out.value = acc.value();
  out.tail_bound = std::abs(term) * q / (1.0 - q);
  out.lambda1_modulus = q;
  out.k_max = k_max;

  const Eigen::MatrixXcd resolvent_matrix =
      Eigen::MatrixXcd::Identity(params.M, params.M) - L.entries;
  const Eigen::VectorXcd x = resolvent_matrix.partialPivLu().solve(unit_function(params.M));
  out.resolvent = evaluate_at_zero(F.entries * x);
  return out;
}

std::complex<double> geometric_resummation(std::complex<double> s, std::complex<double> omega,
                                           const CostSpec& c, double mu, int k_max,
                                           const DiscParams& params) {
  const Resummation r = geometric_resummation_detail(s, omega, c, mu, k_max, params);
  if (std::abs(r.value - r.resolvent) > r.tail_bound + 1e-8)
    throw std::runtime_error("geometric_resummation: partial sum disagrees with resolvent");
  return r.value;
}

IdentityReport series_identity(std::complex<double> s, std::complex<double> omega,
                               const CostSpec& c, double mu, std::uint64_t n_enum, int k_max,
                               const DiscParams& params, unsigned workers) {
  if (!(s.real() > 1.0))
    throw std::domain_error("series_identity: requires Re(s) > 1");

  const DirichletPartial lhs =
      dirichlet_partial_detail(s, omega, n_enum, c, mu, 8, workers);
  const Resummation rhs = geometric_resummation_detail(s, omega, c, mu, k_max, params);

  IdentityReport rep;
  rep.lhs = lhs.sum;  // enumeration side of this identity
  rep.rhs = rhs.value;
  rep.s = s;
  rep.omega = omega;
  rep.n_enum = n_enum;
  rep.k_max = k_max;
  rep.params = params;
  rep.bound = empirical_tail_bound(lhs.last_rings, n_enum, s.real()) + rhs.tail_bound;
  finish_gap(rep);
  return rep;
}

IdentityReport dp_identity(int p, std::complex<double> s, const CostSpec& c, double mu,
                           std::uint64_t n_enum, const DiscParams& params, unsigned workers) {
  if (p < 0 || p > 2) throw std::invalid_argument("dp_identity: p must be 0, 1, or 2");
  if (!(s.real() > 1.0)) throw std::domain_error("dp_identity: requires Re(s) > 1");
  if (p == 0) {
    IdentityReport rep = series_identity(s, 0.0, c, mu, n_enum, kDpKmax, params, workers);
    rep.p = 0;
    return rep;
  }

  const DirichletPartial lhs = dp_partial_detail(s, p, n_enum, c, mu, 8, workers);

  const double h = 1e-3;
  auto R = [&](double w) {
    return geometric_resummation_detail(s, std::complex<double>(w, 0.0), c, mu, kDpKmax,
                                        params);
  };

  std::complex<double> coarse, fine;
  double op_tail = 0.0;
  if (p == 1) {
    const Resummation rp = R(h), rm = R(-h);
    const Resummation rp2 = R(h / 2), rm2 = R(-h / 2);
    coarse = (rp.value - rm.value) / (2.0 * h);
    fine = (rp2.value - rm2.value) / h;
    op_tail = (rp.tail_bound + rm.tail_bound) / (6.0 * h) +
              (rp2.tail_bound + rm2.tail_bound) * (4.0 / (3.0 * h));
  } else {
    const Resummation r0 = R(0.0);
    const Resummation rp = R(h), rm = R(-h);
    const Resummation rp2 = R(h / 2), rm2 = R(-h / 2);
    coarse = (rp.value - 2.0 * r0.value + rm.value) / (h * h);
    fine = (rp2.value - 2.0 * r0.value + rm2.value) / (h * h / 4.0);
    op_tail = (rp.tail_bound + 2.0 * r0.tail_bound + rm.tail_bound) / (3.0 * h * h) +
              (rp2.tail_bound + 2.0 * r0.tail_bound + rm2.tail_bound) * (16.0 / (3.0 * h * h));
  }
  const std::complex<double> extrapolated = (4.0 * fine - coarse) / 3.0;
  const double differencing_error = std::abs(extrapolated - fine);

  IdentityReport rep;
  rep.lhs = lhs.sum;  // enumeration side of this identity
  rep.rhs = extrapolated;
  rep.s = s;
  rep.p = p;
  rep.n_enum = n_enum;
  rep.k_max = kDpKmax;
  rep.params = params;
  rep.bound = empirical_tail_bound(lhs.last_rings, n_enum, s.real()) + op_tail +
              differencing_error + 1e-8;
  finish_gap(rep);
  return rep;
}

}  // namespace euclid
