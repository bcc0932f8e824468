#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "euclid/cf_core.hpp"
#include "euclid/enumeration.hpp"

namespace euclid {

// Standard normal CDF via a fixed rational approximation (|error| < 7.5e-8),
// so results do not depend on platform special functions.
double normal_cdf(double x);

// One pass over all coprime pairs with v <= n_max, recording per-ring raw
// power sums of the total cost (and optionally per-ring cost histograms).
// Every statistic over Omega_n or over all pairs then follows by prefix and
// divisor aggregation, for any n <= n_max and any centering, without
// re-scanning: grouping all pairs by gcd turns a sum over pairs below n into
// sums over coprime pairs below n/d.
class RingScan {
 public:
  RingScan(std::uint64_t n_max, const CostSpec& c, int p_max, bool with_histograms,
           unsigned workers = 1);

  std::uint64_t n_max() const { return n_max_; }
  int p_max() const { return p_max_; }
  bool has_histograms() const { return with_hist_; }

  std::uint64_t count(std::uint64_t n, PairKind kind) const;

  // S_p = sum over the pair set of (C - mu*log ref)^p for p = 0..p_max.
  // Agrees with accumulate_costs up to the conditioning of the binomial
  // recombination (raw power sums are recentered analytically).
  std::vector<double> centered_sums(std::uint64_t n, double mu, PairKind kind,
                                    CostReference reference) const;

  // Sup distance between the empirical CDF of (C - mu log n)/(sigma sqrt(log n))
  // and the standard normal CDF. Requires histograms. Cost values are
  // quantized to 2^-20, exact whenever costs are (small) integers.
  double ks_distance(std::uint64_t n, double mu, double sigma, PairKind kind) const;

  // Raw prefix sums over v <= n of C^j, j = 0..p_max (coprime rings).
  std::vector<double> raw_prefix(std::uint64_t n) const;

 private:
  void check_n(std::uint64_t n) const;

  std::uint64_t n_max_;
  int p_max_;
  bool with_hist_;
  std::vector<double> raw_;                  // [v][j]: ring power sums, row stride p_max+1
  std::vector<std::uint64_t> count_prefix_;  // #Omega_m
  std::vector<std::vector<std::pair<std::int64_t, std::uint32_t>>> hist_;
};

struct MomentRow {
  std::uint64_t n = 0;
  std::uint64_t count = 0;
  std::vector<double> m;  // standardized centered moments m_1..m_p_max
  double ks = 0.0;
};

struct MomentReport {
  std::vector<std::uint64_t> grid;
  std::vector<MomentRow> rows;
  int p_max = 0;
  PairKind kind = PairKind::Reduced;
  CostReference reference = CostReference::LogN;
  double mu = 0.0;
  double sigma = 0.0;
  std::string log_convention = "natural";  // all logs in this toolkit are base e
};

MomentReport moment_report(const std::vector<std::uint64_t>& grid, const CostSpec& c, double mu,
                           double sigma, int p_max, PairKind kind,
                           CostReference reference = CostReference::LogN, unsigned workers = 1);
MomentReport moment_report(const RingScan& scan, const std::vector<std::uint64_t>& grid,
                           double mu, double sigma, int p_max, PairKind kind,
                           CostReference reference = CostReference::LogN);

double ks_distance(std::uint64_t n, const CostSpec& c, double mu, double sigma, PairKind kind,
                   unsigned workers = 1);

enum class GrowthTarget { MeanVsLogN, VarVsLogN };

struct GrowthFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  GrowthTarget target = GrowthTarget::MeanVsLogN;
};

// OLS fit of the mean (or variance) of the total cost over Omega_n against
// log n across the grid.
GrowthFit growth_fit(const std::vector<std::uint64_t>& grid, const CostSpec& c,
                     GrowthTarget target, unsigned workers = 1);
GrowthFit growth_fit(const RingScan& scan, const std::vector<std::uint64_t>& grid,
                     GrowthTarget target);

}  // namespace euclid
