#include "euclid/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "euclid/compensated.hpp"
#include "euclid/parallel.hpp"

namespace euclid {

namespace {

constexpr double kQuant = 1048576.0;  // 2^20 cost quantization for histogram keys
constexpr std::uint64_t kBlockWidth = 256;

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * 3.14159265358979323846);
}

std::vector<std::vector<double>> pascal_triangle(int p_max) {
  std::vector<std::vector<double>> b(static_cast<std::size_t>(p_max) + 1);
  for (int p = 0; p <= p_max; ++p) {
    b[p].assign(static_cast<std::size_t>(p) + 1, 1.0);
    for (int i = 1; i < p; ++i) b[p][i] = b[p - 1][i - 1] + b[p - 1][i];
  }
  return b;
}

// Max digit count of any fraction with denominator <= n (Fibonacci growth),
// padded for safety.
int max_steps_bound(std::uint64_t n) {
  return static_cast<int>(std::log(static_cast<double>(std::max<std::uint64_t>(n, 2))) /
                          std::log(1.6180339887498949)) +
         3;
}

bool small_integer_costs(const CostSpec& c) {
  auto ok = [](double x) { return x == std::floor(x) && x >= 0.0 && x <= 255.0; };
  if (!ok(c.tail())) return false;
  for (double t : c.table())
    if (!ok(t)) return false;
  return true;
}

}  // namespace

double normal_cdf(double x) {
  // Hastings-type rational approximation (Abramowitz-Stegun 26.2.17),
  // max absolute error 7.5e-8. Evaluated on |x| and reflected for x < 0.
  static constexpr double p = 0.2316419;
  static constexpr double b1 = 0.319381530, b2 = -0.356563782, b3 = 1.781477937,
                          b4 = -1.821255978, b5 = 1.330274429;
  const double ax = std::abs(x);
  const double t = 1.0 / (1.0 + p * ax);
  const double poly = t * (b1 + t * (b2 + t * (b3 + t * (b4 + t * b5))));
  const double tail = normal_pdf(ax) * poly;
  return x >= 0.0 ? 1.0 - tail : tail;
}

RingScan::RingScan(std::uint64_t n_max, const CostSpec& c, int p_max, bool with_histograms,
                   unsigned workers)
    : n_max_(n_max), p_max_(p_max), with_hist_(with_histograms) {
  if (n_max < 2) throw std::invalid_argument("RingScan: n_max must be >= 2");
  if (p_max < 0 || p_max > 16) throw std::invalid_argument("RingScan: p_max out of range");

  const std::size_t stride = static_cast<std::size_t>(p_max) + 1;
  raw_.assign((n_max + 1) * stride, 0.0);
  if (with_hist_) hist_.resize(n_max + 1);

  const SpfSieve sieve(n_max);
  const bool dense_hist = with_hist_ && small_integer_costs(c);
  const std::size_t dense_size =
      dense_hist ? static_cast<std::size_t>(max_steps_bound(n_max) *
                                            std::llround(c.bound())) + 2
                 : 0;

  struct Scratch {
    std::vector<char> marks;
    std::vector<std::uint32_t> primes;
    std::vector<NeumaierSum> ring;
    std::vector<std::uint32_t> dense;
    std::vector<std::uint32_t> touched;
    std::vector<std::pair<std::int64_t, std::uint32_t>> sparse;
  };

  parallel_block_map<char>(
      2, n_max + 1, kBlockWidth, workers,
      [&] {
        Scratch sc;
        sc.marks.assign(n_max, 0);
        sc.ring.resize(stride);
        if (dense_hist) sc.dense.assign(dense_size, 0);
        return sc;
      },
      [&](std::uint64_t blo, std::uint64_t bhi, char&, Scratch& sc) {
        for (std::uint64_t v = blo; v < bhi; ++v) {
          detail::mark_noncoprime(v, sieve, sc.primes, sc.marks);
          std::fill(sc.ring.begin(), sc.ring.end(), NeumaierSum{});
          sc.touched.clear();
          sc.sparse.clear();
          for (std::uint64_t u = 1; u < v; ++u) {
            if (sc.marks[u]) continue;
            std::uint64_t a = u, b = v;
            double C = 0.0;
            while (a != 0) {
              const std::uint64_t q = b / a;
              const std::uint64_t r = b % a;
              C += c(q);
              b = a;
              a = r;
            }
            double pw = 1.0;
            for (std::size_t j = 0; j < stride; ++j) {
              sc.ring[j].add(pw);
              pw *= C;
            }
            if (with_hist_) {
              if (dense_hist) {
                const auto idx = static_cast<std::size_t>(std::llround(C));
                if (sc.dense[idx]++ == 0) sc.touched.push_back(static_cast<std::uint32_t>(idx));
              } else {
                const std::int64_t key = std::llround(C * kQuant);
                bool found = false;
                for (auto& kv : sc.sparse)
                  if (kv.first == key) {
                    ++kv.second;
                    found = true;
                    break;
                  }
                if (!found) sc.sparse.emplace_back(key, 1);
              }
            }
          }
          detail::unmark_noncoprime(v, sc.primes, sc.marks);
          double* out = &raw_[v * stride];
          for (std::size_t j = 0; j < stride; ++j) out[j] = sc.ring[j].value();
          if (with_hist_) {
            auto& hv = hist_[v];
            if (dense_hist) {
              std::sort(sc.touched.begin(), sc.touched.end());
              hv.reserve(sc.touched.size());
              for (std::uint32_t idx : sc.touched) {
                hv.emplace_back(static_cast<std::int64_t>(idx) *
                                    static_cast<std::int64_t>(kQuant),
                                sc.dense[idx]);
                sc.dense[idx] = 0;
              }
            } else {
              std::sort(sc.sparse.begin(), sc.sparse.end());
              hv = sc.sparse;
            }
          }
        }
      });

  count_prefix_.assign(n_max + 1, 0);
  for (std::uint64_t v = 2; v <= n_max; ++v)
    count_prefix_[v] =
        count_prefix_[v - 1] + static_cast<std::uint64_t>(std::llround(raw_[v * stride]));
}

void RingScan::check_n(std::uint64_t n) const {
  if (n < 2 || n > n_max_) throw std::out_of_range("RingScan: n outside the scanned range");
}

std::uint64_t RingScan::count(std::uint64_t n, PairKind kind) const {
  check_n(n);
  return kind == PairKind::Reduced ? count_prefix_[n] : count_all_pairs(n);
}

std::vector<double> RingScan::raw_prefix(std::uint64_t n) const {
  check_n(n);
  const std::size_t stride = static_cast<std::size_t>(p_max_) + 1;
  std::vector<NeumaierSum> acc(stride);
  for (std::uint64_t v = 2; v <= n; ++v)
    for (std::size_t j = 0; j < stride; ++j) acc[j].add(raw_[v * stride + j]);
  std::vector<double> out(stride);
  for (std::size_t j = 0; j < stride; ++j) out[j] = acc[j].value();
  return out;
}

std::vector<double> RingScan::centered_sums(std::uint64_t n, double mu, PairKind kind,
                                            CostReference reference) const {
  check_n(n);
  const int P = p_max_;
  const std::size_t stride = static_cast<std::size_t>(P) + 1;
  const auto binom = pascal_triangle(P);
  const double log_n = std::log(static_cast<double>(n));

  // Recenter the raw ring sums by a shift t: sum (C - t)^p over the ring.
  std::vector<double> powt(stride);
  auto recombine = [&](const double* R, double t, double* out_p) {
    powt[0] = 1.0;
    for (int k = 1; k <= P; ++k) powt[k] = powt[k - 1] * (-t);
    for (int p = 0; p <= P; ++p) {
      double acc = 0.0;
      for (int i = 0; i <= p; ++i) acc += binom[p][i] * powt[p - i] * R[i];
      out_p[p] = acc;
    }
  };

  std::vector<double> tmp(stride);
  std::vector<NeumaierSum> acc(stride);
  std::vector<double> out(stride);

  if (kind == PairKind::Reduced) {
    if (reference == CostReference::LogN) {
      const auto rp = raw_prefix(n);
      recombine(rp.data(), mu * log_n, out.data());
      return out;
    }
    // LogV and LogVOverGcd coincide on coprime pairs.
    for (std::uint64_t v = 2; v <= n; ++v) {
      recombine(&raw_[v * stride], mu * std::log(static_cast<double>(v)), tmp.data());
      for (std::size_t j = 0; j < stride; ++j) acc[j].add(tmp[j]);
    }
    for (std::size_t j = 0; j < stride; ++j) out[j] = acc[j].value();
    return out;
  }

  // All pairs: group by gcd d. Pairs with gcd d and v <= n are in bijection
  // with coprime pairs bounded by floor(n/d); the cost is the reduced one.
  if (reference == CostReference::LogN) {
    // Constant shift, so aggregate raw sums across gcd classes first and
    // recenter once at the end.
    std::vector<NeumaierSum> raw_acc(stride);
    std::vector<double> prefix((n + 1) * stride, 0.0);
    {
      std::vector<NeumaierSum> run(stride);
      for (std::uint64_t v = 2; v <= n; ++v) {
        for (std::size_t j = 0; j < stride; ++j) {
          run[j].add(raw_[v * stride + j]);
          prefix[v * stride + j] = run[j].value();
        }
      }
    }
    for (std::uint64_t d = 1; d * 2 <= n; ++d) {
      const std::uint64_t m = n / d;
      for (std::size_t j = 0; j < stride; ++j) raw_acc[j].add(prefix[m * stride + j]);
    }
    std::vector<double> totals(stride);
    for (std::size_t j = 0; j < stride; ++j) totals[j] = raw_acc[j].value();
    recombine(totals.data(), mu * log_n, out.data());
    return out;
  }

  // Per-ring centering: build prefix arrays of ring sums centered by mu log v.
  std::vector<double> prefix((n + 1) * stride, 0.0);
  {
    std::vector<NeumaierSum> run(stride);
    for (std::uint64_t v = 2; v <= n; ++v) {
      recombine(&raw_[v * stride], mu * std::log(static_cast<double>(v)), tmp.data());
      for (std::size_t j = 0; j < stride; ++j) {
        run[j].add(tmp[j]);
        prefix[v * stride + j] = run[j].value();
      }
    }
  }

  if (reference == CostReference::LogVOverGcd) {
    // v/gcd is the reduced denominator, so each gcd class contributes its
    // coprime prefix directly.
    for (std::uint64_t d = 1; d * 2 <= n; ++d) {
      const std::uint64_t m = n / d;
      for (std::size_t j = 0; j < stride; ++j) acc[j].add(prefix[m * stride + j]);
    }
    for (std::size_t j = 0; j < stride; ++j) out[j] = acc[j].value();
    return out;
  }

  // LogV with the full denominator v = d * v': shift the per-class sums by
  // the extra mu log d via one more binomial pass.
  for (std::uint64_t d = 1; d * 2 <= n; ++d) {
    const std::uint64_t m = n / d;
    const double t = mu * std::log(static_cast<double>(d));
    powt[0] = 1.0;
    for (int k = 1; k <= P; ++k) powt[k] = powt[k - 1] * (-t);
    for (int p = 0; p <= P; ++p) {
      double s = 0.0;
      for (int i = 0; i <= p; ++i) s += binom[p][i] * powt[p - i] * prefix[m * stride + i];
      acc[p].add(s);
    }
  }
  for (std::size_t j = 0; j < stride; ++j) out[j] = acc[j].value();
  return out;
}

double RingScan::ks_distance(std::uint64_t n, double mu, double sigma, PairKind kind) const {
  if (!with_hist_) throw std::logic_error("RingScan: histograms were not recorded");
  check_n(n);
  if (n < 3) throw std::invalid_argument("ks_distance: requires n >= 3");
  if (!(sigma > 0.0)) throw std::invalid_argument("ks_distance: sigma must be positive");

  std::map<std::int64_t, double> cum;
  for (std::uint64_t v = 2; v <= n; ++v)
    for (const auto& [key, cnt] : hist_[v]) cum[key] += cnt;

  std::map<std::int64_t, double> dist;
  if (kind == PairKind::Reduced) {
    dist = std::move(cum);
  } else {
    // Descending pass over the distinct values m = floor(n/d): cum tracks the
    // coprime histogram up to m, added with multiplicity #{d: floor(n/d)=m}.
    std::uint64_t d = 1;
    std::uint64_t prev_m = n;
    while (d <= n) {
      const std::uint64_t m = n / d;
      if (m < 2) break;
      const std::uint64_t d_hi = n / m;
      for (std::uint64_t v = prev_m; v > m; --v)
        for (const auto& [key, cnt] : hist_[v]) cum[key] -= cnt;
      prev_m = m;
      const double mult = static_cast<double>(d_hi - d + 1);
      for (const auto& [key, val] : cum)
        if (val > 0.0) dist[key] += mult * val;
      d = d_hi + 1;
    }
  }

  double total = 0.0;
  for (const auto& [key, cnt] : dist) total += cnt;
  if (total <= 0.0) return 0.0;

  const double log_n = std::log(static_cast<double>(n));
  const double center = mu * log_n;
  const double scale = sigma * std::sqrt(log_n);
  double run = 0.0, D = 0.0;
  for (const auto& [key, cnt] : dist) {
    const double z = (static_cast<double>(key) / kQuant - center) / scale;
    const double F = normal_cdf(z);
    D = std::max(D, std::abs(run / total - F));
    run += cnt;
    D = std::max(D, std::abs(run / total - F));
  }
  return D;
}

MomentReport moment_report(const RingScan& scan, const std::vector<std::uint64_t>& grid,
                           double mu, double sigma, int p_max, PairKind kind,
                           CostReference reference) {
  if (grid.empty()) throw std::invalid_argument("moment_report: empty grid");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] <= 2) throw std::invalid_argument("moment_report: requires n >= 3");
    if (i > 0 && grid[i] <= grid[i - 1])
      throw std::invalid_argument("moment_report: grid must be strictly ascending");
  }
  if (!(sigma > 0.0)) throw std::invalid_argument("moment_report: sigma must be positive");
  if (p_max < 1 || p_max > scan.p_max())
    throw std::invalid_argument("moment_report: p_max outside the scanned range");

  MomentReport rep;
  rep.grid = grid;
  rep.p_max = p_max;
  rep.kind = kind;
  rep.reference = reference;
  rep.mu = mu;
  rep.sigma = sigma;
  for (std::uint64_t n : grid) {
    MomentRow row;
    row.n = n;
    row.count = scan.count(n, kind);
    const auto sums = scan.centered_sums(n, mu, kind, reference);
    const double scale = sigma * std::sqrt(std::log(static_cast<double>(n)));
    row.m.resize(static_cast<std::size_t>(p_max));
    double sp = scale;
    for (int p = 1; p <= p_max; ++p) {
      row.m[p - 1] = sums[p] / (static_cast<double>(row.count) * sp);
      sp *= scale;
    }
    row.ks = scan.ks_distance(n, mu, sigma, kind);
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

MomentReport moment_report(const std::vector<std::uint64_t>& grid, const CostSpec& c, double mu,
                           double sigma, int p_max, PairKind kind, CostReference reference,
                           unsigned workers) {
  if (grid.empty()) throw std::invalid_argument("moment_report: empty grid");
  RingScan scan(grid.back(), c, p_max, true, workers);
  return moment_report(scan, grid, mu, sigma, p_max, kind, reference);
}

double ks_distance(std::uint64_t n, const CostSpec& c, double mu, double sigma, PairKind kind,
                   unsigned workers) {
  RingScan scan(n, c, 0, true, workers);
  return scan.ks_distance(n, mu, sigma, kind);
}

GrowthFit growth_fit(const RingScan& scan, const std::vector<std::uint64_t>& grid,
                     GrowthTarget target) {
  if (grid.size() < 2) throw std::invalid_argument("growth_fit: need at least two grid points");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (grid[i] <= grid[i - 1])
      throw std::invalid_argument("growth_fit: grid must be strictly ascending");
  if (grid.back() < 30 * grid.front())
    throw std::invalid_argument("growth_fit: grid must span at least a factor of 30");

  std::vector<double> xs, ys;
  for (std::uint64_t n : grid) {
    const auto rp = scan.raw_prefix(n);
    const double cnt = static_cast<double>(scan.count(n, PairKind::Reduced));
    const double mean = rp[1] / cnt;
    double y = mean;
    if (target == GrowthTarget::VarVsLogN) {
      if (scan.p_max() < 2) throw std::invalid_argument("growth_fit: scan lacks second moments");
      y = rp[2] / cnt - mean * mean;
    }
    xs.push_back(std::log(static_cast<double>(n)));
    ys.push_back(y);
  }

  const double N = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= N;
  my /= N;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  GrowthFit fit;
  fit.target = target;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 0.0;
  return fit;
}

GrowthFit growth_fit(const std::vector<std::uint64_t>& grid, const CostSpec& c,
                     GrowthTarget target, unsigned workers) {
  if (grid.empty()) throw std::invalid_argument("growth_fit: empty grid");
  RingScan scan(grid.back(), c, 2, false, workers);
  return growth_fit(scan, grid, target);
}

}  // namespace euclid
