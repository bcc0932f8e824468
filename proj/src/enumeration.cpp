#include "euclid/enumeration.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "euclid/compensated.hpp"

namespace euclid {

namespace {

constexpr std::uint64_t kBlockWidth = 256;

// Division loop on a raw pair; returns the total digit cost of the reduced
// fraction and leaves the gcd in `g`.
inline double pair_cost(std::uint64_t u, std::uint64_t v, const CostSpec& c, std::uint64_t& g) {
  double total = 0.0;
  while (u != 0) {
    std::uint64_t q = v / u;
    std::uint64_t r = v % u;
    total += c(q);
    v = u;
    u = r;
  }
  g = v;
  return total;
}

struct MarkScratch {
  const SpfSieve* sieve = nullptr;
  std::vector<char> marks;
  std::vector<std::uint32_t> primes;
};

}  // namespace

SpfSieve::SpfSieve(std::uint64_t n) : spf_(std::max<std::uint64_t>(n, 1) + 1, 0) {
  for (std::uint64_t i = 2; i < spf_.size(); ++i) {
    if (spf_[i] != 0) continue;
    for (std::uint64_t m = i; m < spf_.size(); m += i)
      if (spf_[m] == 0) spf_[m] = static_cast<std::uint32_t>(i);
  }
}

void SpfSieve::distinct_primes(std::uint64_t v, std::vector<std::uint32_t>& out) const {
  out.clear();
  while (v > 1) {
    std::uint32_t p = spf_[v];
    out.push_back(p);
    while (v % p == 0) v /= p;
  }
}

std::uint64_t count_omega(std::uint64_t n) {
  if (n < 2) return 0;
  std::vector<std::uint64_t> phi(n + 1);
  std::iota(phi.begin(), phi.end(), std::uint64_t{0});
  for (std::uint64_t p = 2; p <= n; ++p) {
    if (phi[p] != p) continue;  // p prime
    for (std::uint64_t m = p; m <= n; m += p) phi[m] -= phi[m] / p;
  }
  std::uint64_t total = 0;
  for (std::uint64_t v = 2; v <= n; ++v) total += phi[v];
  return total;
}

std::uint64_t count_all_pairs(std::uint64_t n) {
  if (n < 2) return 0;
  return (n % 2 == 0) ? (n / 2) * (n - 1) : n * ((n - 1) / 2);
}

CostAccumulator accumulate_costs(PairSet set, const CostSpec& c, double mu, int p_max,
                                 CostReference reference, unsigned workers) {
  if (p_max < 0 || p_max > 64)
    throw std::invalid_argument("accumulate_costs: p_max out of range");
  CostAccumulator out;
  out.reference = reference;
  out.kind = set.kind;
  out.mu = mu;
  out.conditioning_warning = p_max > 12;
  out.power_sums.assign(static_cast<std::size_t>(p_max) + 1, 0.0);
  if (set.n < 2) return out;

  struct Partial {
    std::vector<NeumaierSum> sums;
    std::uint64_t count = 0;
  };

  const bool reduced = set.kind == PairKind::Reduced;
  const double log_n = std::log(static_cast<double>(set.n));
  const SpfSieve sieve(reduced ? set.n : 1);

  auto slots = parallel_block_map<Partial>(
      2, set.n + 1, kBlockWidth, workers,
      [&] {
        MarkScratch sc;
        if (reduced) {
          sc.sieve = &sieve;
          sc.marks.assign(set.n, 0);
        }
        return sc;
      },
      [&](std::uint64_t blo, std::uint64_t bhi, Partial& part, MarkScratch& sc) {
        part.sums.assign(static_cast<std::size_t>(p_max) + 1, NeumaierSum{});
        for (std::uint64_t v = blo; v < bhi; ++v) {
          const double log_v = mu == 0.0 ? 0.0 : std::log(static_cast<double>(v));
          if (reduced) {
            detail::mark_noncoprime(v, *sc.sieve, sc.primes, sc.marks);
            // For coprime pairs v/gcd = v, so LogVOverGcd coincides with LogV.
            const double t =
                reference == CostReference::LogN ? mu * log_n : mu * log_v;
            for (std::uint64_t u = 1; u < v; ++u) {
              if (sc.marks[u]) continue;
              std::uint64_t g;
              const double w = pair_cost(u, v, c, g) - t;
              double pw = 1.0;
              for (int p = 0; p <= p_max; ++p) {
                part.sums[p].add(pw);
                pw *= w;
              }
              ++part.count;
            }
            detail::unmark_noncoprime(v, sc.primes, sc.marks);
          } else {
            for (std::uint64_t u = 1; u < v; ++u) {
              std::uint64_t g;
              const double C = pair_cost(u, v, c, g);
              double t = 0.0;
              if (mu != 0.0) {
                switch (reference) {
                  case CostReference::LogV: t = mu * log_v; break;
                  case CostReference::LogN: t = mu * log_n; break;
                  case CostReference::LogVOverGcd:
                    t = mu * std::log(static_cast<double>(v / g));
                    break;
                }
              }
              const double w = C - t;
              double pw = 1.0;
              for (int p = 0; p <= p_max; ++p) {
                part.sums[p].add(pw);
                pw *= w;
              }
              ++part.count;
            }
          }
        }
      });

  std::vector<NeumaierSum> totals(static_cast<std::size_t>(p_max) + 1);
  for (const auto& part : slots) {
    out.count += part.count;
    for (int p = 0; p <= p_max; ++p) totals[p].merge(part.sums[p]);
  }
  for (int p = 0; p <= p_max; ++p) out.power_sums[p] = totals[p].value();
  return out;
}

namespace {

struct ComplexPartial {
  NeumaierSum re, im;
  std::vector<std::pair<std::uint64_t, std::complex<double>>> rings;

  void add(std::complex<double> z) {
    re.add(z.real());
    im.add(z.imag());
  }
};

DirichletPartial finish(std::vector<ComplexPartial> slots) {
  DirichletPartial out;
  NeumaierSum re, im;
  for (auto& part : slots) {
    re.merge(part.re);
    im.merge(part.im);
    out.last_rings.insert(out.last_rings.end(), part.rings.begin(), part.rings.end());
  }
  out.sum = {re.value(), im.value()};
  return out;
}

}  // namespace

DirichletPartial dirichlet_partial_detail(std::complex<double> s, std::complex<double> omega,
                                          std::uint64_t n, const CostSpec& c, double mu,
                                          unsigned window, unsigned workers) {
  DirichletPartial empty;
  if (n < 2) return empty;
  const std::uint64_t ring_lo = n > window ? n - window + 1 : 2;
  const bool weightless = omega == std::complex<double>(0.0, 0.0);
  const SpfSieve sieve(n);

  auto slots = parallel_block_map<ComplexPartial>(
      2, n + 1, kBlockWidth, workers,
      [&] {
        MarkScratch sc;
        sc.sieve = &sieve;
        sc.marks.assign(n, 0);
        return sc;
      },
      [&](std::uint64_t blo, std::uint64_t bhi, ComplexPartial& part, MarkScratch& sc) {
        for (std::uint64_t v = blo; v < bhi; ++v) {
          detail::mark_noncoprime(v, *sc.sieve, sc.primes, sc.marks);
          const double log_v = std::log(static_cast<double>(v));
          std::complex<double> inner = 0.0;
          if (weightless) {
            std::uint64_t cnt = 0;
            for (std::uint64_t u = 1; u < v; ++u) cnt += sc.marks[u] ? 0 : 1;
            inner = static_cast<double>(cnt);
          } else {
            NeumaierSum ire, iim;
            for (std::uint64_t u = 1; u < v; ++u) {
              if (sc.marks[u]) continue;
              std::uint64_t g;
              const double C = pair_cost(u, v, c, g);
              const std::complex<double> w = std::exp(omega * C);
              ire.add(w.real());
              iim.add(w.imag());
            }
            inner = {ire.value(), iim.value()};
          }
          detail::unmark_noncoprime(v, sc.primes, sc.marks);
          // v^{-2s} e^{-omega mu log v} folded into one exponential.
          const std::complex<double> factor = std::exp(-(2.0 * s + omega * mu) * log_v);
          const std::complex<double> term = factor * inner;
          part.add(term);
          if (v >= ring_lo) part.rings.emplace_back(v, term);
        }
      });

  return finish(std::move(slots));
}

DirichletPartial dp_partial_detail(std::complex<double> s, int p, std::uint64_t n,
                                   const CostSpec& c, double mu, unsigned window,
                                   unsigned workers) {
  if (p < 0) throw std::invalid_argument("dp_partial_detail: p must be >= 0");
  DirichletPartial empty;
  if (n < 2) return empty;
  const std::uint64_t ring_lo = n > window ? n - window + 1 : 2;
  const SpfSieve sieve(n);

  auto slots = parallel_block_map<ComplexPartial>(
      2, n + 1, kBlockWidth, workers,
      [&] {
        MarkScratch sc;
        sc.sieve = &sieve;
        sc.marks.assign(n, 0);
        return sc;
      },
      [&](std::uint64_t blo, std::uint64_t bhi, ComplexPartial& part, MarkScratch& sc) {
        for (std::uint64_t v = blo; v < bhi; ++v) {
          detail::mark_noncoprime(v, *sc.sieve, sc.primes, sc.marks);
          const double log_v = std::log(static_cast<double>(v));
          const double t = mu * log_v;
          NeumaierSum inner;
          for (std::uint64_t u = 1; u < v; ++u) {
            if (sc.marks[u]) continue;
            std::uint64_t g;
            const double w = pair_cost(u, v, c, g) - t;
            double pw = 1.0;
            for (int i = 0; i < p; ++i) pw *= w;
            inner.add(pw);
          }
          detail::unmark_noncoprime(v, sc.primes, sc.marks);
          const std::complex<double> term = std::exp(-2.0 * s * log_v) * inner.value();
          part.add(term);
          if (v >= ring_lo) part.rings.emplace_back(v, term);
        }
      });

  return finish(std::move(slots));
}

std::complex<double> dirichlet_partial_sum(std::complex<double> s, std::complex<double> omega,
                                           std::uint64_t n, const CostSpec& c, double mu,
                                           unsigned workers) {
  return dirichlet_partial_detail(s, omega, n, c, mu, 0, workers).sum;
}

std::complex<double> dp_partial_sum(std::complex<double> s, int p, std::uint64_t n,
                                    const CostSpec& c, double mu, unsigned workers) {
  return dp_partial_detail(s, p, n, c, mu, 0, workers).sum;
}

}  // namespace euclid
