#pragma once

#include <complex>
#include <cstdint>
#include <utility>
#include <vector>

#include "euclid/cf_core.hpp"
#include "euclid/parallel.hpp"

namespace euclid {

enum class PairKind { Reduced, All };  // Reduced: gcd(u,v)=1; All: every 1<=u<v<=n

enum class CostReference { LogV, LogN, LogVOverGcd };

struct PairSet {
  std::uint64_t n;
  PairKind kind;
};

// Power sums S_p = sum over the pair set of (C(u/v) - mu * log ref)^p for
// p = 0..p_max, where ref is v, n, or v/gcd(u,v) and C is evaluated on the
// reduced fraction. S_0 equals the pair count.
struct CostAccumulator {
  std::uint64_t count = 0;
  std::vector<double> power_sums;
  CostReference reference = CostReference::LogV;
  PairKind kind = PairKind::Reduced;
  double mu = 0.0;
  // Centered powers beyond p ~ 12 lose digits to cancellation in doubles.
  bool conditioning_warning = false;
};

std::uint64_t count_omega(std::uint64_t n);      // #{(u,v): u<v<=n, gcd=1}, totient sieve
std::uint64_t count_all_pairs(std::uint64_t n);  // n(n-1)/2

CostAccumulator accumulate_costs(PairSet set, const CostSpec& c, double mu, int p_max,
                                 CostReference reference, unsigned workers = 1);

// Partial sum over v <= n of v^{-2s} * sum_{(u,v) ring} exp(omega*(C - mu log v)).
std::complex<double> dirichlet_partial_sum(std::complex<double> s, std::complex<double> omega,
                                           std::uint64_t n, const CostSpec& c, double mu,
                                           unsigned workers = 1);

// Same shape with the exponential replaced by (C - mu log v)^p; equals the
// p-th omega-derivative of the sum above at omega = 0.
std::complex<double> dp_partial_sum(std::complex<double> s, int p, std::uint64_t n,
                                    const CostSpec& c, double mu, unsigned workers = 1);

// Detail variants exposing the last few ring terms, used to calibrate
// empirical tail bounds for the truncated series.
struct DirichletPartial {
  std::complex<double> sum = 0.0;
  // (v, ring term) for the trailing `window` values of v, ascending.
  std::vector<std::pair<std::uint64_t, std::complex<double>>> last_rings;
};
DirichletPartial dirichlet_partial_detail(std::complex<double> s, std::complex<double> omega,
                                          std::uint64_t n, const CostSpec& c, double mu,
                                          unsigned window = 8, unsigned workers = 1);
DirichletPartial dp_partial_detail(std::complex<double> s, int p, std::uint64_t n,
                                   const CostSpec& c, double mu, unsigned window = 8,
                                   unsigned workers = 1);

// Smallest-prime-factor sieve, shared by the coprimality marking and the
// totient computation.
class SpfSieve {
 public:
  explicit SpfSieve(std::uint64_t n);
  std::uint64_t limit() const { return spf_.size() - 1; }
  // Distinct prime factors of v, appended to `out` (cleared first).
  void distinct_primes(std::uint64_t v, std::vector<std::uint32_t>& out) const;

 private:
  std::vector<std::uint32_t> spf_;
};

namespace detail {

// Marks scratch[u] != 0 for 1 <= u < v sharing a factor with v.
inline void mark_noncoprime(std::uint64_t v, const SpfSieve& sieve,
                            std::vector<std::uint32_t>& primes, std::vector<char>& scratch) {
  sieve.distinct_primes(v, primes);
  for (std::uint32_t p : primes) {
    for (std::uint64_t m = p; m < v; m += p) scratch[m] = 1;
  }
}

inline void unmark_noncoprime(std::uint64_t v, const std::vector<std::uint32_t>& primes,
                              std::vector<char>& scratch) {
  for (std::uint32_t p : primes) {
    for (std::uint64_t m = p; m < v; m += p) scratch[m] = 0;
  }
}

}  // namespace detail

// Calls consumer(u, v) once per pair of the set, u ascending within each v,
// v ascending. The v-range can be partitioned across workers by callers that
// use parallel_block_map directly; this convenience entry point is serial.
template <class F>
void stream_pairs(PairSet set, F&& consumer) {
  if (set.n < 2) return;
  if (set.kind == PairKind::All) {
    for (std::uint64_t v = 2; v <= set.n; ++v)
      for (std::uint64_t u = 1; u < v; ++u) consumer(u, v);
    return;
  }
  SpfSieve sieve(set.n);
  std::vector<char> scratch(set.n, 0);
  std::vector<std::uint32_t> primes;
  for (std::uint64_t v = 2; v <= set.n; ++v) {
    detail::mark_noncoprime(v, sieve, primes, scratch);
    for (std::uint64_t u = 1; u < v; ++u)
      if (!scratch[u]) consumer(u, v);
    detail::unmark_noncoprime(v, primes, scratch);
  }
}

}  // namespace euclid
