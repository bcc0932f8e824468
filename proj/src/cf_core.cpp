#include "euclid/cf_core.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

namespace euclid {

namespace {

void check_pair(std::uint64_t u, std::uint64_t v, const char* what) {
  if (u == 0) throw std::invalid_argument(std::string(what) + ": numerator must be positive");
  if (u >= v) throw std::invalid_argument(std::string(what) + ": requires u < v");
}

std::uint64_t gcd_u64(std::uint64_t a, std::uint64_t b) {
  while (b != 0) {
    std::uint64_t t = a % b;
    a = b;
    b = t;
  }
  return a;
}

}  // namespace

Rational::Rational(std::uint64_t num, std::uint64_t den) : u(num), v(den) {
  check_pair(num, den, "Rational");
  if (gcd_u64(num, den) != 1) throw std::invalid_argument("Rational: pair is not reduced");
}

UnreducedPair::UnreducedPair(std::uint64_t num, std::uint64_t den) : u(num), v(den) {
  check_pair(num, den, "UnreducedPair");
}

DigitSequence::DigitSequence(std::vector<std::uint32_t> digits) : digits_(std::move(digits)) {
  if (digits_.empty()) throw std::invalid_argument("DigitSequence: empty digit string");
  for (std::uint32_t a : digits_) {
    if (a == 0) throw std::invalid_argument("DigitSequence: digits must be >= 1");
  }
  if (digits_.back() < 2) throw std::invalid_argument("DigitSequence: final digit must be >= 2");
}

DigitSequence DigitSequence::canonicalized(std::vector<std::uint32_t> digits) {
  if (digits.size() >= 2 && digits.back() == 1) {
    digits.pop_back();
    digits.back() += 1;
  }
  return DigitSequence(std::move(digits));
}

CostSpec::CostSpec(std::vector<double> table, double tail)
    : table_(std::move(table)), tail_(tail) {
  double m = tail_;
  bool any_positive = tail_ > 0.0;
  if (!std::isfinite(tail_) || tail_ < 0.0)
    throw std::invalid_argument("CostSpec: tail must be finite and >= 0");
  for (double c : table_) {
    if (!std::isfinite(c) || c < 0.0)
      throw std::invalid_argument("CostSpec: table entries must be finite and >= 0");
    if (c > m) m = c;
    if (c > 0.0) any_positive = true;
  }
  if (!any_positive) throw std::invalid_argument("CostSpec: cost identically zero");
  bound_ = m;
}

CostSpec CostSpec::unit() { return CostSpec({}, 1.0); }

CostSpec CostSpec::digit_indicator(std::uint32_t digit) {
  if (digit == 0) throw std::invalid_argument("digit_indicator: digit must be >= 1");
  std::vector<double> table(digit, 0.0);
  table[digit - 1] = 1.0;
  return CostSpec(std::move(table), 0.0);
}

void CostSpec::throw_zero_digit() {
  throw std::invalid_argument("CostSpec: digit must be >= 1");
}

double cost(const DigitSequence& d, const CostSpec& c) {
  double total = 0.0;
  for (std::uint32_t a : d.digits()) total += c(a);
  return total;
}

namespace {

std::vector<std::uint32_t> quotient_stream(std::uint64_t u, std::uint64_t& v) {
  std::vector<std::uint32_t> digits;
  while (u != 0) {
    std::uint64_t q = v / u;
    if (q > std::numeric_limits<std::uint32_t>::max())
      throw std::overflow_error("continued fraction digit exceeds 32 bits");
    digits.push_back(static_cast<std::uint32_t>(q));
    std::uint64_t r = v % u;
    v = u;
    u = r;
  }
  return digits;  // v now holds the gcd
}

}  // namespace

DigitSequence continued_fraction(std::uint64_t u, std::uint64_t v) {
  check_pair(u, v, "continued_fraction");
  auto digits = quotient_stream(u, v);
  if (v != 1) throw std::invalid_argument("continued_fraction: pair is not reduced");
  return DigitSequence::canonicalized(std::move(digits));
}

DigitSequence continued_fraction(const Rational& r) { return continued_fraction(r.u, r.v); }

Rational reconstruct(const DigitSequence& d) {
  // x = 0, then x <- 1/(a_k + x) from the last digit back to the first.
  std::uint64_t num = 0, den = 1;
  const auto& a = d.digits();
  for (std::size_t i = a.size(); i-- > 0;) {
    // 1/(a + num/den) = den/(a*den + num)
    std::uint64_t ai = a[i];
    if (den != 0 && ai > (std::numeric_limits<std::uint64_t>::max() - num) / den)
      throw std::overflow_error("reconstruct: denominator overflow");
    std::uint64_t new_den = ai * den + num;
    num = den;
    den = new_den;
  }
  return Rational(num, den);
}

EuclidRun euclid_run(const UnreducedPair& p) {
  std::uint64_t v = p.v;
  auto digits = quotient_stream(p.u, v);
  return EuclidRun{DigitSequence::canonicalized(std::move(digits)), v};
}

double gauss_map(double x) {
  if (!(x > 0.0) || x > 1.0) throw std::domain_error("gauss_map: requires 0 < x <= 1");
  double inv = 1.0 / x;
  return inv - std::floor(inv);
}

}  // namespace euclid
