#pragma once

#include <cstdint>
#include <vector>

namespace euclid {

// Reduced fraction u/v with 1 <= u < v and gcd(u, v) = 1.
struct Rational {
  std::uint64_t u;
  std::uint64_t v;

  Rational(std::uint64_t num, std::uint64_t den);

  friend bool operator==(const Rational&, const Rational&) = default;
};

// Arbitrary integer pair 1 <= u < v; common factors allowed.
struct UnreducedPair {
  std::uint64_t u;
  std::uint64_t v;

  UnreducedPair(std::uint64_t num, std::uint64_t den);
};

// Continued-fraction digits [a_1, ..., a_n] of a rational in (0,1): every
// digit >= 1 and the final digit >= 2, which pins down the unique expansion.
class DigitSequence {
 public:
  explicit DigitSequence(std::vector<std::uint32_t> digits);

  // Folds a trailing [..., a, 1] into [..., a+1] before validating. The
  // division loop cannot actually produce a trailing 1, but callers building
  // sequences by hand get the canonical form.
  static DigitSequence canonicalized(std::vector<std::uint32_t> digits);

  const std::vector<std::uint32_t>& digits() const { return digits_; }
  std::size_t size() const { return digits_.size(); }
  std::uint32_t operator[](std::size_t i) const { return digits_[i]; }

  friend bool operator==(const DigitSequence&, const DigitSequence&) = default;

 private:
  std::vector<std::uint32_t> digits_;
};

// Per-digit cost: c(n) = table[n-1] for n <= K, constant tail for n > K.
// Values are finite, non-negative, and not all zero.
class CostSpec {
 public:
  CostSpec(std::vector<double> table, double tail);

  static CostSpec unit();                              // c(n) = 1 for every n
  static CostSpec digit_indicator(std::uint32_t digit);  // 1 at one digit, else 0

  double operator()(std::uint64_t digit) const {
    if (digit == 0) throw_zero_digit();
    return digit <= table_.size() ? table_[digit - 1] : tail_;
  }
  const std::vector<double>& table() const { return table_; }
  double tail() const { return tail_; }
  double bound() const { return bound_; }  // sup over all digits

  friend bool operator==(const CostSpec&, const CostSpec&) = default;

 private:
  [[noreturn]] static void throw_zero_digit();
  std::vector<double> table_;
  double tail_;
  double bound_;
};

// Total cost C(u/v) = sum of c(a_k) over the digit string.
double cost(const DigitSequence& d, const CostSpec& c);

// Quotient stream of the Euclidean algorithm on (u, v). Requires gcd = 1.
DigitSequence continued_fraction(std::uint64_t u, std::uint64_t v);
DigitSequence continued_fraction(const Rational& r);

// Backward evaluation of the digit string; returns the (reduced) fraction.
Rational reconstruct(const DigitSequence& d);

// One Euclid run on a not-necessarily-reduced pair. The quotient stream
// equals the digits of the reduced fraction and the last nonzero remainder
// is the gcd, so both come out of a single division loop.
struct EuclidRun {
  DigitSequence digits;
  std::uint64_t gcd;
};
EuclidRun euclid_run(const UnreducedPair& p);

// T(x) = 1/x - floor(1/x) on (0, 1].
double gauss_map(double x);

}  // namespace euclid
