#pragma once

#include <cmath>

namespace euclid {

// Neumaier variant of Kahan summation: tracks a running compensation term so
// that adding values of wildly different magnitude (or merging partial sums)
// loses essentially nothing beyond one final rounding.
struct NeumaierSum {
  double sum = 0.0;
  double comp = 0.0;

  void add(double x) {
    double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      comp += (sum - t) + x;
    } else {
      comp += (x - t) + sum;
    }
    sum = t;
  }

  // Merge another partial. Order of merges must be fixed by the caller when
  // reproducibility across worker counts is required.
  void merge(const NeumaierSum& other) {
    add(other.sum);
    add(other.comp);
  }

  double value() const { return sum + comp; }
};

}  // namespace euclid
