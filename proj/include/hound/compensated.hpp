#pragma once

// Error-free transforms and the Dot2 compensated dot product
// (Ogita, Rump, Oishi). Results are as accurate as if computed in twice the
// working precision and then rounded.

#include <cmath>
#include <cstddef>
#include <span>

namespace hound::compensated {

struct Pair {
  double value;
  double error;
};

inline Pair two_sum(double a, double b) {
  const double s = a + b;
  const double bb = s - a;
  return {s, (a - (s - bb)) + (b - bb)};
}

inline Pair two_prod(double a, double b) {
  const double p = a * b;
  return {p, std::fma(a, b, -p)};
}

inline double dot(std::span<const double> x, std::span<const double> y) {
  const std::size_t len = x.size() < y.size() ? x.size() : y.size();
  if (len == 0) return 0.0;
  auto [p, s] = two_prod(x[0], y[0]);
  for (std::size_t i = 1; i < len; ++i) {
    const auto [h, r] = two_prod(x[i], y[i]);
    const auto [sum, q] = two_sum(p, h);
    p = sum;
    s += q + r;
  }
  return p + s;
}

inline double sum(std::span<const double> x) {
  double p = 0.0;
  double s = 0.0;
  for (double v : x) {
    const auto [sum, q] = two_sum(p, v);
    p = sum;
    s += q;
  }
  return p + s;
}

}  // namespace hound::compensated
