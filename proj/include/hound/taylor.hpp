#pragma once

// Polynomial snapshot of a differentiator state.
//
// Captured estimates z_k(t) define the Taylor polynomial
//   f^(j)(tau) ~ sum_{k>=j} z_k / (k-j)! (tau - t)^(k-j),
// used for interpolation and extrapolation, and re-centred at zero to give the
// coefficients K_j of f(t) = sum K_j t^j.
//
// Re-centring at large anchors cancels terms of size ~t^(n-1) against each
// other, so both evaluations use the compensated dot product.

#include <cmath>
#include <span>
#include <vector>

#include "hound/compensated.hpp"
#include "hound/differentiator.hpp"
#include "hound/errors.hpp"

namespace hound {

class TaylorModel {
 public:
  TaylorModel(double anchor_t, std::vector<double> coeffs)
      : anchor_t_(anchor_t), coeffs_(std::move(coeffs)) {
    if (coeffs_.empty()) throw OrderOutOfRange("Taylor model needs at least one coefficient");
    if (!std::isfinite(anchor_t_)) throw NonFiniteSample("anchor time is not finite");
    for (double c : coeffs_) {
      if (!std::isfinite(c)) throw NonFiniteSample("Taylor coefficient is not finite");
    }
  }

  static TaylorModel capture(const Differentiator& d) {
    const auto z = d.estimates();
    return {d.time(), std::vector<double>(z.begin(), z.end())};
  }

  double anchor() const noexcept { return anchor_t_; }
  int order() const noexcept { return static_cast<int>(coeffs_.size()); }
  std::span<const double> coeffs() const noexcept { return coeffs_; }

  /// Estimate of the j-th derivative at tau, 0 <= j < n.
  double eval_derivative(int j, double tau) const {
    const int n = order();
    if (j < 0 || j >= n) {
      throw OrderOutOfRange("derivative index " + std::to_string(j) + " outside [0, " +
                            std::to_string(n - 1) + "]");
    }
    const auto len = static_cast<std::size_t>(n - j);
    std::vector<double> w(len);
    taylor_weights(tau - anchor_t_, w);
    return compensated::dot(w, coeffs_span(j));
  }

  double operator()(double tau) const { return eval_derivative(0, tau); }

  /// K_j = (1/j!) sum_{i>=j} (-t)^(i-j) / (i-j)! z_i(t), j = 0..n-1.
  std::vector<double> extract_poly_coeffs() const {
    const int n = order();
    std::vector<double> k(n);
    std::vector<double> w(n);
    taylor_weights(-anchor_t_, w);
    double j_factorial = 1.0;
    for (int j = 0; j < n; ++j) {
      if (j > 0) j_factorial *= j;
      const auto len = static_cast<std::size_t>(n - j);
      k[j] = compensated::dot(std::span<const double>(w).first(len), coeffs_span(j)) / j_factorial;
    }
    return k;
  }

 private:
  std::span<const double> coeffs_span(int from) const {
    return std::span<const double>(coeffs_).subspan(static_cast<std::size_t>(from));
  }

  double anchor_t_;
  std::vector<double> coeffs_;
};

/// sum_j k[j] tau^j in the power basis, with a compensated dot product.
inline double evaluate_power_series(std::span<const double> k, double tau) {
  std::vector<double> powers(k.size());
  double p = 1.0;
  for (std::size_t j = 0; j < k.size(); ++j) {
    powers[j] = p;
    p *= tau;
  }
  return compensated::dot(k, powers);
}

}  // namespace hound
