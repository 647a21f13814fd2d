// Differentiates a noisy quartic online and prints the recovered polynomial.

#include <cstdio>

#include "hound/differentiator.hpp"
#include "hound/signals.hpp"
#include "hound/taylor.hpp"

int main() {
  const hound::SignalSpec signal{{5.0, -0.004, 0.0003, -0.00002, 0.000001}, {}, 0.7, 7};

  hound::Differentiator diff({5}, {0.0, hound::sample(signal, 0.0, 0)});
  for (int i = 1; i <= 20000; ++i) {
    const double t = i;
    diff.update({t, hound::sample(signal, t, static_cast<std::uint64_t>(i))});
  }

  const auto z = diff.estimates();
  std::printf("t = %.0f\n", diff.time());
  for (int k = 0; k < diff.order(); ++k) {
    std::printf("  z%d = %.10g   (true %.10g)\n", k, z[k], hound::derivative(signal, diff.time(), k));
  }

  const auto model = hound::TaylorModel::capture(diff);
  const auto coeffs = model.extract_poly_coeffs();
  for (std::size_t j = 0; j < coeffs.size(); ++j) std::printf("  K%zu = %.6g\n", j, coeffs[j]);
  std::printf("forecast f(20100) = %.6f (true %.6f)\n", model(20100.0), hound::clean_value(signal, 20100.0));
}
