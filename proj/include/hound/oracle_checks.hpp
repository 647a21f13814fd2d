#pragma once

// Consistency suite between the discrete differentiator, the RK4 reference and
// the closed-form error solution. Used by `hound oracle-check`.

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "hound/differentiator.hpp"
#include "hound/fit.hpp"
#include "hound/oracle.hpp"
#include "hound/signals.hpp"

namespace hound::oracle {

struct CheckResult {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double threshold = 0.0;
  std::string detail;
};

/// Largest RK4-vs-closed-form mismatch, per channel normalised by the largest
/// error magnitude the channel reaches. Constants are fitted from the initial
/// state, integrals are exact (polynomial) or quadrature.
inline double closed_form_mismatch(const ContinuousRun& run, double t_end, std::uint64_t stride) {
  const auto table = make_gain_table(run.order);
  const auto truth0 = derivative_vector(run.signal, run.t0, run.order);
  const auto c = fit_constants_from_state(*table, run.t0, state_error(run.z0_init, truth0));
  const auto n = static_cast<std::size_t>(run.order);
  std::vector<double> worst_diff(n, 0.0), scale(n, 0.0);
  integrate_continuous(run, t_end, [&](std::uint64_t k, double t, std::span<const double> z) {
    if (k % stride != 0) return;
    const auto observed = state_error(z, derivative_vector(run.signal, t, run.order));
    const auto predicted = closed_form_errors(*table, c, t, forcing_integrals(run.signal, run.order, run.t0, t));
    for (std::size_t i = 0; i < n; ++i) {
      worst_diff[i] = std::max(worst_diff[i], std::abs(observed[i] - predicted[i]));
      scale[i] = std::max(scale[i], std::abs(predicted[i]));
    }
  });
  double rel = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (scale[i] > 0.0) rel = std::max(rel, worst_diff[i] / scale[i]);
    else rel = std::max(rel, worst_diff[i]);
  }
  return rel;
}

/// max over the trajectory and channels of |e_{m-1}(t)| - bound_m(t). Negative
/// means the bound held everywhere.
inline double bound_margin(const ContinuousRun& run, double t_end, double lipschitz) {
  const auto table = make_gain_table(run.order);
  const auto e0 = state_error(run.z0_init, derivative_vector(run.signal, run.t0, run.order));
  auto c = fit_constants_from_state(*table, run.t0, e0);
  for (double& v : c) v = std::abs(v);
  const ErrorBoundParams params{lipschitz, c, run.t0, table};
  double worst = -std::numeric_limits<double>::infinity();
  integrate_continuous(run, t_end, [&](std::uint64_t, double t, std::span<const double> z) {
    for (int m = 1; m <= run.order; ++m) {
      const double e = std::abs(z[m - 1] - derivative(run.signal, t, m - 1));
      worst = std::max(worst, e - error_bound(params, m, t));
    }
  });
  return worst;
}

/// Growth exponent of |z_{m-1} - f^(m-1)| for the discrete recurrence at unit
/// steps, fitted over log-spaced times in [t_lo, t_hi].
inline std::vector<double> discrete_growth_exponents(const SignalSpec& signal, int n, double t_lo, double t_hi) {
  Differentiator d({n, std::nullopt, false}, {0.0, clean_value(signal, 0.0)});
  std::vector<double> times;
  const int decades_x10 = static_cast<int>(std::lround(10.0 * std::log10(t_hi / t_lo)));
  for (int k = 0; k <= decades_x10; ++k) times.push_back(std::round(t_lo * std::pow(10.0, k / 10.0)));
  std::vector<std::vector<double>> errs(static_cast<std::size_t>(n));
  std::size_t next = 0;
  for (double t = 1.0; next < times.size(); t += 1.0) {
    d.update({t, clean_value(signal, t)});
    if (t == times[next]) {
      const auto e = state_error(d, derivative_vector(signal, t, n));
      for (int m = 0; m < n; ++m) errs[m].push_back(std::abs(e[m]));
      ++next;
    }
  }
  std::vector<double> out;
  for (const auto& e : errs) out.push_back(fit_power_law(times, e));
  return out;
}

inline std::vector<CheckResult> run_oracle_checks() {
  std::vector<CheckResult> out;
  auto add = [&](std::string name, bool ok, double measured, double threshold, std::string detail = {}) {
    out.push_back({std::move(name), ok, measured, threshold, std::move(detail)});
  };

  // Closed form against RK4, polynomial signals of degree n-1 and degree n.
  for (int n = 1; n <= 3; ++n) {
    SignalSpec low;
    for (int j = 0; j < n; ++j) low.poly.push_back(1.0 + j);
    SignalSpec top;
    top.poly.assign(static_cast<std::size_t>(n + 1), 0.0);
    top.poly[n] = 1.0;
    for (const auto& [label, sig] : {std::pair{"poly", low}, std::pair{"t^n", top}}) {
      ContinuousRun run{n, 1.0, 1e-3, {}, sig};
      run.z0_init.assign(static_cast<std::size_t>(n), 0.0);
      run.z0_init[0] = clean_value(sig, 1.0);
      const double rel = closed_form_mismatch(run, 50.0, 100);
      std::ostringstream name;
      name << "closed-form-vs-rk4 n=" << n << " signal=" << label;
      add(name.str(), rel <= 1e-6, rel, 1e-6);
    }
  }

  // Discrete recurrence converges to the continuous flow at first order.
  {
    ContinuousRun run{3, 1.0, 0.0, {6.0, 0.0, 0.0}, SignalSpec{{1.0, 2.0, 3.0}, {}, 0.0, 0}};
    const auto coarse = compare_discrete_continuous(run, 100.0, 0.02, 20);
    const auto fine = compare_discrete_continuous(run, 100.0, 0.01, 10);
    const double ratio = coarse.max_abs / fine.max_abs;
    std::ostringstream d;
    d << "max|dz| h=0.02: " << coarse.max_abs << ", h=0.01: " << fine.max_abs;
    add("discrete-vs-continuous-order", ratio >= 1.8, ratio, 1.8, d.str());
  }

  // Error bound on sin(t) with |f^(n-1)| <= 1.
  for (int n = 2; n <= 3; ++n) {
    SignalSpec sine{{}, {{1.0, 1.0, 0.0}}, 0.0, 0};
    ContinuousRun run{n, 1.0, 1e-3, {}, sine};
    run.z0_init.assign(static_cast<std::size_t>(n), 0.0);
    run.z0_init[0] = std::sin(1.0);
    const double margin = bound_margin(run, 500.0, 1.0);
    add("error-bound sin(t) n=" + std::to_string(n), margin <= 1e-6, margin, 1e-6);
  }

  // f = t^n diverges with exponent n-m+1 in channel m.
  {
    const int n = 2;
    SignalSpec sq{{0.0, 0.0, 1.0}, {}, 0.0, 0};
    const auto expo = discrete_growth_exponents(sq, n, 100.0, 10000.0);
    for (int m = 1; m <= n; ++m) {
      const double expected = n - m + 1;
      const double got = expo[m - 1];
      std::ostringstream d;
      d << "expected " << expected;
      add("divergence-exponent t^2 m=" + std::to_string(m), std::abs(got - expected) <= 0.2, got, 0.2, d.str());
    }
  }
  return out;
}

}  // namespace hound::oracle
