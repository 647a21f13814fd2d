#pragma once

// Continuous-time reference for the discrete differentiator.
//
//   z'_{m-1}(t) = z_m(t) - g_m n / t^m (z_0(t) - f(t)),   z_n = 0,
//
// integrated with fixed-step classical RK4, plus the closed-form error
//
//   e_{m-1}(t) = sum_d a_{m,d,n} / t^(d+m-1) (c_d + (-1)^d / b_{d,n} I_d(t)),
//   I_d(t)     = int_{t0}^{t} tau^(d+n-1) f^(n)(tau) dtau,
//
// and its bound for |f^(n-1)| <= L.

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>

#include "hound/coefficients.hpp"
#include "hound/differentiator.hpp"
#include "hound/errors.hpp"
#include "hound/signals.hpp"

namespace hound::oracle {

struct ContinuousRun {
  int order = 1;
  double t0 = 1.0;
  /// Integrator step; <= 0 selects 1e-3 * t0.
  double step = 0.0;
  std::vector<double> z0_init;
  SignalSpec signal;  // noise is ignored

  double effective_step() const { return step > 0.0 ? step : 1e-3 * t0; }
};

struct TrajectoryPoint {
  double t = 0.0;
  std::vector<double> z;
};

using TrajectoryObserver = std::function<void(std::uint64_t step_index, double t, std::span<const double> z)>;

namespace detail {

inline void rhs(const GainTable& table, const SignalSpec& signal, double t, std::span<const double> z,
                std::span<double> dz) {
  const std::size_t n = z.size();
  const double residual = z[0] - clean_value(signal, t);
  double inv_pow = 1.0;
  for (std::size_t m = 0; m < n; ++m) {
    inv_pow /= t;
    const double next = m + 1 < n ? z[m + 1] : 0.0;
    dz[m] = next - table.gains_f64[m] * inv_pow * residual;
  }
}

}  // namespace detail

/// Integrates from run.t0 to t_end, calling `observe` at t0 and after every step.
/// Step k ends at t0 + k*step; the last step is shortened to land on t_end.
inline void integrate_continuous(const ContinuousRun& run, double t_end, const TrajectoryObserver& observe) {
  hound::detail::check_order(run.order);
  if (!(run.t0 > 0.0)) throw Error("continuous run needs t0 > 0");
  if (!(t_end > run.t0)) throw Error("t_end must exceed t0");
  const double h = run.effective_step();
  if (!(h > 0.0) || !std::isfinite(h)) throw Error("integrator step must be positive");
  const auto n = static_cast<std::size_t>(run.order);
  if (run.z0_init.size() != n) throw LengthMismatch(n, run.z0_init.size());

  const GainTable table = GainTable::build(run.order);
  std::vector<double> z = run.z0_init, k1(n), k2(n), k3(n), k4(n), tmp(n);
  const auto steps = static_cast<std::uint64_t>(std::ceil((t_end - run.t0) / h - 1e-9));
  observe(0, run.t0, z);
  double t = run.t0;
  for (std::uint64_t k = 1; k <= steps; ++k) {
    const double t_next = k == steps ? t_end : run.t0 + static_cast<double>(k) * h;
    const double dt = t_next - t;
    detail::rhs(table, run.signal, t, z, k1);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = z[i] + 0.5 * dt * k1[i];
    detail::rhs(table, run.signal, t + 0.5 * dt, tmp, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = z[i] + 0.5 * dt * k2[i];
    detail::rhs(table, run.signal, t + 0.5 * dt, tmp, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = z[i] + dt * k3[i];
    detail::rhs(table, run.signal, t_next, tmp, k4);
    for (std::size_t i = 0; i < n; ++i) {
      z[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      if (!std::isfinite(z[i])) throw IntegrationDiverged(t_next);
    }
    t = t_next;
    observe(k, t, z);
  }
}

/// Trajectory recorded every `stride` steps (and always at the final step).
inline std::vector<TrajectoryPoint> integrate_continuous(const ContinuousRun& run, double t_end,
                                                         std::uint64_t stride = 1) {
  std::vector<TrajectoryPoint> out;
  const double h = run.effective_step();
  const auto steps = static_cast<std::uint64_t>(std::ceil((t_end - run.t0) / h - 1e-9));
  stride = std::max<std::uint64_t>(stride, 1);
  integrate_continuous(run, t_end, [&](std::uint64_t k, double t, std::span<const double> z) {
    if (k % stride == 0 || k == steps) out.push_back({t, std::vector<double>(z.begin(), z.end())});
  });
  return out;
}

// --- closed form ---------------------------------------------------------------

inline std::vector<double> closed_form_errors(const GainTable& table, std::span<const double> c, double t,
                                              std::span<const double> integral_terms) {
  const auto n = static_cast<std::size_t>(table.order);
  if (c.size() != n) throw LengthMismatch(n, c.size());
  if (integral_terms.size() != n) throw LengthMismatch(n, integral_terms.size());
  if (!(t > 0.0)) throw Error("closed-form errors need t > 0");
  std::vector<double> e(n, 0.0);
  for (int m = 1; m <= table.order; ++m) {
    double acc = 0.0;
    for (int d = 1; d <= table.order; ++d) {
      const double sign = d % 2 == 0 ? 1.0 : -1.0;
      const double mode = c[d - 1] + sign / table.b_f64(d) * integral_terms[d - 1];
      acc += table.a_f64(m, d) * mode / std::pow(t, d + m - 1);
    }
    e[m - 1] = acc;
  }
  return e;
}

/// I_d = int_{t0}^{t} tau^(d+n-1) f^(n)(tau) dtau for d = 1..n. Exact for purely
/// polynomial signals; composite 20-point Gauss-Legendre otherwise.
inline std::vector<double> forcing_integrals(const SignalSpec& signal, int n, double t0, double t) {
  std::vector<double> out(static_cast<std::size_t>(n), 0.0);
  if (t == t0) return out;
  if (signal.harmonics.empty()) {
    // f^(n)(tau) = sum_{j>=n} j!/(j-n)! K_j tau^(j-n)
    for (int j = n; j <= signal.degree(); ++j) {
      double falling = 1.0;
      for (int i = 0; i < n; ++i) falling *= static_cast<double>(j - i);
      const double coef = falling * signal.poly[static_cast<std::size_t>(j)];
      if (coef == 0.0) continue;
      for (int d = 1; d <= n; ++d) {
        const int p = d + j;  // antiderivative of tau^(d+j-1)
        out[d - 1] += coef * (std::pow(t, p) - std::pow(t0, p)) / p;
      }
    }
    return out;
  }
  double omega_max = 0.0;
  for (const auto& h : signal.harmonics) omega_max = std::max(omega_max, std::abs(h.omega));
  const double span = std::abs(t - t0);
  const auto panels = static_cast<int>(std::max(64.0, std::ceil(span * omega_max / std::numbers::pi) * 2.0));
  using Rule = boost::math::quadrature::gauss<double, 20>;
  for (int d = 1; d <= n; ++d) {
    const auto integrand = [&](double tau) { return std::pow(tau, d + n - 1) * derivative(signal, tau, n); };
    double acc = 0.0;
    for (int p = 0; p < panels; ++p) {
      const double a = t0 + (t - t0) * p / panels;
      const double b = t0 + (t - t0) * (p + 1) / panels;
      acc += Rule::integrate(integrand, a, b);
    }
    out[d - 1] = acc;
  }
  return out;
}

/// Integration constants C_d matching errors e(t0) in the homogeneous solution
///   e_{m-1}(t0) = sum_d a_{m,d,n} C_d / t0^(d+m-1).
inline std::vector<double> fit_constants_from_state(const GainTable& table, double t0,
                                                    std::span<const double> e_at_t0) {
  const int n = table.order;
  if (e_at_t0.size() != static_cast<std::size_t>(n)) throw LengthMismatch(n, e_at_t0.size());
  if (!(t0 > 0.0)) throw SingularSystem("constants can only be fitted at t0 > 0");
  Eigen::MatrixXd m(n, n);
  Eigen::VectorXd rhs(n);
  for (int r = 1; r <= n; ++r) {
    for (int d = 1; d <= n; ++d) m(r - 1, d - 1) = table.a_f64(r, d) / std::pow(t0, d + r - 1);
    rhs(r - 1) = e_at_t0[r - 1];
  }
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
  if (!lu.isInvertible()) throw SingularSystem("constant-fitting system is singular");
  const Eigen::VectorXd c = lu.solve(rhs);
  return {c.data(), c.data() + n};
}

// --- error bound ---------------------------------------------------------------

struct ErrorBoundParams {
  double lipschitz = 0.0;  // L with |f^(n-1)| <= L
  std::vector<double> c_abs;
  double t0 = 1.0;
  std::shared_ptr<const GainTable> gains;
};

/// Right-hand side of
///   |e_{m-1}(t)| <= 2L + sum_d a_{m,d,n} / t^(d+m-1) (|c_d| + t0^(d+n-1) 2L / b_{d,n}),
/// m in 1..n.
inline double error_bound(const ErrorBoundParams& p, int m, double t) {
  if (!p.gains) throw Error("error bound needs a gain table");
  const GainTable& table = *p.gains;
  const int n = table.order;
  hound::detail::check_index(m, n, "channel");
  if (p.c_abs.size() != static_cast<std::size_t>(n)) throw LengthMismatch(n, p.c_abs.size());
  if (!(p.lipschitz >= 0.0)) throw Error("Lipschitz constant must be non-negative");
  if (!(p.t0 > 0.0) || t < p.t0) throw Error("error bound needs t >= t0 > 0");
  const double two_l = 2.0 * p.lipschitz;
  double bound = two_l;
  for (int d = 1; d <= n; ++d) {
    const double mode = std::abs(p.c_abs[d - 1]) + std::pow(p.t0, d + n - 1) * two_l / table.b_f64(d);
    bound += table.a_f64(m, d) * mode / std::pow(t, d + m - 1);
  }
  return bound;
}

// --- discrete vs continuous ----------------------------------------------------

struct Discrepancy {
  double max_abs = 0.0;  // over all channels and compared times
  std::vector<double> per_channel;
  std::uint64_t compared = 0;
};

/// Runs the discrete recurrence with step h and RK4 with step h / substeps from
/// the same state at t0, comparing both at t0 + k h over (t0, t_end].
inline Discrepancy compare_discrete_continuous(const ContinuousRun& run, double t_end, double h,
                                               std::uint64_t substeps) {
  if (!(h > 0.0) || substeps == 0) throw Error("need h > 0 and at least one substep");
  ContinuousRun fine = run;
  fine.step = h / static_cast<double>(substeps);

  std::vector<std::vector<double>> reference;
  integrate_continuous(fine, t_end, [&](std::uint64_t k, double, std::span<const double> z) {
    if (k % substeps == 0) reference.emplace_back(z.begin(), z.end());
  });

  DifferentiatorConfig cfg{run.order, run.z0_init, false};
  Differentiator disc(cfg, {run.t0, clean_value(run.signal, run.t0)});
  Discrepancy out;
  out.per_channel.assign(static_cast<std::size_t>(run.order), 0.0);
  for (std::size_t k = 1; k < reference.size(); ++k) {
    const double t = run.t0 + static_cast<double>(k) * h;
    if (t > t_end * (1.0 + 1e-12)) break;
    disc.update({t, clean_value(run.signal, t)});
    const auto z = disc.estimates();
    for (std::size_t ch = 0; ch < z.size(); ++ch) {
      const double diff = std::abs(z[ch] - reference[k][ch]);
      out.per_channel[ch] = std::max(out.per_channel[ch], diff);
      out.max_abs = std::max(out.max_abs, diff);
    }
    ++out.compared;
  }
  return out;
}

}  // namespace hound::oracle
