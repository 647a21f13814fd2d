#pragma once

// Monte Carlo check of the noise variance law Var(z_{m-1}(t)) ~ sigma^2 / t^(2m-1).
//
// Runs independent seeded replicas of the differentiator on a noisy signal,
// records every channel at a set of grid times, and reports cross-replica
// means and variances. The slope of log Var against log t is the quantity
// compared with -(2m-1); the proportionality constant is only estimated.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <thread>
#include <vector>

#include "hound/differentiator.hpp"
#include "hound/errors.hpp"
#include "hound/fit.hpp"
#include "hound/signals.hpp"

namespace hound {

inline constexpr int kMinVarianceRuns = 100;

struct MonteCarloConfig {
  int order = 3;
  int runs = 200;
  std::vector<double> grid_times;
  /// Sampling of every replica: samples at t_start + i*dt, initialised at t_start.
  double t_start = 0.0;
  double dt = 1.0;
  /// 0 picks std::thread::hardware_concurrency().
  unsigned threads = 0;
};

struct VarianceProfile {
  int order = 0;
  int runs = 0;
  std::vector<double> times;
  /// [channel][grid point]
  std::vector<std::vector<double>> mean;
  std::vector<std::vector<double>> variance;
};

namespace detail {

/// Sample indices at which the grid times are hit exactly (to rounding).
inline std::vector<std::uint64_t> grid_indices(const MonteCarloConfig& cfg) {
  std::vector<std::uint64_t> idx;
  double prev = cfg.t_start;
  for (double g : cfg.grid_times) {
    if (!(g > prev)) throw InputError(0, "grid times must increase and exceed the start time");
    const double k = std::round((g - cfg.t_start) / cfg.dt);
    if (std::abs(cfg.t_start + k * cfg.dt - g) > 1e-9 * std::max(1.0, std::abs(g))) {
      throw InputError(0, "grid time " + std::to_string(g) + " is not on the sampling lattice");
    }
    idx.push_back(static_cast<std::uint64_t>(k));
    prev = g;
  }
  return idx;
}

}  // namespace detail

/// values[r][g][ch] of replica r, grid point g, channel ch.
inline std::vector<std::vector<std::vector<double>>> run_replicas(const SignalSpec& spec,
                                                                  const MonteCarloConfig& cfg) {
  detail::check_order(cfg.order);
  spec.validate();
  const auto indices = detail::grid_indices(cfg);
  const auto gains = make_gain_table(cfg.order);
  const auto runs = static_cast<std::size_t>(std::max(cfg.runs, 0));
  std::vector<std::vector<std::vector<double>>> values(runs);

  auto worker = [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      SignalSpec replica = spec;
      replica.seed = rng::derive_seed(spec.seed, r);
      const TimeGrid lattice{cfg.t_start, 0.0, cfg.dt};
      Differentiator d({cfg.order, std::nullopt, false},
                       {lattice.at(0), sample(replica, lattice.at(0), 0)}, gains);
      auto& out = values[r];
      out.reserve(indices.size());
      std::uint64_t i = 1;
      for (std::uint64_t target : indices) {
        for (; i <= target; ++i) {
          const double t = lattice.at(i);
          d.update({t, sample(replica, t, i)});
        }
        const auto z = d.estimates();
        out.emplace_back(z.begin(), z.end());
      }
    }
  };

  unsigned threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(runs, 1)));
  std::vector<std::thread> pool;
  const std::size_t chunk = (runs + threads - 1) / threads;
  for (unsigned w = 0; w < threads; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(runs, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back(worker, begin, end);
  }
  for (auto& th : pool) th.join();
  return values;
}

inline VarianceProfile variance_profile(const SignalSpec& spec, const MonteCarloConfig& cfg) {
  if (cfg.runs < 2) throw InsufficientRuns("need at least two replicas");
  const auto values = run_replicas(spec, cfg);
  VarianceProfile p;
  p.order = cfg.order;
  p.runs = cfg.runs;
  p.times = cfg.grid_times;
  const auto grid = cfg.grid_times.size();
  const auto n = static_cast<std::size_t>(cfg.order);
  p.mean.assign(n, std::vector<double>(grid));
  p.variance.assign(n, std::vector<double>(grid));
  // Shifted by replica 0 so that identical replicas give exactly zero variance.
  const double count = static_cast<double>(values.size());
  for (std::size_t ch = 0; ch < n; ++ch) {
    for (std::size_t g = 0; g < grid; ++g) {
      const double origin = values[0][g][ch];
      double sum = 0.0;
      for (const auto& run : values) sum += run[g][ch] - origin;
      const double shift = sum / count;
      double ss = 0.0;
      for (const auto& run : values) {
        const double d = run[g][ch] - origin - shift;
        ss += d * d;
      }
      p.mean[ch][g] = origin + shift;
      p.variance[ch][g] = ss / (count - 1.0);
    }
  }
  return p;
}

struct VarianceSlope {
  int channel = 1;  // m: slope of Var(z_{m-1})
  std::optional<double> slope;  // empty when the variance vanishes (sigma = 0)
  double constant = 0.0;  // estimated K_{m-1} in Var = K sigma^2 / t^(2m-1)
  bool transient_warning = false;
  std::vector<double> variances;
};

/// Slope for channel m (1-based) of an already computed profile.
inline VarianceSlope slope_from_profile(const VarianceProfile& p, int m, double sigma) {
  detail::check_index(m, p.order, "channel");
  VarianceSlope out;
  out.channel = m;
  out.variances = p.variance[static_cast<std::size_t>(m - 1)];
  const auto& v = out.variances;
  const bool degenerate = std::any_of(v.begin(), v.end(), [](double x) { return !(x > 0.0); });
  if (degenerate) return out;
  out.slope = fit_power_law(p.times, v);
  const double expo = 2.0 * m - 1.0;
  if (sigma > 0.0) {
    double acc = 0.0;
    for (std::size_t g = 0; g < v.size(); ++g) {
      acc += std::log(v[g] * std::pow(p.times[g], expo) / (sigma * sigma));
    }
    out.constant = std::exp(acc / static_cast<double>(v.size()));
  }
  for (std::size_t g = v.size() / 2; g + 1 < v.size(); ++g) {
    if (!(v[g + 1] < v[g])) out.transient_warning = true;
  }
  return out;
}

inline VarianceSlope variance_slope(const SignalSpec& spec, int n, int m, int runs,
                                    std::vector<double> t_grid) {
  if (runs < kMinVarianceRuns) {
    throw InsufficientRuns("variance law needs at least " + std::to_string(kMinVarianceRuns) +
                           " replicas, got " + std::to_string(runs));
  }
  if (t_grid.size() < 2) throw InputError(0, "variance grid needs at least two times");
  MonteCarloConfig cfg;
  cfg.order = n;
  cfg.runs = runs;
  cfg.grid_times = std::move(t_grid);
  return slope_from_profile(variance_profile(spec, cfg), m, spec.noise_sigma);
}

}  // namespace hound
