#pragma once

// Online high-order differentiator: cumulative smoothing of a sampled signal.
//
// State z[0..n-1] estimates f, f', ..., f^(n-1) at the time of the last
// accepted sample. Each update predicts the state forward by the exact Taylor
// shift over dt, takes the residual of the predicted signal value against the
// new sample, and feeds it back into channel m with weight
//   dt * (n+m-1)! n / (m! (n-m)!) / t^m,
// t being the timestamp of the new sample. For n = 1 and unit steps this is the
// running mean; for n = 2 it is Holt's linear method with alpha = 4/t and
// beta* = 3/(2t).

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "hound/coefficients.hpp"
#include "hound/errors.hpp"

namespace hound {

struct Sample {
  double t = 0.0;
  double f = 0.0;
};

struct DifferentiatorConfig {
  int order = 1;
  /// Overrides the default start (z0 = first sample value, higher channels 0).
  std::optional<std::vector<double>> initial_estimates;
  /// Ignore samples whose value equals the previous accepted value.
  bool skip_repeats = false;
};

/// Flat record of a differentiator, used for snapshot and resume.
struct StateRecord {
  double t = 0.0;
  int order = 1;
  std::uint64_t samples_seen = 0;
  std::vector<double> z;
  double last_f = 0.0;
  bool skip_repeats = false;

  friend bool operator==(const StateRecord&, const StateRecord&) = default;
};

struct UpdateResult {
  bool applied = false;
  double residual = 0.0;
};

/// Writes dt^j / j! for j = 0..out.size()-1 by running products.
inline void taylor_weights(double dt, std::span<double> out) {
  double w = 1.0;
  for (std::size_t j = 0; j < out.size(); ++j) {
    if (j > 0) w *= dt / static_cast<double>(j);
    out[j] = w;
  }
}

class Differentiator {
 public:
  Differentiator(const DifferentiatorConfig& config, Sample first,
                 std::shared_ptr<const GainTable> gains = nullptr)
      : gains_(gains ? std::move(gains) : make_gain_table(config.order)),
        skip_repeats_(config.skip_repeats) {
    detail::check_order(config.order);
    if (gains_->order != config.order) throw LengthMismatch(config.order, gains_->order);
    if (!std::isfinite(first.t) || !std::isfinite(first.f)) {
      throw NonFiniteSample("initial sample is not finite");
    }
    if (first.t < 0.0) throw Error("initial time must be non-negative");
    const auto n = static_cast<std::size_t>(config.order);
    if (config.initial_estimates) {
      if (config.initial_estimates->size() != n) {
        throw LengthMismatch(n, config.initial_estimates->size());
      }
      z_ = *config.initial_estimates;
      for (double v : z_) {
        if (!std::isfinite(v)) throw NonFiniteSample("initial estimate is not finite");
      }
    } else {
      z_.assign(n, 0.0);
      z_[0] = first.f;
    }
    t_ = first.t;
    last_f_ = first.f;
    samples_seen_ = 1;
    scratch_.resize(n);
  }

  /// Rebuilds a differentiator from a snapshot.
  explicit Differentiator(const StateRecord& record, std::shared_ptr<const GainTable> gains = nullptr)
      : gains_(gains ? std::move(gains) : make_gain_table(record.order)),
        z_(record.z),
        t_(record.t),
        last_f_(record.last_f),
        samples_seen_(record.samples_seen),
        skip_repeats_(record.skip_repeats) {
    if (z_.size() != static_cast<std::size_t>(record.order)) {
      throw LengthMismatch(static_cast<std::size_t>(record.order), z_.size());
    }
    if (!std::isfinite(t_)) throw NonFiniteSample("snapshot time is not finite");
    for (double v : z_) {
      if (!std::isfinite(v)) throw NonFiniteSample("snapshot estimate is not finite");
    }
    scratch_.resize(z_.size());
  }

  UpdateResult update(Sample s) {
    if (!std::isfinite(s.t) || !std::isfinite(s.f)) throw NonFiniteSample("sample is not finite");
    if (s.t <= t_) throw NonMonotoneTime(t_, s.t);
    if (s.t == 0.0) throw ZeroTime();
    if (skip_repeats_ && s.f == last_f_) return {};

    const std::size_t n = z_.size();
    const double dt = s.t - t_;
    taylor_weights(dt, scratch_);

    // Taylor shift in place: channel m only reads channels >= m.
    for (std::size_t m = 0; m < n; ++m) {
      double p = 0.0;
      for (std::size_t k = m; k < n; ++k) p += z_[k] * scratch_[k - m];
      z_[m] = p;
    }
    const double residual = s.f - z_[0];

    const double inv_t = 1.0 / s.t;
    double inv_t_pow = 1.0;
    for (std::size_t m = 0; m < n; ++m) {
      inv_t_pow *= inv_t;
      z_[m] += dt * gains_->gains_f64[m] * inv_t_pow * residual;
    }

    t_ = s.t;
    last_f_ = s.f;
    ++samples_seen_;
    return {true, residual};
  }

  int order() const noexcept { return static_cast<int>(z_.size()); }
  double time() const noexcept { return t_; }
  std::span<const double> estimates() const noexcept { return z_; }
  double estimate(int k) const { return z_.at(static_cast<std::size_t>(k)); }
  std::uint64_t samples_seen() const noexcept { return samples_seen_; }
  const GainTable& gain_table() const noexcept { return *gains_; }
  std::shared_ptr<const GainTable> shared_gain_table() const noexcept { return gains_; }

  StateRecord snapshot() const {
    return {t_, order(), samples_seen_, z_, last_f_, skip_repeats_};
  }

 private:
  std::shared_ptr<const GainTable> gains_;
  std::vector<double> z_;
  std::vector<double> scratch_;
  double t_ = 0.0;
  double last_f_ = 0.0;
  std::uint64_t samples_seen_ = 0;
  bool skip_repeats_ = false;
};

/// Elementwise z - truth, truth holding the analytic derivatives at the state time.
inline std::vector<double> state_error(std::span<const double> z, std::span<const double> truth) {
  if (z.size() != truth.size()) throw LengthMismatch(z.size(), truth.size());
  std::vector<double> e(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) e[i] = z[i] - truth[i];
  return e;
}

inline std::vector<double> state_error(const Differentiator& d, std::span<const double> truth) {
  return state_error(d.estimates(), truth);
}

}  // namespace hound
