#pragma once

// Deterministic test signals: polynomial plus harmonics plus i.i.d. Gaussian
// measurement noise. The noise value of sample i depends only on (seed, i), so
// streams are reproducible and replicas can be generated independently.

#include <cctype>
#include <cmath>
#include <cstdint>
#include <istream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "hound/differentiator.hpp"
#include "hound/errors.hpp"

namespace hound {

struct Harmonic {
  double amplitude = 1.0;
  double omega = 1.0;
  double phase = 0.0;
};

struct SignalSpec {
  std::vector<double> poly;  // K_0..K_N
  std::vector<Harmonic> harmonics;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;

  void validate() const {
    for (double k : poly) {
      if (!std::isfinite(k)) throw InputError(0, "polynomial coefficient is not finite");
    }
    for (const auto& h : harmonics) {
      if (!std::isfinite(h.amplitude) || !std::isfinite(h.omega) || !std::isfinite(h.phase)) {
        throw InputError(0, "harmonic term is not finite");
      }
    }
    if (!std::isfinite(noise_sigma) || noise_sigma < 0.0) {
      throw InputError(0, "noise sigma must be finite and non-negative");
    }
  }

  int degree() const { return static_cast<int>(poly.size()) - 1; }
};

namespace rng {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Uniform in (0, 1), never exactly 0.
inline double unit_open(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

/// Standard normal draw keyed by (seed, index), Box-Muller on two hashed words.
inline double standard_normal(std::uint64_t seed, std::uint64_t index) {
  const std::uint64_t key = splitmix64(seed ^ splitmix64(index));
  const double u1 = unit_open(splitmix64(key));
  const double u2 = unit_open(splitmix64(key ^ 0xd1b54a32d192ed03ULL));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// Seed of replica r derived from a base seed.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t replica) {
  return splitmix64(base + 0x632be59bd9b4e019ULL * (replica + 1));
}

}  // namespace rng

/// m-th derivative of the noiseless part at t.
inline double derivative(const SignalSpec& spec, double t, int m) {
  if (m < 0) throw OrderOutOfRange("derivative order must be non-negative");
  // Horner over the differentiated coefficients j!/(j-m)! K_j.
  double poly = 0.0;
  for (int j = spec.degree(); j >= m; --j) {
    double falling = 1.0;
    for (int i = 0; i < m; ++i) falling *= static_cast<double>(j - i);
    poly = poly * t + falling * spec.poly[static_cast<std::size_t>(j)];
  }
  double harm = 0.0;
  for (const auto& h : spec.harmonics) {
    // d^m/dt^m sin(wt + p) = w^m sin(wt + p + m pi/2)
    const double phase = h.omega * t + h.phase;
    double v = 0.0;
    switch (m % 4) {
      case 0: v = std::sin(phase); break;
      case 1: v = std::cos(phase); break;
      case 2: v = -std::sin(phase); break;
      default: v = -std::cos(phase); break;
    }
    harm += h.amplitude * std::pow(h.omega, m) * v;
  }
  return poly + harm;
}

inline double clean_value(const SignalSpec& spec, double t) { return derivative(spec, t, 0); }

/// Analytic derivatives 0..n-1 of the clean signal at t.
inline std::vector<double> derivative_vector(const SignalSpec& spec, double t, int n) {
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int m = 0; m < n; ++m) out[static_cast<std::size_t>(m)] = derivative(spec, t, m);
  return out;
}

inline double noise(const SignalSpec& spec, std::uint64_t index) {
  if (spec.noise_sigma == 0.0) return 0.0;
  return spec.noise_sigma * rng::standard_normal(spec.seed, index);
}

/// Noisy observation number `index`, taken at time t.
inline double sample(const SignalSpec& spec, double t, std::uint64_t index) {
  return clean_value(spec, t) + noise(spec, index);
}

/// Uniform time grid t_start + i*dt for i = 0.. while t <= t_end.
struct TimeGrid {
  double t_start = 0.0;
  double t_end = 0.0;
  double dt = 1.0;

  std::uint64_t size() const {
    if (!(dt > 0.0) || t_end < t_start) return 0;
    return static_cast<std::uint64_t>(std::floor((t_end - t_start) / dt + 1e-9)) + 1;
  }
  double at(std::uint64_t i) const { return t_start + static_cast<double>(i) * dt; }
};

inline std::vector<Sample> generate(const SignalSpec& spec, const TimeGrid& grid) {
  std::vector<Sample> out;
  const auto count = grid.size();
  out.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const double t = grid.at(i);
    out.push_back({t, sample(spec, t, i)});
  }
  return out;
}

// --- key = value config ----------------------------------------------------------

/// Parsed signal configuration file. Recognised keys:
///   poly     = K0, K1, ...      (comma or whitespace separated)
///   harmonic = A, omega, phase  (repeatable)
///   sigma    = noise standard deviation
///   seed     = unsigned 64-bit integer
///   t_start, t_end, dt          (sampling grid, used by `generate`)
/// Lines starting with '#' and blank lines are ignored.
struct SignalConfig {
  SignalSpec spec;
  TimeGrid grid{0.0, 100.0, 1.0};
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<double> parse_number_list(const std::string& text, std::size_t line) {
  std::string normalized = text;
  for (char& c : normalized) {
    if (c == ',' || c == ';') c = ' ';
  }
  std::istringstream in(normalized);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw InputError(line, "cannot parse number '" + tok + "'");
    }
  }
  return out;
}

inline double parse_single(const std::string& text, std::size_t line) {
  const auto v = parse_number_list(text, line);
  if (v.size() != 1) throw InputError(line, "expected exactly one number");
  return v[0];
}

inline Harmonic parse_harmonic(const std::string& text, std::size_t line) {
  const auto v = parse_number_list(text, line);
  if (v.size() < 2 || v.size() > 3) {
    throw InputError(line, "harmonic needs 'amplitude, omega[, phase]'");
  }
  return {v[0], v[1], v.size() == 3 ? v[2] : 0.0};
}

}  // namespace detail

inline SignalConfig parse_signal_config(std::istream& in) {
  SignalConfig cfg;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string text = detail::trim(raw);
    if (text.empty() || text.front() == '#') continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw InputError(line, "expected 'key = value'");
    const std::string key = detail::trim(text.substr(0, eq));
    const std::string value = detail::trim(text.substr(eq + 1));
    if (key == "poly") {
      cfg.spec.poly = detail::parse_number_list(value, line);
    } else if (key == "harmonic") {
      cfg.spec.harmonics.push_back(detail::parse_harmonic(value, line));
    } else if (key == "sigma") {
      cfg.spec.noise_sigma = detail::parse_single(value, line);
    } else if (key == "seed") {
      try {
        // stoull would wrap a leading minus sign
        if (value.empty() || !std::isdigit(static_cast<unsigned char>(value.front()))) {
          throw std::invalid_argument(value);
        }
        std::size_t used = 0;
        cfg.spec.seed = std::stoull(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
      } catch (const std::exception&) {
        throw InputError(line, "seed must be an unsigned integer");
      }
    } else if (key == "t_start") {
      cfg.grid.t_start = detail::parse_single(value, line);
    } else if (key == "t_end") {
      cfg.grid.t_end = detail::parse_single(value, line);
    } else if (key == "dt") {
      cfg.grid.dt = detail::parse_single(value, line);
    } else {
      throw InputError(line, "unknown key '" + key + "'");
    }
  }
  cfg.spec.validate();
  if (!(cfg.grid.dt > 0.0)) throw InputError(0, "dt must be positive");
  return cfg;
}

}  // namespace hound
