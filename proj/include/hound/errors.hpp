#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hound {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Order parameter n or a channel/derivative index is outside its valid range.
class OrderOutOfRange : public Error {
 public:
  using Error::Error;
};

/// A sample timestamp did not strictly increase.
class NonMonotoneTime : public Error {
 public:
  NonMonotoneTime(double previous, double offered)
      : Error("non-monotone timestamp: " + std::to_string(offered) +
              " does not follow " + std::to_string(previous)),
        previous_(previous),
        offered_(offered) {}

  double previous() const noexcept { return previous_; }
  double offered() const noexcept { return offered_; }

 private:
  double previous_;
  double offered_;
};

/// An update was requested at t = 0, where the gains n/t^m are singular.
class ZeroTime : public Error {
 public:
  ZeroTime() : Error("update at t = 0 is undefined; initialise at t = 0 instead") {}
};

class NonFiniteSample : public Error {
 public:
  using Error::Error;
};

class LengthMismatch : public Error {
 public:
  LengthMismatch(std::size_t expected, std::size_t got)
      : Error("length mismatch: expected " + std::to_string(expected) + ", got " +
              std::to_string(got)) {}
};

class SingularSystem : public Error {
 public:
  using Error::Error;
};

/// The continuous integrator produced a non-finite state.
class IntegrationDiverged : public Error {
 public:
  explicit IntegrationDiverged(double t)
      : Error("integration diverged at t = " + std::to_string(t)), t_(t) {}
  double time() const noexcept { return t_; }

 private:
  double t_;
};

class InsufficientRuns : public Error {
 public:
  using Error::Error;
};

/// Malformed input data or configuration; carries the 1-based line number when known.
class InputError : public Error {
 public:
  InputError(std::size_t line, const std::string& what)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace hound
