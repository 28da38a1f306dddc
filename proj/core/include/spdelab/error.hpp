#pragma once

#include <stdexcept>
#include <string>

namespace spdelab {

/// Invalid model parameters or inconsistent inputs (wrong spectrum, bad step size).
class SpecError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A trajectory left the configured norm envelope.
class BlowUpError : public std::runtime_error {
 public:
  BlowUpError(const std::string& what, double time, double norm)
      : std::runtime_error(what), time_(time), norm_(norm) {}
  double time() const noexcept { return time_; }
  double norm() const noexcept { return norm_; }

 private:
  double time_;
  double norm_;
};

/// Non-finite values encountered in a drift or density evaluation.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace spdelab
