#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace clustersim {

/// Argument outside the mathematical domain of a function.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// An adaptive integral did not reach its error target.
class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, double estimate, double abs_error,
                  std::size_t evaluations)
      : std::runtime_error(what + " (estimate=" + std::to_string(estimate) +
                           ", abs_error=" + std::to_string(abs_error) +
                           ", evaluations=" + std::to_string(evaluations) + ")"),
        estimate_(estimate),
        abs_error_(abs_error),
        evaluations_(evaluations) {}

  double estimate() const noexcept { return estimate_; }
  double abs_error() const noexcept { return abs_error_; }
  std::size_t evaluations() const noexcept { return evaluations_; }

 private:
  double estimate_;
  double abs_error_;
  std::size_t evaluations_;
};

/// Interference directions are (numerically) linearly dependent.
class RankDeficient : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ZeroVector : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Requested more RVQ bits for one channel than the explicit codebook cap.
class BudgetExceeded : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Total feedback budget cannot give every channel at least one bit.
class InsufficientBudget : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Realization cannot be used for the typical-user analysis and must be resampled.
class DegenerateRealization : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace clustersim
