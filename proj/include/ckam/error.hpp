#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ckam {

/// Invalid input to a mathematical operation (wrong dimension, out-of-range
/// parameter, singular matrix, ...). The CLI maps it to exit code 2.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// No orthogonal partner with |<k',w>| >= |k|/8 in the search box.
class PartnerQualityError : public DomainError {
 public:
  PartnerQualityError(const std::string& what, std::vector<long> best, double best_value)
      : DomainError(what), best_candidate(std::move(best)), best_inner(best_value) {}
  std::vector<long> best_candidate;
  double best_inner;
};

/// Jackson approximant too coarse for the bump thresholds.
class ApproximationQualityError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// A scaling regression was asked for with too few usable points.
class InsufficientSequenceError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Shooting could not bracket the boundary value problem.
class BvpError : public std::runtime_error {
 public:
  BvpError(const std::string& what, std::vector<std::pair<double, double>> scan)
      : std::runtime_error(what), velocity_scan(std::move(scan)) {}
  std::vector<std::pair<double, double>> velocity_scan;  // (v0, q(t_b) - q_b)
};

class MinimizationError : public std::runtime_error {
 public:
  MinimizationError(const std::string& what, std::vector<double> history)
      : std::runtime_error(what), residual_history(std::move(history)) {}
  std::vector<double> residual_history;
};

class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ckam
