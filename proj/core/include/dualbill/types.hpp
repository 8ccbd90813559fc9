#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace dualbill {

// Points and vectors of R^{2m}, stored as (x_1..x_m, y_1..y_m).
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Half-dimension m of the ambient symplectic space R^{2m}.
class Dimension {
 public:
  explicit Dimension(int m) : m_(m) {
    if (m < 1) throw std::invalid_argument("dimension m must be >= 1, got " + std::to_string(m));
  }

  int m() const { return m_; }
  int ambient() const { return 2 * m_; }

  friend bool operator==(Dimension, Dimension) = default;

 private:
  int m_;
};

// Raised when arguments of mismatched dimension are combined.
class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The input lies outside the domain of an operation (interior point, non-unit normal, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// An iterative solver exhausted its budget.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double best_residual)
      : std::runtime_error(what), best_residual_(best_residual) {}
  double best_residual() const { return best_residual_; }

 private:
  double best_residual_;
};

// Surface construction was rejected (bad parameters or failed convexity certificate).
class SurfaceError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace dualbill
