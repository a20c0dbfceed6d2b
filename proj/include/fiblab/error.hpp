#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace fiblab {

enum class ErrorKind {
  Input,                    // malformed input, dimension mismatch, bad config
  OnZeroSet,                // ||f(x)|| below floor, Phi undefined
  CriticalPoint,            // Df_x rank deficient
  DRegularityFailure,       // DF_x rank deficient (carries point and sigma_min)
  SubcaseMisclassification, // constrained lift system inconsistent
  CollinearGradients,       // constrained lift requested where grad h || grad H
  MuUndefined,              // <grad H, w_f> vanishes
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class InputError : public Error {
 public:
  explicit InputError(const std::string& what) : Error(ErrorKind::Input, what) {}
};

/// Numerical precondition failure at a specific point. `sigma_min` is the
/// normalized smallest singular value that triggered it, when relevant.
class PointError : public Error {
 public:
  PointError(ErrorKind kind, const std::string& what, Eigen::VectorXd point, double sigma_min = 0.0)
      : Error(kind, what), point_(std::move(point)), sigma_min_(sigma_min) {}
  const Eigen::VectorXd& point() const noexcept { return point_; }
  double sigma_min() const noexcept { return sigma_min_; }

 private:
  Eigen::VectorXd point_;
  double sigma_min_;
};

}  // namespace fiblab
