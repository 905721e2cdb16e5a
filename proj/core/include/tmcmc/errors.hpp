#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace tmcmc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A diagonal derivative of the map was non-positive where it was required
/// to be positive.
class MonotonicityError : public Error {
 public:
  MonotonicityError(int component, std::vector<double> point, double derivative);

  /// Zero-based component index.
  int component() const noexcept { return component_; }
  const std::vector<double>& point() const noexcept { return point_; }
  double derivative() const noexcept { return derivative_; }

 private:
  int component_;
  std::vector<double> point_;
  double derivative_;
};

/// A one-dimensional inversion could not bracket or resolve a root.
class InversionError : public Error {
 public:
  InversionError(int component, const std::string& what);
  int component() const noexcept { return component_; }

 private:
  int component_;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double gradient_norm)
      : Error(what), gradient_norm_(gradient_norm) {}
  double gradient_norm() const noexcept { return gradient_norm_; }

 private:
  double gradient_norm_;
};

/// A component of a map fit failed; wraps the underlying cause.
class FitError : public Error {
 public:
  FitError(int component, const std::string& what)
      : Error("map fit failed for component " + std::to_string(component) + ": " + what),
        component_(component) {}
  int component() const noexcept { return component_; }

 private:
  int component_;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace tmcmc
