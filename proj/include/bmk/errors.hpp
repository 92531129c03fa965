#pragma once

#include <stdexcept>
#include <string>

namespace bmk {

/// Base class of every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operands live on different charts (or a metric does not match a form).
class ChartMismatch : public Error {
 public:
  using Error::Error;
};

/// A degree constraint was violated (overflow, degree-0 contraction, ...).
class DegreeError : public Error {
 public:
  using Error::Error;
};

/// A point (or a finite-difference stencil around it) left the chart domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The metric is singular or has the wrong signature at an evaluation point.
class SingularMetric : public Error {
 public:
  using Error::Error;
};

/// Pointwise extraction is ill-posed (e.g. lambda . Omega vanishes).
class DegeneratePoint : public Error {
 public:
  using Error::Error;
};

/// Invalid user input: field specs, parameters, run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace bmk
