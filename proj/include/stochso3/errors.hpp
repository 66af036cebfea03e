#pragma once

#include <stdexcept>
#include <string>

namespace stochso3 {

/// Raised when a chart or update law is evaluated at (or numerically too
/// close to) a 180 degree rotation, where it is undefined.
class SingularityError : public std::domain_error {
 public:
  explicit SingularityError(const std::string& what) : std::domain_error(what) {}
};

/// Raised when vector measurements cannot determine an attitude
/// (collinear references, rank-deficient attitude profile matrix).
class DegenerateGeometryError : public std::domain_error {
 public:
  explicit DegenerateGeometryError(const std::string& what) : std::domain_error(what) {}
};

/// A Rodriguez-vector trajectory left the representable chart.
class ChartEscapeError : public std::runtime_error {
 public:
  explicit ChartEscapeError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace stochso3
