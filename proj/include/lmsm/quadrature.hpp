#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace lmsm {

/// Raised when a numerical tolerance (quadrature error, truncation remainder,
/// sampling resolution) cannot be met.
class ToleranceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule mapped to [a, b], nodes ascending.
GaussRule gauss_legendre(int n, double a, double b);

}  // namespace lmsm
