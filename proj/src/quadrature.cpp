#include "lmsm/quadrature.hpp"

#include <algorithm>
#include <boost/math/special_functions/legendre.hpp>

namespace lmsm {

GaussRule gauss_legendre(int n, double a, double b) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
  // legendre_p_zeros returns the non-negative roots in ascending order.
  const auto roots = boost::math::legendre_p_zeros<double>(n);
  std::vector<std::pair<double, double>> pairs;
  for (double x : roots) {
    const double dp = boost::math::legendre_p_prime<double>(n, x);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    pairs.emplace_back(x, w);
    if (x != 0.0) pairs.emplace_back(-x, w);
  }
  std::sort(pairs.begin(), pairs.end());

  GaussRule rule;
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  for (const auto& [x, w] : pairs) {
    rule.nodes.push_back(mid + half * x);
    rule.weights.push_back(half * w);
  }
  return rule;
}

}  // namespace lmsm
