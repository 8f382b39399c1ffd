#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "lmsm/rng.hpp"

namespace lmsm {

/// Symmetric alpha-stable law with characteristic function
/// exp(-scale^alpha |t|^alpha).
///
/// With this normalization a stochastic integral S = \int f dZ has
/// scale^alpha = \int |f(s)|^alpha ds, and alpha = 2 is the centred Gaussian
/// of variance 2 scale^2. alpha = 2 is admitted only for oracle checks.
class StableLaw {
 public:
  StableLaw(double alpha, double scale);

  static StableLaw unit(double alpha) { return StableLaw(alpha, 1.0); }

  double alpha() const { return alpha_; }
  double scale() const { return scale_; }

  /// Same alpha, scale multiplied by `factor` (> 0).
  StableLaw scaled(double factor) const { return StableLaw(alpha_, scale_ * factor); }

  bool operator==(const StableLaw&) const = default;

 private:
  double alpha_;
  double scale_;
};

struct SampleBatch {
  std::vector<double> values;
  std::uint64_t seed = 0;
  StableLaw law = StableLaw::unit(2.0);
};

/// One unit-scale SaS variate (Chambers-Mallows-Stuck, symmetric case).
double draw_unit_sas(double alpha, Rng& rng);

/// `n` independent draws; a pure function of (law, n, seed).
SampleBatch sample_sas(const StableLaw& law, std::size_t n, std::uint64_t seed);

/// c(gamma) with E|S|^gamma = c(gamma) * scale^gamma, for 0 < gamma < alpha.
///
/// Closed form 2^g Gamma((1+g)/2) Gamma(1-g/alpha) / (sqrt(pi) Gamma(1-g/2)).
double moment_constant(double gamma, double alpha);

struct TailPoint {
  double xi;
  double probability;  ///< empirical P(|S| > xi)
  double product;      ///< probability * xi^alpha
};

/// Empirical tail probabilities rescaled by xi^alpha.
///
/// Every xi must be at least the scale of the law (the two-sided tail bound
/// holds only there). With scale 0 every probability is 0.
std::vector<TailPoint> tail_coefficient(const StableLaw& law, const SampleBatch& samples,
                                        std::span<const double> xi_grid);

/// Asymptotic constant lim xi^alpha P(|S| > xi) for a unit-scale SaS law:
/// 2 Gamma(alpha) sin(pi alpha / 2) / pi.
double tail_constant(double alpha);

}  // namespace lmsm
