#include "lmsm/stable.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace lmsm {

StableLaw::StableLaw(double alpha, double scale) : alpha_(alpha), scale_(scale) {
  if (!(alpha > 1.0 && alpha <= 2.0)) {
    throw std::invalid_argument("StableLaw: alpha must lie in (1, 2], got " +
                                std::to_string(alpha));
  }
  if (!(scale >= 0.0) || !std::isfinite(scale)) {
    throw std::invalid_argument("StableLaw: scale must be finite and >= 0, got " +
                                std::to_string(scale));
  }
}

double draw_unit_sas(double alpha, Rng& rng) {
  constexpr double half_pi = std::numbers::pi / 2.0;
  const double v = rng.uniform(-half_pi, half_pi);
  const double w = rng.exponential();
  if (alpha == 2.0) {
    // Reduces to 2 sin(V) sqrt(W), a N(0, 2) variate.
    return 2.0 * std::sin(v) * std::sqrt(w);
  }
  const double cos_v = std::cos(v);
  const double lead = std::sin(alpha * v) / std::pow(cos_v, 1.0 / alpha);
  const double tail = std::pow(std::cos((1.0 - alpha) * v) / w, (1.0 - alpha) / alpha);
  return lead * tail;
}

SampleBatch sample_sas(const StableLaw& law, std::size_t n, std::uint64_t seed) {
  SampleBatch batch{std::vector<double>(n, 0.0), seed, law};
  if (law.scale() == 0.0) return batch;
  Rng rng(seed);
  for (auto& x : batch.values) x = law.scale() * draw_unit_sas(law.alpha(), rng);
  return batch;
}

double moment_constant(double gamma, double alpha) {
  if (!(alpha > 1.0 && alpha <= 2.0)) {
    throw std::invalid_argument("moment_constant: alpha must lie in (1, 2]");
  }
  if (!(gamma > 0.0)) {
    throw std::invalid_argument("moment_constant: gamma must be > 0");
  }
  if (gamma >= alpha) {
    throw std::domain_error("moment_constant: E|S|^gamma is infinite for gamma >= alpha");
  }
  if (alpha == 2.0) {
    return std::pow(2.0, gamma) * std::tgamma((1.0 + gamma) / 2.0) / std::sqrt(std::numbers::pi);
  }
  return std::pow(2.0, gamma) * std::tgamma((1.0 + gamma) / 2.0) *
         std::tgamma(1.0 - gamma / alpha) /
         (std::sqrt(std::numbers::pi) * std::tgamma(1.0 - gamma / 2.0));
}

double tail_constant(double alpha) {
  return 2.0 * std::tgamma(alpha) * std::sin(std::numbers::pi * alpha / 2.0) / std::numbers::pi;
}

std::vector<TailPoint> tail_coefficient(const StableLaw& law, const SampleBatch& samples,
                                        std::span<const double> xi_grid) {
  std::vector<double> magnitudes(samples.values.size());
  std::transform(samples.values.begin(), samples.values.end(), magnitudes.begin(),
                 [](double x) { return std::abs(x); });
  std::sort(magnitudes.begin(), magnitudes.end());

  std::vector<TailPoint> out;
  out.reserve(xi_grid.size());
  const double n = static_cast<double>(magnitudes.size());
  for (double xi : xi_grid) {
    if (!(xi > 0.0) || xi < law.scale()) {
      throw std::invalid_argument("tail_coefficient: xi must be positive and >= the scale");
    }
    const auto above = magnitudes.end() - std::upper_bound(magnitudes.begin(), magnitudes.end(), xi);
    const double p = n > 0 ? static_cast<double>(above) / n : 0.0;
    out.push_back({xi, p, p * std::pow(xi, law.alpha())});
  }
  return out;
}

}  // namespace lmsm
