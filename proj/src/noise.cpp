#include "lmsm/noise.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace lmsm {

namespace {

std::size_t exact_multiple(double span, double delta, const char* what) {
  const double ratio = span / delta;
  const double r = std::round(ratio);
  if (std::abs(ratio - r) > 1e-9 * std::max(1.0, r)) {
    throw std::invalid_argument(std::string("noise grid: ") + what +
                                " must be an integer multiple of delta");
  }
  return static_cast<std::size_t>(r);
}

}  // namespace

std::size_t GridGeometry::fine_offset() const {
  return static_cast<std::size_t>(std::llround(near_span / delta));
}

std::size_t GridGeometry::fine_steps() const {
  return static_cast<std::size_t>(std::llround(t_max / delta));
}

GridGeometry make_geometry(double t_min, double t_max, double delta, double near_span,
                           double growth) {
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw std::invalid_argument("noise grid: delta must be > 0");
  }
  if (!(t_min < 0.0)) throw std::invalid_argument("noise grid: t_min must be < 0");
  if (!(t_max > 0.0)) throw std::invalid_argument("noise grid: t_max must be > 0");
  if (!(growth > 0.0 && growth <= 1.0)) {
    throw std::invalid_argument("noise grid: growth must lie in (0, 1]");
  }
  GridGeometry g{t_min, t_max, delta, std::min(near_span, -t_min), growth};
  exact_multiple(g.near_span, delta, "near span");
  exact_multiple(t_max, delta, "t_max");
  if (near_span >= -t_min) exact_multiple(-t_min, delta, "-t_min");
  return g;
}

void coarse_cells(const GridGeometry& g, std::vector<double>& points,
                  std::vector<double>& widths) {
  points.clear();
  widths.clear();
  const double far = -g.t_min;
  double edge = g.near_span;
  while (edge < far) {
    double next = edge * (1.0 + g.growth);
    if (next > far || far - next < 0.25 * (next - edge)) next = far;
    points.push_back(-0.5 * (edge + next));
    widths.push_back(next - edge);
    edge = next;
  }
}

NoiseGrid make_noise_grid(const StableLaw& law, const GridGeometry& geometry, std::uint64_t seed) {
  NoiseGrid grid;
  grid.geometry = geometry;
  grid.law = law;
  grid.seed = seed;
  coarse_cells(geometry, grid.coarse_points, grid.coarse_widths);

  const double alpha = law.alpha();
  const double fine_scale = law.scale() * std::pow(geometry.delta, 1.0 / alpha);
  grid.increments.resize(geometry.fine_cells());
  grid.coarse_increments.resize(grid.coarse_points.size());
  if (law.scale() == 0.0) {
    std::fill(grid.increments.begin(), grid.increments.end(), 0.0);
    std::fill(grid.coarse_increments.begin(), grid.coarse_increments.end(), 0.0);
    return grid;
  }
  Rng rng(seed);
  for (auto& z : grid.increments) z = fine_scale * draw_unit_sas(alpha, rng);
  for (std::size_t c = 0; c < grid.coarse_points.size(); ++c) {
    grid.coarse_increments[c] =
        law.scale() * std::pow(grid.coarse_widths[c], 1.0 / alpha) * draw_unit_sas(alpha, rng);
  }
  return grid;
}

NoiseGrid make_noise_grid(const StableLaw& law, double t_min, double t_max, double delta,
                          std::uint64_t seed) {
  return make_noise_grid(law, make_geometry(t_min, t_max, delta), seed);
}

// For s < -T and 0 < u, |K(u,s)| <= k u (-s)^{k-1}, so the left tail carries at
// most k^a u^a T^{1-a(1-k)} / (a(1-k)-1) of L^a mass. The total mass is
// u^{1+ak} times that of u = 1, which exceeds \int_0^1 (1-s)^{ak} ds = 1/(1+ak).
// The ratio grows with u, so u_max is the worst case.
double field_tail_ratio(double alpha, double v, double u_max, double T) {
  const double k = v - 1.0 / alpha;
  if (!(k > 0.0 && v < 1.0)) throw std::invalid_argument("field_tail_ratio: v outside (1/alpha,1)");
  if (!(T > 0.0) || !(u_max > 0.0)) {
    throw std::invalid_argument("field_tail_ratio: T and u_max must be > 0");
  }
  const double e = alpha * (1.0 - k) - 1.0;
  return std::pow(k, alpha) * (1.0 + alpha * k) * std::pow(u_max, e) * std::pow(T, -e) / e;
}

double required_tail_span(double alpha, double v, double u_max, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("required_tail_span: tol must be > 0");
  const double k = v - 1.0 / alpha;
  if (!(k > 0.0 && v < 1.0)) {
    throw std::invalid_argument("required_tail_span: v outside (1/alpha,1)");
  }
  const double e = alpha * (1.0 - k) - 1.0;
  const double c = std::pow(k, alpha) * (1.0 + alpha * k) * std::pow(u_max, e) / e;
  // The small inflation keeps field_tail_ratio(T) <= tol despite rounding.
  return std::max(2.0 * u_max, std::pow(c / tol, 1.0 / e) * (1.0 + 1e-12));
}

}  // namespace lmsm
