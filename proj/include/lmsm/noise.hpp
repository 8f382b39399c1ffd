#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "lmsm/stable.hpp"

namespace lmsm {

/// Cell layout of a noise grid.
///
/// Cells of width `delta` tile [-near_span, t_max). Left of -near_span the
/// cells grow geometrically (each one `growth` times its distance to the
/// origin) down to t_min, which keeps astronomically long tails affordable.
/// With near_span >= -t_min the grid is uniform.
struct GridGeometry {
  double t_min = -2.0;
  double t_max = 1.0;
  double delta = 1.0 / 1024;
  double near_span = 2.0;
  double growth = 1.0 / 32;

  bool operator==(const GridGeometry&) const = default;

  /// Number of fine cells strictly left of 0.
  std::size_t fine_offset() const;
  /// Number of fine cells in [0, t_max).
  std::size_t fine_steps() const;
  std::size_t fine_cells() const { return fine_offset() + fine_steps(); }
  /// Left endpoint of fine cell i.
  double fine_point(std::size_t i) const { return -near_span + static_cast<double>(i) * delta; }
};

/// A realized discretization of the SaS random measure.
///
/// Fine cell i carries an SaS(scale * delta^{1/alpha}) increment evaluated at
/// its left endpoint; coarse cell c carries an SaS(scale * width^{1/alpha})
/// increment evaluated at its midpoint. Immutable once built.
struct NoiseGrid {
  GridGeometry geometry;
  StableLaw law = StableLaw::unit(2.0);
  std::uint64_t seed = 0;
  std::vector<double> increments;         ///< fine cells, left to right
  std::vector<double> coarse_points;      ///< midpoints, moving away from the origin
  std::vector<double> coarse_widths;
  std::vector<double> coarse_increments;

  double t_min() const { return geometry.t_min; }
  double t_max() const { return geometry.t_max; }
  double delta() const { return geometry.delta; }
};

/// Builds the geometry: checks t_min < 0 < t_max, delta > 0 and that
/// near_span and t_max are integer multiples of delta.
GridGeometry make_geometry(double t_min, double t_max, double delta, double near_span = 2.0,
                           double growth = 1.0 / 32);

/// Midpoints and widths of the graded cells of a geometry.
void coarse_cells(const GridGeometry& g, std::vector<double>& points, std::vector<double>& widths);

/// Draws the increments; a pure function of (law, geometry, seed).
NoiseGrid make_noise_grid(const StableLaw& law, const GridGeometry& geometry, std::uint64_t seed);

/// Convenience overload with default near_span and growth.
NoiseGrid make_noise_grid(const StableLaw& law, double t_min, double t_max, double delta,
                          std::uint64_t seed);

/// Upper bound on the fraction of L^alpha mass of the field kernel
/// s -> (u-s)_+^k - (-s)_+^k lying left of -T, maximized over u in (0, u_max].
double field_tail_ratio(double alpha, double v, double u_max, double T);

/// Smallest T with field_tail_ratio(alpha, v, u_max, T) <= tol.
double required_tail_span(double alpha, double v, double u_max, double tol = 1e-4);

}  // namespace lmsm
