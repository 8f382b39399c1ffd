#include "lmsm/direct.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "lmsm/quadrature.hpp"

namespace lmsm {

DirectCoeffKernel::DirectCoeffKernel(const PhiKernel& phi, const GridGeometry& geometry, int j,
                                     long k, double v, double tol, double phi_mass)
    : geometry_(geometry), j_(j), k_(k), v_(v) {
  if (j < 0) throw std::invalid_argument("DirectCoeffKernel: j must be >= 0");
  const double scale = std::ldexp(1.0, j);
  if (k < 0 || static_cast<double>(k + 1) > scale) {
    throw std::invalid_argument("DirectCoeffKernel: cell [k 2^-j, (k+1) 2^-j] not inside [0,1]");
  }
  const double alpha = phi.alpha();
  const double kappa = phi.kappa(v);

  // Certified tail: |Phi(x)|^alpha <= A^alpha |x|^{-alpha(2-kappa)} for x <= -1.
  const double reach = scale * (-geometry.t_min) + static_cast<double>(k);
  if (reach > 1.0) {
    const double decay = alpha * (2.0 - kappa) - 1.0;
    const double mass = phi_mass > 0.0 ? phi_mass : phi_lalpha_norm(phi, v, 1e-3).truncated_mass;
    tail_ratio_ = std::pow(phi.far_bound_constant(v), alpha) * std::pow(reach, -decay) / decay /
                  mass;
  } else {
    tail_ratio_ = INFINITY;
  }
  if (tail_ratio_ > tol) {
    throw ToleranceError("DirectCoeffKernel: grid starting at t_min=" +
                         std::to_string(geometry.t_min) + " misses a fraction " +
                         std::to_string(tail_ratio_) + " of the kernel mass at j=" +
                         std::to_string(j));
  }

  const double factor = std::pow(2.0, -j * kappa);
  const double end = (static_cast<double>(k) + 1.0) / scale;  // Phi vanishes from here on
  for (std::size_t i = 0; i < geometry.fine_cells(); ++i) {
    const double s = geometry.fine_point(i);
    if (s >= end) break;
    fine_.push_back(factor * phi(scale * s - static_cast<double>(k), v));
  }
  std::vector<double> points;
  coarse_cells(geometry, points, coarse_widths_);
  coarse_.reserve(points.size());
  for (double s : points) coarse_.push_back(factor * phi(scale * s - static_cast<double>(k), v));
}

double DirectCoeffKernel::apply(const NoiseGrid& grid) const {
  if (!(grid.geometry == geometry_)) {
    throw std::invalid_argument("DirectCoeffKernel: noise grid geometry mismatch");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < fine_.size(); ++i) acc += fine_[i] * grid.increments[i];
  for (std::size_t c = 0; c < coarse_.size(); ++c) acc += coarse_[c] * grid.coarse_increments[c];
  return acc;
}

double DirectCoeffKernel::discrete_scale_alpha(double alpha) const {
  double acc = 0.0;
  for (double w : fine_) acc += std::pow(std::abs(w), alpha) * geometry_.delta;
  for (std::size_t c = 0; c < coarse_.size(); ++c) {
    acc += std::pow(std::abs(coarse_[c]), alpha) * coarse_widths_[c];
  }
  return acc;
}

double simulate_coeff_direct(const NoiseGrid& grid, const PhiKernel& phi, int j, long k,
                             const HurstFunction& H) {
  if (grid.law.alpha() != phi.alpha()) {
    throw std::invalid_argument("simulate_coeff_direct: kernel and noise use different alpha");
  }
  const double v = H(std::ldexp(static_cast<double>(k), -j));
  return DirectCoeffKernel(phi, grid.geometry, j, k, v).apply(grid);
}

RoutePyramids path_and_frozen_pyramids(const FieldSimulator& sim, const NoiseGrid& grid,
                                       const HurstFunction& H, const WaveletSpec& w, int j_min,
                                       int j_max, const IntervalSequence& intervals, int v_nodes,
                                       int min_samples) {
  RoutePyramids out;
  if (H.is_constant()) {
    out.path = sim.lmsm(grid, H, v_nodes);
    out.path_pyramid = build_pyramid(out.path, w, j_min, j_max, intervals, min_samples);
    out.frozen_pyramid = out.path_pyramid;
    out.frozen_pyramid.source = CoeffSource::frozen_path;
    return out;
  }
  const auto nodes = chebyshev_nodes(H.h_low(), H.h_high(), v_nodes);
  const auto rows = sim.sheets(grid, nodes);
  const auto times = sim.times();

  std::vector<CoeffPyramid> node_pyramids;
  for (const auto& row : rows) {
    SamplePath p;
    p.times = times;
    p.values = row;
    node_pyramids.push_back(build_pyramid(p, w, j_min, j_max, intervals, min_samples));
  }

  out.path.times = times;
  out.path.values.resize(times.size());
  for (std::size_t m = 0; m < times.size(); ++m) {
    const auto l = lagrange_basis(nodes, H(times[m]));
    double acc = 0.0;
    for (std::size_t q = 0; q < nodes.size(); ++q) acc += l[q] * rows[q][m];
    out.path.values[m] = acc;
  }
  out.path.provenance["hurst"] = H.describe();
  out.path.provenance["grid.seed"] = std::to_string(grid.seed);
  out.path_pyramid = build_pyramid(out.path, w, j_min, j_max, intervals, min_samples);

  out.frozen_pyramid.source = CoeffSource::frozen_path;
  out.frozen_pyramid.wavelet_id = w.id;
  out.frozen_pyramid.seed = grid.seed;
  for (const auto& [j, row] : out.path_pyramid.levels) {
    auto& frozen_row = out.frozen_pyramid.levels[j];
    for (const auto& [k, d] : row) {
      const auto l = lagrange_basis(nodes, H(std::ldexp(static_cast<double>(k), -j)));
      double acc = 0.0;
      for (std::size_t q = 0; q < nodes.size(); ++q) acc += l[q] * node_pyramids[q].level(j).at(k);
      frozen_row[k] = acc;
    }
  }
  return out;
}

}  // namespace lmsm
