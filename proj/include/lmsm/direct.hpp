#pragma once

#include <vector>

#include "lmsm/coefficients.hpp"
#include "lmsm/field.hpp"
#include "lmsm/hurst.hpp"
#include "lmsm/noise.hpp"
#include "lmsm/wavelet.hpp"

namespace lmsm {

/// Deterministic weights of the frozen-Hurst coefficient
///   d~_{j,k} = 2^{-j(v-1/alpha)} \int Phi_alpha(2^j s - k, v) dZ(s)
/// on one grid geometry, so the same kernel serves many replicates.
class DirectCoeffKernel {
 public:
  /// Throws ToleranceError when the part of Phi left of t_min may carry
  /// more than `tol` of its L^alpha mass. `phi_mass`, if positive, is
  /// \int |Phi(., v)|^alpha and skips recomputing it.
  DirectCoeffKernel(const PhiKernel& phi, const GridGeometry& geometry, int j, long k, double v,
                    double tol = 1e-4, double phi_mass = 0.0);

  int j() const { return j_; }
  long k() const { return k_; }
  double v() const { return v_; }
  double tail_ratio() const { return tail_ratio_; }

  /// sum_i weight_i * increment_i over the grid's cells.
  double apply(const NoiseGrid& grid) const;

  /// \int |weight function|^alpha as seen by the discretization, i.e. the
  /// alpha-th power of the scale parameter of apply(grid).
  double discrete_scale_alpha(double alpha) const;

 private:
  GridGeometry geometry_;
  int j_;
  long k_;
  double v_;
  double tail_ratio_ = 0.0;
  std::vector<double> fine_;    // fine cells 0 .. fine_.size()-1; the rest weigh 0
  std::vector<double> coarse_;
  std::vector<double> coarse_widths_;
};

/// d~_{j,k} with v = H(k 2^{-j}); requires [k 2^{-j}, (k+1) 2^{-j}] inside [0,1].
double simulate_coeff_direct(const NoiseGrid& grid, const PhiKernel& phi, int j, long k,
                             const HurstFunction& H);

/// Both coefficient routes from one noise grid and one quadrature.
///
/// X(., v_q) is simulated at Chebyshev nodes v_q of [h_low, h_high]. The
/// path Y(t) = sum_q l_q(H(t)) X(t, v_q) gives d_{j,k}; the frozen
/// coefficients d~_{j,k} = sum_q l_q(H(k 2^-j)) d^{(q)}_{j,k} use the
/// pyramids of the node paths. With a constant H the two coincide.
struct RoutePyramids {
  SamplePath path;
  CoeffPyramid path_pyramid;
  CoeffPyramid frozen_pyramid;
};

RoutePyramids path_and_frozen_pyramids(const FieldSimulator& sim, const NoiseGrid& grid,
                                       const HurstFunction& H, const WaveletSpec& w, int j_min,
                                       int j_max, const IntervalSequence& intervals, int v_nodes,
                                       int min_samples = 16);

}  // namespace lmsm
