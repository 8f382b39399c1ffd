#pragma once

#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "lmsm/hurst.hpp"
#include "lmsm/noise.hpp"

namespace lmsm {

/// (u-s)_+^k - (-s)_+^k, evaluated without cancellation for s < 0.
double field_kernel(double u, double s, double kappa);

/// X(u, v) as a direct sum over every cell of the grid.
///
/// Throws ToleranceError when the L^alpha mass of the kernel left of t_min
/// may exceed `tol` times its total mass.
double eval_field(const NoiseGrid& grid, double u, double v, double tol = 1e-4);

struct SamplePath {
  std::vector<double> times;
  std::vector<double> values;
  std::map<std::string, std::string> provenance;

  /// "# key=value" lines, then a "t,Y" header and one row per sample.
  void write_csv(std::ostream& out) const;
  static SamplePath read_csv(std::istream& in);
};

/// Chebyshev points of the second kind on [lo, hi], ascending.
std::vector<double> chebyshev_nodes(double lo, double hi, int n);

/// Lagrange basis values l_q(x) for the given nodes (barycentric form).
std::vector<double> lagrange_basis(const std::vector<double>& nodes, double x);

/// Fast evaluation of t -> X(t, v) on the grid times t_m = m delta.
///
/// The fine cells give a discrete convolution of the noise with
/// a_n = (n delta)^k, evaluated by FFT; the graded far cells give a smooth
/// function of t that is interpolated from Chebyshev nodes. Kernel spectra are
/// cached per v, so one simulator should be reused across replicates that
/// share a geometry. Thread safe.
class FieldSimulator {
 public:
  FieldSimulator(const GridGeometry& geometry, double alpha, int t_nodes = 24);
  ~FieldSimulator();
  FieldSimulator(const FieldSimulator&) = delete;
  FieldSimulator& operator=(const FieldSimulator&) = delete;

  const GridGeometry& geometry() const { return geometry_; }
  double alpha() const { return alpha_; }

  /// Grid times in [0, min(1, t_max)].
  std::vector<double> times() const;

  /// X(t_m, v) for every grid time, one row per requested v.
  std::vector<std::vector<double>> sheets(const NoiseGrid& grid, std::span<const double> vs) const;
  std::vector<double> sheet(const NoiseGrid& grid, double v) const;

  /// X_H on the grid times.
  SamplePath lfsm(const NoiseGrid& grid, double H) const;

  /// Y(t) = X(t, H(t)) on the grid times. X is interpolated in v from
  /// `v_nodes` Chebyshev nodes on [h_low, h_high]; a constant H takes the
  /// LFSM route unchanged.
  SamplePath lmsm(const NoiseGrid& grid, const HurstFunction& H, int v_nodes = 16) const;

 private:
  struct Spectrum;
  std::shared_ptr<const Spectrum> spectrum(double v) const;
  void check(const NoiseGrid& grid) const;

  GridGeometry geometry_;
  double alpha_;
  int t_nodes_;
  std::size_t fft_size_;
  std::vector<double> coarse_points_;
  mutable std::mutex cache_mutex_;
  mutable std::map<double, std::shared_ptr<const Spectrum>> cache_;
};

SamplePath simulate_lfsm(const NoiseGrid& grid, double H);

/// Fast route on the grid times.
SamplePath simulate_lmsm(const NoiseGrid& grid, const HurstFunction& H);

/// Direct route at arbitrary times in [0,1]; one eval_field call per time.
SamplePath simulate_lmsm(const NoiseGrid& grid, std::span<const double> times,
                         const HurstFunction& H);

}  // namespace lmsm
