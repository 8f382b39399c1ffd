#pragma once

#include <functional>
#include <string>
#include <vector>

#include "lmsm/interval.hpp"

namespace lmsm {

/// Analyzing wavelet: continuous, supported in [0,1], two vanishing moments.
struct WaveletSpec {
  std::string id;
  std::function<double(double)> evaluator;
  Interval support{0.0, 1.0};
  double moment_tolerance = 1e-12;

  double operator()(double t) const { return evaluator(t); }
};

/// psi(t) = t(1-t)(5t^2 - 5t + 1) on [0,1], zero elsewhere.
WaveletSpec default_wavelet();

/// Looks up a wavelet by id ("quartic" is the default one).
WaveletSpec wavelet_by_id(const std::string& id);

struct WaveletValidation {
  bool support_ok = false;
  bool continuity_ok = false;
  bool moments_ok = false;
  bool nontrivial_ok = false;
  double moment0 = 0.0;
  double moment1 = 0.0;
  double outside_max = 0.0;  ///< max |psi| sampled outside [0,1]
  double max_jump = 0.0;     ///< max neighbour difference on the finest grid
  double sup_abs = 0.0;
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }
};

/// Checks the admissibility assumptions and reports every violated one.
/// Never throws for an inadmissible wavelet; throws only if tol <= 0.
WaveletValidation validate_wavelet(const WaveletSpec& w, double tol);

/// Fractional primitive kernel Phi_alpha(s, v) = \int_0^1 (y-s)_+^{v-1/alpha} psi(y) dy.
///
/// For s >= 1 the value is exactly zero. For s <= -1 two integrations by
/// parts move the kernel onto the second primitive of psi, which avoids the
/// cancellation of the direct form far from the support:
///   Phi = (1-s)^k m0 - k (1-s)^{k-1} P2(1) + k(k-1) \int_0^1 (y-s)^{k-2} P2(y) dy,
/// with k = v - 1/alpha, m0 = \int psi and P2 the second primitive. On (-1, 1)
/// the direct integral is evaluated by tanh-sinh quadrature, which absorbs
/// the (y-s)^k endpoint singularity when s > 0.
///
/// Immutable after construction; safe to share across threads.
class PhiKernel {
 public:
  explicit PhiKernel(double alpha, WaveletSpec wavelet = default_wavelet(), int quad_points = 30,
                     double rel_tol = 1e-10);

  double alpha() const { return alpha_; }
  int quad_points() const { return static_cast<int>(nodes_.size()); }
  double rel_tol() const { return rel_tol_; }
  const WaveletSpec& wavelet() const { return wavelet_; }

  /// Phi_alpha(s, v); `error`, when given, receives the quadrature error estimate.
  double operator()(double s, double v, double* error = nullptr) const;

  /// Exponent v - 1/alpha after range checking v in (1/alpha, 1).
  double kappa(double v) const;

  /// Constant A with |Phi(s, v)| <= A(v) (-s)^{k-2} for s <= -1 (admissible psi).
  double far_bound_constant(double v) const;

  /// Leading coefficient of Phi(s, v) ~ coeff (-s)^{k-2} as s -> -inf.
  double far_asymptotic_coefficient(double v) const;

 private:
  double far_form(double s, double kappa) const;

  double alpha_;
  WaveletSpec wavelet_;
  double rel_tol_;
  std::vector<double> nodes_;    // Gauss-Legendre nodes on [0,1]
  std::vector<double> weights_;
  std::vector<double> psi2_;     // second primitive at the nodes
  double m0_ = 0.0;              // \int psi
  double psi2_at_one_ = 0.0;     // P2(1) = \int (1-x) psi(x) dx
  double psi2_l1_ = 0.0;
  double psi2_integral_ = 0.0;
};

double phi_alpha(const PhiKernel& kernel, double s, double v);

struct LalphaNorm {
  double value = 0.0;           ///< (\int_{-s_max}^1 |Phi|^alpha)^{1/alpha}
  double truncated_mass = 0.0;  ///< \int_{-s_max}^1 |Phi|^alpha
  double tail_bound = 0.0;      ///< rigorous bound on \int_{-inf}^{-s_max} |Phi|^alpha
  double s_max = 0.0;
};

/// L^alpha norm of Phi(., v). With s_max <= 0 the truncation point is chosen
/// (by doubling from 64) so that tail_bound < rel_tol * truncated_mass.
/// Throws std::runtime_error when the requested accuracy cannot be certified.
LalphaNorm phi_lalpha_norm(const PhiKernel& kernel, double v, double rel_tol = 1e-6,
                           double s_max = 0.0);

struct DecayWitness {
  double constant = 0.0;  ///< max over the grid of (1+|s|)^exponent |Phi(s,v)|
  double argmax = 0.0;
  int grid_points = 0;
};

/// Empirical supremum of (1+|s|)^exponent |Phi(s, v)| over s in [s_min, 1]:
/// `points` uniform nodes on [-1, 1] plus `points` log-spaced nodes on [s_min, -1].
DecayWitness decay_witness(const PhiKernel& kernel, double v, double exponent, int points,
                           double s_min = -1e3);

}  // namespace lmsm
