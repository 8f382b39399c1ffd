#include "lmsm/wavelet.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "lmsm/quadrature.hpp"

namespace lmsm {

namespace {

double quartic(double t) {
  if (t < 0.0 || t > 1.0) return 0.0;
  return t * (1.0 - t) * (5.0 * t * t - 5.0 * t + 1.0);
}

// integrate() is not const-qualified in this Boost release, but it is safe to
// call concurrently (the abscissa refinement is internally synchronized).
boost::math::quadrature::tanh_sinh<double>& shared_tanh_sinh() {
  static boost::math::quadrature::tanh_sinh<double> integrator;
  return integrator;
}

// \int_0^y (y - x) psi(x) dx
double second_primitive(const WaveletSpec& w, double y, const GaussRule& unit_rule) {
  double acc = 0.0;
  for (std::size_t i = 0; i < unit_rule.nodes.size(); ++i) {
    const double x = y * unit_rule.nodes[i];
    acc += unit_rule.weights[i] * (y - x) * w(x);
  }
  return acc * y;
}

}  // namespace

WaveletSpec default_wavelet() {
  return WaveletSpec{"quartic", quartic, Interval{0.0, 1.0}, 1e-12};
}

WaveletSpec wavelet_by_id(const std::string& id) {
  if (id == "quartic") return default_wavelet();
  throw std::invalid_argument("unknown wavelet id '" + id + "'");
}

WaveletValidation validate_wavelet(const WaveletSpec& w, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("validate_wavelet: tol must be > 0");
  WaveletValidation rep;

  // Moments by composite Gauss-Legendre on [0,1]: exact for polynomials of
  // moderate degree and accurate for any continuous psi.
  constexpr int panels = 32;
  const GaussRule unit = gauss_legendre(20, 0.0, 1.0);
  for (int p = 0; p < panels; ++p) {
    const double a = static_cast<double>(p) / panels;
    for (std::size_t i = 0; i < unit.nodes.size(); ++i) {
      const double t = a + unit.nodes[i] / panels;
      const double f = w(t) * unit.weights[i] / panels;
      rep.moment0 += f;
      rep.moment1 += t * f;
    }
  }
  rep.moments_ok = std::abs(rep.moment0) <= tol && std::abs(rep.moment1) <= tol;

  // Dyadic sampling grids on [-1/4, 5/4] containing 0 and 1 exactly.
  auto max_jump_on = [&](int per_unit, double& sup_abs, double& outside) {
    const double h = 1.0 / per_unit;
    const int n = per_unit * 3 / 2;
    double jump = 0.0;
    double prev = w(-0.25);
    for (int i = 1; i <= n; ++i) {
      const double t = -0.25 + i * h;
      const double cur = w(t);
      jump = std::max(jump, std::abs(cur - prev));
      sup_abs = std::max(sup_abs, std::abs(cur));
      if (t < 0.0 || t > 1.0) outside = std::max(outside, std::abs(cur));
      prev = cur;
    }
    return jump;
  };
  double sup_coarse = 0.0, out_coarse = 0.0;
  const double jump_coarse = max_jump_on(1 << 10, sup_coarse, out_coarse);
  rep.max_jump = max_jump_on(1 << 12, rep.sup_abs, rep.outside_max);
  rep.outside_max = std::max(rep.outside_max, out_coarse);
  // A jump survives refinement; a continuous function's increments shrink.
  rep.continuity_ok = rep.max_jump <= tol || rep.max_jump <= 0.5 * jump_coarse;

  rep.support_ok = rep.outside_max == 0.0 && w.support.lo >= 0.0 && w.support.hi <= 1.0;
  rep.nontrivial_ok = rep.sup_abs > 0.0;

  if (!rep.support_ok) rep.violations.push_back("support: nonzero outside [0,1]");
  if (!rep.continuity_ok) rep.violations.push_back("continuity: jump persists under refinement");
  if (std::abs(rep.moment0) > tol) rep.violations.push_back("moment0: |int psi| exceeds tol");
  if (std::abs(rep.moment1) > tol) rep.violations.push_back("moment1: |int t psi| exceeds tol");
  if (!rep.nontrivial_ok) rep.violations.push_back("nontrivial: psi vanishes on the test grid");
  return rep;
}

PhiKernel::PhiKernel(double alpha, WaveletSpec wavelet, int quad_points, double rel_tol)
    : alpha_(alpha), wavelet_(std::move(wavelet)), rel_tol_(rel_tol) {
  if (!(alpha > 1.0 && alpha <= 2.0)) {
    throw std::invalid_argument("PhiKernel: alpha must lie in (1, 2]");
  }
  if (quad_points < 4) throw std::invalid_argument("PhiKernel: quad_points must be >= 4");
  if (!(rel_tol > 0.0)) throw std::invalid_argument("PhiKernel: rel_tol must be > 0");
  if (!wavelet_.evaluator) throw std::invalid_argument("PhiKernel: wavelet has no evaluator");

  const GaussRule rule = gauss_legendre(quad_points, 0.0, 1.0);
  nodes_ = rule.nodes;
  weights_ = rule.weights;
  psi2_.resize(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    psi2_[i] = second_primitive(wavelet_, nodes_[i], rule);
    m0_ += weights_[i] * wavelet_(nodes_[i]);
  }
  psi2_at_one_ = second_primitive(wavelet_, 1.0, rule);

  // For an admissible psi both boundary terms vanish; left as rounding noise
  // they would be amplified by (1-s)^k far from the support.
  double abs_mass = 0.0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) abs_mass += weights_[i] * std::abs(wavelet_(nodes_[i]));
  const double noise = 64.0 * std::numeric_limits<double>::epsilon() * abs_mass;
  if (std::abs(m0_) <= noise) m0_ = 0.0;
  if (std::abs(psi2_at_one_) <= noise) psi2_at_one_ = 0.0;

  // L1 norm and integral of P2 on a finer composite rule (P2 changes sign).
  constexpr int panels = 16;
  for (int p = 0; p < panels; ++p) {
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      const double y = (p + nodes_[i]) / panels;
      const double val = second_primitive(wavelet_, y, rule);
      psi2_l1_ += weights_[i] / panels * std::abs(val);
      psi2_integral_ += weights_[i] / panels * val;
    }
  }
}

double PhiKernel::kappa(double v) const {
  if (!(v > 1.0 / alpha_ && v < 1.0)) {
    throw std::invalid_argument("PhiKernel: v must lie in (1/alpha, 1), got " + std::to_string(v));
  }
  return v - 1.0 / alpha_;
}

double PhiKernel::far_form(double s, double k) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    acc += weights_[i] * std::pow(nodes_[i] - s, k - 2.0) * psi2_[i];
  }
  const double one_minus_s = 1.0 - s;
  return std::pow(one_minus_s, k) * m0_ - k * std::pow(one_minus_s, k - 1.0) * psi2_at_one_ +
         k * (k - 1.0) * acc;
}

double PhiKernel::operator()(double s, double v, double* error) const {
  const double k = kappa(v);
  if (error) *error = 0.0;
  if (s >= 1.0) return 0.0;
  if (s <= -1.0) return far_form(s, k);

  auto& ts = shared_tanh_sinh();
  double err = 0.0;
  double value = 0.0;
  if (s > 0.0) {
    auto f = [&](double x) { return std::pow(x, k) * wavelet_(s + x); };
    value = ts.integrate(f, 0.0, 1.0 - s, rel_tol_, &err);
  } else {
    auto f = [&](double y) { return std::pow(y - s, k) * wavelet_(y); };
    value = ts.integrate(f, 0.0, 1.0, rel_tol_, &err);
  }
  if (error) *error = err;
  return value;
}

double PhiKernel::far_bound_constant(double v) const {
  const double k = kappa(v);
  return std::abs(k * (k - 1.0)) * psi2_l1_;
}

double PhiKernel::far_asymptotic_coefficient(double v) const {
  const double k = kappa(v);
  return k * (k - 1.0) * psi2_integral_;
}

double phi_alpha(const PhiKernel& kernel, double s, double v) { return kernel(s, v); }

LalphaNorm phi_lalpha_norm(const PhiKernel& kernel, double v, double rel_tol, double s_max) {
  using boost::math::quadrature::gauss_kronrod;
  const double alpha = kernel.alpha();
  const double k = kernel.kappa(v);
  const double a_const = kernel.far_bound_constant(v);
  const double decay = alpha * (2.0 - k) - 1.0;  // > 0
  auto tail = [&](double s) { return std::pow(a_const, alpha) * std::pow(s, -decay) / decay; };

  auto power = [&](double u) { return std::pow(std::abs(kernel(u, v)), alpha); };
  // u = -e^x maps [-b, -a] (1 <= a) to [log a, log b].
  auto far_piece = [&](double a, double b) {
    auto g = [&](double x) {
      const double e = std::exp(x);
      return power(-e) * e;
    };
    return gauss_kronrod<double, 31>::integrate(g, std::log(a), std::log(b), 15, 1e-11);
  };

  double mass = gauss_kronrod<double, 31>::integrate(power, 0.0, 1.0, 15, 1e-11) +
                gauss_kronrod<double, 31>::integrate(power, -1.0, 0.0, 15, 1e-11);

  LalphaNorm out;
  if (s_max > 0.0) {
    if (s_max <= 1.0) throw std::invalid_argument("phi_lalpha_norm: s_max must exceed 1");
    mass += far_piece(1.0, s_max);
    out.s_max = s_max;
    out.tail_bound = tail(s_max);
    if (out.tail_bound > rel_tol * mass) {
      throw ToleranceError("phi_lalpha_norm: tail bound " + std::to_string(out.tail_bound) +
                           " exceeds tolerance at s_max=" + std::to_string(s_max));
    }
  } else {
    double s = 64.0;
    mass += far_piece(1.0, s);
    while (tail(s) > rel_tol * mass) {
      if (s > 1e15) throw ToleranceError("phi_lalpha_norm: tail bound not certified");
      mass += far_piece(s, 2.0 * s);
      s *= 2.0;
    }
    out.s_max = s;
    out.tail_bound = tail(s);
  }
  if (!(mass > 0.0)) throw ToleranceError("phi_lalpha_norm: non-positive norm");
  out.truncated_mass = mass;
  out.value = std::pow(mass, 1.0 / alpha);
  return out;
}

DecayWitness decay_witness(const PhiKernel& kernel, double v, double exponent, int points,
                           double s_min) {
  if (points < 2) throw std::invalid_argument("decay_witness: points must be >= 2");
  if (!(s_min < -1.0)) throw std::invalid_argument("decay_witness: s_min must be < -1");
  DecayWitness out;
  out.grid_points = 2 * points;
  auto visit = [&](double s) {
    const double val = std::pow(1.0 + std::abs(s), exponent) * std::abs(kernel(s, v));
    if (val > out.constant) {
      out.constant = val;
      out.argmax = s;
    }
  };
  for (int i = 0; i < points; ++i) visit(-1.0 + 2.0 * i / (points - 1));
  const double log_span = std::log(-s_min);
  for (int i = 0; i < points; ++i) visit(-std::exp(log_span * i / (points - 1)));
  return out;
}

}  // namespace lmsm
