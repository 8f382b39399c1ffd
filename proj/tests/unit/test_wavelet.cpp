#include <cmath>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "lmsm/quadrature.hpp"
#include "lmsm/wavelet.hpp"

using namespace lmsm;

namespace {

// \int_0^1 f psi by an n-interval trapezoid rule.
template <class F>
double trapezoid(F f, int n) {
  const WaveletSpec psi = default_wavelet();
  double acc = 0.5 * (f(0.0) * psi(0.0) + f(1.0) * psi(1.0));
  for (int i = 1; i < n; ++i) {
    const double y = static_cast<double>(i) / n;
    acc += f(y) * psi(y);
  }
  return acc / n;
}

}  // namespace

TEST_CASE("default wavelet values") {
  const WaveletSpec psi = default_wavelet();
  CHECK(psi(0.0) == 0.0);
  CHECK(psi(1.0) == 0.0);
  CHECK(psi(0.5) == doctest::Approx(-0.0625).epsilon(1e-15));
  CHECK(psi(-0.1) == 0.0);
  CHECK(psi(1.1) == 0.0);
  CHECK(wavelet_by_id("quartic").id == psi.id);
  CHECK_THROWS_AS(wavelet_by_id("haar"), std::invalid_argument);
}

TEST_CASE("moments match symbolic integration") {
  // psi = -5t^4 + 10t^3 - 6t^2 + t; \int t^m psi = -5/(m+5) + 10/(m+4) - 6/(m+3) + 1/(m+2).
  const WaveletSpec psi = default_wavelet();
  const GaussRule g = gauss_legendre(10, 0.0, 1.0);
  for (int m = 0; m <= 3; ++m) {
    double q = 0.0;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) q += g.weights[i] * std::pow(g.nodes[i], m) * psi(g.nodes[i]);
    const double exact = -5.0 / (m + 5) + 10.0 / (m + 4) - 6.0 / (m + 3) + 1.0 / (m + 2);
    CHECK(std::abs(q - exact) < 1e-15);
  }
  CHECK(-5.0 / 7 + 10.0 / 6 - 6.0 / 5 + 1.0 / 4 == doctest::Approx(1.0 / 420));
}

TEST_CASE("validate_wavelet") {
  SUBCASE("default passes") {
    const auto r = validate_wavelet(default_wavelet(), 1e-10);
    CHECK(r.ok());
    CHECK(std::abs(r.moment0) < 1e-12);
    CHECK(std::abs(r.moment1) < 1e-12);
  }
  SUBCASE("indicator fails moment and continuity") {
    WaveletSpec box{"box", [](double t) { return t >= 0.0 && t <= 1.0 ? 1.0 : 0.0; }};
    const auto r = validate_wavelet(box, 1e-10);
    CHECK_FALSE(r.ok());
    CHECK_FALSE(r.moments_ok);
    CHECK_FALSE(r.continuity_ok);
    CHECK(r.nontrivial_ok);
  }
  SUBCASE("zero fails non-triviality") {
    WaveletSpec zero{"zero", [](double) { return 0.0; }};
    const auto r = validate_wavelet(zero, 1e-10);
    CHECK_FALSE(r.nontrivial_ok);
    CHECK(r.moments_ok);
  }
  SUBCASE("support leak is reported") {
    WaveletSpec wide{"wide", [](double t) { return std::sin(2 * M_PI * t) * std::exp(-t * t); }};
    CHECK_FALSE(validate_wavelet(wide, 1e-10).support_ok);
  }
  CHECK_THROWS_AS(validate_wavelet(default_wavelet(), 0.0), std::invalid_argument);
}

TEST_CASE("affine functions are annihilated") {
  const WaveletSpec psi = default_wavelet();
  const GaussRule g = gauss_legendre(8, 0.0, 1.0);
  std::mt19937_64 eng(1);
  std::uniform_real_distribution<double> U(-10.0, 10.0);
  for (int trial = 0; trial < 20; ++trial) {
    const double a = U(eng), b = U(eng);
    double q = 0.0;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) q += g.weights[i] * (a + b * g.nodes[i]) * psi(g.nodes[i]);
    CHECK(std::abs(q) < 1e-10);
  }
}

TEST_CASE("Phi support") {
  const PhiKernel phi(1.5);
  for (double v : {0.7, 0.8, 0.95}) {
    CHECK(phi(1.5, v) == 0.0);
    CHECK(phi(1.0, v) == 0.0);
    CHECK(phi(1e6, v) == 0.0);
  }
  CHECK(phi_alpha(phi, 2.0, 0.8) == 0.0);
  CHECK_THROWS_AS(phi(0.0, 0.6), std::invalid_argument);
  CHECK_THROWS_AS(phi(0.0, 1.0), std::invalid_argument);
}

TEST_CASE("Phi against brute force trapezoid") {
  const PhiKernel phi(1.5);
  const double kappa = 0.8 - 1.0 / 1.5;
  SUBCASE("far side") {
    const double brute = trapezoid([&](double y) { return std::pow(y + 5.0, kappa); }, 1000000);
    CHECK(std::abs(phi(-5.0, 0.8) - brute) < 1e-6 * std::abs(brute));
  }
  SUBCASE("near side is continuous across s = -1") {
    CHECK(phi(-1.0 - 1e-9, 0.8) == doctest::Approx(phi(-1.0 + 1e-9, 0.8)).epsilon(1e-7));
  }
  SUBCASE("inside the support") {
    // Endpoint singularity at y = s; refine the trapezoid over [s, 1] in the variable (y-s)^{1/2}.
    for (double s : {-0.5, 0.3, 0.9}) {
      const WaveletSpec psi = default_wavelet();
      const int n = 400000;
      const double L = std::sqrt(1.0 - std::max(s, 0.0));
      const double y0 = std::max(s, 0.0);
      auto f = [&](double w) {
        const double y = y0 + w * w;
        return std::pow(y - s, kappa) * psi(y) * 2.0 * w;
      };
      double acc = 0.5 * (f(0.0) + f(L));
      for (int i = 1; i < n; ++i) acc += f(L * i / n);
      acc *= L / n;
      double err = 0.0;
      CHECK(phi(s, 0.8, &err) == doctest::Approx(acc).epsilon(1e-7));
      CHECK(err >= 0.0);
    }
  }
}

TEST_CASE("Phi far tail follows the asymptotic power law") {
  const PhiKernel phi(1.5);
  for (double v : {0.7, 0.9}) {
    const double kappa = phi.kappa(v);
    const double c = phi.far_asymptotic_coefficient(v);
    const double s = -1e5;
    CHECK(phi(s, v) == doctest::Approx(c * std::pow(-s, kappa - 2.0)).epsilon(1e-4));
    for (double t : {-2.0, -10.0, -1e3}) {
      CHECK(std::abs(phi(t, v)) <= phi.far_bound_constant(v) * std::pow(-t, kappa - 2.0) * (1 + 1e-12));
    }
  }
}

TEST_CASE("L^alpha norm") {
  const PhiKernel phi(1.5);
  const double lo = 0.7, hi = 0.9;
  SUBCASE("positive on the range") {
    for (double v : {lo, 0.5 * (lo + hi), hi}) CHECK(phi_lalpha_norm(phi, v).value > 0.0);
  }
  SUBCASE("doubling the truncation point stays inside the tail bound") {
    const auto a = phi_lalpha_norm(phi, 0.8);
    const auto b = phi_lalpha_norm(phi, 0.8, 1e-6, 2.0 * a.s_max);
    CHECK(std::abs(b.truncated_mass - a.truncated_mass) <= a.tail_bound);
    CHECK(a.tail_bound < 1e-6 * a.truncated_mass);
  }
  SUBCASE("continuous in v") {
    for (double v = lo; v < hi; v += 0.02) {
      CHECK(std::abs(phi_lalpha_norm(phi, v).value - phi_lalpha_norm(phi, v + 1e-3).value) < 1e-2);
    }
  }
  SUBCASE("agrees with a midpoint Riemann sum") {
    const PhiKernel p2(1.9);
    const double v = 0.8;
    double acc = 0.0;
    const double h = 1e-3;
    for (long i = 0; i < 2001000; ++i) acc += std::pow(std::abs(p2(-2000.0 + (i + 0.5) * h, v)), 1.9) * h;
    const auto n = phi_lalpha_norm(p2, v);
    CHECK(n.truncated_mass == doctest::Approx(acc).epsilon(1e-4));
  }
  SUBCASE("uncertifiable tolerance is signalled") {
    CHECK_THROWS_AS(phi_lalpha_norm(phi, 0.8, 1e-300), ToleranceError);
  }
}

TEST_CASE("decay witness is stable under refinement") {
  for (double alpha : {1.2, 1.5, 1.8}) {
    const PhiKernel phi(alpha);
    const double lo = 1.0 / alpha + 0.2 * (1.0 - 1.0 / alpha);
    const double hi = 1.0 - 0.2 * (1.0 - 1.0 / alpha);
    for (double v : {lo, hi}) {
      const double e = 2.0 + 1.0 / alpha - hi;
      const auto a = decay_witness(phi, v, e, 1000);
      const auto b = decay_witness(phi, v, e, 2000);
      CHECK(a.constant > 0.0);
      CHECK(std::abs(b.constant - a.constant) < 0.01 * a.constant);
    }
  }
}

TEST_CASE("Gauss-Legendre rule") {
  const GaussRule g = gauss_legendre(5, -1.0, 3.0);
  double sum = 0.0, m9 = 0.0;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    sum += g.weights[i];
    m9 += g.weights[i] * std::pow(g.nodes[i], 9);
  }
  CHECK(sum == doctest::Approx(4.0));
  CHECK(m9 == doctest::Approx((std::pow(3.0, 10) - 1.0) / 10.0));
  for (std::size_t i = 1; i < g.nodes.size(); ++i) CHECK(g.nodes[i] > g.nodes[i - 1]);
}
