#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "doctest.h"
#include "lmsm/coefficients.hpp"
#include "lmsm/direct.hpp"
#include "lmsm/field.hpp"
#include "lmsm/hurst.hpp"
#include "lmsm/noise.hpp"
#include "lmsm/quadrature.hpp"
#include "lmsm/stable.hpp"

using namespace lmsm;

namespace {

// \int |(u-s)_+^k - (-s)_+^k|^alpha ds by Boost quadrature.
double field_kernel_mass(double alpha, double v, double u) {
  const double k = v - 1.0 / alpha;
  boost::math::quadrature::tanh_sinh<double> ts;
  boost::math::quadrature::exp_sinh<double> es;
  const double near = ts.integrate([&](double s) { return std::pow(u - s, k * alpha); }, 0.0, u);
  const double far = es.integrate(
      [&](double x) { return std::pow(std::pow(u + x, k) - std::pow(x, k), alpha); }, 0.0,
      std::numeric_limits<double>::infinity());
  return near + far;
}

GridGeometry tail_geometry(double alpha, double v, double delta) {
  return make_geometry(-required_tail_span(alpha, v, 1.0), 1.0, delta);
}

}  // namespace

TEST_CASE("Hurst functions") {
  SUBCASE("families and minima") {
    const auto h1 = HurstFunction::constant(0.8);
    CHECK(h1(0.3) == 0.8);
    CHECK(h1.is_constant());
    CHECK(h1.min_on({0.0, 1.0}) == 0.8);

    const auto h2 = HurstFunction::linear(0.7, 0.15);
    CHECK(h2(1.0) == doctest::Approx(0.85));
    CHECK(h2.min_on({0.0, 1.0}) == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(h2.min_on({0.5, 0.75}) == doctest::Approx(0.775).epsilon(1e-12));
    CHECK(h2.min_on({-1.0, 2.0}) == doctest::Approx(0.7).epsilon(1e-12));

    const auto h3 = HurstFunction::sine(0.75, 0.08);
    CHECK(h3(0.25) == doctest::Approx(0.83));
    CHECK(h3.min_on({0.0, 1.0}) == doctest::Approx(0.67).epsilon(1e-9));
    CHECK(h3.min_on({0.0, 0.5}) == doctest::Approx(0.75).epsilon(1e-9));
    CHECK(h3.h_low() == doctest::Approx(0.67));
    CHECK(h3.h_high() == doctest::Approx(0.83));
    CHECK(h3.smooth_enough());
  }
  SUBCASE("validation") {
    CHECK_NOTHROW(HurstFunction::linear(0.7, 0.15).validate(1.5));
    CHECK_THROWS_AS(HurstFunction::constant(0.6).validate(1.5), std::invalid_argument);
    CHECK_THROWS_AS(HurstFunction::constant(1.0).validate(1.5), std::invalid_argument);
    const HurstFunction liar("liar", {}, [](double t) { return 0.7 + 0.2 * t; }, 0.7, 0.8, 1.0, 0.2);
    CHECK_THROWS_AS(liar.validate(1.5), std::invalid_argument);
  }
  SUBCASE("by id") {
    const auto h = HurstFunction::from_id("sine", {0.75, 0.08});
    CHECK(h(0.1) == doctest::Approx(HurstFunction::sine(0.75, 0.08)(0.1)));
    CHECK(h.describe() == "sine(0.75,0.08)");
    CHECK_THROWS_AS(HurstFunction::from_id("cubic", {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(HurstFunction::from_id("linear", {0.7}), std::invalid_argument);
  }
}

TEST_CASE("noise grid") {
  const StableLaw law(1.5, 1.0);
  SUBCASE("argument checks") {
    CHECK_THROWS_AS(make_noise_grid(law, -1.0, 1.0, 0.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(make_noise_grid(law, -1.0, 1.0, -0.5, 1), std::invalid_argument);
    CHECK_THROWS_AS(make_noise_grid(law, 0.0, 1.0, 0.25, 1), std::invalid_argument);
    CHECK_THROWS_AS(make_geometry(-1.0, 1.0, 0.3), std::invalid_argument);
  }
  SUBCASE("uniform layout") {
    const auto g = make_noise_grid(law, -2.0, 1.0, 0.25, 1);
    CHECK(g.increments.size() == 12);
    CHECK(g.coarse_increments.empty());
    CHECK(g.geometry.fine_point(0) == -2.0);
  }
  SUBCASE("determinism") {
    const auto a = make_noise_grid(law, -4.0, 1.0, 1.0 / 64, 9);
    const auto b = make_noise_grid(law, -4.0, 1.0, 1.0 / 64, 9);
    CHECK(a.increments == b.increments);
    CHECK(a.coarse_increments == b.coarse_increments);
    const auto c = make_noise_grid(law, -4.0, 1.0, 1.0 / 64, 10);
    CHECK(a.increments != c.increments);
  }
  SUBCASE("unit cells carry unit-scale increments") {
    const auto g = make_noise_grid(law, make_geometry(-1e6, 1.0, 1.0, 1e6), 3);
    double acc = 0.0;
    for (double x : g.increments) acc += std::pow(std::abs(x), 0.25);
    acc /= static_cast<double>(g.increments.size());
    CHECK(acc == doctest::Approx(moment_constant(0.25, 1.5)).epsilon(0.02));
  }
  SUBCASE("gamma moment of small cells") {
    const double delta = std::ldexp(1.0, -18);
    const auto g = make_noise_grid(law, make_geometry(-3.0, 1.0, delta, 3.0), 4);
    REQUIRE(g.increments.size() >= 1000000);
    double acc = 0.0;
    for (double x : g.increments) acc += std::pow(std::abs(x), 0.25);
    acc /= static_cast<double>(g.increments.size()) * std::pow(delta, 0.25 / 1.5);
    CHECK(std::abs(acc - moment_constant(0.25, 1.5)) < 0.02 * moment_constant(0.25, 1.5));
  }
  SUBCASE("graded tail") {
    const GridGeometry geo = make_geometry(-1e6, 1.0, 1.0 / 256);
    std::vector<double> pts, widths;
    coarse_cells(geo, pts, widths);
    double covered = 0.0;
    for (std::size_t c = 0; c < pts.size(); ++c) {
      covered += widths[c];
      CHECK(pts[c] < -geo.near_span);
    }
    CHECK(covered == doctest::Approx(1e6 - geo.near_span).epsilon(1e-12));
    CHECK(pts.size() < 1000);
  }
  SUBCASE("tail span inverts the tail ratio") {
    for (double v : {0.7, 0.8, 0.9}) {
      const double T = required_tail_span(1.5, v, 1.0, 1e-4);
      CHECK(field_tail_ratio(1.5, v, 1.0, T) <= 1e-4 * (1 + 1e-9));
      CHECK(field_tail_ratio(1.5, v, 1.0, 0.9 * T) > 1e-4);
    }
  }
}

TEST_CASE("field evaluation") {
  const StableLaw law(1.5, 1.0);
  const double v = 0.8;
  const GridGeometry geo = tail_geometry(1.5, v, 1.0 / 1024);
  const auto grid = make_noise_grid(law, geo, 17);

  SUBCASE("X(0, v) vanishes") { CHECK(eval_field(grid, 0.0, v) == 0.0); }

  SUBCASE("short grids are rejected") {
    const auto short_grid = make_noise_grid(law, -2.0, 1.0, 1.0 / 1024, 17);
    CHECK_THROWS_AS(eval_field(short_grid, 0.5, v), ToleranceError);
  }

  SUBCASE("FFT route equals the direct sum") {
    const FieldSimulator sim(geo, 1.5);
    const auto times = sim.times();
    const auto row = sim.sheet(grid, v);
    REQUIRE(row.size() == times.size());
    for (std::size_t m : {std::size_t{0}, std::size_t{1}, std::size_t{100}, std::size_t{513}, times.size() - 1}) {
      CHECK(row[m] == doctest::Approx(eval_field(grid, times[m], v)).epsilon(1e-10));
    }
  }

  SUBCASE("kernel helper") {
    CHECK(field_kernel(0.5, -2.0, 0.3) == doctest::Approx(std::pow(2.5, 0.3) - std::pow(2.0, 0.3)));
    CHECK(field_kernel(0.5, 0.2, 0.3) == doctest::Approx(std::pow(0.3, 0.3)));
    CHECK(field_kernel(0.5, 0.7, 0.3) == 0.0);
    CHECK(field_kernel(1.0, -1e12, 0.3) == doctest::Approx(0.3 * std::pow(1e12, -0.7)).epsilon(1e-9));
  }
}

TEST_CASE("field scale matches the kernel norm") {
  const double alpha = 1.5, v = 0.8, gamma = 0.25;
  const StableLaw law(alpha, 1.0);
  const GridGeometry geo = tail_geometry(alpha, v, 1.0 / 1024);
  const int n = 1000;
  double acc = 0.0;
  for (int r = 0; r < n; ++r) {
    const auto grid = make_noise_grid(law, geo, stream_seed(77, r));
    acc += std::pow(std::abs(eval_field(grid, 1.0, v)), gamma);
  }
  acc /= n;
  const double target = moment_constant(gamma, alpha) * std::pow(field_kernel_mass(alpha, v, 1.0), gamma / alpha);
  CHECK(acc == doctest::Approx(target).epsilon(0.05));
}

TEST_CASE("LMSM paths") {
  const StableLaw law(1.5, 1.0);
  const auto H2 = HurstFunction::linear(0.7, 0.15);
  const GridGeometry geo = tail_geometry(1.5, H2.h_high(), 1.0 / 512);
  const FieldSimulator sim(geo, 1.5);
  const auto grid = make_noise_grid(law, geo, 5);

  SUBCASE("constant H is the LFSM path") {
    const auto a = sim.lmsm(grid, HurstFunction::constant(0.8));
    const auto b = sim.lfsm(grid, 0.8);
    CHECK(a.values == b.values);
    const std::vector<double> t{0.0, 0.25, 0.5, 1.0};
    const auto d = simulate_lmsm(grid, t, HurstFunction::constant(0.8));
    for (std::size_t i = 0; i < t.size(); ++i) {
      CHECK(d.values[i] == doctest::Approx(b.values[static_cast<std::size_t>(t[i] * 512)]).epsilon(1e-10));
    }
  }

  SUBCASE("Y(0) = 0 and times are the grid") {
    const auto y = sim.lmsm(grid, H2);
    CHECK(y.values.front() == 0.0);
    CHECK(y.times.size() == 513);
    CHECK(y.times.back() == 1.0);
  }

  SUBCASE("fast route agrees with direct evaluation") {
    const auto fast = sim.lmsm(grid, H2);
    const std::vector<double> t{0.125, 0.5, 0.875};
    const auto slow = simulate_lmsm(grid, t, H2);
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double y = fast.values[static_cast<std::size_t>(t[i] * 512)];
      CHECK(std::abs(y - slow.values[i]) < 1e-8 * (1.0 + std::abs(y)));
    }
  }

  SUBCASE("Lipschitz in the Hurst function") {
    std::vector<double> ratios;
    const auto base = sim.lmsm(grid, HurstFunction::linear(0.72, 0.1));
    for (double eps : {1e-2, 1e-3, 1e-4}) {
      const auto moved = sim.lmsm(grid, HurstFunction::linear(0.72 + eps, 0.1));
      double worst = 0.0;
      for (std::size_t m = 0; m < base.values.size(); ++m) {
        worst = std::max(worst, std::abs(moved.values[m] - base.values[m]));
      }
      ratios.push_back(worst / eps);
    }
    CHECK(ratios[1] < 2.0 * ratios[0]);
    CHECK(ratios[2] < 2.0 * ratios[1]);
    CHECK(ratios[2] > 0.5 * ratios[1]);
  }

  SUBCASE("path CSV round trip is exact") {
    const auto y = sim.lmsm(grid, H2);
    std::stringstream ss;
    y.write_csv(ss);
    const auto back = SamplePath::read_csv(ss);
    CHECK(back.times == y.times);
    CHECK(back.values == y.values);
    CHECK(back.provenance == y.provenance);
    CHECK(back.provenance.at("hurst") == "linear(0.7,0.15)");
  }

  SUBCASE("mismatched geometry is rejected") {
    const auto other = make_noise_grid(law, tail_geometry(1.5, 0.85, 1.0 / 256), 5);
    CHECK_THROWS_AS(sim.lmsm(other, H2), std::invalid_argument);
  }
}

TEST_CASE("interpolation helpers") {
  const auto nodes = chebyshev_nodes(0.6, 0.9, 8);
  CHECK(nodes.front() == doctest::Approx(0.6));
  CHECK(nodes.back() == doctest::Approx(0.9));
  auto p = [](double x) { return 1.0 - 3.0 * x + x * x * x * x * x * x * x; };
  for (double x : {0.6, 0.61, 0.77, 0.9}) {
    const auto l = lagrange_basis(nodes, x);
    double acc = 0.0;
    for (std::size_t q = 0; q < nodes.size(); ++q) acc += l[q] * p(nodes[q]);
    CHECK(acc == doctest::Approx(p(x)).epsilon(1e-13));
  }
}

TEST_CASE("direct frozen-Hurst coefficients") {
  const double alpha = 1.5;
  const PhiKernel phi(alpha);
  const auto H = HurstFunction::constant(0.8);

  SUBCASE("insufficient coverage is signalled") {
    const GridGeometry geo = make_geometry(-1.0 / 64, 1.0, 1.0 / 1024);
    CHECK_THROWS_AS(DirectCoeffKernel(phi, geo, 2, 0, 0.8), ToleranceError);
  }

  SUBCASE("linear in the noise") {
    const GridGeometry geo = make_geometry(-1.0, 1.0, 1.0 / 4096);
    const auto a = make_noise_grid(StableLaw(alpha, 1.0), geo, 3);
    const auto b = make_noise_grid(StableLaw(alpha, 2.5), geo, 3);
    CHECK(simulate_coeff_direct(b, phi, 6, 10, H) ==
          doctest::Approx(2.5 * simulate_coeff_direct(a, phi, 6, 10, H)).epsilon(1e-12));
  }

  SUBCASE("agrees with the path route for constant H") {
    // The two routes discretize the rough kernel (t-s)_+^k differently; their
    // gap is a few 1e-6 at delta = 2^-12 and must shrink on refinement.
    const WaveletSpec w = default_wavelet();
    auto worst_gap = [&](double delta) {
      const GridGeometry geo = tail_geometry(alpha, 0.8, delta);
      const auto grid = make_noise_grid(StableLaw(alpha, 1.0), geo, 8);
      const FieldSimulator sim(geo, alpha);
      const auto path = sim.lmsm(grid, H);
      double worst = 0.0;
      for (int j : {3, 5}) {
        for (long k : {0L, 3L, 7L}) {
          const double d = compute_coeff(path, w, j, k);
          const double dt = DirectCoeffKernel(phi, geo, j, k, 0.8, 1e-6).apply(grid);
          worst = std::max(worst, std::abs(d - dt));
        }
      }
      return worst;
    };
    const double coarse = worst_gap(1.0 / 4096);
    const double fine = worst_gap(1.0 / 16384);
    CHECK(coarse < 2e-5);
    CHECK(fine < 0.6 * coarse);
  }

  SUBCASE("discrete scale approaches the quadrature norm") {
    const GridGeometry geo = make_geometry(-1.0, 1.0, 1.0 / 4096);
    const int j = 6;
    const DirectCoeffKernel ker(phi, geo, j, 32, 0.8);
    const double target = std::pow(2.0, -j * 0.8) * phi_lalpha_norm(phi, 0.8).value;
    CHECK(std::pow(ker.discrete_scale_alpha(alpha), 1.0 / alpha) == doctest::Approx(target).epsilon(0.01));
    CHECK(ker.tail_ratio() < 1e-4);
  }
}
