#include <cmath>
#include <sstream>
#include <stdexcept>

#include "doctest.h"
#include "lmsm/coefficients.hpp"
#include "lmsm/csv.hpp"
#include "lmsm/quadrature.hpp"

using namespace lmsm;

namespace {

SamplePath sampled(double delta, double (*f)(double)) {
  SamplePath p;
  const long n = std::lround(1.0 / delta);
  for (long m = 0; m <= n; ++m) {
    p.times.push_back(m * delta);
    p.values.push_back(f(m * delta));
  }
  return p;
}

}  // namespace

TEST_CASE("compute_coeff oracles") {
  const WaveletSpec w = default_wavelet();
  const double delta = 1.0 / 1024;
  SUBCASE("constant path") {
    const auto p = sampled(delta, [](double) { return 3.7; });
    for (int j : {0, 2, 5}) CHECK(std::abs(compute_coeff(p, w, j, 0)) < 1e-13);
  }
  SUBCASE("affine path") {
    const auto p = sampled(delta, [](double t) { return -2.0 + 5.5 * t; });
    for (int j : {0, 3, 6}) {
      for (long k : {0L, (1L << j) - 1}) CHECK(std::abs(compute_coeff(p, w, j, k)) < 1e-12);
    }
  }
  SUBCASE("t^2 at the coarsest level") {
    const auto p = sampled(delta, [](double t) { return t * t; });
    // Linear interpolation of t^2 is exact up to delta^2 / 8 per cell.
    CHECK(compute_coeff(p, w, 0, 0) == doctest::Approx(1.0 / 420).epsilon(1e-6));
    // d_{j,k} of t^2 is 2^-2j / 420 for every k.
    CHECK(compute_coeff(p, w, 3, 5) == doctest::Approx(std::pow(2.0, -6) / 420).epsilon(1e-4));
  }
  SUBCASE("resolution check") {
    const auto p = sampled(1.0 / 64, [](double t) { return t; });
    CHECK_NOTHROW(compute_coeff(p, w, 2, 0));
    CHECK_THROWS_AS(compute_coeff(p, w, 3, 0), ToleranceError);
    CHECK_THROWS_AS(compute_coeff(p, w, 2, 4), std::invalid_argument);
  }
}

TEST_CASE("index sets") {
  auto check = [](Interval I, int j, long first, long count) {
    const IndexSet s = index_set(I, j);
    CHECK(s.count == count);
    if (count > 0) CHECK(s.first == first);
  };
  check({0.0, 1.0}, 3, 0, 8);
  check({0.3, 0.4}, 2, 0, 0);
  check({0.25, 0.75}, 2, 1, 2);
  check({-0.5, 1.5}, 1, 0, 2);
  check({0.1, 0.9}, 0, 0, 0);
  const auto ks = index_set({0.0, 1.0}, 3).shifts();
  REQUIRE(ks.size() == 8);
  CHECK(ks.front() == 0);
  CHECK(ks.back() == 7);
}

TEST_CASE("global intervals") {
  const auto seq = build_global_intervals({0.0, 1.0});
  CHECK(seq.at(2) == Interval{0.0, 1.0});
  CHECK(seq.at(30) == Interval{0.0, 1.0});
  CHECK_FALSE(seq.usable(1));
  CHECK(seq.first_usable() == 2);
  for (int j = 0; j < seq.size(); ++j) {
    CHECK(seq.at(j).length() >= std::pow(2.0, 1.0 - j / 2.0) - 1e-12);
    if (j > 0) CHECK(seq.at(j - 1).contains(seq.at(j)));
  }
  const auto narrow = build_global_intervals({0.25, 0.5});
  CHECK(narrow.first_usable() == 6);
  CHECK(narrow.at(5).contains(Interval{0.25, 0.5}));
  CHECK(narrow.at(6) == Interval{0.25, 0.5});
  CHECK_THROWS_AS(build_global_intervals({0.5, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(build_global_intervals({0.5, 1.5}), std::invalid_argument);
}

TEST_CASE("local intervals") {
  const auto seq = build_local_intervals(0.5);
  for (int j = 2; j < seq.size(); ++j) {
    CHECK(seq.at(j).length() == doctest::Approx(std::pow(2.0, 1.0 - j / 2.0)).epsilon(1e-14));
    CHECK(seq.at(j).contains(0.5));
    CHECK(seq.at(j - 1).contains(seq.at(j)));
  }
  CHECK(seq.at(40).length() < 1e-5);
  const auto edge = build_local_intervals(0.02);
  for (int j = 0; j < edge.size(); ++j) {
    if (j > 0) CHECK(edge.at(j - 1).contains(edge.at(j)));
    CHECK(edge.at(j).contains(0.02));
  }
  CHECK(edge.at(10).lo == 0.0);
}

TEST_CASE("pyramids") {
  const WaveletSpec w = default_wavelet();
  const auto seq = build_global_intervals({0.0, 1.0});
  SUBCASE("zero path") {
    const auto p = sampled(1.0 / 2048, [](double) { return 0.0; });
    const auto pyr = build_pyramid(p, w, 2, 7, seq);
    CHECK(pyr.levels.size() == 6);
    for (const auto& [j, row] : pyr.levels) {
      CHECK(static_cast<long>(row.size()) == index_set(seq.at(j), j).count);
      for (const auto& [k, d] : row) CHECK(d == 0.0);
      CHECK(max_coeff(pyr, j, {0.0, 1.0}) == 0.0);
    }
  }
  SUBCASE("key sets and maxima") {
    const auto p = sampled(1.0 / 2048, [](double t) { return std::sin(40.0 * t * t); });
    const auto pyr = build_pyramid(p, w, 1, 6, seq);
    CHECK(pyr.levels.size() == 6);
    CHECK(pyr.levels.count(1) == 1);
    CHECK(static_cast<long>(pyr.level(1).size()) == index_set(seq.at(1), 1).count);
    for (int j = 2; j <= 6; ++j) {
      const auto ks = index_set(seq.at(j), j).shifts();
      REQUIRE(pyr.level(j).size() == ks.size());
      double m = 0.0;
      for (long k : ks) m = std::max(m, std::abs(pyr.level(j).at(k)));
      CHECK(max_coeff(pyr, j, {0.0, 1.0}) == m);
    }
    CHECK(max_coeff(pyr, 4, {0.5, 0.5625}) == std::abs(pyr.level(4).at(8)));
    CHECK_THROWS_AS(max_coeff(pyr, 4, {0.5, 0.55}), std::invalid_argument);
    CHECK_THROWS_AS(max_coeff(pyr, 9, {0.0, 1.0}), std::out_of_range);
  }
  SUBCASE("CSV round trip") {
    const auto p = sampled(1.0 / 1024, [](double t) { return std::exp(t) * std::cos(17.0 * t); });
    auto pyr = build_pyramid(p, w, 2, 6, seq);
    pyr.seed = 123456789012345ULL;
    std::stringstream ss;
    pyr.write_csv(ss);
    const auto back = CoeffPyramid::read_csv(ss);
    CHECK(back == pyr);
    CHECK(to_string(back.source) == std::string("path_quadrature"));
    CHECK(coeff_source_from_string("frozen_path") == CoeffSource::frozen_path);
    CHECK_THROWS_AS(coeff_source_from_string("guess"), std::invalid_argument);
  }
  SUBCASE("malformed CSV is rejected") {
    std::stringstream ss("j,k,value,source\n2,0,abc,path_quadrature\n");
    CHECK_THROWS_AS(CoeffPyramid::read_csv(ss), std::invalid_argument);
  }
}

TEST_CASE("csv number formatting") {
  for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0}) {
    CHECK(csv::parse_double(csv::num(x)) == x);
  }
  CHECK(csv::num(0.5) == "0.5");
  CHECK_THROWS_AS(csv::parse_double("1.5x"), std::invalid_argument);
  CHECK(csv::split("a,,b").size() == 3);
}
