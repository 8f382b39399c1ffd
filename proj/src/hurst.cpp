#include "lmsm/hurst.hpp"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <cstdlib>
#include <cstdio>
#include <numbers>
#include <stdexcept>

#include "lmsm/rng.hpp"

namespace lmsm {

HurstFunction::HurstFunction(std::string id, std::vector<double> params,
                             std::function<double(double)> f, double h_low, double h_high,
                             double holder_exponent, double holder_constant)
    : id_(std::move(id)),
      params_(std::move(params)),
      f_(std::move(f)),
      h_low_(h_low),
      h_high_(h_high),
      rho_(holder_exponent),
      holder_c_(holder_constant) {
  if (!f_) throw std::invalid_argument("HurstFunction: missing evaluator");
  if (!(h_low <= h_high)) throw std::invalid_argument("HurstFunction: h_low > h_high");
  if (!(holder_exponent > 0.0 && holder_exponent <= 1.0)) {
    throw std::invalid_argument("HurstFunction: Hoelder exponent must lie in (0, 1]");
  }
  if (!(holder_constant >= 0.0)) {
    throw std::invalid_argument("HurstFunction: Hoelder constant must be >= 0");
  }
}

HurstFunction HurstFunction::constant(double h) {
  return HurstFunction("constant", {h}, [h](double) { return h; }, h, h, 1.0, 0.0);
}

HurstFunction HurstFunction::linear(double a, double b) {
  const double lo = std::min(a, a + b);
  const double hi = std::max(a, a + b);
  return HurstFunction("linear", {a, b}, [a, b](double t) { return a + b * t; }, lo, hi, 1.0,
                       std::abs(b));
}

HurstFunction HurstFunction::sine(double base, double amp) {
  const double two_pi = 2.0 * std::numbers::pi;
  return HurstFunction(
      "sine", {base, amp}, [=](double t) { return base + amp * std::sin(two_pi * t); },
      base - std::abs(amp), base + std::abs(amp), 1.0, two_pi * std::abs(amp));
}

HurstFunction HurstFunction::from_id(const std::string& id, const std::vector<double>& p) {
  auto need = [&](std::size_t n) {
    if (p.size() != n) {
      throw std::invalid_argument("HurstFunction '" + id + "' expects " + std::to_string(n) +
                                  " parameters");
    }
  };
  if (id == "constant") {
    need(1);
    return constant(p[0]);
  }
  if (id == "linear") {
    need(2);
    return linear(p[0], p[1]);
  }
  if (id == "sine") {
    need(2);
    return sine(p[0], p[1]);
  }
  throw std::invalid_argument("unknown Hurst function id '" + id + "'");
}

double HurstFunction::min_on(const Interval& I) const {
  const double lo = std::max(I.lo, 0.0);
  const double hi = std::min(I.hi, 1.0);
  if (!(lo <= hi)) throw std::invalid_argument("HurstFunction::min_on: empty interval");
  if (is_constant()) return h_low_;

  constexpr int n = 1 << 14;
  const double h = (hi - lo) / n;
  int best = 0;
  double best_val = f_(lo);
  for (int i = 1; i <= n; ++i) {
    const double val = f_(i == n ? hi : lo + i * h);
    if (val < best_val) {
      best_val = val;
      best = i;
    }
  }
  if (best == 0 || best == n || h == 0.0) return best_val;
  const auto refined = boost::math::tools::brent_find_minima(
      f_, std::max(lo, lo + (best - 1) * h), std::min(hi, lo + (best + 1) * h), 52);
  return std::min(best_val, refined.second);
}

void HurstFunction::validate(double alpha) const {
  if (!(h_low_ > 1.0 / alpha && h_high_ < 1.0)) {
    throw std::invalid_argument("HurstFunction " + describe() + ": range [" +
                                std::to_string(h_low_) + ", " + std::to_string(h_high_) +
                                "] must lie inside (1/alpha, 1)");
  }
  constexpr int n = 2048;
  constexpr double slack = 1e-12;
  for (int i = 0; i <= n; ++i) {
    const double t = static_cast<double>(i) / n;
    const double v = f_(t);
    if (!(v >= h_low_ - slack && v <= h_high_ + slack)) {
      throw std::invalid_argument("HurstFunction " + describe() + ": H(" + std::to_string(t) +
                                  ") = " + std::to_string(v) + " outside the declared range");
    }
  }
  Rng rng(0x5eedULL);
  for (int i = 0; i < 512; ++i) {
    const double t1 = rng.uniform(0.0, 1.0);
    const double t2 = rng.uniform(0.0, 1.0);
    const double bound = holder_c_ * std::pow(std::abs(t1 - t2), rho_);
    if (std::abs(f_(t1) - f_(t2)) > bound * (1.0 + 1e-9) + slack) {
      throw std::invalid_argument("HurstFunction " + describe() + ": Hoelder bound violated");
    }
  }
}

std::string HurstFunction::describe() const {
  std::string out = id_ + "(";
  char buf[32];
  for (std::size_t i = 0; i < params_.size(); ++i) {
    // Shortest form that reads back to the same double.
    for (int digits = 15; digits <= 17; ++digits) {
      std::snprintf(buf, sizeof buf, "%.*g", digits, params_[i]);
      if (std::strtod(buf, nullptr) == params_[i]) break;
    }
    out += (i ? "," : "") + std::string(buf);
  }
  return out + ")";
}

}  // namespace lmsm
