#pragma once

#include <functional>
#include <string>
#include <vector>

#include "lmsm/interval.hpp"

namespace lmsm {

/// Hurst function t -> H(t) on [0,1] with declared range and Hoelder data.
class HurstFunction {
 public:
  HurstFunction(std::string id, std::vector<double> params, std::function<double(double)> f,
                double h_low, double h_high, double holder_exponent, double holder_constant);

  /// H(t) = h.
  static HurstFunction constant(double h);
  /// H(t) = a + b t.
  static HurstFunction linear(double a, double b);
  /// H(t) = base + amp sin(2 pi t).
  static HurstFunction sine(double base, double amp);
  /// Rebuilds one of the named families above ("constant", "linear", "sine").
  static HurstFunction from_id(const std::string& id, const std::vector<double>& params);

  double operator()(double t) const { return f_(t); }

  const std::string& id() const { return id_; }
  const std::vector<double>& params() const { return params_; }
  double h_low() const { return h_low_; }
  double h_high() const { return h_high_; }
  double holder_exponent() const { return rho_; }
  double holder_constant() const { return holder_c_; }
  bool is_constant() const { return h_low_ == h_high_; }

  /// min of H over I intersected with [0,1]: dense grid followed by Brent refinement.
  double min_on(const Interval& I) const;

  /// Checks 1/alpha < h_low <= H <= h_high < 1 on a grid and the Hoelder
  /// bound on pseudo-random pairs. Throws std::invalid_argument on failure.
  void validate(double alpha) const;

  /// The estimators additionally need rho_H > h_high.
  bool smooth_enough() const { return rho_ > h_high_; }

  /// "id(p1,p2,...)" for provenance records.
  std::string describe() const;

 private:
  std::string id_;
  std::vector<double> params_;
  std::function<double(double)> f_;
  double h_low_;
  double h_high_;
  double rho_;
  double holder_c_;
};

}  // namespace lmsm
