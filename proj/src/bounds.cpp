#include "lmsm/bounds.hpp"

#include <algorithm>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>

#include "json.hpp"
#include "lmsm/direct.hpp"
#include "lmsm/parallel.hpp"
#include "lmsm/quadrature.hpp"
#include "lmsm/rng.hpp"
#include "lmsm/stable.hpp"

namespace lmsm {

namespace {

using boost::math::quadrature::gauss_kronrod;

constexpr double kQuadTol = 1e-10;

// \int_a^\infty f(u) du
template <class F>
double right_tail(F f, double a) {
  static boost::math::quadrature::exp_sinh<double> integrator;
  auto g = [&](double w) { return f(a + w); };
  return integrator.integrate(g, 0.0, std::numeric_limits<double>::infinity(), kQuadTol);
}

// \int_{-\infty}^a f(u) du
template <class F>
double left_tail(F f, double a) {
  return right_tail([&](double w) { return f(-w); }, -a);
}

template <class F>
double finite_piece(F f, double a, double b) {
  if (!(b > a)) return 0.0;
  return gauss_kronrod<double, 31>::integrate(f, a, b, 15, kQuadTol);
}

nlohmann::json report_json(const BoundReport& r) {
  auto num = [](double x) -> nlohmann::json {
    if (std::isfinite(x)) return x;
    return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
  };
  nlohmann::json metrics = nlohmann::json::object();
  for (const auto& [k, v] : r.metrics) metrics[k] = num(v);
  return {{"name", r.name},
          {"grid", r.grid},
          {"witnessed_constant", num(r.witnessed_constant)},
          {"bound_exponent", num(r.bound_exponent)},
          {"pass", r.pass},
          {"tolerance", num(r.tolerance)},
          {"metrics", metrics},
          {"note", r.note}};
}

// \int |Phi(u-k, vk)|^pk |Phi(u-l, vl)|^pl du; the integrand vanishes for
// u >= min(k,l) + 1 and both factors are in their far field left of min - 1.
double overlap_integral(const PhiKernel& phi, double vk, double vl, long k, long l, double pk,
                        double pl) {
  const double dk = static_cast<double>(k), dl = static_cast<double>(l);
  auto f = [&](double u) {
    const double a = phi(u - dk, vk);
    if (a == 0.0) return 0.0;
    const double b = phi(u - dl, vl);
    return std::pow(std::abs(a), pk) * std::pow(std::abs(b), pl);
  };
  const double m = std::min(dk, dl);
  std::set<double> cuts{m - 1.0, m + 1.0};
  for (double c : {dk - 1.0, dk, dk + 1.0, dl - 1.0, dl, dl + 1.0}) {
    if (c > m - 1.0 && c < m + 1.0) cuts.insert(c);
  }
  double acc = left_tail(f, m - 1.0);
  for (auto it = cuts.begin(); std::next(it) != cuts.end(); ++it) {
    acc += finite_piece(f, *it, *std::next(it));
  }
  return acc;
}

void check_cell(int j, long k) {
  if (j < 0 || k < 0 || static_cast<double>(k + 1) > std::ldexp(1.0, j)) {
    throw std::invalid_argument("shift k=" + std::to_string(k) + " is not a cell of [0,1] at j=" +
                                std::to_string(j));
  }
}

double hurst_at(const HurstFunction& H, int j, long k) {
  return H(std::ldexp(static_cast<double>(k), -j));
}

std::string join_lags(const std::vector<long>& lags) {
  std::string s;
  for (std::size_t i = 0; i < lags.size(); ++i) s += (i ? "," : "") + std::to_string(lags[i]);
  return s;
}

}  // namespace

std::string BoundReport::to_json() const { return report_json(*this).dump(2); }

std::string reports_to_json(const std::vector<BoundReport>& reports) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : reports) arr.push_back(report_json(r));
  return arr.dump(2);
}

double rq_integral(double delta, double gamma, double q) {
  if (!(std::max(delta, gamma) > 1.0) || !(std::min(delta, gamma) >= 0.0)) {
    throw std::invalid_argument("rq_integral: need max(delta,gamma) > 1 and min >= 0");
  }
  auto f = [&](double u) {
    return std::pow(1.0 + std::abs(u - q), -delta) * std::pow(1.0 + std::abs(u), -gamma);
  };
  const double a = std::min(0.0, q), b = std::max(0.0, q);
  return left_tail(f, a) + finite_piece(f, a, b) + right_tail(f, b);
}

BoundReport rq_sweep(double delta, double gamma, int q_max) {
  if (q_max < 2) throw std::invalid_argument("rq_sweep: q_max must be >= 2");
  const double e = std::min(delta, gamma);
  double sup_half = 0.0, sup_full = 0.0, last = 0.0;
  for (int q = 1; q <= q_max; ++q) {
    last = std::pow(1.0 + q, e) * rq_integral(delta, gamma, q);
    if (q <= q_max / 2) sup_half = std::max(sup_half, last);
    sup_full = std::max(sup_full, last);
  }
  BoundReport r;
  r.name = "rq_bounded";
  r.grid = "q=1.." + std::to_string(q_max);
  r.witnessed_constant = sup_full;
  r.bound_exponent = e;
  r.tolerance = 0.05;
  r.metrics = {{"delta", delta},
               {"gamma", gamma},
               {"sup_half_sweep", sup_half},
               {"sup_full_sweep", sup_full},
               {"growth_on_doubling", sup_full / sup_half},
               {"last_over_running_max", last / sup_full}};
  r.pass = std::isfinite(sup_full) && sup_full / sup_half < 1.0 + r.tolerance;
  return r;
}

double phi1_integral(const PhiKernel& phi, const HurstFunction& H, int j, long k, long l) {
  check_cell(j, k);
  check_cell(j, l);
  const double p = phi.alpha() / 2.0;
  return overlap_integral(phi, hurst_at(H, j, k), hurst_at(H, j, l), k, l, p, p);
}

double phi2_integral(const PhiKernel& phi, const HurstFunction& H, int j, long k, long l) {
  check_cell(j, k);
  check_cell(j, l);
  return overlap_integral(phi, hurst_at(H, j, k), hurst_at(H, j, l), k, l, phi.alpha() - 1.0, 1.0);
}

double lambda_exponent(double alpha, double h_high) {
  if (!(alpha > 1.0 && alpha < 2.0)) throw std::invalid_argument("lambda_exponent: alpha in (1,2)");
  if (!(h_high > 1.0 / alpha && h_high < 1.0)) {
    throw std::invalid_argument("lambda_exponent: h_high in (1/alpha, 1)");
  }
  return std::min(alpha / 2.0, alpha - 1.0) * (2.0 + 1.0 / alpha - h_high);
}

double loglog_slope(const std::vector<double>& lags, const std::vector<double>& values) {
  if (lags.size() != values.size() || lags.size() < 2) {
    throw std::invalid_argument("loglog_slope: need at least two points");
  }
  const std::size_t n = lags.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = std::log(1.0 + lags[i]);
    const double y = std::log(values[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double dn = static_cast<double>(n);
  return (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
}

BoundReport phi_decay_check(const PhiKernel& phi, const HurstFunction& H, int which, int j,
                            const std::vector<long>& lags, bool reversed, double slack) {
  if (which != 1 && which != 2) throw std::invalid_argument("phi_decay_check: which is 1 or 2");
  if (lags.size() < 2) throw std::invalid_argument("phi_decay_check: need two lags or more");
  const double alpha = phi.alpha();
  const double base = 2.0 + 1.0 / alpha - H.h_high();
  const double exponent = (which == 1 ? alpha / 2.0 : alpha - 1.0) * base;

  std::vector<double> x, y;
  double witnessed = 0.0;
  for (long lag : lags) {
    const long k = reversed ? lag : 0;
    const long l = reversed ? 0 : lag;
    const double val = which == 1 ? phi1_integral(phi, H, j, k, l) : phi2_integral(phi, H, j, k, l);
    x.push_back(static_cast<double>(lag));
    y.push_back(val);
    witnessed = std::max(witnessed, val * std::pow(1.0 + lag, exponent));
  }
  BoundReport r;
  r.name = std::string(which == 1 ? "phi1" : "phi2") + "_decay" + (reversed ? "_reversed" : "");
  r.grid = "j=" + std::to_string(j) + " lags=" + join_lags(lags);
  r.witnessed_constant = witnessed;
  r.bound_exponent = exponent;
  r.tolerance = slack;
  const double slope = loglog_slope(x, y);
  r.metrics = {{"slope", slope},
               {"required_slope", -exponent + slack},
               {"first_value", y.front()},
               {"last_value", y.back()}};
  r.pass = std::isfinite(slope) && slope <= -exponent + slack;
  return r;
}

BoundReport decay_constant_check(const PhiKernel& phi, double v, double h_high, int points) {
  const double exponent = 2.0 + 1.0 / phi.alpha() - h_high;
  const DecayWitness coarse = decay_witness(phi, v, exponent, points);
  const DecayWitness fine = decay_witness(phi, v, exponent, 2 * points);
  BoundReport r;
  r.name = "phi_decay_constant";
  r.grid = "s in [-1000,1], " + std::to_string(coarse.grid_points) + " and " +
           std::to_string(fine.grid_points) + " nodes";
  r.witnessed_constant = fine.constant;
  r.bound_exponent = exponent;
  r.tolerance = 0.01;
  const double drift = std::abs(fine.constant - coarse.constant) / coarse.constant;
  r.metrics = {{"alpha", phi.alpha()},
               {"v", v},
               {"coarse_constant", coarse.constant},
               {"argmax", fine.argmax},
               {"drift", drift},
               {"phi_at_1", phi(1.0, v)},
               {"phi_at_1.5", phi(1.5, v)}};
  r.pass = std::isfinite(fine.constant) && fine.constant > 0.0 && drift < r.tolerance &&
           phi(1.0, v) == 0.0 && phi(1.5, v) == 0.0;
  return r;
}

CovarianceEstimate sample_covariance(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw std::invalid_argument("sample_covariance: need two equally long samples");
  }
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double s = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double t = (a[i] - ma) * (b[i] - mb);
    s += t;
    s2 += t * t;
  }
  const double mean_t = s / n;
  const double var_t = std::max(0.0, (s2 / n - mean_t * mean_t)) * n / (n - 1.0);
  return {s / (n - 1.0), std::sqrt(var_t / n)};
}

BoundReport covariance_mc_check(const PhiKernel& phi, const HurstFunction& H, int j,
                                const std::vector<long>& lags, const McSetup& mc,
                                long large_lag) {
  if (mc.replicates < 10000) {
    throw std::invalid_argument("covariance_mc_check: needs at least 10^4 replicates");
  }
  if (lags.empty()) throw std::invalid_argument("covariance_mc_check: no lags");
  const long cells = 1L << j;
  for (long lag : lags) {
    if (lag < 1 || lag >= cells) throw std::invalid_argument("covariance_mc_check: bad lag");
  }
  if (large_lag <= 0) large_lag = std::max(1L, cells / 16);

  // One kernel per cell; the mass of Phi is shared by equal Hurst values.
  std::map<double, double> mass;
  std::vector<DirectCoeffKernel> kernels;
  kernels.reserve(static_cast<std::size_t>(cells));
  for (long k = 0; k < cells; ++k) {
    const double v = hurst_at(H, j, k);
    if (!mass.count(v)) mass[v] = phi_lalpha_norm(phi, v, 1e-6).truncated_mass;
    kernels.emplace_back(phi, mc.geometry, j, k, v, 1e-4, mass[v]);
  }

  const auto R = static_cast<std::size_t>(mc.replicates);
  const auto C = static_cast<std::size_t>(cells);
  std::vector<double> a(R * C);
  const StableLaw law = StableLaw::unit(phi.alpha());
  parallel_for(R, mc.workers, [&](std::size_t r) {
    const NoiseGrid grid = make_noise_grid(law, mc.geometry, stream_seed(mc.seed, r));
    for (std::size_t k = 0; k < C; ++k) {
      a[r * C + k] = std::pow(std::abs(kernels[k].apply(grid)), mc.beta);
    }
  });

  std::vector<double> mean(C, 0.0);
  for (std::size_t r = 0; r < R; ++r) {
    for (std::size_t k = 0; k < C; ++k) mean[k] += a[r * C + k];
  }
  for (auto& m : mean) m /= static_cast<double>(R);

  // Per replicate, the centred products averaged over all pairs at a lag;
  // their replicate mean estimates the lag covariance.
  auto lag_cov = [&](long lag) {
    const auto L = static_cast<std::size_t>(lag);
    std::vector<double> t(R, 0.0);
    for (std::size_t r = 0; r < R; ++r) {
      double acc = 0.0;
      for (std::size_t k = 0; k + L < C; ++k) {
        acc += (a[r * C + k] - mean[k]) * (a[r * C + k + L] - mean[k + L]);
      }
      t[r] = acc / static_cast<double>(C - L);
    }
    const double n = static_cast<double>(R);
    const double m = std::accumulate(t.begin(), t.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : t) ss += (x - m) * (x - m);
    return CovarianceEstimate{m * n / (n - 1.0), std::sqrt(ss / (n - 1.0) / n)};
  };

  const double lambda = lambda_exponent(phi.alpha(), H.h_high());
  BoundReport r;
  r.name = "covariance_decay";
  r.grid = "j=" + std::to_string(j) + " lags=" + join_lags(lags) + " replicates=" +
           std::to_string(mc.replicates);
  r.bound_exponent = lambda;
  r.tolerance = 0.3;

  const CovarianceEstimate var = lag_cov(0);
  r.metrics["variance"] = var.value;
  std::vector<double> sig_lags, sig_cov;
  bool large_quiet = true;
  int large_count = 0;
  double witnessed = 0.0;
  const double h_scale = std::pow(2.0, -j * mc.beta * 2.0 * H.h_high());
  for (long lag : lags) {
    const CovarianceEstimate c = lag_cov(lag);
    r.metrics["cov_lag_" + std::to_string(lag)] = c.value;
    r.metrics["se_lag_" + std::to_string(lag)] = c.std_error;
    const bool significant = c.value > 3.0 * c.std_error;
    if (significant) {
      sig_lags.push_back(static_cast<double>(lag));
      sig_cov.push_back(c.value);
    }
    if (lag >= large_lag) {
      ++large_count;
      if (std::abs(c.value) > 3.0 * c.std_error) large_quiet = false;
    }
    witnessed = std::max(witnessed, std::abs(c.value) / h_scale * std::pow(1.0 + lag, lambda));
  }
  r.witnessed_constant = witnessed;
  double slope = std::numeric_limits<double>::quiet_NaN();
  if (sig_lags.size() >= 2) slope = loglog_slope(sig_lags, sig_cov);
  const bool slope_ok = sig_lags.size() >= 2 && slope <= -lambda + r.tolerance;
  const bool quiet_ok = large_count > 0 && large_quiet;
  r.metrics["slope"] = slope;
  r.metrics["required_slope"] = -lambda + r.tolerance;
  r.metrics["significant_lags"] = static_cast<double>(sig_lags.size());
  r.metrics["large_lag"] = static_cast<double>(large_lag);
  r.metrics["large_lags_quiet"] = quiet_ok ? 1.0 : 0.0;
  r.pass = var.value > 0.0 && (slope_ok || quiet_ok);
  r.note = slope_ok ? "slope criterion" : (quiet_ok ? "large-lag covariances vanish" : "failed");
  return r;
}

std::vector<BoundReport> scale_param_check(const PhiKernel& phi, const HurstFunction& H, int j,
                                           const std::vector<long>& shifts, const McSetup& mc,
                                           double rel_tol) {
  if (mc.replicates < 10000) {
    throw std::invalid_argument("scale_param_check: needs at least 10^4 replicates");
  }
  const double alpha = phi.alpha();
  std::vector<DirectCoeffKernel> kernels;
  std::vector<double> norms;
  for (long k : shifts) {
    const double v = hurst_at(H, j, k);
    const LalphaNorm n = phi_lalpha_norm(phi, v, 1e-6);
    norms.push_back(n.value);
    kernels.emplace_back(phi, mc.geometry, j, k, v, 1e-4, n.truncated_mass);
  }
  const auto R = static_cast<std::size_t>(mc.replicates);
  const std::size_t S = shifts.size();
  std::vector<double> m(R * S);
  const StableLaw law = StableLaw::unit(alpha);
  parallel_for(R, mc.workers, [&](std::size_t r) {
    const NoiseGrid grid = make_noise_grid(law, mc.geometry, stream_seed(mc.seed, r));
    for (std::size_t s = 0; s < S; ++s) {
      m[r * S + s] = std::pow(std::abs(kernels[s].apply(grid)), mc.beta);
    }
  });

  const double c_beta = moment_constant(mc.beta, alpha);
  std::vector<BoundReport> out;
  for (std::size_t s = 0; s < S; ++s) {
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t r = 0; r < R; ++r) {
      sum += m[r * S + s];
      sum2 += m[r * S + s] * m[r * S + s];
    }
    const double n = static_cast<double>(R);
    const double mean = sum / n;
    const double se = std::sqrt(std::max(0.0, sum2 / n - mean * mean) / (n - 1.0));
    const double v = kernels[s].v();
    const double estimate = std::pow(mean / c_beta, 1.0 / mc.beta);
    const double target = std::pow(2.0, -j * v) * norms[s];
    const double discrete = std::pow(kernels[s].discrete_scale_alpha(alpha), 1.0 / alpha);

    BoundReport r;
    r.name = "scale_identity_k" + std::to_string(shifts[s]);
    r.grid = "j=" + std::to_string(j) + " k=" + std::to_string(shifts[s]) +
             " replicates=" + std::to_string(mc.replicates);
    r.witnessed_constant = estimate / std::pow(2.0, -j * v);
    r.bound_exponent = v;
    r.tolerance = rel_tol;
    r.metrics = {{"estimate", estimate},
                 {"target", target},
                 {"discrete_target", discrete},
                 {"ratio", estimate / target},
                 {"mc_rel_se_scale", se / mean / mc.beta},
                 {"hurst", v},
                 {"phi_norm", norms[s]},
                 {"kernel_tail_ratio", kernels[s].tail_ratio()}};
    r.pass = std::abs(estimate / target - 1.0) < rel_tol;
    out.push_back(r);
  }
  return out;
}

BoundReport approx_error_check(const std::vector<ApproxErrorSeries>& series, double rho_h,
                               double slack, double quorum) {
  if (series.empty()) throw std::invalid_argument("approx_error_check: no replicates");
  int good = 0, shrink = 0, shrink_total = 0;
  std::vector<double> slopes;
  for (const auto& s : series) {
    if (s.levels.size() < 4 || s.levels.size() != s.max_error.size()) {
      throw std::invalid_argument("approx_error_check: need at least four levels per replicate");
    }
    const std::size_t n = s.levels.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = s.levels[i];
      const double y = std::log2(s.max_error[i]);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const double dn = static_cast<double>(n);
    const double slope = (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
    slopes.push_back(slope);
    if (slope <= -rho_h + slack) ++good;
    for (std::size_t i = 0; i + 2 < n; ++i) {
      if (s.levels[i + 2] != s.levels[i] + 2) continue;
      ++shrink_total;
      if (s.max_error[i + 2] < s.max_error[i]) ++shrink;
    }
  }
  std::vector<double> sorted = slopes;
  std::sort(sorted.begin(), sorted.end());
  const double frac = static_cast<double>(good) / static_cast<double>(series.size());

  BoundReport r;
  r.name = "approximation_error";
  r.grid = "j=" + std::to_string(series.front().levels.front()) + ".." +
           std::to_string(series.front().levels.back()) +
           " replicates=" + std::to_string(series.size());
  r.witnessed_constant = sorted[sorted.size() / 2];
  r.bound_exponent = rho_h;
  r.tolerance = slack;
  r.metrics = {{"fraction_passing", frac},
               {"required_fraction", quorum},
               {"median_slope", sorted[sorted.size() / 2]},
               {"max_slope", sorted.back()},
               {"required_slope", -rho_h + slack},
               {"fraction_shrinking_two_levels",
                shrink_total ? static_cast<double>(shrink) / shrink_total : 0.0}};
  r.pass = frac >= quorum;
  return r;
}

}  // namespace lmsm
