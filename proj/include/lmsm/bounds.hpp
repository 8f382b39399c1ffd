#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lmsm/hurst.hpp"
#include "lmsm/noise.hpp"
#include "lmsm/wavelet.hpp"

namespace lmsm {

/// Outcome of one numerical bound check. `metrics` carries the numbers that
/// produced the verdict so that a report can be audited without rerunning it.
struct BoundReport {
  std::string name;
  std::string grid;
  double witnessed_constant = 0.0;
  double bound_exponent = 0.0;
  bool pass = false;
  double tolerance = 0.0;
  std::map<std::string, double> metrics;
  std::string note;

  std::string to_json() const;
};

/// Emits a JSON array of reports.
std::string reports_to_json(const std::vector<BoundReport>& reports);

/// r_q(delta, gamma) = \int (1+|u-q|)^{-delta} (1+|u|)^{-gamma} du.
/// Requires max(delta, gamma) > 1 and min(delta, gamma) >= 0.
double rq_integral(double delta, double gamma, double q);

/// Sweeps (1+q)^{min(delta,gamma)} r_q over q = 1..q_max. The supremum is
/// witnessed and accepted as bounded when extending the sweep from q_max/2
/// to q_max raises it by less than 5%.
BoundReport rq_sweep(double delta, double gamma, int q_max = 200);

/// phi_1(j,k,l) = \int |Phi(u-k, H(k 2^-j)) Phi(u-l, H(l 2^-j))|^{alpha/2} du.
double phi1_integral(const PhiKernel& phi, const HurstFunction& H, int j, long k, long l);

/// phi_2(j,k,l) = \int |Phi(u-k, H(k 2^-j))|^{alpha-1} |Phi(u-l, H(l 2^-j))| du.
double phi2_integral(const PhiKernel& phi, const HurstFunction& H, int j, long k, long l);

/// min{alpha/2, alpha-1} (2 + 1/alpha - h_high).
double lambda_exponent(double alpha, double h_high);

/// Least-squares slope of log(y) on log(1 + lag).
double loglog_slope(const std::vector<double>& lags, const std::vector<double>& values);

/// Decay sweep of phi_1 or phi_2 (`which` = 1 or 2) at shifts (k, k+lag) or,
/// with `reversed`, (k+lag, k). Passes when the fitted slope is at most
/// -exponent + slack, where exponent is the bound's decay exponent.
BoundReport phi_decay_check(const PhiKernel& phi, const HurstFunction& H, int which, int j,
                            const std::vector<long>& lags, bool reversed = false,
                            double slack = 0.2);

/// Grid supremum of (1+|s|)^{2+1/alpha-h_high} |Phi(s,v)| with `points` and
/// 2 `points` nodes; passes when the two agree within 1%.
BoundReport decay_constant_check(const PhiKernel& phi, double v, double h_high, int points);

/// Monte Carlo inputs shared by the replicate-based checks.
struct McSetup {
  GridGeometry geometry;
  double beta = 0.25;
  long replicates = 10000;
  std::uint64_t seed = 1;
  int workers = 1;
};

/// Empirical covariance of |d~_{j,k}|^beta and |d~_{j,l}|^beta, averaged over
/// all pairs of cells in [0,1] at each lag, with Monte Carlo standard errors.
/// Passes when the slope fitted over lags with covariance > 3 standard errors
/// is <= -lambda + 0.3, or when every lag >= large_lag is within 3 standard
/// errors of zero. Throws std::invalid_argument for fewer than 10^4 replicates.
BoundReport covariance_mc_check(const PhiKernel& phi, const HurstFunction& H, int j,
                                const std::vector<long>& lags, const McSetup& mc,
                                long large_lag = 0);

/// Covariance estimate for samples a, b (one value per replicate each)
/// together with its Monte Carlo standard error.
struct CovarianceEstimate {
  double value = 0.0;
  double std_error = 0.0;
};
CovarianceEstimate sample_covariance(const std::vector<double>& a, const std::vector<double>& b);

/// (mean |d~_{j,k}|^beta / c(beta))^{1/beta} against 2^{-jv} ||Phi(., v)||_alpha
/// with v = H(k 2^-j), one report per shift, all shifts sharing each noise
/// replicate. Passes within `rel_tol`.
std::vector<BoundReport> scale_param_check(const PhiKernel& phi, const HurstFunction& H, int j,
                                           const std::vector<long>& shifts, const McSetup& mc,
                                           double rel_tol = 0.05);

/// Per replicate: max_k |d_{j,k} - d~_{j,k}| for each level.
struct ApproxErrorSeries {
  std::vector<int> levels;
  std::vector<double> max_error;
};

/// Regresses log2(max error) on j per replicate; passes when at least 80% of
/// the slopes are <= -rho_H + 0.15.
BoundReport approx_error_check(const std::vector<ApproxErrorSeries>& series, double rho_h,
                               double slack = 0.15, double quorum = 0.8);

}  // namespace lmsm
