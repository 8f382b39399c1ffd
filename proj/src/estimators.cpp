#include "lmsm/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "lmsm/csv.hpp"

namespace lmsm {

const char* to_string(IntervalMode m) { return m == IntervalMode::global ? "global" : "local"; }

IntervalMode interval_mode_from_string(const std::string& s) {
  if (s == "global") return IntervalMode::global;
  if (s == "local") return IntervalMode::local;
  throw std::invalid_argument("unknown interval mode '" + s + "'");
}

void EstimatorConfig::validate() const {
  const double cap = alpha_known ? *alpha_known / 4.0 : 0.25;
  const bool ok = alpha_known ? (beta > 0.0 && beta < cap) : (beta > 0.0 && beta <= cap);
  if (!ok) {
    throw std::invalid_argument("estimator: beta=" + std::to_string(beta) +
                                (alpha_known ? " must lie in (0, alpha/4)" : " must lie in (0, 1/4]"));
  }
  if (j_min < 1 || j_max < j_min) throw std::invalid_argument("estimator: need 1 <= j_min <= j_max");
  if (mode == IntervalMode::global) {
    if (!(interval.lo >= 0.0 && interval.hi <= 1.0 && interval.lo < interval.hi)) {
      throw std::invalid_argument("estimator: interval must be a non-degenerate part of [0,1]");
    }
  } else if (!(t0 > 0.0 && t0 < 1.0)) {
    throw std::invalid_argument("estimator: t0 must lie in (0,1)");
  }
}

IntervalSequence EstimatorConfig::intervals() const {
  const int top = std::max(j_max, 40);
  return mode == IntervalMode::global ? build_global_intervals(interval, top)
                                      : build_local_intervals(t0, top);
}

std::string flags_to_string(unsigned flags) {
  if (flags == kFlagNone) return "ok";
  std::string out;
  auto add = [&](unsigned bit, const char* name) {
    if (flags & bit) out += (out.empty() ? "" : "|") + std::string(name);
  };
  add(kFlagZeroV, "zero_v");
  add(kFlagZeroD, "zero_d");
  add(kFlagAlphaDenominator, "alpha_denominator");
  add(kFlagEmptyIndex, "empty_index");
  return out;
}

double empirical_mean(const CoeffPyramid& pyramid, int j, const IndexSet& nu, double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("empirical_mean: beta must be > 0");
  if (nu.count == 0) throw std::invalid_argument("empirical_mean: empty index set");
  const auto& row = pyramid.level(j);
  double acc = 0.0;
  for (long k : nu.shifts()) {
    auto it = row.find(k);
    if (it == row.end()) throw std::out_of_range("empirical_mean: coefficient missing");
    acc += std::pow(std::abs(it->second), beta);
  }
  return acc / static_cast<double>(nu.count);
}

double estimate_hmin(double V_j, int j, double beta) {
  if (j < 1) throw std::invalid_argument("estimate_hmin: j must be >= 1");
  if (!(beta > 0.0)) throw std::invalid_argument("estimate_hmin: beta must be > 0");
  if (!(V_j > 0.0)) throw std::domain_error("estimate_hmin: V_j must be > 0");
  return std::log2(V_j) / (-static_cast<double>(j) * beta);
}

double estimate_alpha(double h_hat, double D_j, int j) {
  if (j < 1) throw std::invalid_argument("estimate_alpha: j must be >= 1");
  if (!(D_j > 0.0)) throw std::domain_error("estimate_alpha: D_j must be > 0");
  const double denom = h_hat + std::log2(D_j) / static_cast<double>(j);
  if (!(denom > 0.0)) throw std::domain_error("estimate_alpha: non-positive denominator");
  return 1.0 / denom;
}

std::vector<EstimateRecord> estimate_records(const CoeffPyramid& pyramid,
                                             const EstimatorConfig& config) {
  config.validate();
  const IntervalSequence seq = config.intervals();
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<EstimateRecord> out;
  for (int j = config.j_min; j <= config.j_max; ++j) {
    if (!seq.usable(j)) continue;
    EstimateRecord r;
    r.j = j;
    r.interval = seq.at(j);
    const IndexSet nu = index_set(r.interval, j);
    r.n_j = nu.count;
    if (nu.count == 0) {
      r.flags |= kFlagEmptyIndex;
      r.h_hat = nan;
      out.push_back(r);
      continue;
    }
    r.V_j = empirical_mean(pyramid, j, nu, config.beta);
    r.D_j = max_coeff(pyramid, j, r.interval);
    if (r.V_j > 0.0) {
      r.h_hat = estimate_hmin(r.V_j, j, config.beta);
    } else {
      r.flags |= kFlagZeroV;
      r.h_hat = nan;
    }
    if (r.D_j <= 0.0) r.flags |= kFlagZeroD;
    if (config.mode == IntervalMode::global && r.h_valid() && r.D_j > 0.0) {
      const double denom = r.h_hat + std::log2(r.D_j) / j;
      if (denom > 0.0) {
        r.alpha_hat = 1.0 / denom;
      } else {
        r.flags |= kFlagAlphaDenominator;
      }
    }
    out.push_back(r);
  }
  return out;
}

void write_records_header(std::ostream& out, bool with_replicate) {
  if (with_replicate) out << "replicate,";
  out << "j,V_j,h_hat,D_j,alpha_hat,n_j,flags\n";
}

void write_record(std::ostream& out, const EstimateRecord& r, std::optional<long> replicate) {
  if (replicate) out << *replicate << ",";
  out << r.j << "," << csv::num(r.V_j) << "," << csv::num(r.h_hat) << "," << csv::num(r.D_j) << ","
      << (r.alpha_hat ? csv::num(*r.alpha_hat) : "") << "," << r.n_j << ","
      << flags_to_string(r.flags) << "\n";
}

Summary summarize(std::vector<double> values) {
  Summary s;
  s.count = static_cast<long>(values.size());
  if (values.empty()) {
    s.mean = s.median = s.q1 = s.q3 = s.iqr = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  std::sort(values.begin(), values.end());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  auto quantile = [&](double p) {
    const double pos = p * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
  };
  s.median = quantile(0.5);
  s.q1 = quantile(0.25);
  s.q3 = quantile(0.75);
  s.iqr = s.q3 - s.q1;
  return s;
}

}  // namespace lmsm
