#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lmsm/coefficients.hpp"

namespace lmsm {

enum class IntervalMode { global, local };

const char* to_string(IntervalMode m);
IntervalMode interval_mode_from_string(const std::string& s);

struct EstimatorConfig {
  double beta = 0.25;
  IntervalMode mode = IntervalMode::global;
  Interval interval{0.0, 1.0};  ///< target interval of the global mode
  double t0 = 0.5;              ///< centre of the local mode
  int j_min = 1;
  int j_max = 10;
  std::optional<double> alpha_known;  ///< tightens the admissible beta range

  /// beta in (0, alpha/4) with alpha known, (0, 1/4] otherwise; sane j range.
  void validate() const;
  IntervalSequence intervals() const;
};

enum EstimateFlag : unsigned {
  kFlagNone = 0,
  kFlagZeroV = 1u << 0,
  kFlagZeroD = 1u << 1,
  kFlagAlphaDenominator = 1u << 2,  ///< h_hat + log2(D_j)/j <= 0
  kFlagEmptyIndex = 1u << 3,
};

/// "zero_v|zero_d" style rendering; "ok" when no flag is set.
std::string flags_to_string(unsigned flags);

struct EstimateRecord {
  int j = 0;
  double V_j = 0.0;
  double h_hat = 0.0;  ///< NaN when flagged kFlagZeroV or kFlagEmptyIndex
  double D_j = 0.0;
  std::optional<double> alpha_hat;
  long n_j = 0;
  Interval interval;
  unsigned flags = kFlagNone;

  bool h_valid() const { return (flags & (kFlagZeroV | kFlagEmptyIndex)) == 0; }
};

/// V_j = n_j^{-1} sum_{k in nu} |d_{j,k}|^beta.
double empirical_mean(const CoeffPyramid& pyramid, int j, const IndexSet& nu, double beta);

/// log2(V_j) / (-j beta).
double estimate_hmin(double V_j, int j, double beta);

/// 1 / (h_hat + log2(D_j) / j).
double estimate_alpha(double h_hat, double D_j, int j);

/// One record per level j of the configured range whose interval lies in [0,1].
/// alpha_hat is filled in the global mode only, when D_j > 0 and the
/// denominator is positive.
std::vector<EstimateRecord> estimate_records(const CoeffPyramid& pyramid,
                                             const EstimatorConfig& config);

/// CSV header "j,V_j,h_hat,D_j,alpha_hat,n_j,flags" (with a leading
/// "replicate" column when `with_replicate`); absent alpha_hat is empty.
void write_records_header(std::ostream& out, bool with_replicate);
void write_record(std::ostream& out, const EstimateRecord& r, std::optional<long> replicate);

struct Summary {
  long count = 0;
  double mean = 0.0;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double iqr = 0.0;
};

/// Mean, median and interquartile range (linear interpolation between order
/// statistics). An empty sample gives count 0 and NaN statistics.
Summary summarize(std::vector<double> values);

}  // namespace lmsm
