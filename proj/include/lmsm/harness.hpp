#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lmsm/bounds.hpp"
#include "lmsm/coefficients.hpp"
#include "lmsm/estimators.hpp"
#include "lmsm/field.hpp"
#include "lmsm/stable.hpp"

namespace lmsm {

inline constexpr const char* kVersion = "1.0.0";

/// Knobs of the replicate-based bound checks run by `verify`.
struct VerifyConfig {
  long replicates = 10000;
  int cov_j = 8;
  int scale_j = 6;
  std::vector<long> scale_shifts{8, 32, 56};
  double mc_delta = 1.0 / 4096;
  double mc_t_min = -1.0;
  int approx_replicates = 20;
  int approx_j_min = 6;
  int approx_j_max = 11;
  double approx_delta = 1.0 / 32768;
  int rq_q_max = 200;
  int phi_j = 8;
  int decay_points = 2000;
};

/// Every knob of an experiment. Serialized form is JSON; loading re-validates
/// all component preconditions.
struct ExperimentConfig {
  double alpha = 1.5;
  double scale = 1.0;
  std::string hurst_id = "constant";
  std::vector<double> hurst_params{0.8};
  std::string wavelet_id = "quartic";
  int j_min = 1;
  int j_max = 10;
  double beta = 0.25;
  IntervalMode mode = IntervalMode::global;
  Interval interval{0.0, 1.0};
  double t0 = 0.5;
  std::optional<double> delta;   ///< unset: 2^-(j_max+4)
  std::optional<double> t_tail;  ///< unset: derived from tail_tolerance
  double tail_tolerance = 1e-4;
  double near_span = 2.0;
  double growth = 1.0 / 32;
  int v_nodes = 16;
  int t_nodes = 24;
  int min_samples = 16;
  int quad_points = 30;
  long replicates = 20;
  std::uint64_t seed = 1;
  std::string output = "out";
  VerifyConfig verify;

  HurstFunction hurst() const;
  WaveletSpec wavelet() const;
  StableLaw law() const { return StableLaw(alpha, scale); }
  EstimatorConfig estimator() const;

  double resolved_delta() const;
  double resolved_t_tail() const;
  GridGeometry geometry() const;

  /// Throws std::invalid_argument naming the first violated precondition.
  void validate() const;

  std::string to_json() const;
  static ExperimentConfig from_json(const std::string& text);
  static ExperimentConfig load(const std::string& path);

  /// FNV-1a 64 of the serialized form without the output path, as 16 hex digits.
  std::string hash() const;
};

struct ConvergenceRow {
  int j = 0;
  double target = 0.0;  ///< min of H over I_j ∩ [0,1]
  Summary h_hat;
  double mean_abs_error = 0.0;
  Summary alpha_hat;
  long flagged = 0;        ///< replicates with any flag at this level
  long alpha_flagged = 0;  ///< replicates with a non-positive alpha denominator
  long n_j = 0;
  Interval interval;
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;

  void write_csv(std::ostream& out) const;
};

struct ReplicateOutcome {
  long replicate = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  std::vector<EstimateRecord> records;
};

struct ExperimentResult {
  ConvergenceTable table;
  std::vector<ReplicateOutcome> replicates;
  long failed = 0;
};

/// Runs one replicate: noise, LMSM path, pyramid, estimates.
ReplicateOutcome run_replicate(const ExperimentConfig& config, const FieldSimulator& sim,
                               long replicate);

/// All replicates (in parallel), then the single-threaded aggregation.
/// Throws std::runtime_error when more than 20% of the replicates fail.
ExperimentResult run_experiment(const ExperimentConfig& config, int workers);

/// run_experiment plus records.csv, convergence.csv and manifest.json in `out_dir`.
/// `seed_source` is echoed in the manifest ("config", "flag", "env:LMSM_SEED").
ExperimentResult run_experiment_to_disk(const ExperimentConfig& config, int workers,
                                        const std::string& out_dir,
                                        const std::string& seed_source = "config");

std::string manifest_json(const ExperimentConfig& config, const std::string& seed_source,
                          const std::vector<std::string>& files, long failed);

/// Aggregates per-replicate records into the convergence table.
ConvergenceTable aggregate(const ExperimentConfig& config,
                           const std::vector<ReplicateOutcome>& outcomes);

/// Max over the index set of |d_{j,k} - d~_{j,k}| for each level of one
/// replicate; both routes come from the same noise and quadrature.
ApproxErrorSeries approx_error_series(const ExperimentConfig& config, const FieldSimulator& sim,
                                      long replicate, int j_min, int j_max);

/// The bound suite. With `doubled`, every report is recomputed with twice
/// the quadrature resolution and fails when its witnessed constant drifts
/// by more than 1%.
std::vector<BoundReport> run_verification(const ExperimentConfig& config, int workers,
                                          bool doubled = true);

/// Applies LMSM_SEED when set. Returns the seed source label.
std::string apply_seed_override(ExperimentConfig& config, std::optional<std::uint64_t> flag_seed);

}  // namespace lmsm
