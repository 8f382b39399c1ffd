#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "lmsm/field.hpp"
#include "lmsm/interval.hpp"
#include "lmsm/wavelet.hpp"

namespace lmsm {

/// Non-increasing intervals I_0 ⊇ I_1 ⊇ ... with |I_j| >= 2^{1-j/2}.
///
/// Early members may stick out of [0,1] (their only job is the diameter
/// condition); levels whose interval does not lie in [0,1] are not used
/// for estimation.
struct IntervalSequence {
  std::vector<Interval> intervals;

  int size() const { return static_cast<int>(intervals.size()); }
  const Interval& at(int j) const;
  bool usable(int j) const { return Interval{0.0, 1.0}.contains(at(j)); }
  int first_usable() const;
};

/// Fixed target interval I: I_j = L for small j, I_j = I from
/// j >= 2 - 2 log2 |I| on, with L the smallest interval of length >= 2
/// containing I and centred on it.
IntervalSequence build_global_intervals(const Interval& I, int j_max = 40);

/// Shrinking windows around t0: I_j = [t0 - 2^{-j/2}, t0 + 2^{-j/2}], moved
/// inside [0,1] without changing its length when it sticks out. While the
/// length exceeds 1 the window is centred on 1/2 so that it contains [0,1].
IntervalSequence build_local_intervals(double t0, int j_max = 40);

struct IndexSet {
  long first = 0;
  long count = 0;

  std::vector<long> shifts() const;
  bool contains(long k) const { return k >= first && k < first + count; }
};

/// Shifts k with [k 2^-j, (k+1) 2^-j] ⊆ interval ∩ [0,1].
IndexSet index_set(const Interval& interval, int j);

enum class CoeffSource { path_quadrature, direct_kernel, frozen_path };

const char* to_string(CoeffSource s);
CoeffSource coeff_source_from_string(const std::string& s);

struct CoeffPyramid {
  std::map<int, std::map<long, double>> levels;
  CoeffSource source = CoeffSource::path_quadrature;
  std::string wavelet_id;
  std::uint64_t seed = 0;

  /// Rows (j, k, value, source) with 17 significant digits.
  void write_csv(std::ostream& out) const;
  static CoeffPyramid read_csv(std::istream& in);

  const std::map<long, double>& level(int j) const;
  bool operator==(const CoeffPyramid&) const = default;
};

/// d_{j,k} = 2^j \int Y(t) psi(2^j t - k) dt.
///
/// Y is replaced by the piecewise-linear interpolant of its samples and
/// integrated exactly against psi, so affine paths give zero up to
/// rounding. Throws ToleranceError when fewer than `min_samples` samples
/// fall in the cell.
double compute_coeff(const SamplePath& path, const WaveletSpec& w, int j, long k,
                     int min_samples = 16);

/// compute_coeff over index_set(I_j, j) for j_min <= j <= j_max.
CoeffPyramid build_pyramid(const SamplePath& path, const WaveletSpec& w, int j_min, int j_max,
                           const IntervalSequence& intervals, int min_samples = 16);

/// D_j = max |d_{j,k}| over the cells inside `interval`.
/// Throws std::invalid_argument for an empty index set and
/// std::out_of_range when a needed coefficient is missing.
double max_coeff(const CoeffPyramid& pyramid, int j, const Interval& interval);

}  // namespace lmsm
