#pragma once

#include <algorithm>

namespace lmsm {

/// Compact interval [lo, hi].
struct Interval {
  double lo = 0.0;
  double hi = 1.0;

  double length() const { return hi - lo; }
  double mid() const { return 0.5 * (lo + hi); }
  bool contains(double t) const { return t >= lo && t <= hi; }
  bool contains(const Interval& other) const { return other.lo >= lo && other.hi <= hi; }

  bool operator==(const Interval&) const = default;
};

}  // namespace lmsm
