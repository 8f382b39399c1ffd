#include "lmsm/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "lmsm/csv.hpp"
#include "lmsm/quadrature.hpp"

namespace lmsm {

const Interval& IntervalSequence::at(int j) const {
  if (j < 0 || j >= size()) throw std::out_of_range("IntervalSequence: level out of range");
  return intervals[static_cast<std::size_t>(j)];
}

int IntervalSequence::first_usable() const {
  for (int j = 0; j < size(); ++j) {
    if (usable(j)) return j;
  }
  return -1;
}

IntervalSequence build_global_intervals(const Interval& I, int j_max) {
  if (!(I.lo >= 0.0 && I.hi <= 1.0 && I.lo < I.hi)) {
    throw std::invalid_argument("build_global_intervals: need a non-degenerate I inside [0,1]");
  }
  const int j_switch = static_cast<int>(std::ceil(2.0 - 2.0 * std::log2(I.length()) - 1e-12));
  const Interval L{I.mid() - 1.0, I.mid() + 1.0};
  IntervalSequence seq;
  for (int j = 0; j <= j_max; ++j) seq.intervals.push_back(j < j_switch ? L : I);
  return seq;
}

IntervalSequence build_local_intervals(double t0, int j_max) {
  if (!(t0 > 0.0 && t0 < 1.0)) throw std::invalid_argument("build_local_intervals: t0 in (0,1)");
  IntervalSequence seq;
  for (int j = 0; j <= j_max; ++j) {
    const double r = std::pow(2.0, -0.5 * j);
    Interval I{t0 - r, t0 + r};
    if (2.0 * r >= 1.0) {
      I = {0.5 - r, 0.5 + r};
    } else if (I.lo < 0.0) {
      I = {0.0, 2.0 * r};
    } else if (I.hi > 1.0) {
      I = {1.0 - 2.0 * r, 1.0};
    }
    seq.intervals.push_back(I);
  }
  return seq;
}

std::vector<long> IndexSet::shifts() const {
  std::vector<long> out(static_cast<std::size_t>(count));
  for (long i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = first + i;
  return out;
}

IndexSet index_set(const Interval& interval, int j) {
  if (j < 0) throw std::invalid_argument("index_set: j must be >= 0");
  const double scale = std::ldexp(1.0, j);
  constexpr double slack = 1e-9;
  const double lo = std::max(interval.lo, 0.0) * scale;
  const double hi = std::min(interval.hi, 1.0) * scale;
  const long first = static_cast<long>(std::ceil(lo - slack));
  const long end = static_cast<long>(std::floor(hi + slack));
  return IndexSet{first, std::max(0L, end - first)};
}

const char* to_string(CoeffSource s) {
  switch (s) {
    case CoeffSource::path_quadrature:
      return "path_quadrature";
    case CoeffSource::direct_kernel:
      return "direct_kernel";
    case CoeffSource::frozen_path:
      return "frozen_path";
  }
  return "unknown";
}

CoeffSource coeff_source_from_string(const std::string& s) {
  if (s == "path_quadrature") return CoeffSource::path_quadrature;
  if (s == "direct_kernel") return CoeffSource::direct_kernel;
  if (s == "frozen_path") return CoeffSource::frozen_path;
  throw std::invalid_argument("unknown coefficient source '" + s + "'");
}

void CoeffPyramid::write_csv(std::ostream& out) const {
  out << "# wavelet=" << wavelet_id << "\n# seed=" << seed << "\n";
  out << "j,k,value,source\n";
  const char* src = to_string(source);
  for (const auto& [j, row] : levels) {
    for (const auto& [k, d] : row) out << j << "," << k << "," << csv::num(d) << "," << src << "\n";
  }
}

CoeffPyramid CoeffPyramid::read_csv(std::istream& in) {
  CoeffPyramid p;
  std::string line;
  bool header = false;
  bool have_source = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.rfind("# wavelet=", 0) == 0) {
      p.wavelet_id = line.substr(10);
      continue;
    }
    if (line.rfind("# seed=", 0) == 0) {
      p.seed = std::stoull(line.substr(7));
      continue;
    }
    if (line[0] == '#') continue;
    if (!header) {
      if (line != "j,k,value,source") throw std::invalid_argument("pyramid csv: bad header");
      header = true;
      continue;
    }
    const auto cells = csv::split(line);
    if (cells.size() != 4) throw std::invalid_argument("pyramid csv: expected four columns");
    const auto src = coeff_source_from_string(cells[3]);
    if (have_source && src != p.source) {
      throw std::invalid_argument("pyramid csv: mixed coefficient sources");
    }
    p.source = src;
    have_source = true;
    p.levels[static_cast<int>(csv::parse_int(cells[0]))][csv::parse_int(cells[1])] =
        csv::parse_double(cells[2]);
  }
  if (!header) throw std::invalid_argument("pyramid csv: missing header");
  return p;
}

const std::map<long, double>& CoeffPyramid::level(int j) const {
  auto it = levels.find(j);
  if (it == levels.end()) throw std::out_of_range("CoeffPyramid: level not present");
  return it->second;
}

namespace {

double interpolate(const SamplePath& p, double t) {
  auto it = std::lower_bound(p.times.begin(), p.times.end(), t);
  const auto i = static_cast<std::size_t>(it - p.times.begin());
  if (i < p.times.size() && p.times[i] == t) return p.values[i];
  const double t0 = p.times[i - 1], t1 = p.times[i];
  const double w = (t - t0) / (t1 - t0);
  return (1.0 - w) * p.values[i - 1] + w * p.values[i];
}

}  // namespace

double compute_coeff(const SamplePath& path, const WaveletSpec& w, int j, long k,
                     int min_samples) {
  if (j < 0) throw std::invalid_argument("compute_coeff: j must be >= 0");
  if (path.times.size() != path.values.size() || path.times.size() < 2) {
    throw std::invalid_argument("compute_coeff: malformed path");
  }
  const double scale = std::ldexp(1.0, j);
  const double lo = static_cast<double>(k) / scale;
  const double hi = static_cast<double>(k + 1) / scale;
  if (path.times.front() > lo || path.times.back() < hi) {
    throw std::invalid_argument("compute_coeff: path does not cover the wavelet cell");
  }
  const auto first = std::lower_bound(path.times.begin(), path.times.end(), lo);
  const auto last = std::lower_bound(path.times.begin(), path.times.end(), hi);
  if (last - first < min_samples) {
    throw ToleranceError("compute_coeff: only " + std::to_string(last - first) +
                         " samples in cell (j=" + std::to_string(j) + ", k=" + std::to_string(k) +
                         "), need " + std::to_string(min_samples));
  }

  // Breakpoints in the cell coordinate x = 2^j t - k.
  std::vector<double> xs, ys;
  xs.push_back(0.0);
  ys.push_back(interpolate(path, lo));
  for (auto it = first; it != last; ++it) {
    if (*it <= lo) continue;
    const auto i = static_cast<std::size_t>(it - path.times.begin());
    xs.push_back((*it - lo) * scale);
    ys.push_back(path.values[i]);
  }
  xs.push_back(1.0);
  ys.push_back(interpolate(path, hi));

  // Four Gauss points integrate (linear) x (quartic) exactly.
  static const GaussRule rule = gauss_legendre(4, 0.0, 1.0);
  double acc = 0.0;
  for (std::size_t s = 0; s + 1 < xs.size(); ++s) {
    const double a = xs[s], b = xs[s + 1], h = b - a;
    for (std::size_t g = 0; g < rule.nodes.size(); ++g) {
      const double u = rule.nodes[g];
      const double y = (1.0 - u) * ys[s] + u * ys[s + 1];
      acc += rule.weights[g] * h * y * w(a + u * h);
    }
  }
  return acc;
}

CoeffPyramid build_pyramid(const SamplePath& path, const WaveletSpec& w, int j_min, int j_max,
                           const IntervalSequence& intervals, int min_samples) {
  if (j_min < 0 || j_max < j_min) throw std::invalid_argument("build_pyramid: bad j range");
  CoeffPyramid p;
  p.source = CoeffSource::path_quadrature;
  p.wavelet_id = w.id;
  if (auto it = path.provenance.find("grid.seed"); it != path.provenance.end()) {
    p.seed = std::stoull(it->second);
  }
  for (int j = j_min; j <= j_max; ++j) {
    auto& row = p.levels[j];
    for (long k : index_set(intervals.at(j), j).shifts()) {
      row[k] = compute_coeff(path, w, j, k, min_samples);
    }
  }
  return p;
}

double max_coeff(const CoeffPyramid& pyramid, int j, const Interval& interval) {
  const IndexSet nu = index_set(interval, j);
  if (nu.count == 0) throw std::invalid_argument("max_coeff: empty index set");
  const auto& row = pyramid.level(j);
  double best = 0.0;
  for (long k : nu.shifts()) {
    auto it = row.find(k);
    if (it == row.end()) throw std::out_of_range("max_coeff: coefficient missing");
    best = std::max(best, std::abs(it->second));
  }
  return best;
}

}  // namespace lmsm
