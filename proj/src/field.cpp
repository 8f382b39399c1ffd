#include "lmsm/field.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "lmsm/csv.hpp"
#include "lmsm/quadrature.hpp"

namespace lmsm {

namespace {

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};
using RealBuf = std::unique_ptr<double[], FftwFree>;
using CplxBuf = std::unique_ptr<fftw_complex[], FftwFree>;

RealBuf real_buf(std::size_t n) { return RealBuf(fftw_alloc_real(n)); }
CplxBuf cplx_buf(std::size_t n) { return CplxBuf(fftw_alloc_complex(n)); }

struct Plans {
  fftw_plan r2c;
  fftw_plan c2r;
};

// Planning is not thread safe in FFTW; execution with the new-array
// interface is. Plans live for the whole process.
const Plans& plans_for(std::size_t n) {
  static std::mutex mutex;
  static std::map<std::size_t, Plans> plans;
  std::lock_guard lock(mutex);
  auto it = plans.find(n);
  if (it != plans.end()) return it->second;
  RealBuf r = real_buf(n);
  CplxBuf c = cplx_buf(n / 2 + 1);
  const int ni = static_cast<int>(n);
  Plans p{fftw_plan_dft_r2c_1d(ni, r.get(), c.get(), FFTW_ESTIMATE),
          fftw_plan_dft_c2r_1d(ni, c.get(), r.get(), FFTW_ESTIMATE)};
  return plans.emplace(n, p).first->second;
}

// Smallest 2^a 3^b >= n.
std::size_t smooth_size(std::size_t n) {
  std::size_t best = 1;
  while (best < n) best *= 2;
  for (std::size_t p3 = 3; p3 < 2 * n; p3 *= 3) {
    std::size_t s = p3;
    while (s < n) s *= 2;
    best = std::min(best, s);
  }
  return best;
}

std::size_t unit_steps(const GridGeometry& g) {
  const double top = std::min(1.0, g.t_max);
  return static_cast<std::size_t>(std::floor(top / g.delta + 1e-9));
}

void add_grid_provenance(SamplePath& p, const NoiseGrid& grid) {
  const auto& g = grid.geometry;
  p.provenance["grid.t_min"] = csv::num(g.t_min);
  p.provenance["grid.t_max"] = csv::num(g.t_max);
  p.provenance["grid.delta"] = csv::num(g.delta);
  p.provenance["grid.near_span"] = csv::num(g.near_span);
  p.provenance["grid.growth"] = csv::num(g.growth);
  p.provenance["grid.seed"] = std::to_string(grid.seed);
  p.provenance["law.alpha"] = csv::num(grid.law.alpha());
  p.provenance["law.scale"] = csv::num(grid.law.scale());
}

}  // namespace

double field_kernel(double u, double s, double kappa) {
  if (s >= 0.0) return s < u ? std::pow(u - s, kappa) : 0.0;
  const double w = -s;
  return std::pow(w, kappa) * std::expm1(kappa * std::log1p(u / w));
}

double eval_field(const NoiseGrid& grid, double u, double v, double tol) {
  const double alpha = grid.law.alpha();
  const double k = v - 1.0 / alpha;
  if (!(k > 0.0 && v < 1.0)) throw std::invalid_argument("eval_field: v outside (1/alpha, 1)");
  if (!(u >= 0.0 && u <= grid.t_max())) {
    throw std::invalid_argument("eval_field: u outside [0, t_max]");
  }
  if (u == 0.0) return 0.0;
  const double ratio = field_tail_ratio(alpha, v, u, -grid.t_min());
  if (ratio > tol) {
    throw ToleranceError("eval_field: kernel tail beyond t_min may carry a fraction " +
                         std::to_string(ratio) + " of the L^alpha mass");
  }
  const auto& g = grid.geometry;
  double acc = 0.0;
  for (std::size_t i = 0; i < grid.increments.size(); ++i) {
    const double s = g.fine_point(i);
    if (s >= u) break;
    acc += field_kernel(u, s, k) * grid.increments[i];
  }
  for (std::size_t c = 0; c < grid.coarse_points.size(); ++c) {
    acc += field_kernel(u, grid.coarse_points[c], k) * grid.coarse_increments[c];
  }
  return acc;
}

void SamplePath::write_csv(std::ostream& out) const {
  for (const auto& [key, value] : provenance) out << "# " << key << "=" << value << "\n";
  out << "t,Y\n";
  for (std::size_t i = 0; i < times.size(); ++i) {
    out << csv::num(times[i]) << "," << csv::num(values[i]) << "\n";
  }
}

SamplePath SamplePath::read_csv(std::istream& in) {
  SamplePath p;
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.rfind("# ", 0) == 0) {
      const auto eq = line.find('=');
      if (eq != std::string::npos) p.provenance[line.substr(2, eq - 2)] = line.substr(eq + 1);
      continue;
    }
    if (!header) {
      if (line != "t,Y") throw std::invalid_argument("path csv: expected header 't,Y'");
      header = true;
      continue;
    }
    const auto cells = csv::split(line);
    if (cells.size() != 2) throw std::invalid_argument("path csv: expected two columns");
    p.times.push_back(csv::parse_double(cells[0]));
    p.values.push_back(csv::parse_double(cells[1]));
  }
  if (!header) throw std::invalid_argument("path csv: missing header");
  return p;
}

std::vector<double> chebyshev_nodes(double lo, double hi, int n) {
  if (n < 1) throw std::invalid_argument("chebyshev_nodes: n must be >= 1");
  if (n == 1) return {0.5 * (lo + hi)};
  std::vector<double> x(n);
  for (int q = 0; q < n; ++q) {
    const double c = -std::cos(std::numbers::pi * q / (n - 1));
    x[q] = 0.5 * (lo + hi) + 0.5 * (hi - lo) * c;
  }
  x.front() = lo;
  x.back() = hi;
  return x;
}

std::vector<double> lagrange_basis(const std::vector<double>& nodes, double x) {
  const std::size_t n = nodes.size();
  std::vector<double> l(n, 0.0);
  if (n == 1) {
    l[0] = 1.0;
    return l;
  }
  for (std::size_t q = 0; q < n; ++q) {
    if (x == nodes[q]) {
      l[q] = 1.0;
      return l;
    }
  }
  // Barycentric weights of second-kind Chebyshev points: (-1)^q, halved at the ends.
  double denom = 0.0;
  for (std::size_t q = 0; q < n; ++q) {
    double w = (q % 2 == 0) ? 1.0 : -1.0;
    if (q == 0 || q == n - 1) w *= 0.5;
    l[q] = w / (x - nodes[q]);
    denom += l[q];
  }
  for (auto& v : l) v /= denom;
  return l;
}

struct FieldSimulator::Spectrum {
  CplxBuf data;
};

FieldSimulator::FieldSimulator(const GridGeometry& geometry, double alpha, int t_nodes)
    : geometry_(geometry), alpha_(alpha), t_nodes_(t_nodes) {
  if (!(alpha > 1.0 && alpha <= 2.0)) {
    throw std::invalid_argument("FieldSimulator: alpha must lie in (1, 2]");
  }
  if (t_nodes < 2) throw std::invalid_argument("FieldSimulator: t_nodes must be >= 2");
  fft_size_ = smooth_size(2 * geometry_.fine_cells());
  std::vector<double> widths;
  coarse_cells(geometry_, coarse_points_, widths);
}

FieldSimulator::~FieldSimulator() = default;

std::vector<double> FieldSimulator::times() const {
  const std::size_t m1 = unit_steps(geometry_);
  std::vector<double> t(m1 + 1);
  for (std::size_t m = 0; m <= m1; ++m) t[m] = static_cast<double>(m) * geometry_.delta;
  return t;
}

std::shared_ptr<const FieldSimulator::Spectrum> FieldSimulator::spectrum(double v) const {
  {
    std::lock_guard lock(cache_mutex_);
    auto it = cache_.find(v);
    if (it != cache_.end()) return it->second;
  }
  const double k = v - 1.0 / alpha_;
  if (!(k > 0.0 && v < 1.0)) throw std::invalid_argument("FieldSimulator: v outside (1/alpha, 1)");
  const std::size_t L = fft_size_;
  const std::size_t nmax = geometry_.fine_cells();
  RealBuf a = real_buf(L);
  std::fill(a.get(), a.get() + L, 0.0);
  for (std::size_t n = 1; n <= nmax; ++n) {
    a[n] = std::pow(static_cast<double>(n) * geometry_.delta, k);
  }
  auto spec = std::make_shared<Spectrum>();
  spec->data = cplx_buf(L / 2 + 1);
  fftw_execute_dft_r2c(plans_for(L).r2c, a.get(), spec->data.get());

  std::lock_guard lock(cache_mutex_);
  return cache_.emplace(v, std::move(spec)).first->second;
}

void FieldSimulator::check(const NoiseGrid& grid) const {
  if (!(grid.geometry == geometry_) || grid.law.alpha() != alpha_ ||
      grid.increments.size() != geometry_.fine_cells()) {
    throw std::invalid_argument("FieldSimulator: noise grid does not match the simulator");
  }
}

std::vector<std::vector<double>> FieldSimulator::sheets(const NoiseGrid& grid,
                                                        std::span<const double> vs) const {
  check(grid);
  const std::size_t L = fft_size_;
  const std::size_t half = L / 2 + 1;
  const std::size_t i0 = geometry_.fine_offset();
  const std::size_t m1 = unit_steps(geometry_);
  const Plans& plans = plans_for(L);

  RealBuf z = real_buf(L);
  std::fill(z.get(), z.get() + L, 0.0);
  std::copy(grid.increments.begin(), grid.increments.end(), z.get());
  CplxBuf zf = cplx_buf(half);
  fftw_execute_dft_r2c(plans.r2c, z.get(), zf.get());

  // Far cells: Chebyshev interpolation in t on [0, t_max].
  const bool has_far = !grid.coarse_points.empty();
  std::vector<double> t_nodes;
  std::vector<std::vector<double>> basis;
  if (has_far) {
    t_nodes = chebyshev_nodes(0.0, geometry_.t_max, t_nodes_);
    basis.resize(m1 + 1);
    for (std::size_t m = 0; m <= m1; ++m) {
      basis[m] = lagrange_basis(t_nodes, static_cast<double>(m) * geometry_.delta);
    }
  }

  CplxBuf prod = cplx_buf(half);
  RealBuf conv = real_buf(L);
  std::vector<std::vector<double>> out;
  out.reserve(vs.size());
  for (double v : vs) {
    const auto spec = spectrum(v);
    for (std::size_t i = 0; i < half; ++i) {
      const double ar = zf[i][0], ai = zf[i][1];
      const double br = spec->data[i][0], bi = spec->data[i][1];
      prod[i][0] = ar * br - ai * bi;
      prod[i][1] = ar * bi + ai * br;
    }
    fftw_execute_dft_c2r(plans.c2r, prod.get(), conv.get());

    std::vector<double> x(m1 + 1);
    const double inv_l = 1.0 / static_cast<double>(L);
    const double base = conv[i0];
    for (std::size_t m = 0; m <= m1; ++m) x[m] = (conv[i0 + m] - base) * inv_l;

    if (has_far) {
      const double k = v - 1.0 / alpha_;
      std::vector<double> far(t_nodes.size(), 0.0);
      for (std::size_t q = 0; q < t_nodes.size(); ++q) {
        if (t_nodes[q] == 0.0) continue;
        double acc = 0.0;
        for (std::size_t c = 0; c < grid.coarse_points.size(); ++c) {
          acc += field_kernel(t_nodes[q], grid.coarse_points[c], k) * grid.coarse_increments[c];
        }
        far[q] = acc;
      }
      for (std::size_t m = 1; m <= m1; ++m) {
        double acc = 0.0;
        for (std::size_t q = 0; q < far.size(); ++q) acc += basis[m][q] * far[q];
        x[m] += acc;
      }
    }
    out.push_back(std::move(x));
  }
  return out;
}

std::vector<double> FieldSimulator::sheet(const NoiseGrid& grid, double v) const {
  const double vs[1] = {v};
  return std::move(sheets(grid, vs).front());
}

SamplePath FieldSimulator::lfsm(const NoiseGrid& grid, double H) const {
  SamplePath p;
  p.times = times();
  p.values = sheet(grid, H);
  add_grid_provenance(p, grid);
  p.provenance["hurst"] = HurstFunction::constant(H).describe();
  p.provenance["route"] = "fft";
  return p;
}

SamplePath FieldSimulator::lmsm(const NoiseGrid& grid, const HurstFunction& H, int v_nodes) const {
  if (H.is_constant()) {
    SamplePath p = lfsm(grid, H.h_low());
    p.provenance["hurst"] = H.describe();
    return p;
  }
  if (v_nodes < 2) throw std::invalid_argument("FieldSimulator::lmsm: v_nodes must be >= 2");
  const auto nodes = chebyshev_nodes(H.h_low(), H.h_high(), v_nodes);
  const auto rows = sheets(grid, nodes);

  SamplePath p;
  p.times = times();
  p.values.resize(p.times.size());
  for (std::size_t m = 0; m < p.times.size(); ++m) {
    const auto l = lagrange_basis(nodes, H(p.times[m]));
    double acc = 0.0;
    for (std::size_t q = 0; q < nodes.size(); ++q) acc += l[q] * rows[q][m];
    p.values[m] = acc;
  }
  add_grid_provenance(p, grid);
  p.provenance["hurst"] = H.describe();
  p.provenance["route"] = "fft";
  p.provenance["v_nodes"] = std::to_string(v_nodes);
  return p;
}

SamplePath simulate_lfsm(const NoiseGrid& grid, double H) {
  return FieldSimulator(grid.geometry, grid.law.alpha()).lfsm(grid, H);
}

SamplePath simulate_lmsm(const NoiseGrid& grid, const HurstFunction& H) {
  return FieldSimulator(grid.geometry, grid.law.alpha()).lmsm(grid, H);
}

SamplePath simulate_lmsm(const NoiseGrid& grid, std::span<const double> times,
                         const HurstFunction& H) {
  SamplePath p;
  p.times.assign(times.begin(), times.end());
  p.values.resize(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] >= 0.0 && times[i] <= 1.0)) {
      throw std::invalid_argument("simulate_lmsm: times must lie in [0,1]");
    }
    if (i > 0 && !(times[i] > times[i - 1])) {
      throw std::invalid_argument("simulate_lmsm: times must be increasing");
    }
    p.values[i] = eval_field(grid, times[i], H(times[i]));
  }
  add_grid_provenance(p, grid);
  p.provenance["hurst"] = H.describe();
  p.provenance["route"] = "direct";
  return p;
}

}  // namespace lmsm
