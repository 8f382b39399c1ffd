// Command line front end: simulate, coeffs, estimate, verify, experiment.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "lmsm/harness.hpp"
#include "lmsm/parallel.hpp"
#include "lmsm/rng.hpp"

namespace fs = std::filesystem;
using namespace lmsm;

namespace {

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  int workers = default_workers();
  std::string out;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config_path, "JSON experiment config (defaults apply when omitted)")
      ->check(CLI::ExistingFile);
  sub->add_option("--seed", c.seed, "master seed; overrides LMSM_SEED and the config");
  sub->add_option("--workers", c.workers, "worker threads")->check(CLI::PositiveNumber);
  sub->add_option("--out", c.out, "output directory; overrides the config");
}

struct Loaded {
  ExperimentConfig config;
  std::string seed_source;
  fs::path out;
};

Loaded load(const Common& c) {
  Loaded l;
  l.config = c.config_path.empty() ? ExperimentConfig{} : ExperimentConfig::load(c.config_path);
  l.seed_source = apply_seed_override(l.config, c.seed);
  if (!c.out.empty()) l.config.output = c.out;
  l.config.validate();
  l.out = l.config.output;
  fs::create_directories(l.out);
  return l;
}

SamplePath simulate_path(const ExperimentConfig& config, long replicate) {
  const FieldSimulator sim(config.geometry(), config.alpha, config.t_nodes);
  const auto seed = stream_seed(config.seed, static_cast<std::uint64_t>(replicate));
  const NoiseGrid grid = make_noise_grid(config.law(), sim.geometry(), seed);
  return sim.lmsm(grid, config.hurst(), config.v_nodes);
}

SamplePath read_path(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw std::invalid_argument("cannot open path file '" + file + "'");
  return SamplePath::read_csv(in);
}

CoeffPyramid pyramid_of(const ExperimentConfig& config, const SamplePath& path) {
  return build_pyramid(path, config.wavelet(), config.j_min, config.j_max,
                       config.estimator().intervals(), config.min_samples);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wavelet estimation of linear multifractional stable motion"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  Common c;
  long replicate = 0;
  std::string path_file;
  bool no_doubling = false;

  auto* sim_cmd = app.add_subcommand("simulate", "simulate one LMSM path and write path.csv");
  add_common(sim_cmd, c);
  sim_cmd->add_option("--replicate", replicate, "replicate index r (noise seed = seed xor r)");

  auto* coeff_cmd = app.add_subcommand("coeffs", "wavelet coefficient pyramid, written to pyramid.csv");
  add_common(coeff_cmd, c);
  coeff_cmd->add_option("--replicate", replicate, "replicate index r");
  coeff_cmd->add_option("--path", path_file, "analyze this path CSV instead of simulating")
      ->check(CLI::ExistingFile);

  auto* est_cmd = app.add_subcommand("estimate", "H and alpha estimates per level, written to estimates.csv");
  add_common(est_cmd, c);
  est_cmd->add_option("--replicate", replicate, "replicate index r");
  est_cmd->add_option("--path", path_file, "analyze this path CSV instead of simulating")
      ->check(CLI::ExistingFile);

  auto* ver_cmd = app.add_subcommand("verify", "bound suite; exit status 1 when any report fails");
  add_common(ver_cmd, c);
  ver_cmd->add_flag("--no-doubling", no_doubling, "skip the doubled-quadrature drift check");

  auto* exp_cmd = app.add_subcommand("experiment", "Monte Carlo estimator convergence study");
  add_common(exp_cmd, c);

  CLI11_PARSE(app, argc, argv);

  try {
    const Loaded l = load(c);
    if (sim_cmd->parsed()) {
      const SamplePath p = simulate_path(l.config, replicate);
      std::ofstream f(l.out / "path.csv", std::ios::binary);
      p.write_csv(f);
      std::cout << (l.out / "path.csv").string() << "\n";
    } else if (coeff_cmd->parsed()) {
      const SamplePath p = path_file.empty() ? simulate_path(l.config, replicate) : read_path(path_file);
      CoeffPyramid pyr = pyramid_of(l.config, p);
      if (path_file.empty()) pyr.seed = stream_seed(l.config.seed, static_cast<std::uint64_t>(replicate));
      std::ofstream f(l.out / "pyramid.csv", std::ios::binary);
      pyr.write_csv(f);
      std::cout << (l.out / "pyramid.csv").string() << "\n";
    } else if (est_cmd->parsed()) {
      const SamplePath p = path_file.empty() ? simulate_path(l.config, replicate) : read_path(path_file);
      const auto records = estimate_records(pyramid_of(l.config, p), l.config.estimator());
      std::ofstream f(l.out / "estimates.csv", std::ios::binary);
      write_records_header(f, false);
      for (const auto& r : records) write_record(f, r, std::nullopt);
      write_records_header(std::cout, false);
      for (const auto& r : records) write_record(std::cout, r, std::nullopt);
    } else if (ver_cmd->parsed()) {
      const auto reports = run_verification(l.config, c.workers, !no_doubling);
      const std::string json = reports_to_json(reports);
      std::ofstream(l.out / "reports.json", std::ios::binary) << json;
      bool all = true;
      std::printf("%-34s %-6s %14s\n", "report", "status", "witnessed");
      for (const auto& r : reports) {
        std::printf("%-34s %-6s %14.6g\n", r.name.c_str(), r.pass ? "pass" : "FAIL",
                    r.witnessed_constant);
        all = all && r.pass;
      }
      std::cout << json;
      return all ? 0 : 1;
    } else if (exp_cmd->parsed()) {
      const ExperimentResult res = run_experiment_to_disk(l.config, c.workers, l.out.string(), l.seed_source);
      res.table.write_csv(std::cout);
      if (res.failed > 0) std::cerr << res.failed << " replicate(s) failed, see failures.csv\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "lmsm: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
