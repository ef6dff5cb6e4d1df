#include "selfcorr/commands.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "selfcorr/csv.hpp"
#include "selfcorr/experiment.hpp"
#include "selfcorr/validate.hpp"

namespace selfcorr {

namespace fs = std::filesystem;

namespace {

enum class Command { Run, Sweep, Bounds };

Experiment load(const CommandOptions& options, Command command) {
  if (options.config.empty()) throw Error(ErrorKind::ConfigError, "--config is required");
  std::vector<std::string> overrides = options.sets;
  if (options.out) overrides.push_back("output.directory=" + *options.out);
  if (options.seed) {
    overrides.push_back((command == Command::Sweep ? "sweep.base_seed=" : "loop.seed=") + std::to_string(*options.seed));
  }
  if (options.late_window) overrides.push_back("sweep.late_window=" + std::to_string(*options.late_window));
  return load_experiment(options.config, overrides);
}

std::ofstream open_output(const fs::path& path) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot write '" + path.string() + "'");
  return out;
}

std::optional<Dataset> load_real_data(const Experiment& ex) {
  if (!ex.real_data) return std::nullopt;
  std::ifstream in(*ex.real_data);
  if (!in) throw Error(ErrorKind::IoError, "cannot open real data file '" + *ex.real_data + "'");
  Dataset data = read_points_csv(in);
  if (data.dim() != ex.loop.dim) throw Error(ErrorKind::DimensionMismatch, "real data dimension does not match target.dim");
  return data;
}

std::string run_file_name(std::size_t lambda_index, std::size_t gamma_index, std::size_t replicate) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "run_l%03zu_g%03zu_r%04zu.csv", lambda_index, gamma_index, replicate);
  return buf;
}

template <typename F>
int guarded(std::ostream& log, F&& body) {
  try {
    return body();
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace

int cmd_run(const CommandOptions& options, std::ostream& log) {
  return guarded(log, [&] {
    const Experiment ex = load(options, Command::Run);
    const auto real = load_real_data(ex);
    const Trajectory traj = run_loop(ex.loop, ex.target, real);
    const fs::path path = fs::path(ex.output.directory) / "run.csv";
    auto out = open_output(path);
    write_trajectory_csv(out, traj);
    log << "wrote " << path.string() << " (" << traj.records.size() << " generations)\n";
    return 0;
  });
}

int cmd_sweep(const CommandOptions& options, std::ostream& log) {
  return guarded(log, [&] {
    const Experiment ex = load(options, Command::Sweep);
    if (!ex.sweep) throw Error(ErrorKind::ConfigError, "sweep requires a sweep section");
    const auto real = load_real_data(ex);
    const auto configs = ex.sweep_configs();
    const Eigen::Index window = ex.late_window();
    const SweepResult result = sweep(configs, ex.target, ex.sweep->base_seed, ex.sweep->replicates, options.threads, real);

    const fs::path root(ex.output.directory);
    const std::size_t n_gamma = ex.sweep->gammas.size();
    for (std::size_t job = 0; job < result.runs.size(); ++job) {
      if (!result.runs[job]) continue;
      const std::size_t ci = job / result.replicates;
      auto out = open_output(root / "runs" / run_file_name(ci / n_gamma, ci % n_gamma, job % result.replicates));
      write_trajectory_csv(out, *result.runs[job]);
    }

    const auto ok = result.successful();
    {
      auto out = open_output(root / "summary.csv");
      write_summary_csv(out, ok.empty() ? std::vector<ConfigSummary>{} : summarize(ok, window));
    }
    {
      auto out = open_output(root / "failures.csv");
      write_failures_csv(out, result.failures);
    }
    log << "sweep: " << ok.size() << " runs written to " << root.string() << ", " << result.failures.size()
        << " failures\n";
    return result.failures.empty() ? 0 : 2;
  });
}

int cmd_bounds(const CommandOptions& options, std::ostream& log) {
  return guarded(log, [&] {
    const Experiment ex = load(options, Command::Bounds);
    if (!ex.bounds) throw Error(ErrorKind::ConfigError, "bounds requires a constants section");
    const auto& b = *ex.bounds;
    std::vector<double> lambdas{ex.loop.lambda};
    std::vector<CorrectionStrength> gammas{ex.loop.correction.gamma};
    if (ex.sweep) {
      lambdas = ex.sweep->lambdas;
      gammas = ex.sweep->gammas;
    }
    const std::uint64_t horizon = ex.bounds_horizon();
    std::vector<BoundsRow> rows;
    for (const auto& cell : admissibility_grid(lambdas, gammas, b.constants)) {
      rows.push_back(BoundsRow{cell, bound_trajectory(horizon, static_cast<std::uint64_t>(ex.loop.n), b.delta,
                                                      b.theta0_dist, cell.lambda, cell.gamma, b.constants)});
    }
    const fs::path path = fs::path(ex.output.directory) / "bounds.csv";
    auto out = open_output(path);
    write_bounds_csv(out, rows);
    log << "wrote " << path.string() << " (" << rows.size() << " cells, horizon t = " << horizon << ")\n";
    return 0;
  });
}

int cmd_validate(std::ostream& log) {
  const auto results = run_validation();
  std::size_t failed = 0;
  for (const auto& r : results) {
    log << (r.passed ? "PASS " : "FAIL ") << r.name;
    if (!r.passed) {
      log << ": " << r.detail;
      ++failed;
    }
    log << '\n';
  }
  log << results.size() - failed << "/" << results.size() << " properties passed\n";
  return failed == 0 ? 0 : 1;
}

}  // namespace selfcorr
