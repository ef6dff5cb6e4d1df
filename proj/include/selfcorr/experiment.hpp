#pragma once

// Experiment files are YAML documents with the sections
//
//   target:    dim, mean, cov
//   loop:      n, lambda, gamma, mode, generations, accrual, cov_floor, seed, real_data
//   sweep:     lambda (list), gamma (list), replicates, base_seed, late_window
//   constants: alpha, L, epsilon, eps_opt, a, b, delta, horizon, theta0_dist
//   output:    directory, formats
//
// Unknown sections or keys are rejected. `gamma` accepts the token `inf`.
// Overrides are "section.key=value" strings applied on top of the file
// before validation, so they always win over file values.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "selfcorr/bounds.hpp"
#include "selfcorr/loop.hpp"

namespace selfcorr {

struct SweepSpec {
  std::vector<double> lambdas;
  std::vector<CorrectionStrength> gammas;
  std::size_t replicates = 1;
  std::uint64_t base_seed = 0;
  std::optional<Eigen::Index> late_window;
};

struct BoundsSpec {
  StabilityConstants constants;
  double delta = 0.05;
  std::optional<std::uint64_t> horizon;
  double theta0_dist = 0.0;
};

struct OutputSpec {
  std::string directory = "out";
  std::vector<std::string> formats{"csv"};
};

struct Experiment {
  GaussianParams target = GaussianParams::standard(2);
  LoopConfig loop;
  std::optional<std::string> real_data;
  std::optional<SweepSpec> sweep;
  std::optional<BoundsSpec> bounds;
  OutputSpec output;

  /// lambda-major grid over the sweep lists; other fields from `loop`.
  std::vector<LoopConfig> sweep_configs() const;
  /// Summary window: sweep.late_window if set, else min(11, T + 1).
  Eigen::Index late_window() const;
  std::uint64_t bounds_horizon() const;
};

Experiment parse_experiment(const std::string& text, const std::vector<std::string>& overrides = {});
Experiment load_experiment(const std::string& path, const std::vector<std::string>& overrides = {});

}  // namespace selfcorr
