#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include "selfcorr/bounds.hpp"
#include "selfcorr/loop.hpp"

namespace selfcorr {

inline constexpr std::string_view kTrajectoryHeader =
    "generation,seed,lambda,gamma,mode,n,w2,param_dist,synth_pool_size";
inline constexpr std::string_view kSummaryHeader =
    "lambda,gamma,mode,replicates,w2_late_mean,w2_late_std,param_dist_late_mean,contraction_ratio_median";
inline constexpr std::string_view kBoundsHeader = "lambda,gamma,admissible,rho,contraction_factor,bound_t";
inline constexpr std::string_view kFailuresHeader = "config_index,replicate,seed,error";

struct TrajectoryRow {
  Eigen::Index generation = 0;
  std::uint64_t seed = 0;
  double lambda = 0.0;
  CorrectionStrength gamma;
  CorrectionMode mode = CorrectionMode::DistributionWise;
  Eigen::Index n = 0;
  double w2 = 0.0;
  double param_dist = 0.0;
  Eigen::Index synth_pool_size = 0;

  friend bool operator==(const TrajectoryRow&, const TrajectoryRow&) = default;
};

std::vector<TrajectoryRow> trajectory_rows(const Trajectory& trajectory);

void write_trajectory_csv(std::ostream& os, const Trajectory& trajectory);
void write_trajectory_csv(std::ostream& os, const std::vector<TrajectoryRow>& rows);
/// Strict reader for files produced by write_trajectory_csv.
std::vector<TrajectoryRow> read_trajectory_csv(std::istream& is);

void write_summary_csv(std::ostream& os, const std::vector<ConfigSummary>& summaries);

struct BoundsRow {
  GridCell cell;
  std::optional<double> bound;
};
void write_bounds_csv(std::ostream& os, const std::vector<BoundsRow>& rows);

void write_failures_csv(std::ostream& os, const std::vector<SweepFailure>& failures);

/// Headerless numeric CSV, one point per line.
Dataset read_points_csv(std::istream& is);

}  // namespace selfcorr
