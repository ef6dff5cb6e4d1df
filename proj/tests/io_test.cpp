#include <gtest/gtest.h>

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>

#include "selfcorr/csv.hpp"
#include "selfcorr/experiment.hpp"
#include "selfcorr/format.hpp"

namespace selfcorr {
namespace {

std::string error_text(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

TEST(FormatDouble, RoundTripsRandomBitPatterns) {
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 10'000; ++i) {
    double v = i % 2 ? u(gen) : std::bit_cast<double>(gen());
    if (!std::isfinite(v)) v = 0.0;
    double back = 0.0;
    ASSERT_TRUE(parse_double(format_double(v), back));
    ASSERT_EQ(std::bit_cast<std::uint64_t>(back), std::bit_cast<std::uint64_t>(v)) << format_double(v);
  }
}

TEST(FormatDouble, FixedSpellings) {
  EXPECT_EQ(format_double(0.5), "0.5");
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(format_double(-2.0), "-2");
  double v = 0.0;
  EXPECT_TRUE(parse_double("inf", v));
  EXPECT_TRUE(std::isinf(v));
  EXPECT_TRUE(parse_double("+1.5", v));
  EXPECT_EQ(v, 1.5);
  EXPECT_FALSE(parse_double("1.5x", v));
  EXPECT_FALSE(parse_double("", v));
  EXPECT_FALSE(parse_double("1,5", v));
}

Trajectory sample_trajectory() {
  LoopConfig c;
  c.generations = 12;
  c.correction.gamma = CorrectionStrength::finite(0.1);
  c.seed = 123456789012345ULL;
  return run_loop(c, GaussianParams::standard(2));
}

TEST(TrajectoryCsv, HeaderAndRowCount) {
  std::ostringstream os;
  write_trajectory_csv(os, sample_trajectory());
  std::istringstream is(os.str());
  std::string header;
  std::getline(is, header);
  EXPECT_EQ(header, "generation,seed,lambda,gamma,mode,n,w2,param_dist,synth_pool_size");
  int lines = 0;
  for (std::string line; std::getline(is, line);) ++lines;
  EXPECT_EQ(lines, 13);
  EXPECT_NE(os.str().find(",123456789012345,0.5,0.10000000000000001,distribution,50,"), std::string::npos);
}

TEST(TrajectoryCsv, ParseOfEmitIsBitExact) {
  const auto traj = sample_trajectory();
  std::ostringstream os;
  write_trajectory_csv(os, traj);
  std::istringstream is(os.str());
  const auto rows = read_trajectory_csv(is);
  EXPECT_EQ(rows, trajectory_rows(traj));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(std::bit_cast<std::uint64_t>(rows[i].w2), std::bit_cast<std::uint64_t>(traj.records[i].w2_to_target));
  }
}

TEST(TrajectoryCsv, InfiniteGammaSpelledInf) {
  auto traj = sample_trajectory();
  traj.config.correction.gamma = CorrectionStrength::infinite();
  traj.config.correction.mode = CorrectionMode::PointwiseRandom;
  std::ostringstream os;
  write_trajectory_csv(os, traj);
  EXPECT_NE(os.str().find(",inf,pointwise-random,"), std::string::npos);
  std::istringstream is(os.str());
  EXPECT_TRUE(read_trajectory_csv(is).front().gamma.is_infinite());
}

TEST(TrajectoryCsv, ReaderReportsLineAndColumn) {
  const std::string header = "generation,seed,lambda,gamma,mode,n,w2,param_dist,synth_pool_size\n";
  std::istringstream bad(header + "0,1,0.5,1,distribution,50,0.1,0.2,0\n1,1,0.5,1,distribution,50,oops,0.2,25\n");
  const auto msg = error_text([&] { read_trajectory_csv(bad); });
  EXPECT_NE(msg.find("line 3, column 27"), std::string::npos) << msg;
  std::istringstream short_row(header + "0,1,0.5\n");
  EXPECT_NE(error_text([&] { read_trajectory_csv(short_row); }).find("line 2"), std::string::npos);
  std::istringstream no_header("0,1\n");
  EXPECT_THROW(read_trajectory_csv(no_header), Error);
}

TEST(BoundsCsv, BlankWhenUndefined) {
  const StabilityConstants c;
  std::vector<BoundsRow> rows;
  for (const auto& cell : admissibility_grid({0.0, 1.0}, {CorrectionStrength::finite(0.0)}, c)) {
    rows.push_back({cell, bound_trajectory(5, 50, 0.05, 1.0, cell.lambda, cell.gamma, c)});
  }
  std::ostringstream os;
  write_bounds_csv(os, rows);
  EXPECT_EQ(os.str(),
            "lambda,gamma,admissible,rho,contraction_factor,bound_t\n"
            "0,0,true,0,0,0\n"
            "1,0,false,,,\n");
}

TEST(SummaryCsv, Header) {
  std::ostringstream os;
  write_summary_csv(os, {});
  EXPECT_EQ(os.str(), "lambda,gamma,mode,replicates,w2_late_mean,w2_late_std,param_dist_late_mean,contraction_ratio_median\n");
}

TEST(FailuresCsv, QuotesMessages) {
  std::ostringstream os;
  write_failures_csv(os, {SweepFailure{1, 2, 3, "bad \"thing\",\nhere"}});
  EXPECT_EQ(os.str(), "config_index,replicate,seed,error\n1,2,3,\"bad \"\"thing\"\", here\"\n");
}

TEST(PointsCsv, ReadsAndValidates) {
  std::istringstream in("1,2\n3.5,-4\n\n");
  const auto pts = read_points_csv(in);
  ASSERT_EQ(pts.size(), 2);
  EXPECT_EQ(pts.point(1)(1), -4.0);
  std::istringstream ragged("1,2\n3\n");
  EXPECT_THROW(read_points_csv(ragged), Error);
  std::istringstream empty("");
  EXPECT_THROW(read_points_csv(empty), Error);
}

const char* kExperiment = R"(target:
  dim: 2
  mean: [0, 0]
  cov: [[1, 0], [0, 1]]
loop:
  n: 50
  lambda: 0.5
  gamma: 1
  mode: distribution
  generations: 50
  accrual: fresh
  seed: 3
sweep:
  lambda: [0.5]
  gamma: [0, 0.1, 0.5, 1.0, inf]
  replicates: 20
  base_seed: 42
constants:
  alpha: 1
  epsilon: 0
  L: 2
output:
  directory: out/fig2
  formats: [csv]
)";

TEST(Experiment, ParsesAllSections) {
  const auto ex = parse_experiment(kExperiment);
  EXPECT_EQ(ex.target, GaussianParams::standard(2));
  EXPECT_EQ(ex.loop.n, 50);
  EXPECT_EQ(ex.loop.seed, 3u);
  EXPECT_EQ(ex.loop.correction.gamma, CorrectionStrength::finite(1.0));
  ASSERT_TRUE(ex.sweep);
  EXPECT_EQ(ex.sweep->gammas.size(), 5u);
  EXPECT_TRUE(ex.sweep->gammas.back().is_infinite());
  EXPECT_EQ(ex.sweep->replicates, 20u);
  EXPECT_EQ(ex.sweep_configs().size(), 5u);
  EXPECT_EQ(ex.late_window(), 11);
  ASSERT_TRUE(ex.bounds);
  EXPECT_EQ(ex.bounds->constants.L, 2.0);
  EXPECT_EQ(ex.bounds->delta, 0.05);
  EXPECT_EQ(ex.bounds_horizon(), 50u);
  EXPECT_EQ(ex.output.directory, "out/fig2");
}

TEST(Experiment, SweepGridIsLambdaMajor) {
  const auto ex = parse_experiment(kExperiment, {"sweep.lambda=[0.2, 0.4]", "sweep.gamma=[0, 1]"});
  const auto configs = ex.sweep_configs();
  ASSERT_EQ(configs.size(), 4u);
  EXPECT_EQ(configs[1].lambda, 0.2);
  EXPECT_EQ(configs[1].correction.gamma, CorrectionStrength::finite(1.0));
  EXPECT_EQ(configs[2].lambda, 0.4);
}

TEST(Experiment, OverridesBeatFileValuesPerKey) {
  const auto ex = parse_experiment(kExperiment, {"loop.n=80", "loop.gamma=inf", "loop.mode=pointwise",
                                                 "loop.accrual=log", "sweep.replicates=3", "constants.L=0.5",
                                                 "output.directory=elsewhere", "sweep.late_window=5"});
  EXPECT_EQ(ex.loop.n, 80);
  EXPECT_TRUE(ex.loop.correction.gamma.is_infinite());
  EXPECT_EQ(ex.loop.correction.mode, CorrectionMode::PointwiseMatched);
  EXPECT_EQ(ex.loop.accrual, AccrualPolicy::LogAccrual);
  EXPECT_EQ(ex.sweep->replicates, 3u);
  EXPECT_EQ(ex.bounds->constants.L, 0.5);
  EXPECT_EQ(ex.output.directory, "elsewhere");
  EXPECT_EQ(ex.late_window(), 5);
  // Later overrides of the same key win.
  EXPECT_EQ(parse_experiment(kExperiment, {"loop.n=80", "loop.n=90"}).loop.n, 90);
}

TEST(Experiment, DefaultsWithoutOptionalSections) {
  const auto ex = parse_experiment("loop:\n  generations: 5\n");
  EXPECT_EQ(ex.target, GaussianParams::standard(2));
  EXPECT_FALSE(ex.sweep);
  EXPECT_FALSE(ex.bounds);
  EXPECT_EQ(ex.late_window(), 6);
  EXPECT_THROW(ex.sweep_configs(), Error);
}

TEST(Experiment, ErrorsCarryLineAndColumn) {
  const auto unknown = error_text([] { parse_experiment("loop:\n  n: 50\n  lamda: 0.5\n"); });
  EXPECT_NE(unknown.find("line 3, column 3"), std::string::npos) << unknown;
  EXPECT_NE(unknown.find("unknown key"), std::string::npos);

  const auto bad_value = error_text([] { parse_experiment("loop:\n  n: fifty\n"); });
  EXPECT_NE(bad_value.find("line 2, column 6"), std::string::npos) << bad_value;

  const auto syntax = error_text([] { parse_experiment("loop:\n  n: [1, 2\n"); });
  EXPECT_NE(syntax.find("line "), std::string::npos) << syntax;

  EXPECT_NE(error_text([] { parse_experiment("plots:\n  x: 1\n"); }).find("unknown section"), std::string::npos);
}

TEST(Experiment, EmptyGammaListIsParseError) {
  try {
    parse_experiment("sweep:\n  lambda: [0.5]\n  gamma: []\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ParseError);
  }
}

TEST(Experiment, RejectsInvalidValues) {
  EXPECT_THROW(parse_experiment("loop:\n  gamma: -1\n"), Error);
  EXPECT_THROW(parse_experiment("loop:\n  mode: kde\n"), Error);
  EXPECT_THROW(parse_experiment("loop:\n  n: 1\n"), Error);
  EXPECT_THROW(parse_experiment("target:\n  dim: 2\n  mean: [0]\n"), Error);
  EXPECT_THROW(parse_experiment("target:\n  dim: 2\n  cov: [[1, 2], [2, 1]]\n"), Error);
  EXPECT_THROW(parse_experiment("constants:\n  delta: 1.5\n"), Error);
  EXPECT_THROW(parse_experiment("output:\n  formats: [parquet]\n"), Error);
  EXPECT_THROW(parse_experiment("sweep:\n  lambda: [0.5]\n  gamma: [1]\n  late_window: 60\n"), Error);
  const auto msg = error_text([] { parse_experiment(kExperiment, {"loop.n=abc"}); });
  EXPECT_NE(msg.find("override"), std::string::npos) << msg;
  EXPECT_THROW(parse_experiment(kExperiment, {"loop.n"}), Error);
  EXPECT_THROW(parse_experiment(kExperiment, {"loop.nn=3"}), Error);
}

TEST(Experiment, LoadResolvesRealDataNextToFile) {
  const auto dir = std::filesystem::temp_directory_path() / "selfcorr_io_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream(dir / "exp.yaml") << "loop:\n  real_data: points.csv\n";
  }
  const auto ex = load_experiment((dir / "exp.yaml").string());
  ASSERT_TRUE(ex.real_data);
  EXPECT_EQ(std::filesystem::path(*ex.real_data), dir / "points.csv");
  EXPECT_THROW(load_experiment((dir / "missing.yaml").string()), Error);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace selfcorr
