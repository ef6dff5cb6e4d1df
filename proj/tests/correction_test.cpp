#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <set>

#include "selfcorr/correction.hpp"
#include "selfcorr/metrics.hpp"
#include "test_support.hpp"

namespace selfcorr {
namespace {

using testing::gaussian_1d;

// Closed-form 1-d normal density, independent of GaussianDensity.
double normal_pdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
}

double normal_cdf(double x, double mean, double sd) { return 0.5 * std::erfc(-(x - mean) / (sd * std::sqrt(2.0))); }

Dataset rows2(std::initializer_list<std::array<double, 2>> rows) {
  Dataset::Points pts(static_cast<Eigen::Index>(rows.size()), 2);
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    pts(i, 0) = r[0];
    pts(i, 1) = r[1];
    ++i;
  }
  return Dataset(std::move(pts));
}

using RowKey = std::vector<double>;

std::multiset<RowKey> as_multiset(const Dataset& data) {
  std::multiset<RowKey> out;
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    out.insert(RowKey(data.point(i).begin(), data.point(i).end()));
  }
  return out;
}

std::set<RowKey> as_set(const Dataset& data) {
  const auto ms = as_multiset(data);
  return {ms.begin(), ms.end()};
}

TEST(CorrectionStrength, ParseAndWeights) {
  EXPECT_TRUE(CorrectionStrength::parse("inf").is_infinite());
  EXPECT_EQ(CorrectionStrength::parse("0.5"), CorrectionStrength::finite(0.5));
  EXPECT_THROW(CorrectionStrength::parse("-1"), Error);
  EXPECT_THROW(CorrectionStrength::parse("abc"), Error);
  EXPECT_THROW(CorrectionStrength::parse("nan"), Error);
  EXPECT_THROW(CorrectionStrength::finite(-0.1), Error);

  const auto one = CorrectionStrength::finite(1.0);
  EXPECT_EQ(one.model_weight(), 0.5);
  EXPECT_EQ(one.target_weight(), 0.5);
  EXPECT_EQ(CorrectionStrength::infinite().model_weight(), 0.0);
  EXPECT_EQ(CorrectionStrength::infinite().target_weight(), 1.0);
  EXPECT_EQ(CorrectionStrength::finite(0.0).model_weight(), 1.0);
  EXPECT_TRUE(std::isinf(CorrectionStrength::infinite().value()));
  EXPECT_EQ(CorrectionStrength::infinite().to_string(), "inf");
  EXPECT_EQ(CorrectionStrength::finite(0.1).to_string(), "0.10000000000000001");

  EXPECT_LT(CorrectionStrength::finite(4.0), CorrectionStrength::infinite());
  EXPECT_FALSE(CorrectionStrength::infinite() < CorrectionStrength::infinite());
  EXPECT_LT(CorrectionStrength::finite(0.1), CorrectionStrength::finite(0.5));
}

TEST(CorrectionMode, TokensRoundTrip) {
  for (auto m : {CorrectionMode::DistributionWise, CorrectionMode::PointwiseMatched, CorrectionMode::PointwiseRandom}) {
    EXPECT_EQ(parse_correction_mode(to_string(m)), m);
  }
  EXPECT_THROW(parse_correction_mode("kde"), Error);
}

TEST(MixtureDensity, StrengthsZeroOneInfinity) {
  const auto p = gaussian_1d(0.5, 1.0);
  const auto ps = gaussian_1d(-0.3, 0.64);
  for (double x : {-2.0, 0.0, 0.7, 3.0}) {
    const Point v = Point::Constant(1, x);
    const double px = normal_pdf(x, 0.5, 1.0);
    const double psx = normal_pdf(x, -0.3, 0.8);
    EXPECT_NEAR(mixture_density(p, ps, CorrectionStrength::finite(0.0), v), px, 1e-15);
    EXPECT_NEAR(mixture_density(p, ps, CorrectionStrength::finite(1.0), v), 0.5 * (px + psx), 1e-15);
    EXPECT_NEAR(mixture_density(p, ps, CorrectionStrength::infinite(), v), psx, 1e-15);
  }
}

TEST(MixtureDensity, DimensionMismatch) {
  try {
    mixture_density(GaussianParams::standard(2), GaussianParams::standard(1), CorrectionStrength::finite(1.0),
                    Point::Zero(2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DimensionMismatch);
  }
}

TEST(MixtureDensity, IntegratesToOne) {
  const auto p = gaussian_1d(0.5, 1.0);
  const auto ps = gaussian_1d(-0.3, 0.81);
  for (double g : {0.0, 0.5, 1.0, 4.0}) {
    const auto gamma = CorrectionStrength::finite(g);
    const double mass = testing::trapezoid(
        [&](double x) { return mixture_density(p, ps, gamma, Point::Constant(1, x)); }, -10.0, 10.0, 4000);
    EXPECT_NEAR(mass, 1.0, 1e-4) << "gamma=" << g;
  }
}

// Strong correction lands closer to the target than to the model; weak
// correction the other way round.
TEST(MixtureDensity, PointwiseInequalityFlipsAtOne) {
  const auto p = gaussian_1d(1.0, 1.0);
  const auto ps = gaussian_1d(-1.0, 1.0);
  for (double g : {2.0, 4.0, 0.25, 0.5}) {
    const auto gamma = CorrectionStrength::finite(g);
    for (int k = 0; k < 100; ++k) {
      const double x = -5.0 + 10.0 * k / 99.0;
      const double mix = mixture_density(p, ps, gamma, Point::Constant(1, x));
      const double to_target = std::abs(mix - normal_pdf(x, -1.0, 1.0));
      const double to_model = std::abs(mix - normal_pdf(x, 1.0, 1.0));
      if (g > 1.0) {
        EXPECT_LE(to_target, to_model + 1e-300) << "gamma=" << g << " x=" << x;
      } else {
        EXPECT_GE(to_target, to_model) << "gamma=" << g << " x=" << x;
      }
    }
  }
}

class SampleCorrected : public ::testing::Test {
 protected:
  void SetUp() override {
    std::mt19937_64 gen(21);
    synth = testing::uniform_points(gen, 40, 2, 5.0, 6.0);
  }
  Dataset synth{2};
  GaussianParams target = GaussianParams::standard(2);
};

TEST_F(SampleCorrected, ZeroStrengthOnlyResamples) {
  Rng rng(1);
  const auto out = sample_corrected(synth, target, CorrectionStrength::finite(0.0), 500, rng);
  const auto members = as_set(synth);
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    EXPECT_TRUE(members.count(RowKey(out.point(i).begin(), out.point(i).end())));
  }
}

TEST_F(SampleCorrected, InfiniteStrengthIsPureTarget) {
  Rng rng(2);
  const auto out = sample_corrected(synth, target, CorrectionStrength::infinite(), 100'000, rng);
  const auto members = as_set(synth);
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    ASSERT_FALSE(members.count(RowKey(out.point(i).begin(), out.point(i).end())));
  }
  const auto fit = fit_gaussian(out, 0.0);
  EXPECT_LT(fit.mean().cwiseAbs().maxCoeff(), 0.02);
  EXPECT_LT((fit.cov() - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff(), 0.03);
}

TEST_F(SampleCorrected, HalfMembersAtStrengthOne) {
  Rng rng(3);
  const auto out = sample_corrected(synth, target, CorrectionStrength::finite(1.0), 100'000, rng);
  const auto members = as_set(synth);
  Eigen::Index hits = 0;
  for (Eigen::Index i = 0; i < out.size(); ++i) hits += members.count(RowKey(out.point(i).begin(), out.point(i).end()));
  EXPECT_NEAR(static_cast<double>(hits) / 1e5, 0.5, 0.01);
}

TEST_F(SampleCorrected, BranchFrequenciesWithinThreeSigma) {
  const auto members = as_set(synth);
  for (double g : {0.1, 0.5, 4.0}) {
    Rng rng(static_cast<std::uint64_t>(g * 100));
    const Eigen::Index m = 100'000;
    const auto out = sample_corrected(synth, target, CorrectionStrength::finite(g), m, rng);
    double hits = 0;
    for (Eigen::Index i = 0; i < m; ++i) hits += members.count(RowKey(out.point(i).begin(), out.point(i).end()));
    const double p = 1.0 / (1.0 + g);
    const double sigma = std::sqrt(p * (1 - p) * m);
    EXPECT_LE(std::abs(hits - p * m), 3 * sigma) << "gamma=" << g;
  }
}

TEST_F(SampleCorrected, DeterministicAndErrors) {
  Rng a(9), b(9);
  EXPECT_EQ(sample_corrected(synth, target, CorrectionStrength::finite(1.0), 50, a),
            sample_corrected(synth, target, CorrectionStrength::finite(1.0), 50, b));
  Rng rng(1);
  try {
    sample_corrected(Dataset(2), target, CorrectionStrength::finite(1.0), 5, rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptySynthSet);
  }
}

TEST(MatchPointwise, TwoPointExample) {
  const auto m = match_pointwise(rows2({{0, 0}, {1, 0}}), rows2({{1.1, 0}, {0.1, 0}}));
  EXPECT_EQ(m.permutation, (std::vector<Eigen::Index>{1, 0}));
  EXPECT_NEAR(m.cost, 0.2, 1e-12);
}

TEST(MatchPointwise, IdentityWhenEqual) {
  std::mt19937_64 gen(4);
  for (Eigen::Index n : {1, 5, 12, 30, 200}) {
    const auto pts = testing::uniform_points(gen, n, 2);
    std::vector<Eigen::Index> id(static_cast<std::size_t>(n));
    std::iota(id.begin(), id.end(), Eigen::Index{0});
    EXPECT_EQ(match_pointwise(pts, pts).permutation, id) << "n=" << n;
  }
}

TEST(MatchPointwise, DuplicatesResolveInIndexOrder) {
  // Rows 0 and 2 coincide, as do destinations 1 and 3.
  Dataset::Points src(20, 2), dst(20, 2);
  for (Eigen::Index i = 0; i < 20; ++i) {
    src.row(i) << static_cast<double>(i), 0.0;
    dst.row(i) << static_cast<double>(i), 0.5;
  }
  src.row(2) = src.row(0);
  dst.row(3) = dst.row(1);
  const auto m = match_pointwise(Dataset(src), Dataset(dst));
  ASSERT_TRUE(is_permutation(m.permutation));
  EXPECT_LT(m.permutation[0], m.permutation[2]);
  const auto& perm = m.permutation;
  const auto pos1 = std::find(perm.begin(), perm.end(), 1) - perm.begin();
  const auto pos3 = std::find(perm.begin(), perm.end(), 3) - perm.begin();
  EXPECT_LT(pos1, pos3);
}

TEST(MatchPointwise, RandomEightPointInstancesMatchBruteForce) {
  std::mt19937_64 gen(8);
  for (int rep = 0; rep < 10; ++rep) {
    const auto src = testing::uniform_points(gen, 8, 2);
    const auto dst = testing::uniform_points(gen, 8, 2);
    const auto got = match_pointwise(src, dst);
    const auto want = testing::brute_force_match(src, dst);
    EXPECT_NEAR(got.cost, want.cost, 1e-12);
    EXPECT_EQ(got.permutation, want.permutation);
  }
}

TEST(MatchPointwise, NeverWorseThanIdentity) {
  std::mt19937_64 gen(12);
  for (Eigen::Index n : {3, 13, 40, 150, 1200}) {
    const auto src = testing::uniform_points(gen, n, 2);
    const auto dst = testing::uniform_points(gen, n, 2);
    double identity = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) identity += (src.point(i) - dst.point(i)).norm();
    const auto m = match_pointwise(src, dst);
    ASSERT_TRUE(is_permutation(m.permutation));
    EXPECT_LE(m.cost, identity) << "n=" << n;
  }
}

TEST(MatchPointwise, ShapeErrors) {
  try {
    match_pointwise(rows2({{0, 0}}), rows2({{0, 0}, {1, 1}}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SizeMismatch);
  }
  try {
    match_pointwise(rows2({{0, 0}}), Dataset(Dataset::Points::Zero(1, 3)));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DimensionMismatch);
  }
}

TEST(RandomMatching, UniformOverThreeElementPermutations) {
  Rng rng(5);
  std::map<std::vector<Eigen::Index>, int> counts;
  const int draws = 60'000;
  for (int i = 0; i < draws; ++i) counts[random_matching(3, rng).permutation]++;
  ASSERT_EQ(counts.size(), 6u);
  const double expected = draws / 6.0;
  const double sigma = std::sqrt(expected * (5.0 / 6.0));
  for (const auto& [perm, c] : counts) EXPECT_LE(std::abs(c - expected), 5 * sigma);
}

TEST(PointwiseCorrection, ZeroStrengthStaysOnSynth) {
  std::mt19937_64 gen(6);
  const auto synth = testing::uniform_points(gen, 60, 2);
  Rng rng(6);
  const auto out = apply_pointwise_correction(synth, GaussianParams::standard(2), CorrectionStrength::finite(0.0), rng);
  const auto members = as_set(synth);
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    EXPECT_TRUE(members.count(RowKey(out.point(i).begin(), out.point(i).end())));
  }
}

TEST(PointwiseCorrection, SinglePointIsTheCorrectedDraw) {
  const auto synth = rows2({{3, 3}});
  Rng a(7), b(7);
  const auto target = GaussianParams::standard(2);
  const auto out = apply_pointwise_correction(synth, target, CorrectionStrength::finite(1.0), a);
  EXPECT_EQ(out, sample_corrected(synth, target, CorrectionStrength::finite(1.0), 1, b));
}

TEST(PointwiseCorrection, OutputIsPermutedMixtureDraw) {
  std::mt19937_64 gen(8);
  const auto synth = testing::uniform_points(gen, 300, 2, 1.0, 3.0);
  const auto target = GaussianParams::standard(2);
  for (auto mode : {CorrectionMode::PointwiseMatched, CorrectionMode::PointwiseRandom}) {
    Rng a(8), b(8);
    const auto out = apply_pointwise_correction(synth, target, CorrectionStrength::finite(1.0), a, mode);
    const auto drawn = sample_corrected(synth, target, CorrectionStrength::finite(1.0), 300, b);
    EXPECT_EQ(as_multiset(out), as_multiset(drawn));
  }
  Rng rng(1);
  EXPECT_THROW(apply_pointwise_correction(synth, target, CorrectionStrength::finite(1.0), rng,
                                          CorrectionMode::DistributionWise),
               Error);
}

TEST(PointwiseCorrection, MatchedMoveIsNoLongerThanRandomMove) {
  std::mt19937_64 gen(9);
  const auto synth = testing::uniform_points(gen, 200, 2, 1.0, 3.0);
  const auto target = GaussianParams::standard(2);
  Rng a(9), b(9);
  const auto matched = apply_pointwise_correction(synth, target, CorrectionStrength::finite(1.0), a);
  const auto random = apply_pointwise_correction(synth, target, CorrectionStrength::finite(1.0), b,
                                                 CorrectionMode::PointwiseRandom);
  EXPECT_LT((matched.points() - synth.points()).rowwise().norm().sum(),
            (random.points() - synth.points()).rowwise().norm().sum());
}

TEST(PointwiseCorrection, InfiniteStrengthRecentersOnTarget) {
  const GaussianParams far(Eigen::Vector2d(5, 5), Eigen::Matrix2d::Identity());
  Rng rng(10);
  const auto synth = sample_gaussian(far, 10'000, rng);
  const auto out = apply_pointwise_correction(synth, GaussianParams::standard(2), CorrectionStrength::infinite(), rng);
  const auto fit = fit_gaussian(out);
  EXPECT_LT(fit.mean().cwiseAbs().maxCoeff(), 0.1);
}

// The fitted output approaches the fit of independent mixture draws as the
// synthetic set grows.
TEST(PointwiseCorrection, FitConvergesToDirectMixtureFit) {
  const auto target = GaussianParams::standard(2);
  const GaussianParams model(Eigen::Vector2d(1.5, -1.0), Eigen::Matrix2d::Identity() * 0.5);
  std::vector<double> dist;
  for (Eigen::Index n : {100, 2000}) {
    double total = 0.0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      Rng rng(100 + seed);
      const auto synth = sample_gaussian(model, n, rng);
      const auto out = apply_pointwise_correction(synth, target, CorrectionStrength::finite(1.0), rng);
      // Independent oracle: branch sampling written out with std distributions.
      std::mt19937_64 gen(900 + seed);
      std::bernoulli_distribution coin(0.5);
      std::uniform_int_distribution<Eigen::Index> idx(0, n - 1);
      std::normal_distribution<double> normal;
      Dataset::Points direct(n, 2);
      for (Eigen::Index i = 0; i < n; ++i) {
        if (coin(gen)) {
          direct.row(i) = synth.point(idx(gen));
        } else {
          direct.row(i) << normal(gen), normal(gen);
        }
      }
      total += gaussian_w2(fit_gaussian(out), fit_gaussian(Dataset(direct)));
    }
    dist.push_back(total / 5);
  }
  EXPECT_LT(dist[1], dist[0]);
  EXPECT_LT(dist[1], 0.1);
}

TEST(EmpiricalCdf, HandCounts) {
  const auto data = rows2({{0, 0}, {1, 1}, {2, 0}, {0, 2}});
  EXPECT_EQ(empirical_cdf(data, Eigen::Vector2d(0, 0)), 0.25);
  EXPECT_EQ(empirical_cdf(data, Eigen::Vector2d(1, 1)), 0.5);
  EXPECT_EQ(empirical_cdf(data, Eigen::Vector2d(2, 2)), 1.0);
  EXPECT_EQ(empirical_cdf(data, Eigen::Vector2d(-1, 5)), 0.0);
}

class CdfDistance : public ::testing::Test {
 protected:
  static Dataset grid(int side, double lo, double hi) {
    Dataset::Points p(side * side, 2);
    for (int a = 0; a < side; ++a)
      for (int b = 0; b < side; ++b) p.row(a * side + b) << lo + (hi - lo) * a / (side - 1), lo + (hi - lo) * b / (side - 1);
    return Dataset(std::move(p));
  }
};

TEST_F(CdfDistance, SampleEqualToReferenceIsZero) {
  std::mt19937_64 gen(1);
  const auto synth = testing::uniform_points(gen, 100, 2);
  EXPECT_EQ(empirical_cdf_sup_distance(synth, synth, GaussianParams::standard(2), CorrectionStrength::finite(0.0),
                                       grid(15, -1.5, 1.5)),
            0.0);
}

TEST_F(CdfDistance, ExactTargetCdfAgainstHandValue) {
  // One sample point at the origin, gamma = inf: at probe (0,0) the sample
  // CDF is 1 and the target CDF is 1/4.
  const auto sample = rows2({{0, 0}});
  const double d = empirical_cdf_sup_distance(sample, sample, GaussianParams::standard(2),
                                              CorrectionStrength::infinite(), rows2({{0, 0}}));
  EXPECT_NEAR(d, 0.75, 1e-15);
  Eigen::Matrix2d cov;
  cov << 4, 0, 0, 1;
  const GaussianParams wide(Eigen::Vector2d(1, 0), cov);
  const double e = empirical_cdf_sup_distance(sample, sample, wide, CorrectionStrength::infinite(), rows2({{0.5, 1}}));
  EXPECT_NEAR(e, std::abs(1.0 - normal_cdf(0.5, 1, 2) * normal_cdf(1, 0, 1)), 1e-15);
}

TEST_F(CdfDistance, CorrelatedTargetUsesMonteCarlo) {
  Eigen::Matrix2d cov;
  cov << 1, 0.6, 0.6, 1;
  const GaussianParams target(Eigen::Vector2d::Zero(), cov);
  std::mt19937_64 gen(2);
  std::normal_distribution<double> normal;
  Dataset::Points pts(20'000, 2);
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    const double z1 = normal(gen), z2 = normal(gen);
    pts.row(i) << z1, 0.6 * z1 + 0.8 * z2;
  }
  const double d = empirical_cdf_sup_distance(Dataset(pts), Dataset(2), target, CorrectionStrength::infinite(),
                                              grid(9, -2, 2));
  EXPECT_LT(d, 0.02);
}

TEST_F(CdfDistance, ShrinksWithSampleSize) {
  std::mt19937_64 gen(3);
  const auto synth = testing::uniform_points(gen, 200, 2, 0.0, 2.0);
  const auto target = GaussianParams::standard(2);
  const auto probes = grid(20, -3, 3);
  auto draw = [&](std::mt19937_64& g, Eigen::Index n) {
    std::bernoulli_distribution coin(0.5);
    std::uniform_int_distribution<Eigen::Index> idx(0, synth.size() - 1);
    std::normal_distribution<double> normal;
    Dataset::Points p(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (coin(g)) {
        p.row(i) = synth.point(idx(g));
      } else {
        p.row(i) << normal(g), normal(g);
      }
    }
    return Dataset(std::move(p));
  };
  int wins = 0;
  for (int seed = 0; seed < 20; ++seed) {
    std::mt19937_64 g(1000 + seed);
    const double small = empirical_cdf_sup_distance(draw(g, 100), synth, target, CorrectionStrength::finite(1.0), probes);
    const double large = empirical_cdf_sup_distance(draw(g, 10'000), synth, target, CorrectionStrength::finite(1.0), probes);
    EXPECT_GE(small, 0.0);
    EXPECT_LE(small, 1.0);
    wins += large < small ? 1 : 0;
  }
  EXPECT_GE(wins, 18);
}

TEST_F(CdfDistance, Errors) {
  const auto pts = rows2({{0, 0}});
  EXPECT_THROW(empirical_cdf_sup_distance(pts, pts, GaussianParams::standard(3), CorrectionStrength::finite(1.0),
                                          grid(3, 0, 1)),
               Error);
  EXPECT_THROW(empirical_cdf_sup_distance(pts, pts, GaussianParams::standard(2), CorrectionStrength::finite(1.0),
                                          Dataset(2)),
               Error);
}

}  // namespace
}  // namespace selfcorr
