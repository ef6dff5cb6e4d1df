#include "selfcorr/correction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <utility>

#include "selfcorr/assignment.hpp"
#include "selfcorr/format.hpp"

namespace selfcorr {

CorrectionStrength CorrectionStrength::finite(double gamma) {
  if (!std::isfinite(gamma) || gamma < 0.0) {
    throw Error(ErrorKind::InvalidArgument, "correction strength must be a finite nonnegative number or inf");
  }
  CorrectionStrength s;
  s.gamma_ = gamma;
  return s;
}

CorrectionStrength CorrectionStrength::parse(std::string_view token) {
  if (token == "inf") return infinite();
  double value = 0.0;
  if (!parse_double(token, value) || !std::isfinite(value) || value < 0.0) {
    throw Error(ErrorKind::ParseError, "invalid correction strength '" + std::string(token) + "'");
  }
  return finite(value);
}

double CorrectionStrength::value() const noexcept {
  return infinite_ ? std::numeric_limits<double>::infinity() : gamma_;
}

std::string CorrectionStrength::to_string() const { return infinite_ ? "inf" : format_double(gamma_); }

std::string_view to_string(CorrectionMode mode) noexcept {
  switch (mode) {
    case CorrectionMode::DistributionWise: return "distribution";
    case CorrectionMode::PointwiseMatched: return "pointwise";
    case CorrectionMode::PointwiseRandom: return "pointwise-random";
  }
  return "distribution";
}

CorrectionMode parse_correction_mode(std::string_view token) {
  if (token == "distribution") return CorrectionMode::DistributionWise;
  if (token == "pointwise") return CorrectionMode::PointwiseMatched;
  if (token == "pointwise-random") return CorrectionMode::PointwiseRandom;
  throw Error(ErrorKind::ParseError, "unknown correction mode '" + std::string(token) +
                                         "' (expected distribution, pointwise or pointwise-random)");
}

double mixture_density(const GaussianParams& p, const GaussianParams& p_star, CorrectionStrength gamma,
                       const Point& x) {
  if (p.dim() != p_star.dim() || x.size() != p.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "mixture density dimensions disagree");
  }
  if (gamma.is_infinite()) return pdf(p_star, x);
  const double g = gamma.value();
  return (pdf(p, x) + g * pdf(p_star, x)) / (1.0 + g);
}

Dataset sample_corrected(const Dataset& synth, const GaussianParams& target, CorrectionStrength gamma,
                         Eigen::Index m, Rng& rng) {
  if (synth.empty()) throw Error(ErrorKind::EmptySynthSet, "cannot correct an empty synthetic set");
  if (m < 1) throw Error(ErrorKind::InvalidArgument, "sample count must be >= 1");
  if (synth.dim() != target.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "synthetic data and target model dimensions disagree");
  }
  const Eigen::Index d = target.dim();
  const Eigen::MatrixXd lower = detail::cholesky(target.cov()).matrixL();
  const double keep_synth = gamma.model_weight();

  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::uniform_int_distribution<Eigen::Index> pick(0, synth.size() - 1);
  std::normal_distribution<double> normal;

  Dataset::Points out(m, d);
  Eigen::VectorXd z(d);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double u = uniform(rng);
    const Eigen::Index idx = pick(rng);
    for (Eigen::Index k = 0; k < d; ++k) z(k) = normal(rng);
    if (u < keep_synth) {
      out.row(i) = synth.point(idx);
    } else {
      out.row(i) = (target.mean() + lower * z).transpose();
    }
  }
  return Dataset(std::move(out));
}

namespace {

// Runs of identical rows, each run sorted by index; singletons omitted.
std::vector<std::vector<Eigen::Index>> duplicate_groups(const Dataset& data) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(data.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const auto& pts = data.points();
  auto row_less = [&](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index k = 0; k < pts.cols(); ++k) {
      if (pts(a, k) != pts(b, k)) return pts(a, k) < pts(b, k);
    }
    return a < b;
  };
  std::sort(order.begin(), order.end(), row_less);
  std::vector<std::vector<Eigen::Index>> groups;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i + 1;
    while (j < order.size() && pts.row(order[i]) == pts.row(order[j])) ++j;
    if (j - i > 1) {
      std::vector<Eigen::Index> group(order.begin() + static_cast<std::ptrdiff_t>(i),
                                      order.begin() + static_cast<std::ptrdiff_t>(j));
      std::sort(group.begin(), group.end());
      groups.push_back(std::move(group));
    }
    i = j;
  }
  return groups;
}

// Swapping between identical points never changes the cost, so within every
// group of duplicates the smaller index takes the smaller partner.
void canonicalize_duplicate_ties(const Dataset& src, const Dataset& dst, std::vector<Eigen::Index>& perm) {
  std::vector<Eigen::Index> inverse(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) inverse[static_cast<std::size_t>(perm[i])] = static_cast<Eigen::Index>(i);

  for (const auto& group : duplicate_groups(dst)) {
    std::vector<Eigen::Index> sources;
    for (const Eigen::Index j : group) sources.push_back(inverse[static_cast<std::size_t>(j)]);
    std::sort(sources.begin(), sources.end());
    for (std::size_t k = 0; k < group.size(); ++k) perm[static_cast<std::size_t>(sources[k])] = group[k];
  }
  for (const auto& group : duplicate_groups(src)) {
    std::vector<Eigen::Index> targets;
    for (const Eigen::Index i : group) targets.push_back(perm[static_cast<std::size_t>(i)]);
    std::sort(targets.begin(), targets.end());
    for (std::size_t k = 0; k < group.size(); ++k) perm[static_cast<std::size_t>(group[k])] = targets[k];
  }
}

}  // namespace

Matching match_pointwise(const Dataset& src, const Dataset& dst) {
  if (src.size() != dst.size()) {
    throw Error(ErrorKind::SizeMismatch, "matching needs equal sizes, got " + std::to_string(src.size()) + " and " +
                                             std::to_string(dst.size()));
  }
  if (src.dim() != dst.dim()) throw Error(ErrorKind::DimensionMismatch, "matching needs equal dimensions");
  if (src.empty()) throw Error(ErrorKind::SizeMismatch, "matching needs at least one point");

  const auto& a = src.points();
  const auto& b = dst.points();
  // Row-major copies keep each point contiguous for the solver's many scans.
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const RowMajor ra = a;
  const RowMajor rb = b;
  const Eigen::Index d = src.dim();
  Assignment best = solve_assignment(src.size(), [&](Eigen::Index i, Eigen::Index j) {
    const double* x = ra.data() + i * d;
    const double* y = rb.data() + j * d;
    double sq = 0.0;
    for (Eigen::Index k = 0; k < d; ++k) sq += (x[k] - y[k]) * (x[k] - y[k]);
    return std::sqrt(sq);
  });
  if (src.size() > kExactTieBreakLimit) canonicalize_duplicate_ties(src, dst, best.permutation);

  Matching out{std::move(best.permutation), 0.0};
  for (Eigen::Index i = 0; i < src.size(); ++i) out.cost += (a.row(i) - b.row(out.permutation[static_cast<std::size_t>(i)])).norm();
  return out;
}

Matching random_matching(Eigen::Index n, Rng& rng) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "matching needs at least one point");
  Matching out;
  out.permutation.resize(static_cast<std::size_t>(n));
  std::iota(out.permutation.begin(), out.permutation.end(), Eigen::Index{0});
  // Fisher-Yates with an explicit distribution; std::shuffle's draw pattern is
  // implementation-defined.
  for (Eigen::Index i = n - 1; i > 0; --i) {
    std::uniform_int_distribution<Eigen::Index> pick(0, i);
    std::swap(out.permutation[static_cast<std::size_t>(i)], out.permutation[static_cast<std::size_t>(pick(rng))]);
  }
  return out;
}

Dataset apply_pointwise_correction(const Dataset& synth, const GaussianParams& target, CorrectionStrength gamma,
                                   Rng& rng, CorrectionMode mode) {
  if (synth.empty()) throw Error(ErrorKind::EmptySynthSet, "cannot correct an empty synthetic set");
  const Dataset drawn = sample_corrected(synth, target, gamma, synth.size(), rng);
  Matching matching;
  switch (mode) {
    case CorrectionMode::PointwiseMatched:
      matching = match_pointwise(synth, drawn);
      break;
    case CorrectionMode::PointwiseRandom:
      matching = random_matching(synth.size(), rng);
      break;
    case CorrectionMode::DistributionWise:
      throw Error(ErrorKind::InvalidArgument, "point-wise correction needs a point-wise mode");
  }
  Dataset::Points out(synth.size(), synth.dim());
  for (Eigen::Index i = 0; i < synth.size(); ++i) {
    out.row(i) = drawn.point(matching.permutation[static_cast<std::size_t>(i)]);
  }
  return Dataset(std::move(out));
}

double empirical_cdf(const Dataset& data, const Point& v) {
  if (data.dim() != v.size()) throw Error(ErrorKind::DimensionMismatch, "CDF probe dimension mismatch");
  if (data.empty()) throw Error(ErrorKind::EmptyInput, "empirical CDF of an empty dataset");
  const auto& pts = data.points();
  Eigen::Index below = 0;
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    bool inside = true;
    for (Eigen::Index k = 0; k < pts.cols() && inside; ++k) inside = pts(i, k) <= v(k);
    below += inside ? 1 : 0;
  }
  return static_cast<double>(below) / static_cast<double>(pts.rows());
}

namespace {

double diagonal_gaussian_cdf(const GaussianParams& g, const Point& v) {
  double prob = 1.0;
  for (Eigen::Index k = 0; k < g.dim(); ++k) {
    const double sd = std::sqrt(g.cov()(k, k));
    const double diff = v(k) - g.mean()(k);
    if (sd == 0.0) {
      prob *= diff >= 0.0 ? 1.0 : 0.0;
    } else {
      prob *= 0.5 * std::erfc(-diff / (sd * std::sqrt(2.0)));
    }
  }
  return prob;
}

}  // namespace

double empirical_cdf_sup_distance(const Dataset& sample, const Dataset& synth_ref, const GaussianParams& target,
                                  CorrectionStrength gamma, const Dataset& probes) {
  if (probes.empty()) throw Error(ErrorKind::EmptyInput, "at least one probe point is required");
  const Eigen::Index d = target.dim();
  if (sample.dim() != d || synth_ref.dim() != d || probes.dim() != d) {
    throw Error(ErrorKind::DimensionMismatch, "CDF distance inputs have inconsistent dimensions");
  }
  const double w_model = gamma.model_weight();
  const double w_target = gamma.target_weight();
  if (w_model > 0.0 && synth_ref.empty()) {
    throw Error(ErrorKind::EmptySynthSet, "reference synthetic set is empty but carries mixture weight");
  }

  const bool exact_target = target.has_diagonal_cov();
  Dataset mc_draws(d);
  if (w_target > 0.0 && !exact_target) {
    Rng mc_rng(kCdfMonteCarloSeed);
    mc_draws = sample_gaussian(target, kCdfMonteCarloDraws, mc_rng);
  }

  double worst = 0.0;
  for (Eigen::Index p = 0; p < probes.size(); ++p) {
    const Point v = probes.point(p).transpose();
    double mixture = 0.0;
    if (w_model > 0.0) mixture += w_model * empirical_cdf(synth_ref, v);
    if (w_target > 0.0) mixture += w_target * (exact_target ? diagonal_gaussian_cdf(target, v) : empirical_cdf(mc_draws, v));
    worst = std::max(worst, std::abs(empirical_cdf(sample, v) - mixture));
  }
  return std::clamp(worst, 0.0, 1.0);
}

}  // namespace selfcorr
