#include "selfcorr/csv.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "selfcorr/format.hpp"

namespace selfcorr {

namespace {

std::vector<std::string_view> split(std::string_view line, char sep = ',') {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

[[noreturn]] void parse_fail(std::size_t line, std::size_t column, const std::string& what) {
  throw Error(ErrorKind::ParseError, "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what);
}

template <typename Int>
Int parse_int(std::string_view token, std::size_t line, std::size_t column) {
  Int value{};
  const auto res = std::from_chars(token.data(), token.data() + token.size(), value);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size()) {
    parse_fail(line, column, "expected an integer, got '" + std::string(token) + "'");
  }
  return value;
}

double parse_real(std::string_view token, std::size_t line, std::size_t column) {
  double value = 0.0;
  if (!parse_double(token, value)) parse_fail(line, column, "expected a number, got '" + std::string(token) + "'");
  return value;
}

std::string csv_escape(std::string_view text) {
  std::string out = "\"";
  for (const char c : text) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

std::string optional_number(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

// Removes a trailing '\r' so files edited on other platforms still parse.
std::string_view trim_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

}  // namespace

std::vector<TrajectoryRow> trajectory_rows(const Trajectory& trajectory) {
  std::vector<TrajectoryRow> rows;
  rows.reserve(trajectory.records.size());
  const LoopConfig& c = trajectory.config;
  for (const auto& r : trajectory.records) {
    rows.push_back(TrajectoryRow{r.t, c.seed, c.lambda, c.correction.gamma, c.correction.mode, c.n, r.w2_to_target,
                                 r.param_dist_to_target, r.synth_pool_size});
  }
  return rows;
}

void write_trajectory_csv(std::ostream& os, const std::vector<TrajectoryRow>& rows) {
  os << kTrajectoryHeader << '\n';
  for (const auto& r : rows) {
    os << r.generation << ',' << r.seed << ',' << format_double(r.lambda) << ',' << r.gamma.to_string() << ','
       << to_string(r.mode) << ',' << r.n << ',' << format_double(r.w2) << ',' << format_double(r.param_dist) << ','
       << r.synth_pool_size << '\n';
  }
}

void write_trajectory_csv(std::ostream& os, const Trajectory& trajectory) {
  write_trajectory_csv(os, trajectory_rows(trajectory));
}

std::vector<TrajectoryRow> read_trajectory_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || trim_cr(line) != kTrajectoryHeader) {
    parse_fail(1, 1, "missing or unexpected trajectory header");
  }
  std::vector<TrajectoryRow> rows;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    const std::string_view text = trim_cr(line);
    if (text.empty()) continue;
    const auto fields = split(text);
    if (fields.size() != 9) parse_fail(line_no, 1, "expected 9 fields, got " + std::to_string(fields.size()));
    std::size_t column = 1;
    auto col = [&](std::size_t i) {
      column = 1;
      for (std::size_t k = 0; k < i; ++k) column += fields[k].size() + 1;
      return column;
    };
    TrajectoryRow row;
    row.generation = parse_int<Eigen::Index>(fields[0], line_no, col(0));
    row.seed = parse_int<std::uint64_t>(fields[1], line_no, col(1));
    row.lambda = parse_real(fields[2], line_no, col(2));
    try {
      row.gamma = CorrectionStrength::parse(fields[3]);
      row.mode = parse_correction_mode(fields[4]);
    } catch (const Error& e) {
      parse_fail(line_no, col(3), e.what());
    }
    row.n = parse_int<Eigen::Index>(fields[5], line_no, col(5));
    row.w2 = parse_real(fields[6], line_no, col(6));
    row.param_dist = parse_real(fields[7], line_no, col(7));
    row.synth_pool_size = parse_int<Eigen::Index>(fields[8], line_no, col(8));
    rows.push_back(row);
  }
  return rows;
}

void write_summary_csv(std::ostream& os, const std::vector<ConfigSummary>& summaries) {
  os << kSummaryHeader << '\n';
  for (const auto& s : summaries) {
    os << format_double(s.config.lambda) << ',' << s.config.correction.gamma.to_string() << ','
       << to_string(s.config.correction.mode) << ',' << s.replicates << ',' << format_double(s.w2_late_mean) << ','
       << format_double(s.w2_late_std) << ',' << format_double(s.param_dist_late_mean) << ','
       << format_double(s.contraction_ratio_median) << '\n';
  }
}

void write_bounds_csv(std::ostream& os, const std::vector<BoundsRow>& rows) {
  os << kBoundsHeader << '\n';
  for (const auto& r : rows) {
    os << format_double(r.cell.lambda) << ',' << r.cell.gamma.to_string() << ','
       << (r.cell.admissible ? "true" : "false") << ',' << optional_number(r.cell.rho) << ','
       << optional_number(r.cell.contraction_factor) << ',' << optional_number(r.bound) << '\n';
  }
}

void write_failures_csv(std::ostream& os, const std::vector<SweepFailure>& failures) {
  os << kFailuresHeader << '\n';
  for (const auto& f : failures) {
    os << f.config_index << ',' << f.replicate << ',' << f.seed << ',' << csv_escape(f.message) << '\n';
  }
}

Dataset read_points_csv(std::istream& is) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const std::string_view text = trim_cr(line);
    if (text.empty()) continue;
    const auto fields = split(text);
    std::vector<double> row;
    std::size_t column = 1;
    for (const auto f : fields) {
      row.push_back(parse_real(f, line_no, column));
      column += f.size() + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      parse_fail(line_no, 1, "expected " + std::to_string(rows.front().size()) + " coordinates");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(ErrorKind::EmptyInput, "point file contains no points");
  Dataset::Points pts(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t k = 0; k < rows[i].size(); ++k) pts(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
  }
  return Dataset(std::move(pts));
}

}  // namespace selfcorr
