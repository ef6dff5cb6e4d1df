#include "selfcorr/experiment.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "selfcorr/format.hpp"

namespace selfcorr {

namespace {

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"target", {"dim", "mean", "cov"}},
      {"loop", {"n", "lambda", "gamma", "mode", "generations", "accrual", "cov_floor", "seed", "real_data"}},
      {"sweep", {"lambda", "gamma", "replicates", "base_seed", "late_window"}},
      {"constants", {"alpha", "L", "epsilon", "eps_opt", "a", "b", "delta", "horizon", "theta0_dist"}},
      {"output", {"directory", "formats"}},
  };
  return keys;
}

// Resolves error locations either to the file position of a node or to the
// command-line override that produced it.
class Reader {
 public:
  explicit Reader(std::set<std::string> overridden) : overridden_(std::move(overridden)) {}

  [[noreturn]] void fail(const YAML::Node& node, const std::string& key, const std::string& what) const {
    if (overridden_.count(key)) throw Error(ErrorKind::ParseError, "override " + key + ": " + what);
    const YAML::Mark mark = node.Mark();
    if (mark.is_null()) throw Error(ErrorKind::ParseError, key + ": " + what);
    throw Error(ErrorKind::ParseError, "line " + std::to_string(mark.line + 1) + ", column " +
                                           std::to_string(mark.column + 1) + ": " + key + ": " + what);
  }

  std::string scalar(const YAML::Node& node, const std::string& key) const {
    if (!node.IsScalar()) fail(node, key, "expected a scalar value");
    return node.Scalar();
  }

  double real(const YAML::Node& node, const std::string& key) const {
    double value = 0.0;
    if (!parse_double(scalar(node, key), value) || !std::isfinite(value)) fail(node, key, "expected a finite number");
    return value;
  }

  template <typename Int>
  Int integer(const YAML::Node& node, const std::string& key) const {
    const std::string text = scalar(node, key);
    Int value{};
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size()) fail(node, key, "expected an integer");
    return value;
  }

  CorrectionStrength gamma(const YAML::Node& node, const std::string& key) const {
    try {
      return CorrectionStrength::parse(scalar(node, key));
    } catch (const Error&) {
      fail(node, key, "expected a nonnegative number or inf");
    }
  }

  template <typename F>
  auto list(const YAML::Node& node, const std::string& key, F&& item) const {
    if (!node.IsSequence()) fail(node, key, "expected a list");
    std::vector<decltype(item(node, key))> out;
    for (const auto& child : node) out.push_back(item(child, key));
    if (out.empty()) fail(node, key, "list must not be empty");
    return out;
  }

 private:
  std::set<std::string> overridden_;
};

void check_keys(const YAML::Node& root, const Reader& reader) {
  if (!root.IsMap()) reader.fail(root, "document", "top level must be a mapping of sections");
  for (const auto& section : root) {
    const std::string name = section.first.as<std::string>();
    const auto it = schema().find(name);
    if (it == schema().end()) reader.fail(section.first, name, "unknown section");
    if (section.second.IsNull()) continue;
    if (!section.second.IsMap()) reader.fail(section.second, name, "section must be a mapping");
    for (const auto& entry : section.second) {
      const std::string key = entry.first.as<std::string>();
      if (!it->second.count(key)) reader.fail(entry.first, name + "." + key, "unknown key");
    }
  }
}

YAML::Node apply_overrides(YAML::Node root, const std::vector<std::string>& overrides, std::set<std::string>& touched) {
  if (!root.IsDefined() || root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  for (const auto& entry : overrides) {
    const auto eq = entry.find('=');
    const auto dot = entry.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
      throw Error(ErrorKind::ParseError, "override '" + entry + "' must look like section.key=value");
    }
    const std::string section = entry.substr(0, dot);
    const std::string key = entry.substr(dot + 1, eq - dot - 1);
    const std::string value = entry.substr(eq + 1);
    if (!schema().count(section) || !schema().at(section).count(key)) {
      throw Error(ErrorKind::ParseError, "override '" + entry + "' names an unknown key");
    }
    YAML::Node parsed;
    try {
      parsed = YAML::Load(value);
    } catch (const YAML::Exception& e) {
      throw Error(ErrorKind::ParseError, "override '" + entry + "': " + e.msg);
    }
    if (!root[section] || root[section].IsNull()) root[section] = YAML::Node(YAML::NodeType::Map);
    root[section][key] = parsed;
    touched.insert(section + "." + key);
  }
  return root;
}

}  // namespace

std::vector<LoopConfig> Experiment::sweep_configs() const {
  if (!sweep) throw Error(ErrorKind::ConfigError, "experiment has no sweep section");
  std::vector<LoopConfig> out;
  for (const double lambda : sweep->lambdas) {
    for (const auto& gamma : sweep->gammas) {
      LoopConfig c = loop;
      c.lambda = lambda;
      c.correction.gamma = gamma;
      out.push_back(c);
    }
  }
  return out;
}

Eigen::Index Experiment::late_window() const {
  if (sweep && sweep->late_window) return *sweep->late_window;
  return std::min<Eigen::Index>(11, loop.generations + 1);
}

std::uint64_t Experiment::bounds_horizon() const {
  if (bounds && bounds->horizon) return *bounds->horizon;
  return static_cast<std::uint64_t>(loop.generations);
}

Experiment parse_experiment(const std::string& text, const std::vector<std::string>& overrides) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw Error(ErrorKind::ParseError, "line " + std::to_string(e.mark.line + 1) + ", column " +
                                           std::to_string(e.mark.column + 1) + ": " + e.msg);
  }
  std::set<std::string> touched;
  root = apply_overrides(root, overrides, touched);
  const Reader rd(touched);
  check_keys(root, rd);

  Experiment ex;

  // target
  {
    const YAML::Node t = root["target"];
    Eigen::Index dim = 2;
    if (t && t["dim"]) {
      dim = rd.integer<Eigen::Index>(t["dim"], "target.dim");
      if (dim < 1) rd.fail(t["dim"], "target.dim", "must be >= 1");
    }
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
    Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(dim, dim);
    if (t && t["mean"]) {
      const auto values = rd.list(t["mean"], "target.mean", [&](const YAML::Node& n, const std::string& k) { return rd.real(n, k); });
      if (static_cast<Eigen::Index>(values.size()) != dim) rd.fail(t["mean"], "target.mean", "length must equal dim");
      mean = Eigen::Map<const Eigen::VectorXd>(values.data(), dim);
    }
    if (t && t["cov"]) {
      const YAML::Node c = t["cov"];
      if (!c.IsSequence() || static_cast<Eigen::Index>(c.size()) != dim) rd.fail(c, "target.cov", "expected dim rows");
      for (Eigen::Index i = 0; i < dim; ++i) {
        const auto row = rd.list(c[static_cast<std::size_t>(i)], "target.cov",
                                 [&](const YAML::Node& n, const std::string& k) { return rd.real(n, k); });
        if (static_cast<Eigen::Index>(row.size()) != dim) rd.fail(c[static_cast<std::size_t>(i)], "target.cov", "expected dim columns");
        for (Eigen::Index j = 0; j < dim; ++j) cov(i, j) = row[static_cast<std::size_t>(j)];
      }
    }
    try {
      ex.target = GaussianParams(mean, cov);
    } catch (const Error& e) {
      rd.fail(t ? t : root, "target", e.what());
    }
    ex.loop.dim = dim;
  }

  // loop
  if (const YAML::Node l = root["loop"]) {
    if (l["n"]) ex.loop.n = rd.integer<Eigen::Index>(l["n"], "loop.n");
    if (l["lambda"]) ex.loop.lambda = rd.real(l["lambda"], "loop.lambda");
    if (l["gamma"]) ex.loop.correction.gamma = rd.gamma(l["gamma"], "loop.gamma");
    if (l["mode"]) {
      try {
        ex.loop.correction.mode = parse_correction_mode(rd.scalar(l["mode"], "loop.mode"));
      } catch (const Error& e) {
        rd.fail(l["mode"], "loop.mode", e.what());
      }
    }
    if (l["generations"]) ex.loop.generations = rd.integer<Eigen::Index>(l["generations"], "loop.generations");
    if (l["accrual"]) {
      try {
        ex.loop.accrual = parse_accrual_policy(rd.scalar(l["accrual"], "loop.accrual"));
      } catch (const Error& e) {
        rd.fail(l["accrual"], "loop.accrual", e.what());
      }
    }
    if (l["cov_floor"]) ex.loop.cov_floor = rd.real(l["cov_floor"], "loop.cov_floor");
    if (l["seed"]) ex.loop.seed = rd.integer<std::uint64_t>(l["seed"], "loop.seed");
    if (l["real_data"]) ex.real_data = rd.scalar(l["real_data"], "loop.real_data");
  }
  try {
    ex.loop.validate();
  } catch (const Error& e) {
    rd.fail(root["loop"] ? root["loop"] : root, "loop", e.what());
  }

  // sweep
  if (const YAML::Node s = root["sweep"]) {
    SweepSpec sw;
    auto real_item = [&](const YAML::Node& n, const std::string& k) { return rd.real(n, k); };
    auto gamma_item = [&](const YAML::Node& n, const std::string& k) { return rd.gamma(n, k); };
    if (!s["lambda"]) rd.fail(s, "sweep.lambda", "missing");
    if (!s["gamma"]) rd.fail(s, "sweep.gamma", "missing");
    sw.lambdas = rd.list(s["lambda"], "sweep.lambda", real_item);
    for (const double l : sw.lambdas) {
      if (l < 0.0) rd.fail(s["lambda"], "sweep.lambda", "values must be >= 0");
    }
    sw.gammas = rd.list(s["gamma"], "sweep.gamma", gamma_item);
    if (s["replicates"]) {
      sw.replicates = rd.integer<std::size_t>(s["replicates"], "sweep.replicates");
      if (sw.replicates == 0) rd.fail(s["replicates"], "sweep.replicates", "must be >= 1");
    }
    if (s["base_seed"]) sw.base_seed = rd.integer<std::uint64_t>(s["base_seed"], "sweep.base_seed");
    if (s["late_window"]) {
      const auto w = rd.integer<Eigen::Index>(s["late_window"], "sweep.late_window");
      if (w < 1 || w > ex.loop.generations + 1) {
        rd.fail(s["late_window"], "sweep.late_window", "must lie in [1, generations + 1]");
      }
      sw.late_window = w;
    }
    ex.sweep = std::move(sw);
  }

  // constants
  if (const YAML::Node c = root["constants"]) {
    BoundsSpec b;
    auto set = [&](const char* key, double& field) {
      if (c[key]) field = rd.real(c[key], std::string("constants.") + key);
    };
    set("alpha", b.constants.alpha);
    set("L", b.constants.L);
    set("epsilon", b.constants.epsilon);
    set("eps_opt", b.constants.eps_opt);
    set("a", b.constants.a);
    set("b", b.constants.b);
    set("delta", b.delta);
    set("theta0_dist", b.theta0_dist);
    if (c["horizon"]) b.horizon = rd.integer<std::uint64_t>(c["horizon"], "constants.horizon");
    try {
      b.constants.validate();
    } catch (const Error& e) {
      rd.fail(c, "constants", e.what());
    }
    if (!(b.delta > 0.0 && b.delta < 1.0)) rd.fail(c["delta"] ? c["delta"] : c, "constants.delta", "must lie in (0, 1)");
    if (b.theta0_dist < 0.0) rd.fail(c["theta0_dist"], "constants.theta0_dist", "must be >= 0");
    ex.bounds = b;
  }

  // output
  if (const YAML::Node o = root["output"]) {
    if (o["directory"]) ex.output.directory = rd.scalar(o["directory"], "output.directory");
    if (o["formats"]) {
      ex.output.formats = rd.list(o["formats"], "output.formats",
                                  [&](const YAML::Node& n, const std::string& k) { return rd.scalar(n, k); });
      for (const auto& f : ex.output.formats) {
        if (f != "csv") rd.fail(o["formats"], "output.formats", "unsupported format '" + f + "' (only csv)");
      }
    }
  }
  return ex;
}

Experiment load_experiment(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open experiment file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  Experiment ex = parse_experiment(text.str(), overrides);
  // A relative real-data path is read relative to the experiment file.
  if (ex.real_data && std::filesystem::path(*ex.real_data).is_relative()) {
    ex.real_data = (std::filesystem::path(path).parent_path() / *ex.real_data).string();
  }
  return ex;
}

}  // namespace selfcorr
