#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "rlap/cli.hpp"
#include "rlap/errors.hpp"

namespace rlap::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& text) {
  std::istringstream in(text);
  double v = 0.0;
  std::string rest;
  if (!(in >> v) || (in >> rest)) throw ConfigError("'" + key + "' is not a number: '" + text + "'");
  return v;
}

std::vector<double> to_doubles(const std::string& key, const std::string& text) {
  std::istringstream in(text);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) out.push_back(to_double(key, tok));
  return out;
}

std::vector<std::string> words(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

ThetaSpec theta_from(const std::string& text) {
  try {
    return ThetaSpec::parse(text);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("model.theta: ") + e.what());
  }
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------------------

TauPolicy TauPolicy::parse(const std::string& raw) {
  const std::string text = trim(raw);
  if (text == "zeta_adaptive") return {Kind::ZetaAdaptive, Symbol::Number, 0.0};
  if (text == "c_phi_minus_one") return {Kind::CPhiMinusOne, Symbol::Number, 0.0};
  if (text == "bethe_hessian_direct") return {Kind::BetheHessianDirect, Symbol::Number, 0.0};
  if (text.rfind("fixed:", 0) == 0) {
    const std::string arg = text.substr(6);
    if (arg == "c") return {Kind::Fixed, Symbol::C, 0.0};
    if (arg == "c^2" || arg == "c2") return {Kind::Fixed, Symbol::CSquared, 0.0};
    const double v = to_double("tau policy", arg);
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("fixed tau must be finite and >= 0: '" + arg + "'");
    return fixed(v);
  }
  throw ConfigError("unknown tau policy '" + text +
                    "' (expected fixed:<tau|c|c^2>, zeta_adaptive, c_phi_minus_one, bethe_hessian_direct)");
}

std::string TauPolicy::name() const {
  switch (kind) {
    case Kind::ZetaAdaptive: return "zeta_adaptive";
    case Kind::CPhiMinusOne: return "c_phi_minus_one";
    case Kind::BetheHessianDirect: return "bethe_hessian_direct";
    case Kind::Fixed: break;
  }
  if (symbol == Symbol::C) return "fixed:c";
  if (symbol == Symbol::CSquared) return "fixed:c^2";
  return "fixed:" + fmt(value);
}

double TauPolicy::fixed_tau(double c) const {
  if (symbol == Symbol::C) return c;
  if (symbol == Symbol::CSquared) return c * c;
  return value;
}

// ---------------------------------------------------------------------------

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  return parse(in);
}

Config Config::parse(std::istream& in) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  Config config;
  for (const auto& [name, node] : tree) {
    if (node.empty()) {
      config.items_.emplace_back(name, trim(node.data()));
      continue;
    }
    for (const auto& [key, leaf] : node) config.items_.emplace_back(name + "." + key, trim(leaf.data()));
  }
  return config;
}

bool Config::has(const std::string& key) const {
  return std::any_of(items_.begin(), items_.end(), [&](const auto& kv) { return kv.first == key; });
}

std::string Config::get(const std::string& key) const {
  for (const auto& [k, v] : items_)
    if (k == key) return v;
  throw ConfigError("missing config key '" + key + "'");
}

std::string Config::get(const std::string& key, const std::string& fallback) const {
  return has(key) ? get(key) : fallback;
}

double Config::get_double(const std::string& key) const { return to_double(key, get(key)); }

double Config::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

std::int64_t Config::get_int(const std::string& key) const {
  const double v = get_double(key);
  if (v != std::floor(v) || std::abs(v) > 9.0e15) throw ConfigError("'" + key + "' must be an integer");
  return static_cast<std::int64_t>(v);
}

std::int64_t Config::get_int(const std::string& key, std::int64_t fallback) const {
  return has(key) ? get_int(key) : fallback;
}

std::vector<std::string> Config::entries() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : items_) out.push_back(k + " = " + v);
  return out;
}

// ---------------------------------------------------------------------------

DcsbmConfig model_from_config(const Config& config) {
  const auto n = config.get_int("model.n");
  if (n < 2 || n > std::numeric_limits<NodeId>::max()) throw ConfigError("model.n must be in [2, 2^31)");
  const ThetaSpec theta = theta_from(config.get("model.theta", "constant"));

  Eigen::MatrixXd affinity;
  if (config.has("model.affinity")) {
    std::vector<std::vector<double>> rows;
    std::istringstream in(config.get("model.affinity"));
    std::string row;
    while (std::getline(in, row, ';')) rows.push_back(to_doubles("model.affinity", row));
    const auto k = rows.size();
    affinity.resize(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
    for (std::size_t a = 0; a < k; ++a) {
      if (rows[a].size() != k) throw ConfigError("model.affinity must be square (rows separated by ';')");
      for (std::size_t b = 0; b < k; ++b)
        affinity(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = rows[a][b];
    }
  } else {
    const auto k = config.get_int("model.k");
    if (k < 1) throw ConfigError("model.k must be >= 1");
    affinity = Eigen::MatrixXd::Constant(k, k, config.get_double("model.c_out"));
    affinity.diagonal().setConstant(config.get_double("model.c_in"));
  }
  if (config.has("model.k") && config.get_int("model.k") != affinity.rows())
    throw ConfigError("model.k disagrees with the affinity matrix size");

  const auto k = affinity.rows();
  Eigen::VectorXd pi = Eigen::VectorXd::Constant(k, 1.0 / static_cast<double>(k));
  if (config.has("model.pi")) {
    const auto v = to_doubles("model.pi", config.get("model.pi"));
    if (static_cast<Eigen::Index>(v.size()) != k) throw ConfigError("model.pi needs k entries");
    pi = Eigen::Map<const Eigen::VectorXd>(v.data(), k);
  }
  try {
    return DcsbmConfig(static_cast<NodeId>(n), affinity, pi, theta);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
}

SolverSettings solver_from_config(const Config& config) {
  SolverSettings s;
  s.tol = config.get_double("solver.tol", s.tol);
  s.r_tol = config.get_double("solver.r_tol", s.r_tol);
  s.restarts = static_cast<int>(config.get_int("solver.restarts", s.restarts));
  if (!(s.tol > 0.0) || !(s.r_tol > 0.0) || s.restarts < 1)
    throw ConfigError("solver settings must be positive");
  return s;
}

SweepConfig SweepConfig::from_config(const Config& config) {
  SweepConfig sc;
  sc.n = static_cast<NodeId>(config.get_int("model.n", sc.n));
  sc.k = static_cast<int>(config.get_int("model.k", sc.k));
  sc.theta = theta_from(config.get("model.theta", sc.theta.to_string()));
  sc.c = config.get_double("sweep.c", sc.c);

  if (config.has("sweep.pairs")) {
    for (const auto& tok : words(config.get("sweep.pairs"))) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos) throw ConfigError("sweep.pairs entries look like c_in:c_out, got '" + tok + "'");
      sc.pairs.emplace_back(to_double("sweep.pairs", tok.substr(0, colon)),
                            to_double("sweep.pairs", tok.substr(colon + 1)));
    }
  } else {
    if (sc.k < 2) throw ConfigError("model.k must be >= 2 to derive c_out from c_in");
    for (double c_in : to_doubles("sweep.c_in", config.get("sweep.c_in")))
      sc.pairs.emplace_back(c_in, (sc.k * sc.c - c_in) / (sc.k - 1));
  }

  for (const auto& tok : words(config.get("sweep.policies", "zeta_adaptive bethe_hessian_direct fixed:c fixed:c^2")))
    sc.policies.push_back(TauPolicy::parse(tok));
  if (config.has("sweep.tau_grid")) {
    // "log lo hi count": logarithmically spaced fixed taus.
    const auto w = words(config.get("sweep.tau_grid"));
    if (w.size() != 4 || w[0] != "log") throw ConfigError("sweep.tau_grid must read 'log <lo> <hi> <count>'");
    const double lo = to_double("sweep.tau_grid", w[1]);
    const double hi = to_double("sweep.tau_grid", w[2]);
    const double cnt = to_double("sweep.tau_grid", w[3]);
    if (!(lo > 0.0) || !(hi >= lo) || cnt < 1 || cnt != std::floor(cnt))
      throw ConfigError("sweep.tau_grid needs 0 < lo <= hi and an integer count");
    const int m = static_cast<int>(cnt);
    for (int i = 0; i < m; ++i) {
      const double t = m == 1 ? 0.0 : static_cast<double>(i) / (m - 1);
      sc.policies.push_back(TauPolicy::fixed(lo * std::pow(hi / lo, t)));
    }
  }

  sc.seeds = static_cast<int>(config.get_int("sweep.seeds", sc.seeds));
  sc.seed = static_cast<std::uint64_t>(config.get_int("sweep.seed", static_cast<std::int64_t>(sc.seed)));
  const auto inject = config.get("sweep.inject_c_phi", "false");
  if (inject != "true" && inject != "false") throw ConfigError("sweep.inject_c_phi must be true or false");
  sc.inject_c_phi = inject == "true";
  sc.solver = solver_from_config(config);
  sc.out = config.get("sweep.out", "");
  sc.validate();
  return sc;
}

void SweepConfig::validate() const {
  if (n < 2) throw ConfigError("model.n must be >= 2");
  if (k < 2) throw ConfigError("sweeps need k >= 2");
  if (!(c > 0.0)) throw ConfigError("sweep.c must be positive");
  if (pairs.empty()) throw ConfigError("sweep needs at least one (c_in, c_out) point");
  if (policies.empty()) throw ConfigError("sweep needs at least one tau policy");
  if (seeds < 1) throw ConfigError("sweep.seeds must be >= 1");
  for (const auto& [c_in, c_out] : pairs) {
    if (c_in < 0.0 || c_out < 0.0) throw ConfigError("affinities must be nonnegative");
    const double mean = (c_in + (k - 1) * c_out) / k;
    if (std::abs(mean - c) > 1e-9 * std::max(1.0, c))
      throw ConfigError("point (" + fmt(c_in) + ", " + fmt(c_out) + ") has average degree " + fmt(mean) +
                        ", not c = " + fmt(c));
  }
}

std::vector<std::string> SweepConfig::provenance() const {
  std::vector<std::string> lines;
  lines.push_back("model.n = " + std::to_string(n));
  lines.push_back("model.k = " + std::to_string(k));
  lines.push_back("model.theta = " + theta.to_string());
  lines.push_back("model.pi = balanced");
  lines.push_back("sweep.c = " + fmt(c));
  std::string pts;
  for (const auto& [a, b] : pairs) pts += (pts.empty() ? "" : " ") + fmt(a) + ":" + fmt(b);
  lines.push_back("sweep.pairs = " + pts);
  std::string pol;
  for (const auto& p : policies) pol += (pol.empty() ? "" : " ") + p.name();
  lines.push_back("sweep.policies = " + pol);
  lines.push_back("sweep.seeds = " + std::to_string(seeds));
  lines.push_back("sweep.seed = " + std::to_string(seed));
  lines.push_back(std::string("sweep.inject_c_phi = ") + (inject_c_phi ? "true" : "false"));
  lines.push_back("solver.tol = " + fmt(solver.tol));
  lines.push_back("solver.r_tol = " + fmt(solver.r_tol));
  lines.push_back("solver.restarts = " + std::to_string(solver.restarts));
  lines.push_back("overlap = max over label permutations, chance corrected, all nodes");
  lines.push_back("alpha_c = 2 / sqrt(Phi) with Phi of the limiting theta distribution");
  return lines;
}

}  // namespace rlap::cli
