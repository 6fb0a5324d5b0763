#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rlap/clustering.hpp"
#include "rlap/graph.hpp"

namespace rlap::cli {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 2,
  kIoError = 3,
  kSolverError = 4,
  kNoStructure = 5,
};

// How the regularization tau is chosen for one embedding.
//   fixed:<v>             tau = v; v may be a number, "c" or "c^2"
//   zeta_adaptive         tau_p = zeta_p^2 - 1, eigenvectors of L^rw
//   c_phi_minus_one       tau = cPhi_hat - 1
//   bethe_hessian_direct  eigenvectors of H_{zeta_p}
struct TauPolicy {
  enum class Kind { Fixed, ZetaAdaptive, CPhiMinusOne, BetheHessianDirect };
  enum class Symbol { Number, C, CSquared };
  Kind kind = Kind::ZetaAdaptive;
  Symbol symbol = Symbol::Number;
  double value = 0.0;

  static TauPolicy parse(const std::string& text);  // throws ConfigError
  static TauPolicy fixed(double tau) { return {Kind::Fixed, Symbol::Number, tau}; }
  std::string name() const;
  bool uses_zeta() const { return kind == Kind::ZetaAdaptive || kind == Kind::BetheHessianDirect; }
  // Only for Fixed: the numeric tau given the average degree c.
  double fixed_tau(double c) const;
};

struct SolverSettings {
  double tol = 1e-8;
  double r_tol = 1e-3;
  int restarts = 16;
};

// Key/value configuration with sections, read from an INI file.
class Config {
 public:
  static Config load(const std::filesystem::path& path);
  static Config parse(std::istream& in);

  bool has(const std::string& key) const;
  std::string get(const std::string& key) const;  // "section.key"; throws ConfigError when missing
  std::string get(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;

  // Every entry as "section.key = value", in file order.
  std::vector<std::string> entries() const;

 private:
  std::vector<std::pair<std::string, std::string>> items_;
};

// [model] section: n, k, theta, and either c_in/c_out or affinity (rows
// separated by ';'), optional pi.
DcsbmConfig model_from_config(const Config& config);
SolverSettings solver_from_config(const Config& config);

struct SweepConfig {
  NodeId n = 10000;
  int k = 2;
  double c = 10.0;
  std::vector<std::pair<double, double>> pairs;  // (c_in, c_out)
  ThetaSpec theta = ThetaSpec::uniform_power(3.0, 15.0, 5.0);
  std::vector<TauPolicy> policies;
  int seeds = 5;
  std::uint64_t seed = 1;
  bool inject_c_phi = false;  // use the model's c*Phi instead of the degree estimate
  SolverSettings solver;
  std::string out;

  // [model] n, k, theta; [sweep] c, c_in (list) or pairs (c_in:c_out list),
  // policies, tau_grid ("log lo hi count"), seeds, seed, inject_c_phi, out.
  static SweepConfig from_config(const Config& config);
  void validate() const;  // throws ConfigError
  std::vector<std::string> provenance() const;
};

struct TrialRecord {
  int point = 0;
  double c_in = 0.0;
  double c_out = 0.0;
  int seed_index = 0;
  std::uint64_t seed = 0;
  double alpha = 0.0;
  double alpha_c = 0.0;
  int policy_index = 0;
  std::string tau_policy;
  double tau_value = std::numeric_limits<double>::quiet_NaN();
  double overlap = 0.0;
  double overlap_positive_degree = std::numeric_limits<double>::quiet_NaN();
  int k_hat = 1;
  double gap = std::numeric_limits<double>::quiet_NaN();
  double zeta_2 = std::numeric_limits<double>::quiet_NaN();
  std::string error;
  double runtime_ms = 0.0;  // written to the timing sidecar only
};

// Per-trial RNG stream: splitmix64 of the base seed and the trial index.
std::uint64_t trial_seed(std::uint64_t base, std::uint64_t index);

// Embedding produced by one tau policy with `k` target classes.
struct PolicyEmbedding {
  double tau = std::numeric_limits<double>::quiet_NaN();
  Eigen::MatrixXd data;  // n x (k_used - 1)
  int k_used = 1;
  double gap = std::numeric_limits<double>::quiet_NaN();  // s_k - s_{k+1} of L^rw at tau
  std::vector<double> zetas;
  std::string error;
};

// Caches the zeta search and Laplacian solves shared between policies on one
// graph. Not thread-safe; one per trial.
class PolicyEvaluator {
 public:
  PolicyEvaluator(const SparseGraph& graph, int k, double c, double c_phi, const SolverSettings& settings);

  PolicyEmbedding evaluate(const TauPolicy& policy);
  // zeta_2, or NaN when the search failed.
  double zeta_2();

 private:
  struct ZetaColumn {
    double zeta;
    Eigen::VectorXd h_vector;
  };
  struct LapSolve {
    double tau;
    int count;
    EigenPairs pairs;
  };
  void ensure_zetas();
  const EigenPairs& laplacian(double tau, int count);

  const SparseGraph& graph_;
  int k_;
  double c_;
  double c_phi_;
  SolverSettings settings_;
  bool zetas_done_ = false;
  std::vector<ZetaColumn> zetas_;
  std::string zeta_error_;
  std::vector<LapSolve> lap_cache_;
};

// All policies on one generated graph (point, seed_index).
std::vector<TrialRecord> run_trial(const SweepConfig& config, int point, int seed_index);

// Runs every trial with `workers` threads. When `out` is non-empty, rows are
// appended as trials finish and the file is rewritten sorted with a summary
// block at the end; runtimes go to "<out>.timing.csv".
std::vector<TrialRecord> run_sweep(const SweepConfig& config, int workers, const std::filesystem::path& out);

void write_sweep_csv(const SweepConfig& config, std::vector<TrialRecord> records, const std::filesystem::path& out);

struct SummaryRow {
  int point = 0;
  double c_in = 0.0;
  double c_out = 0.0;
  double alpha = 0.0;
  double alpha_c = 0.0;
  std::string tau_policy;
  double mean = 0.0;
  double sd = 0.0;
  int count = 0;
  int errors = 0;
};
std::vector<SummaryRow> summarize(const std::vector<TrialRecord>& records);

// Subcommand entry points; all return an ExitCode and report errors on `err`.
struct GenerateArgs {
  std::string config;
  std::uint64_t seed = 0;
  std::string out;  // prefix: <out>.edges and <out>.labels
};
int cmd_generate(const GenerateArgs& args, std::ostream& err);

struct ClusterArgs {
  std::string edges;
  std::string truth;
  std::string config;
  std::string out;  // JSON destination; stdout when empty
  std::uint64_t seed = 0;
  std::optional<double> c_phi;
};
int cmd_cluster(const ClusterArgs& args, std::ostream& out, std::ostream& err);

struct SweepArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  int workers = 1;
  std::string out;
};
int cmd_sweep(const SweepArgs& args, std::ostream& err);

struct SpectrumArgs {
  std::string edges;
  std::string policy = "fixed:0";
  int count = 100;
  bool scale_by_r = false;
  bool giant = false;
  std::string out;
};
int cmd_spectrum(const SpectrumArgs& args, std::ostream& out, std::ostream& err);

struct EigvecArgs {
  std::string edges;
  std::string truth;
  std::string policy = "zeta_adaptive";
  int p = 2;
  std::string out;
};
int cmd_eigvec(const EigvecArgs& args, std::ostream& out, std::ostream& err);

}  // namespace rlap::cli
