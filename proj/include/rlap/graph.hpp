#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace rlap {

using NodeId = std::int32_t;
using EdgeOffset = std::int64_t;
using Edge = std::pair<NodeId, NodeId>;

// Immutable undirected unweighted graph in CSR form. Every edge is stored in
// both rows; neighbour lists are sorted; no self-loops.
class SparseGraph {
 public:
  SparseGraph() = default;

  // Symmetrizes and deduplicates. Throws std::invalid_argument on self-loops
  // or indices outside [0, n).
  static SparseGraph from_edges(NodeId n, std::span<const Edge> edges);

  NodeId num_nodes() const noexcept { return n_; }
  // Undirected edge count.
  EdgeOffset num_edges() const noexcept { return static_cast<EdgeOffset>(cols_.size()) / 2; }

  std::span<const EdgeOffset> row_offsets() const noexcept { return offsets_; }
  std::span<const NodeId> col_indices() const noexcept { return cols_; }
  std::span<const std::int32_t> degrees() const noexcept { return degrees_; }

  std::int32_t degree(NodeId i) const { return degrees_[static_cast<std::size_t>(i)]; }
  std::span<const NodeId> neighbors(NodeId i) const {
    const auto b = offsets_[static_cast<std::size_t>(i)];
    const auto e = offsets_[static_cast<std::size_t>(i) + 1];
    return {cols_.data() + b, static_cast<std::size_t>(e - b)};
  }

  // Each undirected edge once, as (i, j) with i < j, in row order.
  std::vector<Edge> edge_list() const;

  // Relabel: node i of *this becomes node perm[i].
  SparseGraph permuted(std::span<const NodeId> perm) const;

  // Induced subgraph on `keep` (sorted, unique); node keep[t] becomes t.
  SparseGraph induced(std::span<const NodeId> keep) const;

  // Connected component labels (0-based, ordered by smallest member).
  std::vector<NodeId> components() const;

  // Returns "" when all structural invariants hold, otherwise a description.
  std::string check_invariants() const;

  bool operator==(const SparseGraph&) const = default;

 private:
  NodeId n_ = 0;
  std::vector<EdgeOffset> offsets_{0};
  std::vector<NodeId> cols_;
  std::vector<std::int32_t> degrees_;
};

// Nodes of the largest connected component, sorted.
std::vector<NodeId> largest_component(const SparseGraph& graph);

// Nodes with degree > 0, sorted.
std::vector<NodeId> non_isolated_nodes(const SparseGraph& graph);

// θ_i = X^power with X drawn from `kind`, then rescaled to empirical mean one.
struct ThetaSpec {
  enum class Kind { Constant, Uniform };
  Kind kind = Kind::Constant;
  double low = 1.0;
  double high = 1.0;
  double power = 1.0;

  static ThetaSpec constant() { return {}; }
  static ThetaSpec uniform_power(double low, double high, double power) {
    return {Kind::Uniform, low, high, power};
  }

  // "constant", "uniform 3 15", "uniform 3 15 ^ 5", "uniform 3 15 power 5".
  static ThetaSpec parse(const std::string& text);
  std::string to_string() const;

  // Φ = E[X^{2p}] / E[X^p]^2 of the limiting distribution.
  double expected_phi() const;
};

class DcsbmConfig {
 public:
  // Throws std::invalid_argument unless pi is a positive probability vector,
  // C is symmetric and nonnegative, and CΠ1 = c1 within 1e-6 relative.
  DcsbmConfig(NodeId n, Eigen::MatrixXd affinity, Eigen::VectorXd pi, ThetaSpec theta);

  // Balanced k-class model with c_in on the diagonal and c_out elsewhere.
  static DcsbmConfig planted(NodeId n, int k, double c_in, double c_out, ThetaSpec theta);

  NodeId n() const noexcept { return n_; }
  int k() const noexcept { return static_cast<int>(pi_.size()); }
  const Eigen::MatrixXd& affinity() const noexcept { return affinity_; }
  const Eigen::VectorXd& pi() const noexcept { return pi_; }
  const ThetaSpec& theta_spec() const noexcept { return theta_; }
  // Expected average degree c from CΠ1 = c1.
  double c() const noexcept { return c_; }

 private:
  NodeId n_;
  Eigen::MatrixXd affinity_;
  Eigen::VectorXd pi_;
  ThetaSpec theta_;
  double c_ = 0.0;
};

struct ModelGroundTruth {
  std::vector<int> labels;
  std::vector<double> theta;
  double c = 0.0;
  double phi = 0.0;  // (1/n) Σ θ_i²
  // Eigenvalues of CΠ in decreasing order; column p of model_vectors is v_p.
  Eigen::VectorXd model_eigs;
  Eigen::MatrixXd model_vectors;
};

struct GeneratedGraph {
  SparseGraph graph;
  ModelGroundTruth truth;
};

// Labels i.i.d. from π, θ from the spec rescaled to mean one.
ModelGroundTruth sample_model(const DcsbmConfig& config, std::mt19937_64& rng);

// Independent Bernoulli edges with probability min(1, θ_iθ_j C_{ℓiℓj}/n),
// sampled per class block with geometric skipping over θ-sorted nodes.
SparseGraph sample_edges(const ModelGroundTruth& truth, const Eigen::MatrixXd& affinity,
                         std::mt19937_64& rng);

GeneratedGraph generate_dcsbm(const DcsbmConfig& config, std::uint64_t seed);

// Data-driven cΦ: Σd² / Σd − 1.
double estimate_c_phi(const SparseGraph& graph);

// Text format: "# n <N>" header, then one "i j" pair per line (0-based).
// `comments` are written as extra "# ..." lines after the header.
void save_edge_list(const SparseGraph& graph, const std::filesystem::path& path,
                    std::span<const std::string> comments = {});
SparseGraph load_edge_list(const std::filesystem::path& path);
SparseGraph parse_edge_list(std::istream& in);

// "# n <N>" header, then "node label" per line.
void save_labels(std::span<const int> labels, const std::filesystem::path& path,
                 std::span<const std::string> comments = {});
std::vector<int> load_labels(const std::filesystem::path& path);

}  // namespace rlap
