#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rlap/graph.hpp"
#include "rlap/spectral.hpp"

namespace rlap {

// Column p - 2 holds the informative eigenvector x_p, p = 2..k_hat.
struct Embedding {
  Eigen::MatrixXd data;
  std::vector<double> zeta_used;
  std::vector<ZetaResult> zeta_search;
  std::vector<InformativeVector> columns;  // per-column diagnostics (vector duplicated in data)
  int requested_k_hat = 0;
  int k_hat = 0;        // after shrinking on a failed zeta search
  bool shrunk = false;

  Eigen::Index rows() const noexcept { return data.rows(); }
  Eigen::Index cols() const noexcept { return data.cols(); }
};

struct EmbeddingOptions {
  ZetaOptions zeta;
  SolverOptions solver;
  bool polish_zeta = true;
};

// For p = 2..k_hat: zeta_p by bisection, then the p-th smallest eigenvector of
// H_{zeta_p}. Stops at the first p whose search fails and shrinks k_hat.
Embedding build_embedding(const SparseGraph& graph, int k_hat, double c_phi_hat,
                          const EmbeddingOptions& options = {});

struct KMeansOptions {
  int restarts = 16;
  std::uint64_t seed = 0;
  int max_iter = 300;
};

struct KMeansResult {
  std::vector<int> labels;
  Eigen::MatrixXd centroids;  // k x dim
  double wcss = 0.0;
  std::vector<double> wcss_history;  // of the winning restart, one per assignment step
  int iterations = 0;
};

// Lloyd iterations from k-means++ seeds, best of `restarts` by WCSS. Points
// are processed in lexicographic row order, so relabeling the rows relabels
// the output identically.
KMeansResult kmeans(const Eigen::MatrixXd& points, int k, const KMeansOptions& options = {});

// k-means over the rows of nodes with d > 0 only. Isolated nodes have a zero
// embedding row that carries no information but would drag a centroid toward
// the origin; they get label 0.
KMeansResult kmeans_non_isolated(const SparseGraph& graph, const Eigen::MatrixXd& points, int k,
                                 const KMeansOptions& options = {});

struct ClusterOptions {
  std::optional<double> c_phi;  // injected ground truth; default is the degree estimate
  EmbeddingOptions embedding;
  KMeansOptions kmeans;
};

struct ClusterDiagnostics {
  double c_phi_hat = 0.0;
  KEstimate k_estimate;
  int k_hat_requested = 0;
  bool shrunk = false;
  bool no_structure = false;
  std::vector<double> zetas;
  std::vector<double> h_eigenvalues;
  std::vector<double> h_residuals;
  std::vector<double> rw_residuals;
  double gap = std::numeric_limits<double>::quiet_NaN();           // s_k - s_{k+1} of L^rw_{cPhi-1}
  double bulk_spacing = std::numeric_limits<double>::quiet_NaN();
  double wcss = 0.0;
};

struct ClusterResult {
  int k_hat = 1;
  std::vector<int> labels;
  ClusterDiagnostics diagnostics;
};

// Estimate k, embed with informative eigenvectors, then k-means on the rows.
ClusterResult cluster(const SparseGraph& graph, const ClusterOptions& options = {});

}  // namespace rlap
