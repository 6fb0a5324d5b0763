#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "rlap/eigensolver.hpp"
#include "rlap/graph.hpp"

namespace rlap {

// H_r = (r^2 - 1) I + D - r A. Holds a reference; the graph must outlive it.
class BetheHessianOp {
 public:
  BetheHessianOp(const SparseGraph& graph, double r);

  double r() const noexcept { return r_; }
  void apply(std::span<const double> x, std::span<double> y) const;
  SymmetricOperator as_operator() const;
  Eigen::MatrixXd dense() const;

 private:
  const SparseGraph* graph_;
  double r_;
};

enum class LaplacianView { Sym, Rw };

// L_tau^sym = D_tau^{-1/2} A D_tau^{-1/2} and L_tau^rw = D_tau^{-1} A with
// D_tau = D + tau I. Both share eigenvalues; rw vectors are D_tau^{-1/2} times
// sym vectors.
class RegLaplacianOp {
 public:
  // Throws std::domain_error when tau = 0 and some node has degree zero.
  RegLaplacianOp(const SparseGraph& graph, double tau);

  double tau() const noexcept { return tau_; }
  void apply_sym(std::span<const double> x, std::span<double> y) const;
  void apply_rw(std::span<const double> x, std::span<double> y) const;
  // Symmetric view, the one handed to the eigensolver.
  SymmetricOperator as_operator() const;
  Eigen::MatrixXd dense(LaplacianView view) const;

  // Unit-norm rw eigenvector from a sym eigenvector and back.
  Eigen::VectorXd sym_to_rw(const Eigen::VectorXd& u) const;
  Eigen::VectorXd rw_to_sym(const Eigen::VectorXd& x) const;

 private:
  const SparseGraph* graph_;
  double tau_;
  std::vector<double> inv_sqrt_;  // (d_i + tau)^{-1/2}
};

EigenPairs bethe_hessian_smallest(const SparseGraph& graph, double r, int count,
                                  const SolverOptions& solver = {});

struct ZetaOptions {
  double r_tol = 1e-3;  // relative bracket width
  double lower = 1.0 + 1e-6;
  SolverOptions solver;
};

struct ZetaResult {
  int p = 0;
  double zeta = 0.0;
  int bracket_evals = 0;
  double achieved_residual = 0.0;  // |s_p(H_zeta)|
  double lower = 0.0;               // final bracket
  double upper = 0.0;
  bool at_lower_edge = false;       // crossing lies below the search interval
  // (r, s_p(H_r)) at every evaluation, in order.
  std::vector<std::pair<double, double>> trace;
};

// Bisection on the sign of the p-th smallest eigenvalue of H_r over
// [1 + 1e-6, sqrt(c_phi_hat)]. Throws BeyondDetectableRank when that
// eigenvalue is still positive at the upper edge.
ZetaResult find_zeta(const SparseGraph& graph, int p, double c_phi_hat, const ZetaOptions& options = {});

struct InformativeVector {
  double zeta = 0.0;           // possibly polished, see below
  double h_eigenvalue = 0.0;   // s_p(H_zeta)
  double h_residual = 0.0;
  Eigen::VectorXd vector;      // unit norm, largest-magnitude entry positive
  double rw_eigenvalue = 0.0;  // Rayleigh-type estimate x'Lx / x'x of L^rw at tau = zeta^2 - 1
  double rw_residual = 0.0;    // ||zeta D_tau^{-1} A x - x||
  bool converged = false;
};

// p-th smallest eigenpair of H_zeta. When `polish` is set, zeta is first moved
// by Newton steps on s_p(H_r) (derivative 2r - x'Ax) until |s_p| reaches the
// solver tolerance, so the vector satisfies the rw relation at that zeta.
InformativeVector informative_eigenvector(const SparseGraph& graph, int p, double zeta,
                                          const SolverOptions& solver = {}, bool polish = true);

// `count` largest eigenpairs of L_tau^rw (values descending, unit rw vectors,
// rw residuals).
EigenPairs reg_laplacian_eigs(const SparseGraph& graph, double tau, int count,
                              const SolverOptions& solver = {});

struct KEstimate {
  int k_hat = 0;
  double c_phi_hat = 0.0;
  double threshold = 0.0;       // 1 / sqrt(c_phi_hat)
  std::vector<double> values;   // leading eigenvalues of L^rw at tau = c_phi_hat - 1
};

// Number of eigenvalues of L^rw_{cPhi - 1} strictly above 1/sqrt(cPhi),
// requested in batches of four.
KEstimate estimate_k(const SparseGraph& graph, std::optional<double> c_phi = std::nullopt,
                     const SolverOptions& solver = {});

// Leading eigenvalues of L_tau^rw, or of r L^rw_{r^2 - 1} with r = sqrt(tau + 1)
// when scale_by_r is set.
std::vector<double> spectrum_report(const SparseGraph& graph, double tau, int count, bool scale_by_r,
                                    const SolverOptions& solver = {});

}  // namespace rlap
