#include "rlap/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rlap/errors.hpp"
#include "rlap/kernels.hpp"

namespace rlap {

namespace {

std::span<const double> cspan(const Eigen::VectorXd& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }
std::span<double> mspan(Eigen::VectorXd& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

Eigen::MatrixXd dense_adjacency(const SparseGraph& g) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(g.num_nodes(), g.num_nodes());
  for (NodeId i = 0; i < g.num_nodes(); ++i)
    for (NodeId j : g.neighbors(i)) a(i, j) = 1.0;
  return a;
}

}  // namespace

// ---------------------------------------------------------------------------

BetheHessianOp::BetheHessianOp(const SparseGraph& graph, double r) : graph_(&graph), r_(r) {
  if (!std::isfinite(r)) throw std::invalid_argument("Bethe-Hessian parameter must be finite");
}

void BetheHessianOp::apply(std::span<const double> x, std::span<double> y) const {
  kernels::bethe_hessian_multiply(*graph_, r_, x, y);
}

SymmetricOperator BetheHessianOp::as_operator() const {
  return {graph_->num_nodes(), [op = *this](std::span<const double> x, std::span<double> y) { op.apply(x, y); }};
}

Eigen::MatrixXd BetheHessianOp::dense() const {
  const auto& g = *graph_;
  Eigen::MatrixXd h = -r_ * dense_adjacency(g);
  for (NodeId i = 0; i < g.num_nodes(); ++i) h(i, i) += r_ * r_ - 1.0 + g.degree(i);
  return h;
}

RegLaplacianOp::RegLaplacianOp(const SparseGraph& graph, double tau) : graph_(&graph), tau_(tau) {
  if (!(tau >= 0.0) || !std::isfinite(tau)) throw std::invalid_argument("regularization tau must be >= 0");
  inv_sqrt_.resize(static_cast<std::size_t>(graph.num_nodes()));
  for (NodeId i = 0; i < graph.num_nodes(); ++i) {
    const double d = graph.degree(i) + tau;
    if (d <= 0.0)
      throw std::domain_error("D + tau I is singular: node " + std::to_string(i) +
                              " has degree zero; use tau > 0 or drop isolated nodes");
    inv_sqrt_[static_cast<std::size_t>(i)] = 1.0 / std::sqrt(d);
  }
}

void RegLaplacianOp::apply_sym(std::span<const double> x, std::span<double> y) const {
  kernels::scaled_adjacency_multiply(*graph_, inv_sqrt_, x, y);
}

void RegLaplacianOp::apply_rw(std::span<const double> x, std::span<double> y) const {
  kernels::adjacency_multiply(*graph_, x, y);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] *= inv_sqrt_[i] * inv_sqrt_[i];
}

SymmetricOperator RegLaplacianOp::as_operator() const {
  return {graph_->num_nodes(), [op = *this](std::span<const double> x, std::span<double> y) { op.apply_sym(x, y); }};
}

Eigen::MatrixXd RegLaplacianOp::dense(LaplacianView view) const {
  const Eigen::Map<const Eigen::VectorXd> s(inv_sqrt_.data(), static_cast<Eigen::Index>(inv_sqrt_.size()));
  const Eigen::MatrixXd a = dense_adjacency(*graph_);
  if (view == LaplacianView::Sym) return s.asDiagonal() * a * s.asDiagonal();
  const Eigen::VectorXd s2 = s.cwiseProduct(s);
  return s2.asDiagonal() * a;
}

Eigen::VectorXd RegLaplacianOp::sym_to_rw(const Eigen::VectorXd& u) const {
  const Eigen::Map<const Eigen::VectorXd> s(inv_sqrt_.data(), static_cast<Eigen::Index>(inv_sqrt_.size()));
  Eigen::VectorXd x = s.cwiseProduct(u);
  const double nrm = x.norm();
  if (nrm > 0) x /= nrm;
  return x;
}

Eigen::VectorXd RegLaplacianOp::rw_to_sym(const Eigen::VectorXd& x) const {
  const Eigen::Map<const Eigen::VectorXd> s(inv_sqrt_.data(), static_cast<Eigen::Index>(inv_sqrt_.size()));
  Eigen::VectorXd u = x.cwiseQuotient(s);
  const double nrm = u.norm();
  if (nrm > 0) u /= nrm;
  return u;
}

// ---------------------------------------------------------------------------

EigenPairs bethe_hessian_smallest(const SparseGraph& graph, double r, int count, const SolverOptions& solver) {
  if (!(r > 1.0)) throw std::invalid_argument("Bethe-Hessian search needs r > 1");
  return extremal_eigs(BetheHessianOp(graph, r).as_operator(), count, SpectrumEnd::Smallest, solver);
}

ZetaResult find_zeta(const SparseGraph& graph, int p, double c_phi_hat, const ZetaOptions& options) {
  if (p < 2) throw std::invalid_argument("find_zeta needs p >= 2 (zeta_1 = 1 by construction)");
  if (!(c_phi_hat > 1.0)) throw std::invalid_argument("find_zeta needs c_phi_hat > 1");
  if (p > graph.num_nodes()) throw std::invalid_argument("p exceeds the node count");

  ZetaResult result;
  result.p = p;
  SolverOptions solver = options.solver;
  Eigen::VectorXd warm;

  auto evaluate = [&](double r) {
    const auto pairs = bethe_hessian_smallest(graph, r, p, solver);
    if (!pairs.converged[static_cast<std::size_t>(p - 1)] && std::isnan(pairs.values.back()))
      throw SolverError("Bethe-Hessian eigensolve produced no estimate at r = " + std::to_string(r));
    // Next solve starts near the current invariant subspace.
    warm = pairs.vectors.rowwise().sum();
    solver.start.assign(warm.data(), warm.data() + warm.size());
    ++result.bracket_evals;
    const double s = pairs.values[static_cast<std::size_t>(p - 1)];
    result.trace.emplace_back(r, s);
    return s;
  };

  double lo = options.lower;
  double hi = std::sqrt(c_phi_hat);
  if (!(hi > lo)) throw std::invalid_argument("sqrt(c_phi_hat) must exceed the lower bracket edge");

  const double s_hi = evaluate(hi);
  if (s_hi > 0.0) throw BeyondDetectableRank(p, s_hi);
  const double s_lo = evaluate(lo);
  const double sign_tol = options.solver.tol;
  if (s_lo < -sign_tol) {
    result.zeta = lo;
    result.lower = lo;
    result.upper = lo;
    result.at_lower_edge = true;
    result.achieved_residual = std::abs(s_lo);
    return result;
  }

  double f_lo = s_lo;
  double f_hi = s_hi;
  while (hi - lo > options.r_tol * lo) {
    // Bracket invariant: s_p(H_lo) > 0 >= s_p(H_hi) (up to solver tolerance).
    if (!(f_lo >= -sign_tol && f_hi <= 0.0))
      throw std::logic_error("find_zeta bracket lost its sign change");
    const double mid = 0.5 * (lo + hi);
    const double f_mid = evaluate(mid);
    if (f_mid > 0.0) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
      f_hi = f_mid;
    }
  }
  result.lower = lo;
  result.upper = hi;
  if (std::abs(f_lo) < std::abs(f_hi)) {
    result.zeta = lo;
    result.achieved_residual = std::abs(f_lo);
  } else {
    result.zeta = hi;
    result.achieved_residual = std::abs(f_hi);
  }
  return result;
}

namespace {
constexpr double kPolishWindow = 0.01;
}

InformativeVector informative_eigenvector(const SparseGraph& graph, int p, double zeta, const SolverOptions& solver,
                                          bool polish) {
  if (p < 1 || p > graph.num_nodes()) throw std::invalid_argument("eigenvector index out of range");
  if (!(zeta > 1.0)) throw std::invalid_argument("zeta must exceed 1");

  SolverOptions opts = solver;
  auto solve = [&](double r) {
    auto pairs = bethe_hessian_smallest(graph, r, p, opts);
    if (std::isnan(pairs.values.back())) throw SolverError("Bethe-Hessian eigensolve produced no estimate");
    Eigen::VectorXd warm = pairs.vectors.rowwise().sum();
    opts.start.assign(warm.data(), warm.data() + warm.size());
    return pairs;
  };

  double r = zeta;
  auto pairs = solve(r);
  auto idx = static_cast<std::size_t>(p - 1);
  if (polish) {
    double best_r = r;
    auto best = pairs;
    for (int iter = 0; iter < 12 && std::abs(best.values[idx]) > solver.tol; ++iter) {
      const Eigen::VectorXd x = best.vectors.col(p - 1);
      Eigen::VectorXd ax(x.size());
      kernels::adjacency_multiply(graph, cspan(x), mspan(ax));
      const double slope = 2.0 * best_r - x.dot(ax);
      if (!(std::abs(slope) > 1e-12)) break;
      double step = -best.values[idx] / slope;
      // Stay next to the bisection result: a Newton step can otherwise hop
      // onto a neighbouring root of a different eigenvalue branch.
      const double next = std::clamp(best_r + step, zeta * (1.0 - kPolishWindow), zeta * (1.0 + kPolishWindow));
      if (!(next > 1.0) || next == best_r) break;
      auto trial = solve(next);
      if (!(std::abs(trial.values[idx]) < std::abs(best.values[idx]))) break;
      best_r = next;
      best = std::move(trial);
    }
    r = best_r;
    pairs = std::move(best);
  }

  InformativeVector out;
  out.zeta = r;
  out.h_eigenvalue = pairs.values[idx];
  out.h_residual = pairs.residuals[idx];
  out.converged = pairs.converged[idx];
  out.vector = pairs.vectors.col(p - 1);
  canonicalize_sign(out.vector);

  const double tau = r * r - 1.0;
  const RegLaplacianOp lap(graph, tau);
  Eigen::VectorXd lx(out.vector.size());
  lap.apply_rw(cspan(out.vector), mspan(lx));
  out.rw_eigenvalue = out.vector.dot(lx) / out.vector.squaredNorm();
  out.rw_residual = (r * lx - out.vector).norm();
  return out;
}

EigenPairs reg_laplacian_eigs(const SparseGraph& graph, double tau, int count, const SolverOptions& solver) {
  const RegLaplacianOp lap(graph, tau);
  auto pairs = extremal_eigs(lap.as_operator(), count, SpectrumEnd::Largest, solver);
  Eigen::VectorXd lx(graph.num_nodes());
  for (Eigen::Index j = 0; j < pairs.vectors.cols(); ++j) {
    const auto idx = static_cast<std::size_t>(j);
    if (std::isnan(pairs.values[idx])) continue;
    Eigen::VectorXd x = lap.sym_to_rw(pairs.vectors.col(j));
    canonicalize_sign(x);
    lap.apply_rw(cspan(x), mspan(lx));
    pairs.residuals[idx] = (lx - pairs.values[idx] * x).norm();
    pairs.vectors.col(j) = x;
  }
  return pairs;
}

KEstimate estimate_k(const SparseGraph& graph, std::optional<double> c_phi, const SolverOptions& solver) {
  if (graph.num_nodes() == 0) throw std::invalid_argument("estimate_k needs a non-empty graph");
  KEstimate out;
  out.c_phi_hat = c_phi ? *c_phi : estimate_c_phi(graph);
  if (!(out.c_phi_hat > 1.0)) throw std::invalid_argument("estimate_k needs cPhi > 1");
  out.threshold = 1.0 / std::sqrt(out.c_phi_hat);
  const double tau = out.c_phi_hat - 1.0;
  const RegLaplacianOp lap(graph, tau);
  const auto op = lap.as_operator();

  const int n = graph.num_nodes();
  int count = std::min(4, n);
  while (true) {
    const auto pairs = extremal_eigs(op, count, SpectrumEnd::Largest, solver);
    out.values = pairs.values;
    const auto above = std::count_if(pairs.values.begin(), pairs.values.end(),
                                     [&](double v) { return v > out.threshold; });
    out.k_hat = static_cast<int>(above);
    if (above < count || count == n) break;
    count = std::min(count + 4, n);
  }
  return out;
}

std::vector<double> spectrum_report(const SparseGraph& graph, double tau, int count, bool scale_by_r,
                                    const SolverOptions& solver) {
  const RegLaplacianOp lap(graph, tau);
  auto pairs = extremal_eigs(lap.as_operator(), count, SpectrumEnd::Largest, solver);
  if (scale_by_r) {
    const double r = std::sqrt(tau + 1.0);
    for (auto& v : pairs.values) v *= r;
  }
  return pairs.values;
}

}  // namespace rlap
