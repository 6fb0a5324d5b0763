#include "rlap/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "rlap/errors.hpp"
#include "rlap/metrics.hpp"

namespace rlap {

Embedding build_embedding(const SparseGraph& graph, int k_hat, double c_phi_hat, const EmbeddingOptions& options) {
  if (k_hat < 2) throw std::invalid_argument("build_embedding needs k_hat >= 2");
  Embedding emb;
  emb.requested_k_hat = k_hat;
  emb.k_hat = 1;
  std::vector<Eigen::VectorXd> cols;
  for (int p = 2; p <= k_hat; ++p) {
    ZetaResult z;
    try {
      z = find_zeta(graph, p, c_phi_hat, options.zeta);
    } catch (const BeyondDetectableRank&) {
      emb.shrunk = true;
      break;
    }
    auto info = informative_eigenvector(graph, p, z.zeta, options.solver, options.polish_zeta && !z.at_lower_edge);
    emb.zeta_used.push_back(info.zeta);
    emb.zeta_search.push_back(std::move(z));
    cols.push_back(info.vector);
    emb.columns.push_back(std::move(info));
    emb.k_hat = p;
  }
  emb.data.resize(graph.num_nodes(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) emb.data.col(static_cast<Eigen::Index>(j)) = cols[j];
  return emb;
}

// ---------------------------------------------------------------------------

namespace {

struct LloydRun {
  std::vector<int> labels;
  Eigen::MatrixXd centroids;
  double wcss = 0.0;
  std::vector<double> history;
  int iterations = 0;
};

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Index drawn with probability proportional to weights (all >= 0).
Eigen::Index weighted_pick(const Eigen::VectorXd& weights, std::mt19937_64& rng) {
  const double total = weights.sum();
  if (!(total > 0.0)) return static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(weights.size()));
  const double target = uniform01(rng) * total;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (acc > target) return i;
  }
  // Rounding pushed target past the end: take the last point with weight.
  for (Eigen::Index i = weights.size() - 1; i >= 0; --i)
    if (weights[i] > 0.0) return i;
  return 0;
}

Eigen::MatrixXd plus_plus_seeds(const Eigen::MatrixXd& x, int k, std::mt19937_64& rng) {
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd centroids(k, x.cols());
  const auto first = static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(n));
  centroids.row(0) = x.row(first);
  Eigen::VectorXd d2 = (x.rowwise() - centroids.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < k; ++c) {
    const Eigen::Index pick = weighted_pick(d2, rng);
    centroids.row(c) = x.row(pick);
    d2 = d2.cwiseMin((x.rowwise() - centroids.row(c)).rowwise().squaredNorm());
  }
  return centroids;
}

// Nearest centroid per point (ties to the lower index); returns WCSS.
double assign(const Eigen::MatrixXd& x, const Eigen::MatrixXd& centroids, std::vector<int>& labels,
              Eigen::VectorXd& dist) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    int best = 0;
    double best_d = (x.row(i) - centroids.row(0)).squaredNorm();
    for (Eigen::Index c = 1; c < centroids.rows(); ++c) {
      const double d = (x.row(i) - centroids.row(c)).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(c);
      }
    }
    labels[static_cast<std::size_t>(i)] = best;
    dist[i] = best_d;
    total += best_d;
  }
  return total;
}

LloydRun lloyd(const Eigen::MatrixXd& x, int k, int max_iter, std::mt19937_64& rng) {
  const Eigen::Index n = x.rows();
  LloydRun run;
  run.centroids = plus_plus_seeds(x, k, rng);
  run.labels.assign(static_cast<std::size_t>(n), -1);
  std::vector<int> next(static_cast<std::size_t>(n));
  Eigen::VectorXd dist(n);

  for (int iter = 0; iter < max_iter; ++iter) {
    double wcss = assign(x, run.centroids, next, dist);
    if (!run.history.empty() && wcss > run.history.back() * (1.0 + 1e-12) + 1e-300)
      throw std::logic_error("k-means WCSS increased between Lloyd iterations");
    run.history.push_back(wcss);
    run.wcss = wcss;
    run.iterations = iter + 1;
    if (next == run.labels) break;
    run.labels = next;

    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, x.cols());
    std::vector<Eigen::Index> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(run.labels[static_cast<std::size_t>(i)]) += x.row(i);
      ++counts[static_cast<std::size_t>(run.labels[static_cast<std::size_t>(i)])];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        run.centroids.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
      } else {
        // Empty cluster: move it onto the worst-served point.
        Eigen::Index far = 0;
        dist.maxCoeff(&far);
        run.centroids.row(c) = x.row(far);
        dist[far] = 0.0;
      }
    }
  }
  return run;
}

}  // namespace

KMeansResult kmeans(const Eigen::MatrixXd& points, int k, const KMeansOptions& options) {
  if (k < 1) throw std::invalid_argument("k-means needs k >= 1");
  if (options.restarts < 1) throw std::invalid_argument("k-means needs at least one restart");
  const Eigen::Index n = points.rows();
  if (n < k) throw std::invalid_argument("k-means needs at least k points");

  // Canonical (lexicographic) row order.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index j = 0; j < points.cols(); ++j) {
      if (points(a, j) < points(b, j)) return true;
      if (points(a, j) > points(b, j)) return false;
    }
    return false;
  });
  Eigen::MatrixXd x(n, points.cols());
  for (Eigen::Index t = 0; t < n; ++t) x.row(t) = points.row(order[static_cast<std::size_t>(t)]);

  std::mt19937_64 rng(options.seed);
  LloydRun best;
  best.wcss = std::numeric_limits<double>::infinity();
  for (int rep = 0; rep < options.restarts; ++rep) {
    auto run = lloyd(x, k, options.max_iter, rng);
    if (run.wcss < best.wcss) best = std::move(run);
  }

  KMeansResult out;
  out.labels.resize(static_cast<std::size_t>(n));
  for (Eigen::Index t = 0; t < n; ++t) out.labels[static_cast<std::size_t>(order[static_cast<std::size_t>(t)])] = best.labels[static_cast<std::size_t>(t)];
  out.centroids = std::move(best.centroids);
  out.wcss = best.wcss;
  out.wcss_history = std::move(best.history);
  out.iterations = best.iterations;
  return out;
}

// ---------------------------------------------------------------------------

ClusterResult cluster(const SparseGraph& graph, const ClusterOptions& options) {
  if (graph.num_nodes() == 0) throw std::invalid_argument("cannot cluster an empty graph");
  ClusterResult result;
  auto& diag = result.diagnostics;
  result.labels.assign(static_cast<std::size_t>(graph.num_nodes()), 0);
  if (graph.num_edges() == 0) {
    diag.no_structure = true;
    return result;
  }

  diag.c_phi_hat = options.c_phi ? *options.c_phi : estimate_c_phi(graph);
  if (!(diag.c_phi_hat > 1.0)) {
    // Too sparse for the bulk edge to exceed one: nothing to separate.
    diag.no_structure = true;
    return result;
  }
  diag.k_estimate = estimate_k(graph, diag.c_phi_hat, options.embedding.solver);
  const int k_req = diag.k_estimate.k_hat;
  diag.k_hat_requested = k_req;
  const auto& values = diag.k_estimate.values;
  if (k_req >= 1 && values.size() >= static_cast<std::size_t>(k_req) + 4) {
    const auto gp = gap_profile(values, k_req);
    diag.gap = gp.gap;
    diag.bulk_spacing = gp.bulk_spacing;
  } else if (k_req >= 1 && values.size() > static_cast<std::size_t>(k_req)) {
    diag.gap = values[static_cast<std::size_t>(k_req) - 1] - values[static_cast<std::size_t>(k_req)];
  }
  if (k_req < 2) {
    diag.no_structure = true;
    return result;
  }

  const auto emb = build_embedding(graph, k_req, diag.c_phi_hat, options.embedding);
  diag.shrunk = emb.shrunk;
  for (const auto& col : emb.columns) {
    diag.zetas.push_back(col.zeta);
    diag.h_eigenvalues.push_back(col.h_eigenvalue);
    diag.h_residuals.push_back(col.h_residual);
    diag.rw_residuals.push_back(col.rw_residual);
  }
  if (emb.k_hat < 2) {
    diag.no_structure = true;
    return result;
  }
  result.k_hat = emb.k_hat;
  auto km = kmeans_non_isolated(graph, emb.data, emb.k_hat, options.kmeans);
  diag.wcss = km.wcss;
  result.labels = std::move(km.labels);
  return result;
}

KMeansResult kmeans_non_isolated(const SparseGraph& graph, const Eigen::MatrixXd& points, int k,
                                 const KMeansOptions& options) {
  const auto keep = non_isolated_nodes(graph);
  if (keep.size() == static_cast<std::size_t>(points.rows())) return kmeans(points, k, options);
  if (keep.size() < static_cast<std::size_t>(k))
    throw std::invalid_argument("kmeans_non_isolated: fewer non-isolated nodes than clusters");
  Eigen::MatrixXd sub(static_cast<Eigen::Index>(keep.size()), points.cols());
  for (std::size_t t = 0; t < keep.size(); ++t)
    sub.row(static_cast<Eigen::Index>(t)) = points.row(static_cast<Eigen::Index>(keep[t]));
  auto km = kmeans(sub, k, options);
  std::vector<int> labels(static_cast<std::size_t>(points.rows()), 0);
  for (std::size_t t = 0; t < keep.size(); ++t) labels[static_cast<std::size_t>(keep[t])] = km.labels[t];
  km.labels = std::move(labels);
  return km;
}

}  // namespace rlap
