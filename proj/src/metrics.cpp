#include "rlap/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace rlap {

Eigen::MatrixXd confusion_matrix(std::span<const int> estimated, std::span<const int> truth, int k) {
  if (estimated.size() != truth.size()) throw std::invalid_argument("label vectors differ in length");
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(k, k);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const int a = estimated[i];
    const int b = truth[i];
    if (a < 0 || a >= k || b < 0 || b >= k) throw std::invalid_argument("label outside [0, k)");
    m(a, b) += 1.0;
  }
  return m;
}

std::vector<int> best_assignment_bruteforce(const Eigen::MatrixXd& score) {
  const auto k = static_cast<int>(score.rows());
  std::vector<int> perm(static_cast<std::size_t>(k));
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<int> best = perm;
  double best_value = -std::numeric_limits<double>::infinity();
  do {
    double v = 0.0;
    for (int a = 0; a < k; ++a) v += score(a, perm[static_cast<std::size_t>(a)]);
    if (v > best_value) {
      best_value = v;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

// Kuhn-Munkres with potentials (O(k^3)), run on the negated score.
std::vector<int> best_assignment_hungarian(const Eigen::MatrixXd& score) {
  const auto k = static_cast<int>(score.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<std::size_t>(k) + 1, 0.0), v(static_cast<std::size_t>(k) + 1, 0.0);
  std::vector<int> match(static_cast<std::size_t>(k) + 1, 0), way(static_cast<std::size_t>(k) + 1, 0);
  auto cost = [&](int row, int col) { return -score(row - 1, col - 1); };
  for (int row = 1; row <= k; ++row) {
    match[0] = row;
    int col0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(k) + 1, inf);
    std::vector<char> used(static_cast<std::size_t>(k) + 1, 0);
    do {
      used[static_cast<std::size_t>(col0)] = 1;
      const int row0 = match[static_cast<std::size_t>(col0)];
      double delta = inf;
      int col1 = 0;
      for (int col = 1; col <= k; ++col) {
        if (used[static_cast<std::size_t>(col)]) continue;
        const double cur = cost(row0, col) - u[static_cast<std::size_t>(row0)] - v[static_cast<std::size_t>(col)];
        if (cur < minv[static_cast<std::size_t>(col)]) {
          minv[static_cast<std::size_t>(col)] = cur;
          way[static_cast<std::size_t>(col)] = col0;
        }
        if (minv[static_cast<std::size_t>(col)] < delta) {
          delta = minv[static_cast<std::size_t>(col)];
          col1 = col;
        }
      }
      for (int col = 0; col <= k; ++col) {
        if (used[static_cast<std::size_t>(col)]) {
          u[static_cast<std::size_t>(match[static_cast<std::size_t>(col)])] += delta;
          v[static_cast<std::size_t>(col)] -= delta;
        } else {
          minv[static_cast<std::size_t>(col)] -= delta;
        }
      }
      col0 = col1;
    } while (match[static_cast<std::size_t>(col0)] != 0);
    do {
      const int col1 = way[static_cast<std::size_t>(col0)];
      match[static_cast<std::size_t>(col0)] = match[static_cast<std::size_t>(col1)];
      col0 = col1;
    } while (col0 != 0);
  }
  std::vector<int> perm(static_cast<std::size_t>(k));
  for (int col = 1; col <= k; ++col) perm[static_cast<std::size_t>(match[static_cast<std::size_t>(col)] - 1)] = col - 1;
  return perm;
}

namespace {

double chance_corrected(double agreement, int k) { return (agreement - 1.0 / k) / (1.0 - 1.0 / k); }

double agreement(const Eigen::MatrixXd& confusion, std::span<const int> perm, double n) {
  double hits = 0.0;
  for (Eigen::Index a = 0; a < confusion.rows(); ++a) hits += confusion(a, perm[static_cast<std::size_t>(a)]);
  return hits / n;
}

}  // namespace

OverlapReport overlap(std::span<const int> estimated, std::span<const int> truth, int k,
                      std::span<const std::int32_t> degrees) {
  if (k < 2) throw std::invalid_argument("overlap needs k >= 2");
  if (estimated.size() != truth.size()) throw std::invalid_argument("label vectors differ in length");
  if (truth.empty()) throw std::invalid_argument("overlap of empty label vectors");
  if (!degrees.empty() && degrees.size() != truth.size()) throw std::invalid_argument("degree vector length mismatch");

  const auto confusion = confusion_matrix(estimated, truth, k);
  OverlapReport report;
  report.best_permutation = k <= 8 ? best_assignment_bruteforce(confusion) : best_assignment_hungarian(confusion);
  std::vector<int> identity(static_cast<std::size_t>(k));
  std::iota(identity.begin(), identity.end(), 0);
  const auto n = static_cast<double>(truth.size());
  report.overlap = chance_corrected(agreement(confusion, report.best_permutation, n), k);
  report.overlap_identity = chance_corrected(agreement(confusion, identity, n), k);

  report.overlap_positive_degree = std::numeric_limits<double>::quiet_NaN();
  if (!degrees.empty()) {
    double hits = 0.0;
    double count = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      if (degrees[i] <= 0) continue;
      count += 1.0;
      if (report.best_permutation[static_cast<std::size_t>(estimated[i])] == truth[i]) hits += 1.0;
    }
    if (count > 0) report.overlap_positive_degree = chance_corrected(hits / count, k);
  }
  return report;
}

DetectabilityInfo detectability(double c_in, double c_out, double c, double phi) {
  if (!(c > 0.0) || !(phi > 0.0)) throw std::invalid_argument("detectability needs c > 0 and phi > 0");
  DetectabilityInfo info;
  info.alpha = (c_in - c_out) / std::sqrt(c);
  info.alpha_c = 2.0 / std::sqrt(phi);
  info.detectable = info.alpha > info.alpha_c;
  return info;
}

GapProfile gap_profile(std::span<const double> values, int p) {
  if (p < 1) throw std::invalid_argument("gap_profile needs p >= 1");
  if (values.size() < static_cast<std::size_t>(p) + 4)
    throw std::invalid_argument("gap_profile needs at least p + 4 eigenvalues");
  GapProfile out;
  const auto pi = static_cast<std::size_t>(p);
  out.gap = values[pi - 1] - values[pi];
  std::vector<double> spacing;
  for (std::size_t q = pi; q + 1 < values.size(); ++q) spacing.push_back(values[q] - values[q + 1]);
  std::sort(spacing.begin(), spacing.end());
  const auto m = spacing.size();
  out.bulk_spacing = m % 2 ? spacing[m / 2] : 0.5 * (spacing[m / 2 - 1] + spacing[m / 2]);
  return out;
}

}  // namespace rlap
