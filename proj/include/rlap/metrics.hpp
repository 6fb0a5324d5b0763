#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace rlap {

struct OverlapReport {
  // Chance-corrected agreement under the best label permutation. Can fall
  // below zero (down to -1/(k-1)); summaries are not clamped.
  double overlap = 0.0;
  double overlap_identity = 0.0;         // same formula, no relabeling
  std::vector<int> best_permutation;     // estimated label -> truth label
  double overlap_positive_degree = 0.0;  // restricted to nodes with d_i > 0 (NaN if no degrees given)
};

// Ov = (max_sigma (1/n) sum_i [sigma(est_i) == truth_i] - 1/k) / (1 - 1/k).
// Exhaustive permutation search for k <= 8, Hungarian assignment above.
// Labels must lie in [0, k); k >= 2.
OverlapReport overlap(std::span<const int> estimated, std::span<const int> truth, int k,
                      std::span<const std::int32_t> degrees = {});

// confusion(a, b) = #{i : estimated_i = a, truth_i = b}.
Eigen::MatrixXd confusion_matrix(std::span<const int> estimated, std::span<const int> truth, int k);

// Permutation maximizing sum_a M(a, perm[a]) over a square matrix.
std::vector<int> best_assignment_bruteforce(const Eigen::MatrixXd& score);
std::vector<int> best_assignment_hungarian(const Eigen::MatrixXd& score);

struct DetectabilityInfo {
  double alpha = 0.0;    // (c_in - c_out) / sqrt(c)
  double alpha_c = 0.0;  // 2 / sqrt(phi)
  bool detectable = false;
};

DetectabilityInfo detectability(double c_in, double c_out, double c, double phi);

struct GapProfile {
  double gap = 0.0;           // s_p - s_{p+1}
  double bulk_spacing = 0.0;  // median of s_q - s_{q+1}, q > p
};

// values sorted in decreasing order; p is 1-based. Needs at least p + 4
// values so the median is taken over three or more spacings.
GapProfile gap_profile(std::span<const double> values, int p);

}  // namespace rlap
