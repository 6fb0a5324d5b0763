#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace rlap {

// A symmetric linear map given only through its action. apply must be
// re-entrant: solvers running on different threads may share one operator.
struct SymmetricOperator {
  std::int64_t dim = 0;
  std::function<void(std::span<const double>, std::span<double>)> apply;

  Eigen::VectorXd operator()(const Eigen::VectorXd& x) const;
};

enum class SpectrumEnd { Smallest, Largest };

struct EigenPairs {
  // Ordered from the requested end inward: ascending for Smallest,
  // descending for Largest.
  std::vector<double> values;
  Eigen::MatrixXd vectors;  // dim x count, orthonormal columns
  std::vector<double> residuals;  // ||M x - lambda x||, computed explicitly
  std::vector<bool> converged;
  std::int64_t matvecs = 0;

  std::size_t size() const noexcept { return values.size(); }
  bool all_converged() const;
};

struct SolverOptions {
  double tol = 1e-8;
  // Total operator applications; 0 means 10 * count * ceil(sqrt(dim)).
  std::int64_t max_iter = 0;
  std::uint64_t seed = 0x5eed;
  // Krylov basis size; 0 picks max(40, 3 * count), capped at dim.
  int basis_size = 0;
  // After the wanted pairs converge, restart once from a fresh random vector
  // in their orthogonal complement to catch missed copies of degenerate
  // eigenvalues.
  bool verify_degeneracy = true;
  // Optional starting vector; empty means random.
  std::vector<double> start;
};

// `count` algebraically extremal eigenpairs by thick-restart Lanczos with full
// reorthogonalization and locking. Smallest-end requests run the same code on
// the negated operator. Pairs that miss the tolerance within max_iter are
// returned with converged = false.
EigenPairs extremal_eigs(const SymmetricOperator& op, int count, SpectrumEnd end,
                         const SolverOptions& options = {});

inline constexpr Eigen::Index kDenseOracleLimit = 2000;

// Full spectrum of a dense symmetric matrix, ascending. Refuses n > 2000.
EigenPairs dense_oracle(const Eigen::MatrixXd& matrix);

// Dense matrix of an operator by probing with unit vectors (tests, n small).
Eigen::MatrixXd to_dense(const SymmetricOperator& op);

// Flip each column so its largest-magnitude entry is positive.
void canonicalize_signs(Eigen::MatrixXd& vectors);
void canonicalize_sign(Eigen::Ref<Eigen::VectorXd> vector);

}  // namespace rlap
