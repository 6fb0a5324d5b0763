#include "rlap/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "rlap/kernels.hpp"

namespace rlap {

namespace k = kernels;

Eigen::VectorXd SymmetricOperator::operator()(const Eigen::VectorXd& x) const {
  Eigen::VectorXd y(dim);
  apply({x.data(), static_cast<std::size_t>(dim)}, {y.data(), static_cast<std::size_t>(dim)});
  return y;
}

bool EigenPairs::all_converged() const {
  return std::all_of(converged.begin(), converged.end(), [](bool c) { return c; });
}

namespace {

std::span<const double> cspan(const double* p, Eigen::Index n) { return {p, static_cast<std::size_t>(n)}; }
std::span<double> mspan(double* p, Eigen::Index n) { return {p, static_cast<std::size_t>(n)}; }

void fill_random(Eigen::Ref<Eigen::VectorXd> v, std::mt19937_64& rng) {
  for (Eigen::Index i = 0; i < v.size(); ++i)
    v[i] = static_cast<double>(rng() >> 11) * 0x1.0p-52 - 1.0;
}

void project_out(const Eigen::MatrixXd& basis, Eigen::Index ncols, Eigen::Ref<Eigen::VectorXd> w,
                 Eigen::VectorXd& c) {
  c.resize(ncols);
  if (ncols == 0) return;
  const Eigen::Index n = basis.rows();
  k::project(cspan(basis.data(), n * ncols), static_cast<std::size_t>(n), static_cast<std::size_t>(ncols),
             cspan(w.data(), n), mspan(c.data(), ncols));
  k::subtract_combination(cspan(basis.data(), n * ncols), static_cast<std::size_t>(n),
                          static_cast<std::size_t>(ncols), cspan(c.data(), ncols), mspan(w.data(), n));
}

// Two rounds of classical Gram-Schmidt against `locked` and the first `ncols`
// columns of `basis`. Each round covers both sets, otherwise roundoff in one
// is fed back through the other and grows across restarts.
void orthogonalize(const Eigen::MatrixXd& locked, const Eigen::MatrixXd& basis, Eigen::Index ncols,
                   Eigen::Ref<Eigen::VectorXd> w, Eigen::VectorXd* coeffs_out = nullptr) {
  Eigen::VectorXd c, scratch;
  Eigen::VectorXd total = Eigen::VectorXd::Zero(ncols);
  for (int pass = 0; pass < 2; ++pass) {
    project_out(locked, locked.cols(), w, scratch);
    project_out(basis, ncols, w, c);
    if (ncols > 0) total += c;
  }
  if (coeffs_out) *coeffs_out = total;
}

struct RunResult {
  std::vector<double> values;   // descending, of the signed operator
  Eigen::MatrixXd vectors;
  std::vector<double> estimates;  // Ritz residual estimates
};

// Thick-restart Lanczos for the `want` largest eigenpairs of the signed
// operator restricted to the orthogonal complement of `locked`.
class LanczosRun {
 public:
  LanczosRun(const SymmetricOperator& op, double sign, const Eigen::MatrixXd& locked, std::mt19937_64& rng)
      : op_(op), sign_(sign), locked_(locked), rng_(rng), n_(op.dim) {}

  RunResult run(int want, int basis, double tol, std::int64_t& budget, const Eigen::VectorXd* start) {
    const Eigen::Index avail = n_ - locked_.cols();
    RunResult out;
    want = static_cast<int>(std::min<Eigen::Index>(want, avail));
    if (want <= 0 || budget <= 0) return out;
    const Eigen::Index m = std::clamp<Eigen::Index>(basis, std::min<Eigen::Index>(want + 1, avail), avail);

    Eigen::MatrixXd V(n_, m + 1);
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
    if (start && start->size() == n_) V.col(0) = *start;
    else fill_random(V.col(0), rng_);
    orthogonalize(locked_, V, 0, V.col(0));
    if (V.col(0).norm() < 1e-8) {
      fill_random(V.col(0), rng_);
      orthogonalize(locked_, V, 0, V.col(0));
    }
    V.col(0).normalize();

    Eigen::VectorXd w(n_);
    Eigen::VectorXd h;
    Eigen::Index j0 = 0;
    double anorm = 0.0;
    while (true) {
      Eigen::Index mcur = m;
      double coupling = 0.0;
      bool exhausted = false;
      bool out_of_budget = false;
      for (Eigen::Index j = j0; j < m; ++j) {
        if (budget <= 0) {
          out_of_budget = true;
          mcur = j;
          break;
        }
        op_.apply(cspan(V.col(j).data(), n_), mspan(w.data(), n_));
        --budget;
        if (sign_ < 0) k::scale(-1.0, mspan(w.data(), n_));
        orthogonalize(locked_, V, j + 1, w, &h);
        T.block(0, j, j + 1, 1) = h;
        T.block(j, 0, 1, j + 1) = h.transpose();
        anorm = std::max(anorm, std::abs(h[j]));
        const double beta = k::norm2(cspan(w.data(), n_));
        anorm = std::max(anorm, beta);
        if (beta <= 1e-12 * anorm || beta == 0.0) {
          if (j + 1 + locked_.cols() >= n_) {
            exhausted = true;
            mcur = j + 1;
            break;
          }
          // Invariant subspace found; continue from a fresh direction.
          fill_random(V.col(j + 1), rng_);
          orthogonalize(locked_, V, j + 1, V.col(j + 1));
          V.col(j + 1).normalize();
          coupling = 0.0;
        } else {
          V.col(j + 1) = w / beta;
          coupling = beta;
        }
        if (j + 1 < m) {
          T(j + 1, j) = coupling;
          T(j, j + 1) = coupling;
        }
      }
      if (mcur == 0) return out;

      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T.topLeftCorner(mcur, mcur));
      const Eigen::VectorXd theta = es.eigenvalues().reverse();
      const Eigen::MatrixXd Y = es.eigenvectors().rowwise().reverse();
      const int got = static_cast<int>(std::min<Eigen::Index>(want, mcur));
      std::vector<double> est(static_cast<std::size_t>(got));
      bool all_conv = true;
      for (int i = 0; i < got; ++i) {
        est[static_cast<std::size_t>(i)] = exhausted ? 0.0 : std::abs(coupling * Y(mcur - 1, i));
        if (est[static_cast<std::size_t>(i)] > tol) all_conv = false;
      }
      if (got < want) all_conv = false;

      if (all_conv || exhausted || out_of_budget) {
        out.values.assign(theta.data(), theta.data() + got);
        out.vectors = V.leftCols(mcur) * Y.leftCols(got);
        out.estimates = std::move(est);
        return out;
      }

      const Eigen::Index keep = std::clamp<Eigen::Index>(want + (mcur - want) / 2, want, mcur - 1);
      const Eigen::MatrixXd kept = V.leftCols(mcur) * Y.leftCols(keep);
      V.col(keep) = V.col(mcur);
      V.leftCols(keep) = kept;
      T.setZero();
      for (Eigen::Index i = 0; i < keep; ++i) T(i, i) = theta[i];
      j0 = keep;
    }
  }

 private:
  const SymmetricOperator& op_;
  double sign_;
  const Eigen::MatrixXd& locked_;
  std::mt19937_64& rng_;
  Eigen::Index n_;
};

struct Locked {
  std::vector<double> values;  // signed operator, descending
  Eigen::MatrixXd vectors;
  std::vector<double> estimates;

  // Merge new pairs (orthogonal to the current ones) keeping the top `count`.
  void merge(RunResult&& run, int count) {
    const auto old_size = values.size();
    const auto total = old_size + run.values.size();
    std::vector<std::size_t> order(total);
    std::iota(order.begin(), order.end(), 0);
    auto value_of = [&](std::size_t i) { return i < old_size ? values[i] : run.values[i - old_size]; };
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return value_of(a) > value_of(b); });
    order.resize(std::min<std::size_t>(total, static_cast<std::size_t>(count)));

    const Eigen::Index n = std::max(vectors.rows(), run.vectors.rows());
    Eigen::MatrixXd merged(n, static_cast<Eigen::Index>(order.size()));
    std::vector<double> mv, me;
    for (std::size_t t = 0; t < order.size(); ++t) {
      const auto i = order[t];
      if (i < old_size) {
        merged.col(static_cast<Eigen::Index>(t)) = vectors.col(static_cast<Eigen::Index>(i));
        me.push_back(estimates[i]);
      } else {
        merged.col(static_cast<Eigen::Index>(t)) = run.vectors.col(static_cast<Eigen::Index>(i - old_size));
        me.push_back(run.estimates[i - old_size]);
      }
      mv.push_back(value_of(i));
    }
    values = std::move(mv);
    estimates = std::move(me);
    vectors = std::move(merged);
  }
};

}  // namespace

EigenPairs extremal_eigs(const SymmetricOperator& op, int count, SpectrumEnd end, const SolverOptions& options) {
  const std::int64_t n = op.dim;
  if (!op.apply) throw std::invalid_argument("operator has no apply function");
  if (count < 1 || count > n) throw std::invalid_argument("eigenpair count must be in [1, dim]");
  if (!(options.tol > 0.0)) throw std::invalid_argument("tolerance must be positive");

  const double sign = end == SpectrumEnd::Largest ? 1.0 : -1.0;
  std::int64_t budget = options.max_iter > 0
                            ? options.max_iter
                            : 10 * static_cast<std::int64_t>(count) *
                                  static_cast<std::int64_t>(std::ceil(std::sqrt(static_cast<double>(n))));
  const int basis = options.basis_size > 0 ? options.basis_size : std::max(40, 3 * count);
  // Locked pairs see the complement-projected operator; leave headroom for the
  // explicit residual check against the full operator.
  const double inner_tol = 0.1 * options.tol;
  std::mt19937_64 rng(options.seed);

  Locked locked;
  locked.vectors.resize(n, 0);
  Eigen::VectorXd start;
  const Eigen::VectorXd* start_ptr = nullptr;
  if (!options.start.empty()) {
    if (static_cast<std::int64_t>(options.start.size()) != n)
      throw std::invalid_argument("start vector length differs from operator dimension");
    start = Eigen::Map<const Eigen::VectorXd>(options.start.data(), n);
    start_ptr = &start;
  }

  const std::int64_t total_budget = budget;
  while (budget > 0) {
    const int need = count - static_cast<int>(locked.values.size());
    if (need > 0) {
      LanczosRun lanczos(op, sign, locked.vectors, rng);
      auto res = lanczos.run(need, basis, inner_tol, budget, start_ptr);
      start_ptr = nullptr;
      if (res.values.empty()) break;
      locked.merge(std::move(res), count);
      if (static_cast<int>(locked.values.size()) < count) break;
      continue;
    }
    if (!options.verify_degeneracy || locked.vectors.cols() >= n) break;

    // Fresh Krylov space in the complement; a Ritz value above the smallest
    // locked one means an eigenvalue was skipped.
    std::int64_t verify_budget = std::min(budget, std::max<std::int64_t>(2 * basis, (total_budget - budget) / 2));
    const std::int64_t before = verify_budget;
    LanczosRun probe(op, sign, locked.vectors, rng);
    auto res = probe.run(1, basis, inner_tol, verify_budget, nullptr);
    budget -= before - verify_budget;
    if (res.values.empty()) break;
    const double floor_value = locked.values.back();
    if (res.values.front() <= floor_value + options.tol) break;
    if (res.estimates.front() <= inner_tol) {
      locked.merge(std::move(res), count);
    } else {
      // Make room and converge the missed pair from the probe's Ritz vector.
      locked.values.pop_back();
      locked.estimates.pop_back();
      locked.vectors.conservativeResize(Eigen::NoChange, locked.vectors.cols() - 1);
      start = res.vectors.col(0);
      start_ptr = &start;
    }
  }

  EigenPairs out;
  out.matvecs = total_budget - budget;
  const auto got = static_cast<Eigen::Index>(locked.values.size());
  out.vectors = locked.vectors.leftCols(got);
  canonicalize_signs(out.vectors);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < got; ++i) {
    const double lambda = sign * locked.values[static_cast<std::size_t>(i)];
    op.apply(cspan(out.vectors.col(i).data(), n), mspan(y.data(), n));
    const double res = (y - lambda * out.vectors.col(i)).norm();
    out.values.push_back(lambda);
    out.residuals.push_back(res);
    out.converged.push_back(res <= options.tol);
  }
  // Pairs never reached inside the budget.
  for (Eigen::Index i = got; i < count; ++i) {
    out.values.push_back(std::numeric_limits<double>::quiet_NaN());
    out.residuals.push_back(std::numeric_limits<double>::infinity());
    out.converged.push_back(false);
  }
  if (got < count) {
    out.vectors.conservativeResize(n, count);
    out.vectors.rightCols(count - got).setZero();
  }
  return out;
}

EigenPairs dense_oracle(const Eigen::MatrixXd& matrix) {
  const Eigen::Index n = matrix.rows();
  if (matrix.cols() != n) throw std::invalid_argument("dense oracle needs a square matrix");
  if (n > kDenseOracleLimit) throw std::invalid_argument("dense oracle refuses n > 2000");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(matrix);
  if (es.info() != Eigen::Success) throw std::runtime_error("dense eigendecomposition failed");
  EigenPairs out;
  out.values.assign(es.eigenvalues().data(), es.eigenvalues().data() + n);
  out.vectors = es.eigenvectors();
  canonicalize_signs(out.vectors);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.residuals.push_back((matrix * out.vectors.col(i) - out.values[static_cast<std::size_t>(i)] * out.vectors.col(i)).norm());
    out.converged.push_back(true);
  }
  return out;
}

Eigen::MatrixXd to_dense(const SymmetricOperator& op) {
  const Eigen::Index n = op.dim;
  Eigen::MatrixXd m(n, n);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    e[j] = 1.0;
    m.col(j) = op(e);
    e[j] = 0.0;
  }
  return m;
}

void canonicalize_sign(Eigen::Ref<Eigen::VectorXd> v) {
  if (v.size() == 0) return;
  Eigen::Index arg = 0;
  v.cwiseAbs().maxCoeff(&arg);
  if (v[arg] < 0) v = -v;
}

void canonicalize_signs(Eigen::MatrixXd& vectors) {
  for (Eigen::Index j = 0; j < vectors.cols(); ++j) canonicalize_sign(vectors.col(j));
}

}  // namespace rlap

