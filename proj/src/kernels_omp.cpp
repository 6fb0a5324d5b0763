#include <algorithm>
#include <cmath>
#include <vector>

#include <omp.h>

#include "rlap/kernels.hpp"

namespace rlap::kernels {

namespace {

// Below this size the fork/join costs more than the loop.
constexpr std::ptrdiff_t kParallelThreshold = 8192;

std::ptrdiff_t num_blocks(std::size_t n) {
  return static_cast<std::ptrdiff_t>((n + kReductionBlock - 1) / kReductionBlock);
}

}  // namespace

void adjacency_multiply(const SparseGraph& g, std::span<const double> x, std::span<double> y) {
  const auto offsets = g.row_offsets();
  const auto cols = g.col_indices();
  const std::ptrdiff_t n = g.num_nodes();
#pragma omp parallel for schedule(static) if (n >= kParallelThreshold)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (auto e = offsets[i]; e < offsets[i + 1]; ++e) acc += x[cols[e]];
    y[i] = acc;
  }
}

void bethe_hessian_multiply(const SparseGraph& g, double r, std::span<const double> x, std::span<double> y) {
  const auto offsets = g.row_offsets();
  const auto cols = g.col_indices();
  const auto deg = g.degrees();
  const double shift = r * r - 1.0;
  const std::ptrdiff_t n = g.num_nodes();
#pragma omp parallel for schedule(static) if (n >= kParallelThreshold)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (auto e = offsets[i]; e < offsets[i + 1]; ++e) acc += x[cols[e]];
    y[i] = (shift + deg[i]) * x[i] - r * acc;
  }
}

void scaled_adjacency_multiply(const SparseGraph& g, std::span<const double> scale,
                               std::span<const double> x, std::span<double> y) {
  const auto offsets = g.row_offsets();
  const auto cols = g.col_indices();
  const std::ptrdiff_t n = g.num_nodes();
#pragma omp parallel for schedule(static) if (n >= kParallelThreshold)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (auto e = offsets[i]; e < offsets[i + 1]; ++e) acc += scale[cols[e]] * x[cols[e]];
    y[i] = scale[i] * acc;
  }
}

double dot(std::span<const double> x, std::span<const double> y) {
  const auto nb = num_blocks(x.size());
  std::vector<double> partial(static_cast<std::size_t>(nb), 0.0);
#pragma omp parallel for schedule(static) if (static_cast<std::ptrdiff_t>(x.size()) >= kParallelThreshold)
  for (std::ptrdiff_t b = 0; b < nb; ++b) {
    const std::size_t lo = static_cast<std::size_t>(b) * kReductionBlock;
    const std::size_t hi = std::min(x.size(), lo + kReductionBlock);
    double acc = 0.0;
    for (std::size_t i = lo; i < hi; ++i) acc += x[i] * y[i];
    partial[static_cast<std::size_t>(b)] = acc;
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

double norm2(std::span<const double> x) { return std::sqrt(dot(x, x)); }

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  const auto n = static_cast<std::ptrdiff_t>(x.size());
#pragma omp parallel for schedule(static) if (n >= kParallelThreshold)
  for (std::ptrdiff_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scale(double alpha, std::span<double> x) {
  const auto n = static_cast<std::ptrdiff_t>(x.size());
#pragma omp parallel for schedule(static) if (n >= kParallelThreshold)
  for (std::ptrdiff_t i = 0; i < n; ++i) x[i] *= alpha;
}

void project(std::span<const double> basis, std::size_t n, std::size_t ncols,
             std::span<const double> w, std::span<double> coeffs) {
  if (ncols == 0) return;
  const auto nb = num_blocks(n);
  std::vector<double> partial(static_cast<std::size_t>(nb) * ncols, 0.0);
#pragma omp parallel for schedule(static) if (static_cast<std::ptrdiff_t>(n) >= kParallelThreshold)
  for (std::ptrdiff_t b = 0; b < nb; ++b) {
    const std::size_t lo = static_cast<std::size_t>(b) * kReductionBlock;
    const std::size_t hi = std::min(n, lo + kReductionBlock);
    double* out = partial.data() + static_cast<std::size_t>(b) * ncols;
    for (std::size_t j = 0; j < ncols; ++j) {
      const double* col = basis.data() + j * n;
      double acc = 0.0;
      for (std::size_t i = lo; i < hi; ++i) acc += col[i] * w[i];
      out[j] = acc;
    }
  }
  for (std::size_t j = 0; j < ncols; ++j) coeffs[j] = 0.0;
  for (std::ptrdiff_t b = 0; b < nb; ++b)
    for (std::size_t j = 0; j < ncols; ++j) coeffs[j] += partial[static_cast<std::size_t>(b) * ncols + j];
}

void subtract_combination(std::span<const double> basis, std::size_t n, std::size_t ncols,
                          std::span<const double> coeffs, std::span<double> w) {
  if (ncols == 0) return;
  const auto nb = num_blocks(n);
#pragma omp parallel for schedule(static) if (static_cast<std::ptrdiff_t>(n) >= kParallelThreshold)
  for (std::ptrdiff_t b = 0; b < nb; ++b) {
    const std::size_t lo = static_cast<std::size_t>(b) * kReductionBlock;
    const std::size_t hi = std::min(n, lo + kReductionBlock);
    for (std::size_t j = 0; j < ncols; ++j) {
      const double* col = basis.data() + j * n;
      const double c = coeffs[j];
      for (std::size_t i = lo; i < hi; ++i) w[i] -= c * col[i];
    }
  }
}

}  // namespace rlap::kernels
