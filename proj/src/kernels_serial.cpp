#include <cmath>

#include "rlap/kernels.hpp"

namespace rlap::kernels::serial {

void adjacency_multiply(const SparseGraph& g, std::span<const double> x, std::span<double> y) {
  const auto offsets = g.row_offsets();
  const auto cols = g.col_indices();
  for (NodeId i = 0; i < g.num_nodes(); ++i) {
    double acc = 0.0;
    for (auto e = offsets[i]; e < offsets[i + 1]; ++e) acc += x[cols[e]];
    y[i] = acc;
  }
}

void bethe_hessian_multiply(const SparseGraph& g, double r, std::span<const double> x, std::span<double> y) {
  const auto offsets = g.row_offsets();
  const auto cols = g.col_indices();
  const double shift = r * r - 1.0;
  for (NodeId i = 0; i < g.num_nodes(); ++i) {
    double acc = 0.0;
    for (auto e = offsets[i]; e < offsets[i + 1]; ++e) acc += x[cols[e]];
    y[i] = (shift + g.degree(i)) * x[i] - r * acc;
  }
}

void scaled_adjacency_multiply(const SparseGraph& g, std::span<const double> scale,
                               std::span<const double> x, std::span<double> y) {
  const auto offsets = g.row_offsets();
  const auto cols = g.col_indices();
  for (NodeId i = 0; i < g.num_nodes(); ++i) {
    double acc = 0.0;
    for (auto e = offsets[i]; e < offsets[i + 1]; ++e) acc += scale[cols[e]] * x[cols[e]];
    y[i] = scale[i] * acc;
  }
}

double dot(std::span<const double> x, std::span<const double> y) {
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
  return acc;
}

double norm2(std::span<const double> x) { return std::sqrt(dot(x, x)); }

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

void scale(double alpha, std::span<double> x) {
  for (auto& v : x) v *= alpha;
}

void project(std::span<const double> basis, std::size_t n, std::size_t ncols,
             std::span<const double> w, std::span<double> coeffs) {
  for (std::size_t j = 0; j < ncols; ++j) coeffs[j] = dot(basis.subspan(j * n, n), w);
}

void subtract_combination(std::span<const double> basis, std::size_t n, std::size_t ncols,
                          std::span<const double> coeffs, std::span<double> w) {
  for (std::size_t j = 0; j < ncols; ++j) axpy(-coeffs[j], basis.subspan(j * n, n), w);
}

}  // namespace rlap::kernels::serial
