#pragma once

#include <cstddef>
#include <span>

#include "rlap/graph.hpp"

// Hot loops of the eigensolver and the graph operators.
//
// rlap::kernels holds the OpenMP versions used by the library; rlap::kernels::serial
// holds straightforward single-threaded references used by the tests and the
// benchmark. Reductions in the parallel path accumulate over fixed-size
// blocks and combine the block partials in order, so results are bitwise
// identical for any thread count.
namespace rlap::kernels {

inline constexpr std::size_t kReductionBlock = 4096;

// y = A x
void adjacency_multiply(const SparseGraph& g, std::span<const double> x, std::span<double> y);

// y = ((r^2 - 1) I + D - r A) x
void bethe_hessian_multiply(const SparseGraph& g, double r, std::span<const double> x, std::span<double> y);

// y = S A S x with S = diag(scale); scale = (d + tau)^{-1/2} gives the
// symmetric regularized Laplacian.
void scaled_adjacency_multiply(const SparseGraph& g, std::span<const double> scale,
                               std::span<const double> x, std::span<double> y);

double dot(std::span<const double> x, std::span<const double> y);
double norm2(std::span<const double> x);
// y += alpha x
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void scale(double alpha, std::span<double> x);

// basis is column-major n x ncols. coeffs[j] = <basis_j, w>.
void project(std::span<const double> basis, std::size_t n, std::size_t ncols,
             std::span<const double> w, std::span<double> coeffs);
// w -= basis * coeffs
void subtract_combination(std::span<const double> basis, std::size_t n, std::size_t ncols,
                          std::span<const double> coeffs, std::span<double> w);

namespace serial {

void adjacency_multiply(const SparseGraph& g, std::span<const double> x, std::span<double> y);
void bethe_hessian_multiply(const SparseGraph& g, double r, std::span<const double> x, std::span<double> y);
void scaled_adjacency_multiply(const SparseGraph& g, std::span<const double> scale,
                               std::span<const double> x, std::span<double> y);
double dot(std::span<const double> x, std::span<const double> y);
double norm2(std::span<const double> x);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void scale(double alpha, std::span<double> x);
void project(std::span<const double> basis, std::size_t n, std::size_t ncols,
             std::span<const double> w, std::span<double> coeffs);
void subtract_combination(std::span<const double> basis, std::size_t n, std::size_t ncols,
                          std::span<const double> coeffs, std::span<double> w);

}  // namespace serial

}  // namespace rlap::kernels
