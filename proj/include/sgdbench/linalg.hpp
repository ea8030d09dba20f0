#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sgdbench/dataset.hpp"

namespace sgdbench::linalg {

using DenseVector = std::vector<double>;

// All kernels are data-parallel and bit-deterministic for any worker count:
// outputs with one writer per element need no care, and reductions use a
// fixed pairwise tree over blocks of kReduceBlock examples, so the summation
// order never depends on how many threads execute it.
inline constexpr std::size_t kReduceBlock = 256;

// out_i = x_i . v over the given rows (ascending ids). Empty rows span means
// all examples. Supports every layout; within-row summation is in ascending
// slot order.
DenseVector matvec(const Dataset& x, std::span<const double> v, unsigned workers = 1);
DenseVector matvec(const Dataset& x, std::span<const std::uint32_t> rows,
                   std::span<const double> v, unsigned workers = 1);

// out = X^T a (length d) via scatter-accumulate over rows with the fixed
// reduction tree. `a` is indexed by position when a row subset is given.
DenseVector matvec_transposed(const Dataset& x, std::span<const double> a,
                              unsigned workers = 1);
DenseVector matvec_transposed(const Dataset& x, std::span<const std::uint32_t> rows,
                              std::span<const double> a_by_position, unsigned workers = 1);

// Elementwise primitives. Binary ops require equal lengths.
enum class ElementwiseOp { Mul, Div, Exp, Neg, AddScalar };

DenseVector ew_mul(std::span<const double> a, std::span<const double> b, unsigned workers = 1);
// Throws on a zero divisor; the guarded e^z/(1+e^z) form is ew_sigmoid.
DenseVector ew_div(std::span<const double> a, std::span<const double> b, unsigned workers = 1);
DenseVector ew_exp(std::span<const double> a, unsigned workers = 1);
DenseVector ew_neg(std::span<const double> a, unsigned workers = 1);
DenseVector ew_add_scalar(double s, std::span<const double> a, unsigned workers = 1);

// Fused stable sigmoid: out_i = e^{a_i} / (1 + e^{a_i}) without overflow or
// underflow traps for any finite input.
DenseVector ew_sigmoid(std::span<const double> a, unsigned workers = 1);

// out_i = 1 if a_i < 1 else 0 (hinge activity mask for the SVM pipeline).
DenseVector ew_hinge_indicator(std::span<const double> a, unsigned workers = 1);

// Generic dispatcher over the enum; scalar is used by AddScalar, b by the
// binary ops.
DenseVector elementwise(ElementwiseOp op, std::span<const double> a,
                        std::span<const double> b, double scalar = 0.0,
                        unsigned workers = 1);

// w_j <- w_j - alpha * g_j
void axpy(std::span<double> w, double alpha, std::span<const double> g, unsigned workers = 1);

}  // namespace sgdbench::linalg
