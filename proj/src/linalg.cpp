#include "sgdbench/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "sgdbench/math.hpp"
#include "sgdbench/parallel.hpp"

namespace sgdbench::linalg {

namespace {

std::size_t row_at(std::span<const std::uint32_t> rows, std::size_t pos) {
  return rows.empty() ? pos : rows[pos];
}

std::size_t row_count(const Dataset& x, std::span<const std::uint32_t> rows) {
  return rows.empty() ? x.n_examples : rows.size();
}

}  // namespace

DenseVector matvec(const Dataset& x, std::span<const double> v, unsigned workers) {
  return matvec(x, std::span<const std::uint32_t>{}, v, workers);
}

DenseVector matvec(const Dataset& x, std::span<const std::uint32_t> rows,
                   std::span<const double> v, unsigned workers) {
  if (v.size() != x.n_features) throw std::invalid_argument("matvec: dimension mismatch");
  std::size_t n = row_count(x, rows);
  DenseVector out(n, 0.0);
  parallel_for_blocks(n, workers, [&](std::size_t b, std::size_t e) {
    for (std::size_t p = b; p < e; ++p) {
      std::size_t r = row_at(rows, p);
      double z = 0.0;
      for_example(x, r, [&](std::uint32_t j, double val) { z += val * v[j]; });
      out[p] = z;
    }
  });
  return out;
}

DenseVector matvec_transposed(const Dataset& x, std::span<const double> a, unsigned workers) {
  return matvec_transposed(x, std::span<const std::uint32_t>{}, a, workers);
}

DenseVector matvec_transposed(const Dataset& x, std::span<const std::uint32_t> rows,
                              std::span<const double> a_by_position, unsigned workers) {
  std::size_t n = row_count(x, rows);
  if (a_by_position.size() != n)
    throw std::invalid_argument("matvec_transposed: dimension mismatch");
  std::size_t d = x.n_features;
  if (n == 0) return DenseVector(d, 0.0);

  if (x.layout == Layout::DenseColMajor) {
    // Columns are contiguous: one streaming dot per output coordinate, no
    // reduction tree needed. This is the target of the materialized
    // transpose used by the synchronous pipeline.
    DenseVector out(d, 0.0);
    parallel_for_blocks(d, workers, [&](std::size_t jb, std::size_t je) {
      for (std::size_t j = jb; j < je; ++j) {
        const double* col = x.values.data() + j * x.n_examples;
        double s = 0.0;
        if (rows.empty()) {
          for (std::size_t i = 0; i < n; ++i) s += a_by_position[i] * col[i];
        } else {
          for (std::size_t p = 0; p < n; ++p) s += a_by_position[p] * col[rows[p]];
        }
        out[j] = s;
      }
    });
    return out;
  }

  std::size_t nblocks = (n + kReduceBlock - 1) / kReduceBlock;
  std::vector<DenseVector> partials(nblocks);

  parallel_for_blocks(nblocks, workers, [&](std::size_t bb, std::size_t be) {
    for (std::size_t blk = bb; blk < be; ++blk) {
      DenseVector& part = partials[blk];
      part.assign(d, 0.0);
      std::size_t lo = blk * kReduceBlock;
      std::size_t hi = std::min(n, lo + kReduceBlock);
      for (std::size_t p = lo; p < hi; ++p) {
        std::size_t r = row_at(rows, p);
        double s = a_by_position[p];
        for_example(x, r, [&](std::uint32_t j, double val) { part[j] += s * val; });
      }
    }
  });

  // Fixed pairwise combine: structure depends only on nblocks.
  for (std::size_t stride = 1; stride < nblocks; stride *= 2) {
    std::size_t pairs = 0;
    for (std::size_t i = 0; i + stride < nblocks; i += 2 * stride) ++pairs;
    parallel_for_blocks(pairs, workers, [&](std::size_t pb, std::size_t pe) {
      for (std::size_t p = pb; p < pe; ++p) {
        std::size_t i = p * 2 * stride;
        DenseVector& dst = partials[i];
        const DenseVector& src = partials[i + stride];
        for (std::size_t j = 0; j < d; ++j) dst[j] += src[j];
      }
    });
  }
  return std::move(partials[0]);
}

namespace {

template <class F>
DenseVector map1(std::span<const double> a, unsigned workers, F&& f) {
  DenseVector out(a.size());
  parallel_for_blocks(a.size(), workers, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) out[i] = f(a[i]);
  });
  return out;
}

}  // namespace

DenseVector ew_mul(std::span<const double> a, std::span<const double> b, unsigned workers) {
  if (a.size() != b.size()) throw std::invalid_argument("ew_mul: length mismatch");
  DenseVector out(a.size());
  parallel_for_blocks(a.size(), workers, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) out[i] = a[i] * b[i];
  });
  return out;
}

DenseVector ew_div(std::span<const double> a, std::span<const double> b, unsigned workers) {
  if (a.size() != b.size()) throw std::invalid_argument("ew_div: length mismatch");
  for (std::size_t i = 0; i < b.size(); ++i)
    if (b[i] == 0.0) throw std::domain_error("ew_div: division by zero at position " + std::to_string(i));
  DenseVector out(a.size());
  parallel_for_blocks(a.size(), workers, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) out[i] = a[i] / b[i];
  });
  return out;
}

DenseVector ew_exp(std::span<const double> a, unsigned workers) {
  return map1(a, workers, [](double v) { return std::exp(v); });
}

DenseVector ew_neg(std::span<const double> a, unsigned workers) {
  return map1(a, workers, [](double v) { return -v; });
}

DenseVector ew_add_scalar(double s, std::span<const double> a, unsigned workers) {
  return map1(a, workers, [s](double v) { return s + v; });
}

DenseVector ew_sigmoid(std::span<const double> a, unsigned workers) {
  return map1(a, workers, [](double v) { return stable_sigmoid(v); });
}

DenseVector ew_hinge_indicator(std::span<const double> a, unsigned workers) {
  return map1(a, workers, [](double v) { return v < 1.0 ? 1.0 : 0.0; });
}

DenseVector elementwise(ElementwiseOp op, std::span<const double> a,
                        std::span<const double> b, double scalar, unsigned workers) {
  switch (op) {
    case ElementwiseOp::Mul: return ew_mul(a, b, workers);
    case ElementwiseOp::Div: return ew_div(a, b, workers);
    case ElementwiseOp::Exp: return ew_exp(a, workers);
    case ElementwiseOp::Neg: return ew_neg(a, workers);
    case ElementwiseOp::AddScalar: return ew_add_scalar(scalar, a, workers);
  }
  throw std::invalid_argument("unknown elementwise op");
}

void axpy(std::span<double> w, double alpha, std::span<const double> g, unsigned workers) {
  if (w.size() != g.size()) throw std::invalid_argument("axpy: length mismatch");
  parallel_for_blocks(w.size(), workers, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) w[i] -= alpha * g[i];
  });
}

}  // namespace sgdbench::linalg
