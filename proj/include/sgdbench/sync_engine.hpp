#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "sgdbench/dataset.hpp"
#include "sgdbench/glm.hpp"
#include "sgdbench/linalg.hpp"
#include "sgdbench/trace.hpp"

namespace sgdbench::sync {

struct TrainOptions {
  unsigned workers = 1;
  // Seed-determined per-epoch permutation (sampling without replacement).
  // Disabled it degenerates to ascending id order; used by cross-engine
  // equality tests.
  bool shuffle = true;
  Clock clock;
  std::function<void(std::size_t epoch, double loss)> epoch_hook;
  double max_seconds = 0.0;  // 0 = unlimited
  std::vector<double> initial_model;
};

// Full-batch gradient of the objective over the given rows (ascending ids;
// empty span = all examples), composed from the linalg primitive sequence.
// Bit-deterministic for any worker count. When `transposed` carries the same
// logical matrix in column-major storage, the final X^T a step streams
// columns instead of scatter-accumulating; train() materializes it once per
// run for dense row-major data.
linalg::DenseVector batch_gradient(Task task, const Dataset& ds,
                                   std::span<const std::uint32_t> rows,
                                   std::span<const double> w, unsigned workers = 1,
                                   const Dataset* transposed = nullptr);

// One batch-SGD epoch: g over all N examples, then a single model update
// w <- w - alpha g. Returns ||g||_2 for divergence diagnostics.
double epoch_batch(Task task, const Dataset& ds, std::vector<double>& w, double alpha,
                   unsigned workers = 1);

struct TrainResult {
  std::vector<double> model;
  LossTrace trace;
};

// Mini-batch SGD: per epoch, ceil(N/B) synchronous steps over a seeded
// permutation; loss recorded once per epoch and excluded from the timed
// region.
TrainResult train(Task task, const Dataset& ds, const Hyperparams& hyper, std::uint64_t seed,
                  const TrainOptions& options = {});

}  // namespace sgdbench::sync
