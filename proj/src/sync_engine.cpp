#include "sgdbench/sync_engine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>

namespace sgdbench::sync {

namespace {

std::vector<double> label_subset(const Dataset& ds, std::span<const std::uint32_t> rows) {
  if (rows.empty()) return ds.labels;
  std::vector<double> y(rows.size());
  for (std::size_t p = 0; p < rows.size(); ++p) y[p] = ds.labels[rows[p]];
  return y;
}

}  // namespace

linalg::DenseVector batch_gradient(Task task, const Dataset& ds,
                                   std::span<const std::uint32_t> rows,
                                   std::span<const double> w, unsigned workers,
                                   const Dataset* transposed) {
  using namespace linalg;
  DenseVector a = matvec(ds, rows, w, workers);
  std::vector<double> y = label_subset(ds, rows);
  DenseVector c;
  if (task == Task::LR) {
    // g = X^T (-Y . e^{-Y.Xw} / (1 + e^{-Y.Xw})), with the exponent ratio
    // computed by the fused stable sigmoid.
    DenseVector m = ew_mul(y, a, workers);
    DenseVector s = ew_sigmoid(ew_neg(m, workers), workers);
    c = ew_mul(s, ew_neg(y, workers), workers);
  } else {
    DenseVector m = ew_mul(y, a, workers);
    DenseVector active = ew_hinge_indicator(m, workers);
    c = ew_mul(active, ew_neg(y, workers), workers);
  }
  return matvec_transposed(transposed ? *transposed : ds, rows, c, workers);
}

double epoch_batch(Task task, const Dataset& ds, std::vector<double>& w, double alpha,
                   unsigned workers) {
  std::optional<Dataset> transposed;
  if (ds.layout == Layout::DenseRowMajor) transposed = transpose_dense(ds);
  linalg::DenseVector g =
      batch_gradient(task, ds, {}, w, workers, transposed ? &*transposed : nullptr);
  double sq = 0.0;
  for (double v : g) sq += v * v;
  linalg::axpy(w, alpha, g, workers);
  return std::sqrt(sq);
}

TrainResult train(Task task, const Dataset& ds, const Hyperparams& hyper, std::uint64_t seed,
                  const TrainOptions& options) {
  hyper.validate(ds.n_examples);
  if (ds.n_examples == 0) throw std::invalid_argument("cannot train on an empty dataset");

  TrainResult result;
  result.model = options.initial_model.empty() ? std::vector<double>(ds.n_features, 0.0)
                                               : options.initial_model;
  if (result.model.size() != ds.n_features)
    throw std::invalid_argument("initial model dimension mismatch");

  // In-place transposition of dense data is a known bottleneck; materialize
  // the column-major copy once per run, outside the timed region.
  std::optional<Dataset> transposed;
  if (ds.layout == Layout::DenseRowMajor) transposed = transpose_dense(ds);
  const Dataset* transposed_ptr = transposed ? &*transposed : nullptr;

  std::size_t n = ds.n_examples;
  std::size_t b = hyper.batch_b;
  std::mt19937_64 rng(seed);
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  std::vector<std::uint32_t> batch;
  batch.reserve(b);

  double run_start = options.clock.now_seconds();
  for (std::size_t epoch = 1; epoch <= hyper.epochs; ++epoch) {
    double alpha = hyper.step_size(epoch);
    if (options.shuffle) std::shuffle(order.begin(), order.end(), rng);

    double t0 = options.clock.now_seconds();
    bool finite = true;
    for (std::size_t lo = 0; lo < n && finite; lo += b) {
      std::size_t hi = std::min(n, lo + b);
      batch.assign(order.begin() + static_cast<std::ptrdiff_t>(lo),
                   order.begin() + static_cast<std::ptrdiff_t>(hi));
      // The reduction tree is keyed by example id: sort so membership, not
      // permutation order, determines the floating-point result.
      std::sort(batch.begin(), batch.end());
      linalg::DenseVector g =
          batch_gradient(task, ds, batch, result.model, options.workers, transposed_ptr);
      for (double v : g)
        if (!std::isfinite(v)) finite = false;
      linalg::axpy(result.model, alpha, g, options.workers);
    }
    double t1 = options.clock.now_seconds();

    double loss = dataset_loss(task, ds, result.model);
    result.trace.epochs.push_back({epoch, loss, t1 - t0});
    if (options.epoch_hook) options.epoch_hook(epoch, loss);

    if (!finite || !std::isfinite(loss)) {
      result.trace.diverged = true;
      result.trace.divergence_note = !finite
          ? "non-finite gradient in epoch " + std::to_string(epoch)
          : "non-finite loss after epoch " + std::to_string(epoch);
      break;
    }
    // The budget is wall clock over the whole run, loss evaluation included;
    // per-epoch seconds stay compute-only.
    if (options.max_seconds > 0.0 &&
        options.clock.now_seconds() - run_start >= options.max_seconds)
      break;
  }
  return result;
}

}  // namespace sgdbench::sync
