#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sgdbench/dataset.hpp"
#include "sgdbench/glm.hpp"
#include "sgdbench/trace.hpp"

namespace sgdbench {

// Data access path: storage orientation (row/col) times example assignment
// (round-robin/chunk).
enum class AccessPath { RowRR, RowCh, ColRR, ColCh };

// Model replication level: one shared model (kernel), a replica per worker
// group (block), per worker (thread), or per example (example).
enum class ModelReplication { Kernel, Block, Thread, Example };

struct ExecutionPlan {
  AccessPath access_path = AccessPath::RowCh;
  ModelReplication model_replication = ModelReplication::Kernel;
  std::size_t data_replication_k = 0;
  std::size_t workers = 1;
  std::size_t group_size = 32;  // block-replication group width
  bool circular_offsets = true;
  std::size_t merge_period_epochs = 1;  // dual-instance merge cadence; 0 = never
};

const char* access_path_name(AccessPath p);
const char* replication_name(ModelReplication r);
Strategy plan_strategy(AccessPath p);

// Accepts both the compact "col-rr:block:0" form and the prose
// "col-rr + block + no-rep" / "row-rr + kernel + rep-10" form.
ExecutionPlan parse_plan(std::string_view text);
std::string plan_to_string(const ExecutionPlan& plan);

// Throws std::invalid_argument when the plan cannot run on the dataset's
// layout (column paths need DenseColMajor or PaddedDense; example
// replication needs a sparse layout).
void validate_plan(const ExecutionPlan& plan, const Dataset& ds);

// The d-dimensional model with coordinate-granular concurrent access: every
// load/store is an indivisible word access, lost updates between workers are
// permitted by design. One trailing guard slot (held at 0) lets padded
// sentinel slots take part in dot products without branching.
class SharedModel {
 public:
  explicit SharedModel(std::size_t dim) : slots_(dim + 1) {
    for (auto& s : slots_) s.store(0.0, std::memory_order_relaxed);
  }
  std::size_t dim() const { return slots_.size() - 1; }
  double load(std::size_t j) const { return slots_[j].load(std::memory_order_relaxed); }
  void store(std::size_t j, double v) { slots_[j].store(v, std::memory_order_relaxed); }
  void assign(std::span<const double> w) {
    for (std::size_t j = 0; j < dim(); ++j) slots_[j].store(w[j], std::memory_order_relaxed);
    slots_[dim()].store(0.0, std::memory_order_relaxed);
  }
  std::vector<double> snapshot() const {
    std::vector<double> out(dim());
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = load(j);
    return out;
  }

 private:
  std::vector<std::atomic<double>> slots_;
};

namespace hogwild {

struct Options {
  Clock clock;
  std::function<void(std::size_t epoch, double loss)> epoch_hook;
  double max_seconds = 0.0;
  std::vector<double> initial_model;
};

struct Result {
  std::vector<double> model;
  LossTrace trace;
  std::vector<std::size_t> evals_per_epoch;  // gradient evaluations, = n + workers*k
};

// Incremental SGD epoch run "in parallel": each worker walks its assignment,
// reads possibly stale model coordinates, and applies unsynchronized updates
// per the plan's replication level. The epoch boundary is the only
// synchronization point; loss is evaluated there and excluded from epoch
// timing. The seed parameter is reserved for plan variants that draw random
// numbers; the visit order itself is the deterministic assignment order.
Result train(Task task, const Dataset& ds, const Hyperparams& hyper, const ExecutionPlan& plan,
             std::uint64_t seed, const Options& options = {});

// Two independent full-data instances (the dual-socket strategy); a merger
// averages the two models every merge_period_epochs and refreshes both. Loss
// is reported on the merged view.
Result numa_dual_train(Task task, const Dataset& ds, const Hyperparams& hyper,
                       const ExecutionPlan& plan, std::uint64_t seed,
                       const Options& options = {});

// Applies the sparse gradient to the shared model starting at position
// (worker_id mod support size) of g's support, wrapping around; every
// coordinate is updated exactly once.
void update_with_offset(SharedModel& w, const SparseVec& g, double alpha,
                        std::size_t worker_id);

// Coordinate-wise (weighted) arithmetic mean; the result is written back to
// every replica and returned.
std::vector<double> merge_models(std::vector<std::vector<double>>& replicas,
                                 const std::vector<double>* weights = nullptr);

}  // namespace hogwild
}  // namespace sgdbench
