#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "sgdbench/async_engine.hpp"
#include "sgdbench/dataset.hpp"
#include "sgdbench/glm.hpp"
#include "sgdbench/trace.hpp"

namespace sgdbench::warpsim {

// When several lanes write the same coordinate in one micro-step, exactly one
// write survives; the policy picks which.
enum class ConflictPolicy { LowestLaneWins, SeededRandomWinner };

struct WarpConfig {
  std::size_t warp_width = 32;
  std::size_t segment_size = 8;  // coordinates per memory segment
  ConflictPolicy conflict_policy = ConflictPolicy::LowestLaneWins;
  bool offsets_enabled = true;
  double lambda_cost = 4.0;  // simulated-time weight per memory transaction
};

struct WarpStats {
  std::size_t attempted_updates = 0;
  std::size_t surviving_updates = 0;
  std::size_t memory_transactions = 0;
  std::size_t micro_steps = 0;
  double simulated_time = 0.0;  // micro_steps + lambda * memory_transactions
  LossTrace trace;              // filled by the multi-epoch driver

  double survivor_fraction() const {
    return attempted_updates == 0
               ? 1.0
               : static_cast<double>(surviving_updates) / static_cast<double>(attempted_updates);
  }
  void accumulate(const WarpStats& other);
};

// One lockstep epoch of asynchronous SGD over warp_width lanes. Lane example
// streams come from the plan's access path and replication factor; each
// micro-step is one coordinate read or write per lane. Writes are grouped by
// coordinate, one survivor per coordinate is applied before the next
// micro-step, and lanes with exhausted streams stall until the warp finishes.
// Memory transactions count the distinct segments touched per lockstep
// access. The model is updated in place. Only kernel model replication is
// simulated; replication studies run on the CPU engine.
WarpStats simulate_epoch(Task task, const Dataset& ds, std::vector<double>& w, double alpha,
                         const ExecutionPlan& plan, const WarpConfig& warp,
                         std::uint64_t seed);

// Distinct-segment count summed over lockstep accesses: at step m the active
// lanes are those whose stream is longer than m.
std::size_t count_transactions(const std::vector<std::vector<std::uint64_t>>& lane_streams,
                               std::size_t segment_size);

struct TrainOptions {
  Clock clock;
  std::function<void(std::size_t epoch, double loss)> epoch_hook;
  double max_seconds = 0.0;
  std::vector<double> initial_model;
};

struct TrainResult {
  std::vector<double> model;
  LossTrace trace;
  WarpStats stats;  // accumulated over epochs
};

TrainResult train(Task task, const Dataset& ds, const Hyperparams& hyper,
                  const ExecutionPlan& plan, const WarpConfig& warp, std::uint64_t seed,
                  const TrainOptions& options = {});

struct PlanOutcome {
  ExecutionPlan plan;
  WarpStats stats;
  double transactions_per_epoch = 0.0;
  double survivor_fraction = 1.0;
  std::optional<std::size_t> epochs_to_tolerance;
  double final_loss = 0.0;
};

// Runs each plan for the same epoch budget and reports the comparative
// hardware/statistical measures. epochs_to_tolerance is filled when a target
// loss is supplied: first epoch with loss <= (1 + tol) * target.
std::vector<PlanOutcome> sweep_plans(Task task, const Dataset& ds,
                                     const std::vector<ExecutionPlan>& plans,
                                     const WarpConfig& warp, std::size_t epoch_budget,
                                     double alpha, std::optional<double> target_loss = {},
                                     double tol = 0.01, std::uint64_t seed = 0);

}  // namespace sgdbench::warpsim
