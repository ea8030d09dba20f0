#include "sgdbench/simd_sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>

namespace sgdbench::warpsim {

void WarpStats::accumulate(const WarpStats& other) {
  attempted_updates += other.attempted_updates;
  surviving_updates += other.surviving_updates;
  memory_transactions += other.memory_transactions;
  micro_steps += other.micro_steps;
  simulated_time += other.simulated_time;
}

namespace {

// Address of the value of (example, slot) in the access path's native
// storage order. Row paths address example-major storage, column paths
// slot-major storage; the counters model the layout the plan implies,
// whatever container the host dataset uses.
struct AddressModel {
  const Dataset& ds;
  bool column_major;

  std::uint64_t data_address(std::size_t e, std::size_t s) const {
    switch (ds.layout) {
      case Layout::Csr:
        return static_cast<std::uint64_t>(ds.row_offsets[e] + s);
      case Layout::PaddedDense:
        return column_major
                   ? static_cast<std::uint64_t>(s) * ds.n_examples + e
                   : static_cast<std::uint64_t>(e) * ds.padded_width + s;
      case Layout::DenseRowMajor:
      case Layout::DenseColMajor:
        return column_major
                   ? static_cast<std::uint64_t>(s) * ds.n_examples + e
                   : static_cast<std::uint64_t>(e) * ds.n_features + s;
    }
    return 0;
  }
};

// One coordinate access per lane per micro-step.
enum class OpKind : std::uint8_t { Idle, ReadData, ReadModel, Write };

struct LaneOp {
  OpKind kind = OpKind::Idle;
  std::uint64_t address = 0;  // data address or model coordinate
  double write_value = 0.0;   // filled during the write step
  std::uint32_t coord = 0;
};

// Per-lane cursor over its example stream.
struct Lane {
  std::span<const std::uint32_t> stream;
  std::size_t next_example = 0;

  // current example
  ExampleView x{};
  std::uint32_t cur_example = 0;
  double label = 0.0;
  bool has_example = false;
  std::size_t slot = 0;        // dot-phase slot
  bool model_read_due = false; // second half of the current slot
  double z = 0.0;
  double coeff = 0.0;
  bool updating = false;
  std::size_t update_i = 0;                 // progress through update slots
  std::vector<std::uint32_t> upd_coord;     // support coordinates, rotated
  std::vector<double> upd_value;            // matching x values
};

std::size_t segments_touched(std::vector<std::uint64_t>& addrs, std::size_t segment_size) {
  if (addrs.empty()) return 0;
  for (auto& a : addrs) a /= segment_size;
  std::sort(addrs.begin(), addrs.end());
  std::size_t distinct = 1;
  for (std::size_t i = 1; i < addrs.size(); ++i)
    if (addrs[i] != addrs[i - 1]) ++distinct;
  return distinct;
}

}  // namespace

std::size_t count_transactions(const std::vector<std::vector<std::uint64_t>>& lane_streams,
                               std::size_t segment_size) {
  if (segment_size == 0) throw std::invalid_argument("segment_size must be >= 1");
  std::size_t steps = 0;
  for (const auto& s : lane_streams) steps = std::max(steps, s.size());
  std::size_t total = 0;
  std::vector<std::uint64_t> scratch;
  for (std::size_t m = 0; m < steps; ++m) {
    scratch.clear();
    for (const auto& s : lane_streams)
      if (m < s.size()) scratch.push_back(s[m]);
    total += segments_touched(scratch, segment_size);
  }
  return total;
}

WarpStats simulate_epoch(Task task, const Dataset& ds, std::vector<double>& w, double alpha,
                         const ExecutionPlan& plan, const WarpConfig& warp,
                         std::uint64_t seed) {
  // The simulator derives data addresses from the plan's access path, so a
  // dense dataset can be driven through either orientation for side-by-side
  // comparisons. CSR still cannot serve column access.
  bool col = plan.access_path == AccessPath::ColRR || plan.access_path == AccessPath::ColCh;
  if (col && ds.layout == Layout::Csr)
    throw std::invalid_argument(
        "column access paths on sparse data require the padded dense layout");
  if (plan.model_replication != ModelReplication::Kernel)
    throw std::invalid_argument("the warp simulator models kernel replication only");
  if (warp.warp_width < 1 || warp.segment_size < 1)
    throw std::invalid_argument("warp_width and segment_size must be >= 1");
  if (w.size() != ds.n_features)
    throw std::invalid_argument("model/dataset dimension mismatch");

  const std::size_t width = warp.warp_width;
  Assignment assignment = assign(ds.n_examples, width, plan_strategy(plan.access_path),
                                 plan.data_replication_k);
  AddressModel addr{ds, plan.access_path == AccessPath::ColRR ||
                            plan.access_path == AccessPath::ColCh};
  const std::uint32_t sentinel = ds.pad_sentinel();

  std::vector<Lane> lanes(width);
  for (std::size_t l = 0; l < width; ++l) lanes[l].stream = assignment.per_worker[l];

  std::mt19937_64 rng(seed);
  WarpStats stats;

  std::vector<LaneOp> ops(width);
  std::vector<std::uint64_t> data_addrs, model_addrs, write_addrs;
  // writers per coordinate this micro-step: (coord, lane)
  std::vector<std::pair<std::uint32_t, std::size_t>> writers;

  auto advance_lane = [&](std::size_t l) -> LaneOp {
    Lane& lane = lanes[l];
    for (;;) {
      if (!lane.has_example) {
        if (lane.next_example >= lane.stream.size()) return LaneOp{};  // exhausted
        std::uint32_t e = lane.stream[lane.next_example++];
        lane.x = example_view(ds, e);
        lane.label = ds.labels[e];
        lane.has_example = true;
        lane.slot = 0;
        lane.model_read_due = false;
        lane.z = 0.0;
        lane.updating = false;
        lane.upd_coord.clear();
        lane.upd_value.clear();
        lane.cur_example = e;
      }
      if (!lane.updating) {
        if (lane.slot < lane.x.len) {
          std::size_t s = lane.slot;
          if (!lane.model_read_due) {
            lane.model_read_due = true;
            LaneOp op;
            op.kind = OpKind::ReadData;
            op.address = addr.data_address(lane.cur_example, s);
            return op;
          }
          lane.model_read_due = false;
          std::uint32_t j = lane.x.index(s);
          ++lane.slot;
          if (j == sentinel) continue;  // padding: data slot read, no model fetch
          LaneOp op;
          op.kind = OpKind::ReadModel;
          op.address = j;
          op.coord = j;
          return op;
        }
        // dot phase finished: derive the coefficient and the rotated update
        // order over the support slots
        lane.coeff = point_gradient_coefficient(task, lane.z, lane.label);
        for (std::size_t s = 0; s < lane.x.len; ++s) {
          std::uint32_t j = lane.x.index(s);
          if (j == sentinel) continue;
          lane.upd_coord.push_back(j);
          lane.upd_value.push_back(lane.x.value(s));
        }
        std::size_t len = lane.upd_coord.size();
        if (len > 0 && warp.offsets_enabled) {
          std::size_t start = l % len;
          std::rotate(lane.upd_coord.begin(),
                      lane.upd_coord.begin() + static_cast<std::ptrdiff_t>(start),
                      lane.upd_coord.end());
          std::rotate(lane.upd_value.begin(),
                      lane.upd_value.begin() + static_cast<std::ptrdiff_t>(start),
                      lane.upd_value.end());
        }
        lane.updating = true;
        lane.update_i = 0;
      }
      if (lane.update_i < lane.upd_coord.size()) {
        std::size_t i = lane.update_i++;
        LaneOp op;
        op.kind = OpKind::Write;
        op.coord = lane.upd_coord[i];
        op.address = lane.upd_coord[i];
        op.write_value = lane.upd_value[i];  // x value; the RMW happens at apply time
        return op;
      }
      lane.has_example = false;  // move on to the next example
    }
  };

  for (;;) {
    bool any_active = false;
    data_addrs.clear();
    model_addrs.clear();
    write_addrs.clear();
    writers.clear();

    for (std::size_t l = 0; l < width; ++l) {
      ops[l] = advance_lane(l);
      if (ops[l].kind != OpKind::Idle) any_active = true;
    }
    if (!any_active) break;
    ++stats.micro_steps;

    // Reads execute against the state before this step's writes.
    for (std::size_t l = 0; l < width; ++l) {
      switch (ops[l].kind) {
        case OpKind::ReadData:
          data_addrs.push_back(ops[l].address);
          break;
        case OpKind::ReadModel: {
          model_addrs.push_back(ops[l].address);
          Lane& lane = lanes[l];
          lane.z += lane.x.value(lane.slot - 1) * w[ops[l].coord];
          break;
        }
        case OpKind::Write:
          write_addrs.push_back(ops[l].address);
          writers.emplace_back(ops[l].coord, l);
          break;
        case OpKind::Idle:
          break;
      }
    }

    stats.memory_transactions += segments_touched(data_addrs, warp.segment_size);
    stats.memory_transactions += segments_touched(model_addrs, warp.segment_size);
    stats.memory_transactions += segments_touched(write_addrs, warp.segment_size);

    if (!writers.empty()) {
      stats.attempted_updates += writers.size();
      std::sort(writers.begin(), writers.end());
      std::size_t i = 0;
      while (i < writers.size()) {
        std::size_t jend = i + 1;
        while (jend < writers.size() && writers[jend].first == writers[i].first) ++jend;
        std::size_t winner_pos = i;
        if (warp.conflict_policy == ConflictPolicy::SeededRandomWinner && jend - i > 1) {
          std::uniform_int_distribution<std::size_t> pick(i, jend - 1);
          winner_pos = pick(rng);
        }
        std::size_t winner_lane = writers[winner_pos].second;
        std::uint32_t j = writers[winner_pos].first;
        double val = ops[winner_lane].write_value;
        w[j] = w[j] - alpha * (lanes[winner_lane].coeff * val);
        ++stats.surviving_updates;
        i = jend;
      }
    }
  }

  stats.simulated_time = static_cast<double>(stats.micro_steps) +
                         warp.lambda_cost * static_cast<double>(stats.memory_transactions);
  return stats;
}

TrainResult train(Task task, const Dataset& ds, const Hyperparams& hyper,
                  const ExecutionPlan& plan, const WarpConfig& warp, std::uint64_t seed,
                  const TrainOptions& options) {
  hyper.validate(ds.n_examples == 0 ? 1 : ds.n_examples);
  if (ds.n_examples == 0) throw std::invalid_argument("cannot train on an empty dataset");

  TrainResult result;
  result.model = options.initial_model.empty() ? std::vector<double>(ds.n_features, 0.0)
                                               : options.initial_model;
  if (result.model.size() != ds.n_features)
    throw std::invalid_argument("initial model dimension mismatch");

  double run_start = options.clock.now_seconds();
  for (std::size_t epoch = 1; epoch <= hyper.epochs; ++epoch) {
    double alpha = hyper.step_size(epoch);
    double t0 = options.clock.now_seconds();
    WarpStats epoch_stats =
        simulate_epoch(task, ds, result.model, alpha, plan, warp, seed + (epoch - 1));
    double t1 = options.clock.now_seconds();
    result.stats.accumulate(epoch_stats);

    double loss = dataset_loss(task, ds, result.model);
    result.trace.epochs.push_back({epoch, loss, t1 - t0});
    result.stats.trace.epochs.push_back({epoch, loss, t1 - t0});
    if (options.epoch_hook) options.epoch_hook(epoch, loss);

    if (!std::isfinite(loss)) {
      result.trace.diverged = true;
      result.trace.divergence_note = "non-finite loss after epoch " + std::to_string(epoch);
      result.stats.trace.diverged = true;
      break;
    }
    if (options.max_seconds > 0.0 &&
        options.clock.now_seconds() - run_start >= options.max_seconds)
      break;
  }
  return result;
}

std::vector<PlanOutcome> sweep_plans(Task task, const Dataset& ds,
                                     const std::vector<ExecutionPlan>& plans,
                                     const WarpConfig& warp, std::size_t epoch_budget,
                                     double alpha, std::optional<double> target_loss,
                                     double tol, std::uint64_t seed) {
  std::vector<PlanOutcome> out;
  for (const ExecutionPlan& plan : plans) {
    Hyperparams hyper;
    hyper.task = task;
    hyper.alpha = alpha;
    hyper.epochs = epoch_budget;
    hyper.batch_b = 1;
    TrainResult r = train(task, ds, hyper, plan, warp, seed);
    PlanOutcome o;
    o.plan = plan;
    o.stats = r.stats;
    std::size_t epochs_run = r.trace.epochs.size();
    o.transactions_per_epoch =
        epochs_run == 0 ? 0.0
                        : static_cast<double>(r.stats.memory_transactions) /
                              static_cast<double>(epochs_run);
    o.survivor_fraction = r.stats.survivor_fraction();
    o.final_loss = r.trace.final_loss();
    if (target_loss) {
      double threshold = (1.0 + tol) * *target_loss;
      for (const auto& e : r.trace.epochs) {
        if (e.loss <= threshold) {
          o.epochs_to_tolerance = e.epoch;
          break;
        }
      }
    }
    out.push_back(std::move(o));
  }
  return out;
}

}  // namespace sgdbench::warpsim
