#include "sgdbench/async_engine.hpp"

#include <algorithm>
#include <barrier>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <thread>

namespace sgdbench {

const char* access_path_name(AccessPath p) {
  switch (p) {
    case AccessPath::RowRR: return "row-rr";
    case AccessPath::RowCh: return "row-ch";
    case AccessPath::ColRR: return "col-rr";
    case AccessPath::ColCh: return "col-ch";
  }
  return "?";
}

const char* replication_name(ModelReplication r) {
  switch (r) {
    case ModelReplication::Kernel: return "kernel";
    case ModelReplication::Block: return "block";
    case ModelReplication::Thread: return "thread";
    case ModelReplication::Example: return "example";
  }
  return "?";
}

Strategy plan_strategy(AccessPath p) {
  return (p == AccessPath::RowRR || p == AccessPath::ColRR) ? Strategy::RoundRobin
                                                            : Strategy::Chunk;
}

namespace {

std::string trim(std::string_view s) {
  std::size_t b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  std::size_t e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_plan_tokens(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char ch : text) {
    if (ch == ':' || ch == '+') {
      tokens.push_back(trim(current));
      current.clear();
    } else {
      current.push_back(ch);
    }
  }
  tokens.push_back(trim(current));
  return tokens;
}

}  // namespace

ExecutionPlan parse_plan(std::string_view text) {
  std::vector<std::string> tokens = split_plan_tokens(text);
  if (tokens.size() != 3)
    throw std::invalid_argument("plan '" + std::string(text) +
                                "' must have three parts: <access>:<replication>:<k>");
  ExecutionPlan plan;

  const std::string& access = tokens[0];
  if (access == "row-rr") plan.access_path = AccessPath::RowRR;
  else if (access == "row-ch") plan.access_path = AccessPath::RowCh;
  else if (access == "col-rr") plan.access_path = AccessPath::ColRR;
  else if (access == "col-ch") plan.access_path = AccessPath::ColCh;
  else throw std::invalid_argument("unknown access path '" + access + "'");

  const std::string& repl = tokens[1];
  if (repl == "kernel") plan.model_replication = ModelReplication::Kernel;
  else if (repl == "block") plan.model_replication = ModelReplication::Block;
  else if (repl == "thread") plan.model_replication = ModelReplication::Thread;
  else if (repl == "example") plan.model_replication = ModelReplication::Example;
  else throw std::invalid_argument("unknown model replication '" + repl + "'");

  std::string k = tokens[2];
  if (k == "no-rep") k = "0";
  else if (k.rfind("rep-", 0) == 0) k = k.substr(4);
  try {
    std::size_t pos = 0;
    long long v = std::stoll(k, &pos);
    if (pos != k.size() || v < 0) throw std::invalid_argument("");
    plan.data_replication_k = static_cast<std::size_t>(v);
  } catch (...) {
    throw std::invalid_argument("bad replication factor '" + tokens[2] + "'");
  }
  return plan;
}

std::string plan_to_string(const ExecutionPlan& plan) {
  return std::string(access_path_name(plan.access_path)) + ":" +
         replication_name(plan.model_replication) + ":" +
         std::to_string(plan.data_replication_k);
}

void validate_plan(const ExecutionPlan& plan, const Dataset& ds) {
  if (plan.workers < 1) throw std::invalid_argument("plan needs at least one worker");
  if (plan.group_size < 1) throw std::invalid_argument("group size must be >= 1");
  bool col = plan.access_path == AccessPath::ColRR || plan.access_path == AccessPath::ColCh;
  if (col && ds.layout == Layout::Csr)
    throw std::invalid_argument(
        "column access paths on sparse data require the padded dense layout");
  if (col && ds.layout == Layout::DenseRowMajor)
    throw std::invalid_argument("column access paths require column-major dense storage");
  if (!col && ds.layout == Layout::DenseColMajor)
    throw std::invalid_argument("row access paths require row-major dense storage");
  if (plan.model_replication == ModelReplication::Example && !ds.is_sparse_layout())
    throw std::invalid_argument("example replication requires a sparse layout");
}

namespace hogwild {

void update_with_offset(SharedModel& w, const SparseVec& g, double alpha,
                        std::size_t worker_id) {
  std::size_t len = g.size();
  if (len == 0) return;
  std::size_t s = worker_id % len;
  for (std::size_t i = 0; i < len; ++i) {
    std::uint32_t j = g.indices[s];
    w.store(j, w.load(j) - alpha * g.values[s]);
    if (++s == len) s = 0;
  }
}

std::vector<double> merge_models(std::vector<std::vector<double>>& replicas,
                                 const std::vector<double>* weights) {
  if (replicas.empty()) throw std::invalid_argument("merge_models: no replicas");
  std::size_t d = replicas.front().size();
  for (const auto& r : replicas)
    if (r.size() != d) throw std::invalid_argument("merge_models: dimension mismatch");
  double total_weight = 0.0;
  if (weights) {
    if (weights->size() != replicas.size())
      throw std::invalid_argument("merge_models: weight count mismatch");
    for (double w : *weights) total_weight += w;
    if (total_weight == 0.0) throw std::invalid_argument("merge_models: zero total weight");
  } else {
    total_weight = static_cast<double>(replicas.size());
  }
  std::vector<double> merged(d, 0.0);
  for (std::size_t r = 0; r < replicas.size(); ++r) {
    double w = weights ? (*weights)[r] : 1.0;
    for (std::size_t j = 0; j < d; ++j) merged[j] += w * replicas[r][j];
  }
  for (double& v : merged) v /= total_weight;
  for (auto& r : replicas) r = merged;
  return merged;
}

namespace {

// Single-owner model replica with the same guard-slot convention as
// SharedModel.
struct LocalModel {
  std::vector<double> slots;
  explicit LocalModel(std::size_t dim) : slots(dim + 1, 0.0) {}
  double load(std::size_t j) const { return slots[j]; }
  void store(std::size_t j, double v) { slots[j] = v; }
  void assign(std::span<const double> w) {
    std::copy(w.begin(), w.end(), slots.begin());
    slots[w.size()] = 0.0;
  }
  std::vector<double> snapshot() const { return std::vector<double>(slots.begin(), slots.end() - 1); }
};

// Incremental SGD over one worker's example list against any model with
// load/store coordinate access. Padded sentinel slots read and write the
// guard slot; their zero value keeps both the dot product and the update
// exact no-ops.
template <class Model>
void process_examples(Model& m, const Dataset& ds, Task task,
                      std::span<const std::uint32_t> list, double alpha, bool offsets,
                      std::size_t worker_id) {
  for (std::uint32_t e : list) {
    ExampleView x = example_view(ds, e);
    double z = 0.0;
    for (std::size_t s = 0; s < x.len; ++s) z += x.value(s) * m.load(x.index(s));
    double c = point_gradient_coefficient(task, z, ds.labels[e]);
    if (x.len == 0) continue;
    std::size_t s = offsets ? worker_id % x.len : 0;
    for (std::size_t i = 0; i < x.len; ++i) {
      std::uint32_t j = x.index(s);
      m.store(j, m.load(j) - alpha * (c * x.value(s)));
      if (++s == x.len) s = 0;
    }
  }
}

class Instance {
 public:
  Instance(Task task, const Dataset& ds, const ExecutionPlan& plan,
           std::span<const double> initial)
      : task_(task),
        ds_(ds),
        plan_(plan),
        assignment_(assign(ds.n_examples, plan.workers, plan_strategy(plan.access_path),
                           plan.data_replication_k)),
        global_(ds.n_features),
        counters_(plan.workers, 0),
        start_bar_(static_cast<std::ptrdiff_t>(plan.workers) + 1),
        end_bar_(static_cast<std::ptrdiff_t>(plan.workers) + 1) {
    if (!initial.empty()) global_.assign(initial);

    switch (plan_.model_replication) {
      case ModelReplication::Kernel:
        break;
      case ModelReplication::Block: {
        std::size_t groups = (plan_.workers + plan_.group_size - 1) / plan_.group_size;
        for (std::size_t g = 0; g < groups; ++g)
          block_models_.push_back(std::make_unique<SharedModel>(ds.n_features));
        break;
      }
      case ModelReplication::Thread:
        for (std::size_t w = 0; w < plan_.workers; ++w)
          thread_models_.emplace_back(ds.n_features);
        break;
      case ModelReplication::Example:
        build_example_scope();
        break;
    }

    threads_.reserve(plan_.workers);
    for (std::size_t w = 0; w < plan_.workers; ++w)
      threads_.emplace_back([this, w] { worker_loop(w); });
  }

  ~Instance() {
    stop_ = true;
    start_bar_.arrive_and_wait();
    for (auto& t : threads_) t.join();
  }

  Instance(const Instance&) = delete;
  Instance& operator=(const Instance&) = delete;

  void begin_epoch(double alpha, std::size_t epoch_no) {
    alpha_ = alpha;
    epoch_no_ = epoch_no;
    prepare_replicas();
    start_bar_.arrive_and_wait();
  }

  void wait_epoch() {
    end_bar_.arrive_and_wait();
    merge_replicas();
  }

  std::vector<double> model() const { return global_.snapshot(); }
  void set_model(std::span<const double> w) { global_.assign(w); }

  std::size_t last_epoch_evals() const {
    std::size_t total = 0;
    for (std::size_t c : counters_) total += c;
    return total;
  }

 private:
  void build_example_scope() {
    std::size_t n = ds_.n_examples;
    ex_off_.assign(n + 1, 0);
    for (std::size_t e = 0; e < n; ++e) {
      std::size_t count = 0;
      for_example(ds_, e, [&](std::uint32_t, double) { ++count; });
      ex_off_[e + 1] = ex_off_[e] + count;
    }
    ex_idx_.resize(ex_off_[n]);
    ex_val_.resize(ex_off_[n]);
    std::size_t pos = 0;
    for (std::size_t e = 0; e < n; ++e) {
      for_example(ds_, e, [&](std::uint32_t j, double v) {
        ex_idx_[pos] = j;
        ex_val_[pos] = v;
        ++pos;
      });
    }
    ex_replica_ = std::make_unique<std::atomic<double>[]>(ex_off_[n]);
    ex_claim_ = std::make_unique<std::atomic<std::uint64_t>[]>(n);
    ex_ready_ = std::make_unique<std::atomic<std::uint64_t>[]>(n);
    for (std::size_t e = 0; e < n; ++e) {
      ex_claim_[e].store(0, std::memory_order_relaxed);
      ex_ready_[e].store(0, std::memory_order_relaxed);
    }
  }

  void prepare_replicas() {
    switch (plan_.model_replication) {
      case ModelReplication::Kernel:
      case ModelReplication::Example:
        break;
      case ModelReplication::Block: {
        std::vector<double> snap = global_.snapshot();
        for (auto& m : block_models_) m->assign(snap);
        break;
      }
      case ModelReplication::Thread: {
        std::vector<double> snap = global_.snapshot();
        for (auto& m : thread_models_) m.assign(snap);
        break;
      }
    }
  }

  void merge_replicas() {
    switch (plan_.model_replication) {
      case ModelReplication::Kernel:
      case ModelReplication::Example:
        return;
      case ModelReplication::Block: {
        std::vector<std::vector<double>> reps;
        reps.reserve(block_models_.size());
        for (auto& m : block_models_) reps.push_back(m->snapshot());
        global_.assign(merge_models(reps));
        return;
      }
      case ModelReplication::Thread: {
        std::vector<std::vector<double>> reps;
        reps.reserve(thread_models_.size());
        for (auto& m : thread_models_) reps.push_back(m.snapshot());
        global_.assign(merge_models(reps));
        return;
      }
    }
  }

  void ensure_replica(std::size_t e, std::uint64_t epoch) {
    if (ex_ready_[e].load(std::memory_order_acquire) == epoch) return;
    std::uint64_t expected = ex_claim_[e].load(std::memory_order_relaxed);
    if (expected != epoch &&
        ex_claim_[e].compare_exchange_strong(expected, epoch, std::memory_order_acq_rel)) {
      for (std::size_t s = ex_off_[e]; s < ex_off_[e + 1]; ++s)
        ex_replica_[s].store(global_.load(ex_idx_[s]), std::memory_order_relaxed);
      ex_ready_[e].store(epoch, std::memory_order_release);
      return;
    }
    while (ex_ready_[e].load(std::memory_order_acquire) != epoch) std::this_thread::yield();
  }

  void process_example_scope(std::size_t wid, std::span<const std::uint32_t> list,
                             double alpha) {
    for (std::uint32_t e : list) {
      ensure_replica(e, epoch_no_);
      std::size_t b = ex_off_[e];
      std::size_t len = ex_off_[e + 1] - b;
      if (len == 0) continue;
      double z = 0.0;
      for (std::size_t s = 0; s < len; ++s)
        z += ex_val_[b + s] * ex_replica_[b + s].load(std::memory_order_relaxed);
      double c = point_gradient_coefficient(task_, z, ds_.labels[e]);
      std::size_t s = plan_.circular_offsets ? wid % len : 0;
      for (std::size_t i = 0; i < len; ++i) {
        double cur = ex_replica_[b + s].load(std::memory_order_relaxed);
        ex_replica_[b + s].store(cur - alpha * (c * ex_val_[b + s]),
                                 std::memory_order_relaxed);
        if (++s == len) s = 0;
      }
    }
    // Copy the replicas of the processed examples into the shared model.
    for (std::uint32_t e : list) {
      for (std::size_t s = ex_off_[e]; s < ex_off_[e + 1]; ++s)
        global_.store(ex_idx_[s], ex_replica_[s].load(std::memory_order_relaxed));
    }
  }

  void worker_loop(std::size_t wid) {
    for (;;) {
      start_bar_.arrive_and_wait();
      if (stop_) return;
      std::span<const std::uint32_t> list = assignment_.per_worker[wid];
      switch (plan_.model_replication) {
        case ModelReplication::Kernel:
          process_examples(global_, ds_, task_, list, alpha_, plan_.circular_offsets, wid);
          break;
        case ModelReplication::Block:
          process_examples(*block_models_[wid / plan_.group_size], ds_, task_, list, alpha_,
                           plan_.circular_offsets, wid);
          break;
        case ModelReplication::Thread:
          process_examples(thread_models_[wid], ds_, task_, list, alpha_,
                           plan_.circular_offsets, wid);
          break;
        case ModelReplication::Example:
          process_example_scope(wid, list, alpha_);
          break;
      }
      counters_[wid] = list.size();
      end_bar_.arrive_and_wait();
    }
  }

  Task task_;
  const Dataset& ds_;
  ExecutionPlan plan_;
  Assignment assignment_;
  SharedModel global_;

  std::vector<std::unique_ptr<SharedModel>> block_models_;
  std::vector<LocalModel> thread_models_;

  std::vector<std::size_t> ex_off_;
  std::vector<std::uint32_t> ex_idx_;
  std::vector<double> ex_val_;
  std::unique_ptr<std::atomic<double>[]> ex_replica_;
  std::unique_ptr<std::atomic<std::uint64_t>[]> ex_claim_;
  std::unique_ptr<std::atomic<std::uint64_t>[]> ex_ready_;

  std::vector<std::size_t> counters_;
  double alpha_ = 0.0;
  std::uint64_t epoch_no_ = 0;
  bool stop_ = false;
  std::barrier<> start_bar_;
  std::barrier<> end_bar_;
  std::vector<std::thread> threads_;
};

}  // namespace

Result train(Task task, const Dataset& ds, const Hyperparams& hyper, const ExecutionPlan& plan,
             std::uint64_t /*seed*/, const Options& options) {
  validate_plan(plan, ds);
  if (ds.n_examples == 0) throw std::invalid_argument("cannot train on an empty dataset");
  hyper.validate(ds.n_examples);

  Result result;
  Instance inst(task, ds, plan,
                std::span<const double>(options.initial_model.data(),
                                        options.initial_model.size()));

  double run_start = options.clock.now_seconds();
  for (std::size_t epoch = 1; epoch <= hyper.epochs; ++epoch) {
    double alpha = hyper.step_size(epoch);
    double t0 = options.clock.now_seconds();
    inst.begin_epoch(alpha, epoch);
    inst.wait_epoch();
    double t1 = options.clock.now_seconds();

    result.evals_per_epoch.push_back(inst.last_epoch_evals());
    double loss = dataset_loss(task, ds, inst.model());
    result.trace.epochs.push_back({epoch, loss, t1 - t0});
    if (options.epoch_hook) options.epoch_hook(epoch, loss);

    if (!std::isfinite(loss)) {
      result.trace.diverged = true;
      result.trace.divergence_note = "non-finite loss after epoch " + std::to_string(epoch);
      break;
    }
    if (options.max_seconds > 0.0 &&
        options.clock.now_seconds() - run_start >= options.max_seconds)
      break;
  }
  result.model = inst.model();
  return result;
}

Result numa_dual_train(Task task, const Dataset& ds, const Hyperparams& hyper,
                       const ExecutionPlan& plan, std::uint64_t /*seed*/,
                       const Options& options) {
  validate_plan(plan, ds);
  if (ds.n_examples == 0) throw std::invalid_argument("cannot train on an empty dataset");
  hyper.validate(ds.n_examples);

  // Each instance owns a full copy of the data, mirroring per-socket
  // placement.
  Dataset second_copy = ds;

  Result result;
  std::span<const double> init(options.initial_model.data(), options.initial_model.size());
  Instance a(task, ds, plan, init);
  Instance b(task, second_copy, plan, init);

  auto merged_view = [&]() {
    std::vector<std::vector<double>> reps{a.model(), b.model()};
    std::vector<double> merged(reps[0].size(), 0.0);
    for (std::size_t j = 0; j < merged.size(); ++j)
      merged[j] = (reps[0][j] + reps[1][j]) / 2.0;
    return merged;
  };

  double run_start = options.clock.now_seconds();
  for (std::size_t epoch = 1; epoch <= hyper.epochs; ++epoch) {
    double alpha = hyper.step_size(epoch);
    double t0 = options.clock.now_seconds();
    a.begin_epoch(alpha, epoch);
    b.begin_epoch(alpha, epoch);
    a.wait_epoch();
    b.wait_epoch();

    bool merge_due =
        plan.merge_period_epochs > 0 && epoch % plan.merge_period_epochs == 0;
    std::vector<double> merged = merged_view();
    if (merge_due) {
      a.set_model(merged);
      b.set_model(merged);
    }
    double t1 = options.clock.now_seconds();

    result.evals_per_epoch.push_back(a.last_epoch_evals() + b.last_epoch_evals());
    double loss = dataset_loss(task, ds, merged);
    result.trace.epochs.push_back({epoch, loss, t1 - t0});
    if (options.epoch_hook) options.epoch_hook(epoch, loss);

    if (!std::isfinite(loss)) {
      result.trace.diverged = true;
      result.trace.divergence_note = "non-finite loss after epoch " + std::to_string(epoch);
      break;
    }
    if (options.max_seconds > 0.0 &&
        options.clock.now_seconds() - run_start >= options.max_seconds)
      break;
  }
  result.model = merged_view();
  return result;
}

}  // namespace hogwild
}  // namespace sgdbench
