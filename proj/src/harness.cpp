#include "sgdbench/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

namespace sgdbench::harness {

const char* engine_name(Engine e) {
  switch (e) {
    case Engine::Sync: return "sync";
    case Engine::Async: return "async";
    case Engine::NumaDual: return "numa";
    case Engine::WarpSim: return "warpsim";
  }
  return "?";
}

std::optional<Engine> engine_from_name(std::string_view name) {
  if (name == "sync") return Engine::Sync;
  if (name == "async") return Engine::Async;
  if (name == "numa") return Engine::NumaDual;
  if (name == "warpsim") return Engine::WarpSim;
  return std::nullopt;
}

void RunConfig::validate() const {
  if (repetitions < 1) throw std::invalid_argument("repetitions must be >= 1");
  if (!(wall_clock_budget_seconds > 0.0)) throw std::invalid_argument("budget must be > 0");
  if (max_epochs == 0) throw std::invalid_argument("max_epochs must be >= 1");
}

std::optional<std::size_t> convergence_epochs(std::span<const double> losses, double l_star,
                                              double tol) {
  double threshold = (1.0 + tol) * l_star;
  for (std::size_t i = 0; i < losses.size(); ++i)
    if (losses[i] <= threshold) return i + 1;
  return std::nullopt;
}

std::string environment_fingerprint() {
  std::ostringstream os;
#if defined(__clang__)
  os << "clang " << __clang_major__ << "." << __clang_minor__;
#elif defined(__GNUC__)
  os << "gcc " << __GNUC__ << "." << __GNUC_MINOR__ << "." << __GNUC_PATCHLEVEL__;
#else
  os << "unknown-compiler";
#endif
  os << "; hw-threads=" << std::thread::hardware_concurrency();
  os << "; pointer-bits=" << sizeof(void*) * 8;
  return os.str();
}

namespace {

struct EngineOutcome {
  LossTrace trace;
  std::vector<double> model;
  std::vector<std::size_t> evals_per_epoch;
  std::optional<warpsim::WarpStats> warp_stats;
};

EngineOutcome run_engine_once(const RunConfig& config, const Dataset& ds, const Clock& clock) {
  Hyperparams hyper = config.hyper;
  hyper.epochs = std::min(hyper.epochs, config.max_epochs);

  EngineOutcome out;
  switch (config.engine) {
    case Engine::Sync: {
      sync::TrainOptions o;
      o.workers = static_cast<unsigned>(config.workers);
      o.clock = clock;
      o.max_seconds = config.wall_clock_budget_seconds;
      auto r = sync::train(config.task, ds, hyper, config.seed, o);
      out.trace = std::move(r.trace);
      out.model = std::move(r.model);
      break;
    }
    case Engine::Async:
    case Engine::NumaDual: {
      ExecutionPlan plan;
      if (config.plan) {
        plan = *config.plan;
      } else {
        plan.workers = config.workers;
      }
      hogwild::Options o;
      o.clock = clock;
      o.max_seconds = config.wall_clock_budget_seconds;
      auto r = config.engine == Engine::Async
                   ? hogwild::train(config.task, ds, hyper, plan, config.seed, o)
                   : hogwild::numa_dual_train(config.task, ds, hyper, plan, config.seed, o);
      out.trace = std::move(r.trace);
      out.model = std::move(r.model);
      out.evals_per_epoch = std::move(r.evals_per_epoch);
      break;
    }
    case Engine::WarpSim: {
      ExecutionPlan plan = config.plan.value_or(ExecutionPlan{});
      warpsim::WarpConfig warp = config.warp.value_or(warpsim::WarpConfig{});
      warpsim::TrainOptions o;
      o.clock = clock;
      o.max_seconds = config.wall_clock_budget_seconds;
      auto r = warpsim::train(config.task, ds, hyper, plan, warp, config.seed, o);
      out.trace = std::move(r.trace);
      out.model = std::move(r.model);
      out.warp_stats = std::move(r.stats);
      break;
    }
  }
  return out;
}

void fill_convergence(RunReport& report) {
  std::vector<double> losses = report.trace.losses();
  for (int tol_pct : kTolerancesPercent) {
    auto e = convergence_epochs(losses, report.optimal_loss_used, tol_pct / 100.0);
    report.epochs_to[tol_pct] = e;
    if (e && *e <= report.cumulative_seconds.size())
      report.time_to_convergence_s[tol_pct] = report.cumulative_seconds[*e - 1];
    else
      report.time_to_convergence_s[tol_pct] = std::nullopt;
  }
}

}  // namespace

RunReport run(const RunConfig& config, const Dataset& ds) {
  return run(config, ds, Clock{});
}

RunReport run(const RunConfig& config, const Dataset& ds, const Clock& clock) {
  config.validate();
  config.hyper.validate(ds.n_examples);

  RunReport report;
  report.config = config;
  report.environment = environment_fingerprint();

  std::vector<LossTrace> traces;
  for (std::size_t rep = 0; rep < config.repetitions; ++rep) {
    EngineOutcome out = run_engine_once(config, ds, clock);
    if (rep == 0) {
      report.gradient_evals_per_epoch = out.evals_per_epoch;
      report.warp_stats = out.warp_stats;
    }
    traces.push_back(std::move(out.trace));
  }

  // Losses come from the first repetition; epoch times are averaged across
  // repetitions (the shared seed keeps deterministic engines on one
  // trajectory, so repetitions only measure timing noise).
  report.trace = traces.front();
  std::size_t epochs = report.trace.epochs.size();
  for (std::size_t i = 0; i < epochs; ++i) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& t : traces) {
      if (i < t.epochs.size()) {
        sum += t.epochs[i].seconds;
        ++count;
      }
    }
    report.trace.epochs[i].seconds = count == 0 ? 0.0 : sum / static_cast<double>(count);
  }
  report.cumulative_seconds.resize(epochs);
  double cum = 0.0;
  for (std::size_t i = 0; i < epochs; ++i) {
    cum += report.trace.epochs[i].seconds;
    report.cumulative_seconds[i] = cum;
  }

  double time_sum = 0.0;
  std::size_t time_count = 0;
  for (std::size_t i = config.skip_warmup; i < epochs; ++i) {
    time_sum += report.trace.epochs[i].seconds;
    ++time_count;
  }
  report.time_per_epoch_ms =
      time_count == 0 ? 0.0 : (time_sum / static_cast<double>(time_count)) * 1000.0;

  for (const auto& t : traces) {
    if (t.diverged) {
      report.diverged = true;
      report.divergence_note = t.divergence_note;
      break;
    }
  }
  report.final_loss = report.trace.final_loss();
  report.optimal_loss_used = config.optimal_loss.value_or(report.trace.min_loss());
  fill_convergence(report);
  return report;
}

RunReport run(const RunConfig& config) {
  Dataset ds = parse_libsvm_file(config.data_path);
  if (ds.layout != config.layout) ds = convert_layout(ds, config.layout);
  return run(config, ds);
}

// --- optimal loss estimation -------------------------------------------------

namespace {

std::uint64_t dataset_fingerprint(const Dataset& ds) {
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a
  auto mix = [&h](std::uint64_t v) {
    h ^= v;
    h *= 1099511628211ull;
  };
  mix(ds.n_examples);
  mix(ds.n_features);
  mix(ds.values.size());
  auto mix_double = [&](double d) {
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(d));
    std::memcpy(&bits, &d, sizeof(bits));
    mix(bits);
  };
  std::size_t step = std::max<std::size_t>(1, ds.values.size() / 512);
  for (std::size_t i = 0; i < ds.values.size(); i += step) mix_double(ds.values[i]);
  for (std::size_t i = 0; i < ds.labels.size();
       i += std::max<std::size_t>(1, ds.labels.size() / 128))
    mix_double(ds.labels[i]);
  return h;
}

std::mutex g_cache_mutex;
std::map<std::pair<int, std::uint64_t>, double> g_optimal_loss_cache;

}  // namespace

void clear_optimal_loss_cache() {
  std::lock_guard<std::mutex> lock(g_cache_mutex);
  g_optimal_loss_cache.clear();
}

double estimate_optimal_loss(Task task, const Dataset& ds,
                             const std::vector<RunConfig>& probes,
                             double budget_seconds_per_config) {
  if (probes.empty()) throw std::invalid_argument("estimate_optimal_loss: no probes");
  std::pair<int, std::uint64_t> key{static_cast<int>(task), dataset_fingerprint(ds)};
  {
    std::lock_guard<std::mutex> lock(g_cache_mutex);
    auto it = g_optimal_loss_cache.find(key);
    if (it != g_optimal_loss_cache.end()) return it->second;
  }
  double best = std::numeric_limits<double>::infinity();
  for (RunConfig probe : probes) {
    probe.task = task;
    probe.hyper.task = task;
    probe.repetitions = 1;
    probe.wall_clock_budget_seconds = budget_seconds_per_config;
    RunReport r = run(probe, ds);
    for (const auto& e : r.trace.epochs)
      if (std::isfinite(e.loss)) best = std::min(best, e.loss);
  }
  std::lock_guard<std::mutex> lock(g_cache_mutex);
  g_optimal_loss_cache[key] = best;
  return best;
}

double estimate_optimal_loss(Task task, const Dataset& ds, double budget_seconds_per_config) {
  std::vector<RunConfig> probes;
  for (double alpha : default_alpha_grid()) {
    RunConfig c;
    c.engine = Engine::Sync;
    c.task = task;
    c.hyper.task = task;
    c.hyper.alpha = alpha;
    c.hyper.batch_b = ds.n_examples;
    c.hyper.epochs = 100000;
    c.max_epochs = 100000;
    probes.push_back(std::move(c));
  }
  return estimate_optimal_loss(task, ds, probes, budget_seconds_per_config);
}

// --- grid search --------------------------------------------------------------

std::vector<double> default_alpha_grid() {
  std::vector<double> grid;
  for (int p = -6; p <= 2; ++p) grid.push_back(std::pow(10.0, p));
  return grid;
}

std::size_t select_best_alpha(const std::vector<AlphaRun>& runs, std::optional<double> l_star,
                              double tol, bool& converged_out) {
  if (runs.empty()) throw std::invalid_argument("select_best_alpha: no runs");
  double target;
  if (l_star) {
    target = *l_star;
  } else {
    target = std::numeric_limits<double>::infinity();
    for (const auto& r : runs)
      for (double l : r.losses)
        if (std::isfinite(l)) target = std::min(target, l);
  }

  std::size_t best = runs.size();
  double best_time = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < runs.size(); ++i) {
    auto e = convergence_epochs(runs[i].losses, target, tol);
    if (!e || *e > runs[i].cumulative_seconds.size()) continue;
    double t = runs[i].cumulative_seconds[*e - 1];
    if (t < best_time) {  // strict: ties stay with the earlier (smaller) alpha
      best_time = t;
      best = i;
    }
  }
  if (best != runs.size()) {
    converged_out = true;
    return best;
  }

  converged_out = false;
  best = 0;
  double best_loss = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < runs.size(); ++i) {
    double fl = runs[i].losses.empty() ? std::numeric_limits<double>::infinity()
                                       : runs[i].losses.back();
    if (!std::isfinite(fl)) continue;
    if (fl < best_loss) {
      best_loss = fl;
      best = i;
    }
  }
  return best;
}

GridSearchResult grid_search_alpha(const RunConfig& config, const Dataset& ds,
                                   std::vector<double> grid) {
  if (grid.empty()) throw std::invalid_argument("grid_search_alpha: empty grid");
  std::sort(grid.begin(), grid.end());

  GridSearchResult result;
  std::vector<AlphaRun> runs;
  for (double alpha : grid) {
    RunConfig cfg = config;
    cfg.hyper.alpha = alpha;
    RunReport report = run(cfg, ds);
    AlphaRun ar;
    ar.alpha = alpha;
    ar.losses = report.trace.losses();
    ar.cumulative_seconds = report.cumulative_seconds;
    ar.diverged = report.diverged;
    runs.push_back(std::move(ar));
    result.reports.push_back(std::move(report));
  }

  std::optional<double> l_star = config.optimal_loss;
  if (!l_star) {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& r : runs)
      for (double l : r.losses)
        if (std::isfinite(l)) m = std::min(m, l);
    l_star = m;
  }
  result.optimal_loss_used = *l_star;

  // Recompute the per-report thresholds against the shared optimum.
  for (auto& report : result.reports) {
    report.optimal_loss_used = *l_star;
    fill_convergence(report);
  }

  bool converged = false;
  std::size_t best = select_best_alpha(runs, l_star, 0.01, converged);
  result.best_alpha = runs[best].alpha;
  result.converged = converged;
  return result;
}

// --- export -------------------------------------------------------------------

namespace {

std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

// Minimal JSON emitter so numbers carry 17 significant digits; non-finite
// values are emitted as quoted strings and restored on import.
struct JsonWriter {
  std::ostream& out;
  int indent = 0;
  bool first_in_scope = true;

  void nl() {
    out << '\n';
    for (int i = 0; i < indent; ++i) out << "  ";
  }
  void sep() {
    if (!first_in_scope) out << ',';
    first_in_scope = false;
    nl();
  }
  void open_object() { out << '{'; ++indent; first_in_scope = true; }
  void close_object() { --indent; nl(); out << '}'; first_in_scope = false; }
  void open_array() { out << '['; ++indent; first_in_scope = true; }
  void close_array() { --indent; nl(); out << ']'; first_in_scope = false; }
  void key(const char* k) { sep(); out << '"' << k << "\": "; }
  void value_number(double v) {
    if (std::isfinite(v)) out << fmt_double(v);
    else out << '"' << fmt_double(v) << '"';
  }
  void value_int(std::uint64_t v) { out << v; }
  void value_string(const std::string& s) { out << '"' << json_escape(s) << '"'; }
  void value_bool(bool b) { out << (b ? "true" : "false"); }
  void value_null() { out << "null"; }
};

void write_config(JsonWriter& w, const RunConfig& c) {
  w.open_object();
  w.key("engine"); w.value_string(engine_name(c.engine));
  w.key("task"); w.value_string(task_name(c.task));
  w.key("data_path"); w.value_string(c.data_path);
  w.key("layout"); w.value_string(layout_name(c.layout));
  w.key("alpha"); w.value_number(c.hyper.alpha);
  w.key("batch_b"); w.value_int(c.hyper.batch_b);
  w.key("epochs"); w.value_int(c.hyper.epochs);
  w.key("step_decay"); w.value_number(c.hyper.step_decay);
  w.key("workers"); w.value_int(c.workers);
  w.key("plan");
  if (c.plan) {
    w.open_object();
    w.key("access"); w.value_string(access_path_name(c.plan->access_path));
    w.key("replication"); w.value_string(replication_name(c.plan->model_replication));
    w.key("k"); w.value_int(c.plan->data_replication_k);
    w.key("workers"); w.value_int(c.plan->workers);
    w.key("group_size"); w.value_int(c.plan->group_size);
    w.key("circular_offsets"); w.value_bool(c.plan->circular_offsets);
    w.key("merge_period_epochs"); w.value_int(c.plan->merge_period_epochs);
    w.close_object();
  } else {
    w.value_null();
  }
  w.key("warp");
  if (c.warp) {
    w.open_object();
    w.key("warp_width"); w.value_int(c.warp->warp_width);
    w.key("segment_size"); w.value_int(c.warp->segment_size);
    w.key("conflict_policy");
    w.value_string(c.warp->conflict_policy == warpsim::ConflictPolicy::LowestLaneWins
                       ? "lowest-lane"
                       : "seeded-random");
    w.key("offsets_enabled"); w.value_bool(c.warp->offsets_enabled);
    w.key("lambda_cost"); w.value_number(c.warp->lambda_cost);
    w.close_object();
  } else {
    w.value_null();
  }
  w.key("repetitions"); w.value_int(c.repetitions);
  w.key("max_epochs"); w.value_int(c.max_epochs);
  w.key("wall_clock_budget_seconds"); w.value_number(c.wall_clock_budget_seconds);
  w.key("seed"); w.value_int(c.seed);
  w.key("optimal_loss");
  if (c.optimal_loss) w.value_number(*c.optimal_loss);
  else w.value_null();
  w.key("skip_warmup"); w.value_int(c.skip_warmup);
  w.close_object();
}

}  // namespace

void export_json(std::span<const RunReport> reports, std::ostream& out) {
  JsonWriter w{out};
  w.open_object();
  w.key("reports");
  w.open_array();
  for (const RunReport& r : reports) {
    w.sep();
    w.open_object();
    w.key("config");
    write_config(w, r.config);
    w.key("trace");
    w.open_object();
    w.key("diverged"); w.value_bool(r.trace.diverged);
    w.key("divergence_note"); w.value_string(r.trace.divergence_note);
    w.key("epochs");
    w.open_array();
    for (const auto& e : r.trace.epochs) {
      w.sep();
      w.out << "[" << e.epoch << ", " << fmt_double(e.loss) << ", " << fmt_double(e.seconds)
            << "]";
    }
    w.close_array();
    w.close_object();
    w.key("cumulative_seconds");
    w.open_array();
    for (double v : r.cumulative_seconds) {
      w.sep();
      w.value_number(v);
    }
    w.close_array();
    w.key("time_per_epoch_ms"); w.value_number(r.time_per_epoch_ms);
    w.key("epochs_to");
    w.open_object();
    for (int tol : kTolerancesPercent) {
      w.key(std::to_string(tol).c_str());
      auto it = r.epochs_to.find(tol);
      if (it != r.epochs_to.end() && it->second) w.value_int(*it->second);
      else w.value_null();
    }
    w.close_object();
    w.key("time_to_convergence_s");
    w.open_object();
    for (int tol : kTolerancesPercent) {
      w.key(std::to_string(tol).c_str());
      auto it = r.time_to_convergence_s.find(tol);
      if (it != r.time_to_convergence_s.end() && it->second) w.value_number(*it->second);
      else w.value_null();
    }
    w.close_object();
    w.key("optimal_loss_used"); w.value_number(r.optimal_loss_used);
    w.key("final_loss"); w.value_number(r.final_loss);
    w.key("diverged"); w.value_bool(r.diverged);
    w.key("divergence_note"); w.value_string(r.divergence_note);
    w.key("environment"); w.value_string(r.environment);
    w.key("gradient_evals_per_epoch");
    w.open_array();
    for (std::size_t v : r.gradient_evals_per_epoch) {
      w.sep();
      w.value_int(v);
    }
    w.close_array();
    w.key("warp_stats");
    if (r.warp_stats) {
      w.open_object();
      w.key("attempted_updates"); w.value_int(r.warp_stats->attempted_updates);
      w.key("surviving_updates"); w.value_int(r.warp_stats->surviving_updates);
      w.key("memory_transactions"); w.value_int(r.warp_stats->memory_transactions);
      w.key("micro_steps"); w.value_int(r.warp_stats->micro_steps);
      w.key("simulated_time"); w.value_number(r.warp_stats->simulated_time);
      w.close_object();
    } else {
      w.value_null();
    }
    w.close_object();
  }
  w.close_array();
  w.close_object();
  out << '\n';
}

namespace {

double json_number(const nlohmann::json& j) {
  if (j.is_string()) {
    std::string s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    throw std::runtime_error("unexpected string where number expected: " + s);
  }
  return j.get<double>();
}

}  // namespace

std::vector<RunReport> import_json(std::istream& in) {
  nlohmann::json root = nlohmann::json::parse(in);
  std::vector<RunReport> out;
  for (const auto& jr : root.at("reports")) {
    RunReport r;
    const auto& jc = jr.at("config");
    r.config.engine = engine_from_name(jc.at("engine").get<std::string>()).value();
    r.config.task = task_from_name(jc.at("task").get<std::string>()).value();
    r.config.data_path = jc.at("data_path").get<std::string>();
    r.config.layout = layout_from_name(jc.at("layout").get<std::string>()).value();
    r.config.hyper.task = r.config.task;
    r.config.hyper.alpha = json_number(jc.at("alpha"));
    r.config.hyper.batch_b = jc.at("batch_b").get<std::size_t>();
    r.config.hyper.epochs = jc.at("epochs").get<std::size_t>();
    r.config.hyper.step_decay = json_number(jc.at("step_decay"));
    r.config.workers = jc.at("workers").get<std::size_t>();
    if (!jc.at("plan").is_null()) {
      const auto& jp = jc.at("plan");
      ExecutionPlan p = parse_plan(jp.at("access").get<std::string>() + ":" +
                                   jp.at("replication").get<std::string>() + ":" +
                                   std::to_string(jp.at("k").get<std::size_t>()));
      p.workers = jp.at("workers").get<std::size_t>();
      p.group_size = jp.at("group_size").get<std::size_t>();
      p.circular_offsets = jp.at("circular_offsets").get<bool>();
      p.merge_period_epochs = jp.at("merge_period_epochs").get<std::size_t>();
      r.config.plan = p;
    }
    if (!jc.at("warp").is_null()) {
      const auto& jw = jc.at("warp");
      warpsim::WarpConfig wc;
      wc.warp_width = jw.at("warp_width").get<std::size_t>();
      wc.segment_size = jw.at("segment_size").get<std::size_t>();
      wc.conflict_policy = jw.at("conflict_policy").get<std::string>() == "lowest-lane"
                               ? warpsim::ConflictPolicy::LowestLaneWins
                               : warpsim::ConflictPolicy::SeededRandomWinner;
      wc.offsets_enabled = jw.at("offsets_enabled").get<bool>();
      wc.lambda_cost = json_number(jw.at("lambda_cost"));
      r.config.warp = wc;
    }
    r.config.repetitions = jc.at("repetitions").get<std::size_t>();
    r.config.max_epochs = jc.at("max_epochs").get<std::size_t>();
    r.config.wall_clock_budget_seconds = json_number(jc.at("wall_clock_budget_seconds"));
    r.config.seed = jc.at("seed").get<std::uint64_t>();
    if (!jc.at("optimal_loss").is_null())
      r.config.optimal_loss = json_number(jc.at("optimal_loss"));
    r.config.skip_warmup = jc.at("skip_warmup").get<std::size_t>();

    const auto& jt = jr.at("trace");
    r.trace.diverged = jt.at("diverged").get<bool>();
    r.trace.divergence_note = jt.at("divergence_note").get<std::string>();
    for (const auto& je : jt.at("epochs")) {
      EpochRecord rec;
      rec.epoch = je.at(0).get<std::size_t>();
      rec.loss = json_number(je.at(1));
      rec.seconds = json_number(je.at(2));
      r.trace.epochs.push_back(rec);
    }
    for (const auto& jv : jr.at("cumulative_seconds"))
      r.cumulative_seconds.push_back(json_number(jv));
    r.time_per_epoch_ms = json_number(jr.at("time_per_epoch_ms"));
    for (int tol : kTolerancesPercent) {
      const auto& je = jr.at("epochs_to").at(std::to_string(tol));
      r.epochs_to[tol] = je.is_null() ? std::optional<std::size_t>{}
                                      : std::optional<std::size_t>{je.get<std::size_t>()};
      const auto& jt2 = jr.at("time_to_convergence_s").at(std::to_string(tol));
      r.time_to_convergence_s[tol] =
          jt2.is_null() ? std::optional<double>{} : std::optional<double>{json_number(jt2)};
    }
    r.optimal_loss_used = json_number(jr.at("optimal_loss_used"));
    r.final_loss = json_number(jr.at("final_loss"));
    r.diverged = jr.at("diverged").get<bool>();
    r.divergence_note = jr.at("divergence_note").get<std::string>();
    r.environment = jr.at("environment").get<std::string>();
    for (const auto& jv : jr.at("gradient_evals_per_epoch"))
      r.gradient_evals_per_epoch.push_back(jv.get<std::size_t>());
    if (!jr.at("warp_stats").is_null()) {
      const auto& jw = jr.at("warp_stats");
      warpsim::WarpStats ws;
      ws.attempted_updates = jw.at("attempted_updates").get<std::size_t>();
      ws.surviving_updates = jw.at("surviving_updates").get<std::size_t>();
      ws.memory_transactions = jw.at("memory_transactions").get<std::size_t>();
      ws.micro_steps = jw.at("micro_steps").get<std::size_t>();
      ws.simulated_time = json_number(jw.at("simulated_time"));
      r.warp_stats = ws;
    }
    out.push_back(std::move(r));
  }
  return out;
}

const char* const kCsvHeader =
    "engine,task,data,layout,plan,workers,alpha,batch,epochs,seed,repetitions,"
    "tolerance_pct,epochs_to,time_to_s,time_per_epoch_ms,final_loss,optimal_loss,diverged";

void export_csv(std::span<const RunReport> reports, std::ostream& out) {
  out << kCsvHeader << '\n';
  for (const RunReport& r : reports) {
    for (int tol : kTolerancesPercent) {
      out << engine_name(r.config.engine) << ',' << task_name(r.config.task) << ','
          << r.config.data_path << ',' << layout_name(r.config.layout) << ','
          << (r.config.plan ? plan_to_string(*r.config.plan) : "") << ','
          << r.config.workers << ',' << fmt_double(r.config.hyper.alpha) << ','
          << r.config.hyper.batch_b << ',' << r.trace.epochs.size() << ',' << r.config.seed
          << ',' << r.config.repetitions << ',' << tol << ',';
      auto it = r.epochs_to.find(tol);
      if (it != r.epochs_to.end() && it->second) out << *it->second;
      else out << "dnc";
      out << ',';
      auto jt = r.time_to_convergence_s.find(tol);
      if (jt != r.time_to_convergence_s.end() && jt->second) out << fmt_double(*jt->second);
      else out << "dnc";
      out << ',' << fmt_double(r.time_per_epoch_ms) << ',' << fmt_double(r.final_loss) << ','
          << fmt_double(r.optimal_loss_used) << ',' << (r.diverged ? 1 : 0) << '\n';
    }
  }
}

void export_plot_data(std::span<const RunReport> reports, std::ostream& out) {
  bool first = true;
  for (const RunReport& r : reports) {
    if (!first) out << '\n';
    first = false;
    for (std::size_t i = 0; i < r.trace.epochs.size(); ++i)
      out << fmt_double(r.cumulative_seconds[i]) << ' ' << fmt_double(r.trace.epochs[i].loss)
          << '\n';
  }
}

}  // namespace sgdbench::harness
