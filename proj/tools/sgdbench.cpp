// Command-line driver: train/sweep/gridsearch/simulate/report over the
// engines and the benchmark harness.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sgdbench/fixtures.hpp"
#include "sgdbench/harness.hpp"

using namespace sgdbench;

namespace {

struct CliOptions {
  std::string task = "lr";
  std::string data;
  std::string layout = "csr";
  std::string engine = "sync";
  std::string plan;
  std::string plans;  // semicolon-separated, sweep only
  std::size_t workers = 1;
  std::size_t group_size = 32;
  std::size_t warp_width = 32;
  std::size_t segment_size = 8;
  double lambda_cost = 4.0;
  std::string policy = "lowest";
  bool no_offsets = false;
  double alpha = 0.01;
  bool grid = false;
  std::size_t batch = 1;
  std::size_t epochs = 10;
  std::size_t max_epochs = 1000;
  int tol = 0;  // 0 = no convergence gate
  std::uint64_t seed = 0;
  std::size_t reps = 3;
  double budget = 60.0;
  double decay = 1.0;
  std::optional<double> optimal_loss;
  std::size_t skip_warmup = 0;
  std::size_t merge_period = 1;
  std::string out;
  std::string format = "csv";
  std::string in;  // report input
  bool append_bias = false;
};

Dataset load_dataset(const CliOptions& opt) {
  if (opt.data.empty()) throw std::runtime_error("--data is required");
  Dataset ds;
  if (opt.data.size() > 4 && opt.data.substr(opt.data.size() - 4) == ".bin")
    ds = load_binary(opt.data);
  else
    ds = parse_libsvm_file(opt.data);
  if (opt.append_bias) ds = append_bias_feature(ds);
  auto layout = layout_from_name(opt.layout);
  if (!layout) throw std::runtime_error("unknown layout '" + opt.layout + "'");
  if (ds.layout != *layout) ds = convert_layout(ds, *layout);
  return ds;
}

harness::RunConfig build_config(const CliOptions& opt) {
  harness::RunConfig cfg;
  auto task = task_from_name(opt.task);
  if (!task) throw std::runtime_error("unknown task '" + opt.task + "'");
  auto engine = harness::engine_from_name(opt.engine);
  if (!engine) throw std::runtime_error("unknown engine '" + opt.engine + "'");
  auto layout = layout_from_name(opt.layout);
  if (!layout) throw std::runtime_error("unknown layout '" + opt.layout + "'");

  cfg.engine = *engine;
  cfg.task = *task;
  cfg.data_path = opt.data;
  cfg.layout = *layout;
  cfg.hyper.task = *task;
  cfg.hyper.alpha = opt.alpha;
  cfg.hyper.batch_b = opt.batch;
  cfg.hyper.epochs = opt.epochs;
  cfg.hyper.step_decay = opt.decay;
  cfg.workers = opt.workers;
  cfg.repetitions = opt.reps;
  cfg.max_epochs = opt.max_epochs;
  cfg.wall_clock_budget_seconds = opt.budget;
  cfg.seed = opt.seed;
  cfg.optimal_loss = opt.optimal_loss;
  cfg.skip_warmup = opt.skip_warmup;

  if (!opt.plan.empty() || cfg.engine == harness::Engine::Async ||
      cfg.engine == harness::Engine::NumaDual || cfg.engine == harness::Engine::WarpSim) {
    ExecutionPlan plan = opt.plan.empty() ? ExecutionPlan{} : parse_plan(opt.plan);
    plan.workers = opt.workers;
    plan.group_size = opt.group_size;
    plan.circular_offsets = !opt.no_offsets;
    plan.merge_period_epochs = opt.merge_period;
    cfg.plan = plan;
  }
  if (cfg.engine == harness::Engine::WarpSim) {
    warpsim::WarpConfig warp;
    warp.warp_width = opt.warp_width;
    warp.segment_size = opt.segment_size;
    warp.lambda_cost = opt.lambda_cost;
    warp.offsets_enabled = !opt.no_offsets;
    warp.conflict_policy = opt.policy == "random" ? warpsim::ConflictPolicy::SeededRandomWinner
                                                  : warpsim::ConflictPolicy::LowestLaneWins;
    cfg.warp = warp;
  }
  return cfg;
}

void write_reports(const std::vector<harness::RunReport>& reports, const CliOptions& opt) {
  std::ostringstream data;
  if (opt.format == "json")
    harness::export_json(reports, data);
  else if (opt.format == "plot")
    harness::export_plot_data(reports, data);
  else
    harness::export_csv(reports, data);

  if (opt.out.empty() || opt.out == "-") {
    std::cout << data.str();
  } else {
    std::ofstream f(opt.out);
    if (!f) throw std::runtime_error("cannot open " + opt.out + " for writing");
    f << data.str();
    std::cerr << "wrote " << reports.size() << " report(s) to " << opt.out << "\n";
  }
}

// exit code 2 when a requested tolerance was not reached
int convergence_gate(const std::vector<harness::RunReport>& reports, int tol) {
  if (tol == 0) return 0;
  for (const auto& r : reports) {
    auto it = r.epochs_to.find(tol);
    if (it != r.epochs_to.end() && it->second) return 0;
  }
  std::cerr << "no run converged to within " << tol << "% of the optimal loss\n";
  return 2;
}

int cmd_train(const CliOptions& opt) {
  harness::RunConfig cfg = build_config(opt);
  Dataset ds = load_dataset(opt);

  if (opt.grid) {
    harness::GridSearchResult result = harness::grid_search_alpha(cfg, ds);
    std::cerr << "best alpha: " << result.best_alpha
              << (result.converged ? "" : " (no grid point converged)") << "\n";
    write_reports(result.reports, opt);
    return result.converged ? 0 : 2;
  }

  harness::RunReport report = harness::run(cfg, ds);
  if (report.diverged) std::cerr << "diverged: " << report.divergence_note << "\n";
  std::cerr << "final loss " << report.final_loss << " after " << report.trace.epochs.size()
            << " epochs, " << report.time_per_epoch_ms << " ms/epoch\n";
  write_reports({report}, opt);
  return convergence_gate({report}, opt.tol);
}

int cmd_gridsearch(const CliOptions& opt) {
  CliOptions grid_opt = opt;
  grid_opt.grid = true;
  return cmd_train(grid_opt);
}

int cmd_sweep(const CliOptions& opt) {
  harness::RunConfig base = build_config(opt);
  if (base.engine == harness::Engine::Sync) base.engine = harness::Engine::Async;
  Dataset ds = load_dataset(opt);

  std::vector<std::string> plan_texts;
  if (!opt.plans.empty()) {
    std::stringstream ss(opt.plans);
    std::string item;
    while (std::getline(ss, item, ';'))
      if (!item.empty()) plan_texts.push_back(item);
  } else {
    for (const char* access : {"row-rr", "row-ch", "col-rr", "col-ch"})
      plan_texts.push_back(std::string(access) + ":kernel:" +
                           std::to_string(opt.plan.empty() ? 0 : parse_plan(opt.plan).data_replication_k));
  }

  std::vector<harness::RunReport> reports;
  for (const std::string& text : plan_texts) {
    harness::RunConfig cfg = base;
    ExecutionPlan plan = parse_plan(text);
    plan.workers = opt.workers;
    plan.group_size = opt.group_size;
    plan.circular_offsets = !opt.no_offsets;
    plan.merge_period_epochs = opt.merge_period;
    cfg.plan = plan;
    try {
      validate_plan(plan, ds);
    } catch (const std::exception& e) {
      std::cerr << "skipping " << text << ": " << e.what() << "\n";
      continue;
    }
    reports.push_back(harness::run(cfg, ds));
    std::cerr << plan_to_string(plan) << ": final loss " << reports.back().final_loss
              << ", " << reports.back().time_per_epoch_ms << " ms/epoch\n";
  }
  if (reports.empty()) throw std::runtime_error("no plan in the sweep fits the layout");
  write_reports(reports, opt);
  return convergence_gate(reports, opt.tol);
}

int cmd_simulate(const CliOptions& opt) {
  CliOptions sim_opt = opt;
  sim_opt.engine = "warpsim";
  harness::RunConfig cfg = build_config(sim_opt);
  Dataset ds = load_dataset(sim_opt);

  harness::RunReport report = harness::run(cfg, ds);
  if (report.warp_stats) {
    const auto& s = *report.warp_stats;
    std::size_t epochs = report.trace.epochs.size();
    std::cerr << "micro-steps " << s.micro_steps << ", transactions " << s.memory_transactions
              << " (" << (epochs ? double(s.memory_transactions) / double(epochs) : 0.0)
              << "/epoch), survivor fraction " << s.survivor_fraction() << ", simulated time "
              << s.simulated_time << "\n";
  }
  write_reports({report}, sim_opt);
  return convergence_gate({report}, opt.tol);
}

int cmd_report(const CliOptions& opt) {
  if (opt.in.empty()) throw std::runtime_error("--in is required for report");
  std::ifstream f(opt.in);
  if (!f) throw std::runtime_error("cannot open " + opt.in);
  std::vector<harness::RunReport> reports = harness::import_json(f);
  write_reports(reports, opt);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"parallel SGD engines and convergence benchmark harness"};
  app.set_config("--config", "", "flat key=value config file; flags override it");

  CliOptions opt;
  app.add_option("--task", opt.task, "lr or svm")->check(CLI::IsMember({"lr", "svm"}));
  app.add_option("--data", opt.data, "dataset path (LIBSVM text or .bin cache)");
  app.add_option("--layout", opt.layout, "dense-row, dense-col, csr or padded")
      ->check(CLI::IsMember({"dense-row", "dense-col", "csr", "padded"}));
  app.add_option("--engine", opt.engine, "sync, async, numa or warpsim")
      ->check(CLI::IsMember({"sync", "async", "numa", "warpsim"}));
  app.add_option("--plan", opt.plan, "execution plan <access>:<replication>:<k>");
  app.add_option("--plans", opt.plans, "semicolon-separated plan list (sweep)");
  app.add_option("--workers", opt.workers, "worker/thread count");
  app.add_option("--group-size", opt.group_size, "block-replication group width");
  app.add_option("--warp-width", opt.warp_width, "simulated warp width");
  app.add_option("--segment-size", opt.segment_size, "coordinates per memory segment");
  app.add_option("--lambda", opt.lambda_cost, "simulated cost per memory transaction");
  app.add_option("--policy", opt.policy, "conflict winner policy: lowest or random")
      ->check(CLI::IsMember({"lowest", "random"}));
  app.add_flag("--no-offsets", opt.no_offsets, "disable circular coordinate offsets");
  app.add_flag("--append-bias", opt.append_bias, "append a constant-1 feature at ingestion");
  app.add_option("--alpha", opt.alpha, "step size");
  app.add_flag("--grid", opt.grid, "grid-search the step size in powers of 10");
  app.add_option("--batch", opt.batch, "mini-batch size B");
  app.add_option("--epochs", opt.epochs, "number of epochs t");
  app.add_option("--decay", opt.decay, "per-epoch step-size multiplier");
  app.add_option("--tol", opt.tol, "convergence gate in percent")
      ->check(CLI::IsMember({0, 10, 5, 2, 1}));
  app.add_option("--seed", opt.seed, "random seed");
  app.add_option("--reps", opt.reps, "timing repetitions");
  app.add_option("--budget", opt.budget, "wall-clock budget per run (seconds)");
  app.add_option("--max-epochs", opt.max_epochs, "hard cap on epochs");
  double optimal_loss_flag = -1.0;
  auto* opt_loss = app.add_option("--optimal-loss", optimal_loss_flag,
                                  "optimal loss for convergence thresholds");
  app.add_option("--skip-warmup", opt.skip_warmup, "epochs excluded from time/epoch");
  app.add_option("--merge-period", opt.merge_period,
                 "dual-instance merge cadence in epochs (0 = never)");
  app.add_option("--out", opt.out, "output path (default stdout)");
  app.add_option("--format", opt.format, "csv, json or plot")
      ->check(CLI::IsMember({"csv", "json", "plot"}));
  app.add_option("--in", opt.in, "input report JSON (report subcommand)");

  auto* train = app.add_subcommand("train", "train one configuration");
  auto* sweep = app.add_subcommand("sweep", "run a set of execution plans");
  auto* gridsearch = app.add_subcommand("gridsearch", "step-size grid search");
  auto* simulate = app.add_subcommand("simulate", "run the warp lockstep simulator");
  auto* report = app.add_subcommand("report", "re-export a saved JSON report");
  for (auto* sub : {train, sweep, gridsearch, simulate, report}) sub->fallthrough();
  app.require_subcommand(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  if (opt_loss->count() > 0) opt.optimal_loss = optimal_loss_flag;

  try {
    if (train->parsed()) return cmd_train(opt);
    if (sweep->parsed()) return cmd_sweep(opt);
    if (gridsearch->parsed()) return cmd_gridsearch(opt);
    if (simulate->parsed()) return cmd_simulate(opt);
    if (report->parsed()) return cmd_report(opt);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
