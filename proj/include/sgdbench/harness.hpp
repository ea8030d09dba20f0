#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sgdbench/async_engine.hpp"
#include "sgdbench/dataset.hpp"
#include "sgdbench/glm.hpp"
#include "sgdbench/simd_sim.hpp"
#include "sgdbench/sync_engine.hpp"
#include "sgdbench/trace.hpp"

namespace sgdbench::harness {

enum class Engine { Sync, Async, NumaDual, WarpSim };

const char* engine_name(Engine e);
std::optional<Engine> engine_from_name(std::string_view name);

// Convergence tolerances, in percent of the optimal loss.
inline constexpr int kTolerancesPercent[4] = {10, 5, 2, 1};

struct RunConfig {
  Engine engine = Engine::Sync;
  Task task = Task::LR;
  std::string data_path;
  Layout layout = Layout::Csr;
  Hyperparams hyper;
  std::size_t workers = 1;  // sync engine; also seeds plan.workers when no plan given
  std::optional<ExecutionPlan> plan;
  std::optional<warpsim::WarpConfig> warp;
  std::size_t repetitions = 3;
  std::size_t max_epochs = 1000;  // hard cap on hyper.epochs; 0 is an error
  double wall_clock_budget_seconds = 60.0;
  std::uint64_t seed = 0;
  std::optional<double> optimal_loss;  // overrides the estimate when set
  std::size_t skip_warmup = 0;         // epochs excluded from the time-per-epoch mean

  void validate() const;
};

struct RunReport {
  RunConfig config;
  LossTrace trace;                        // first repetition's losses
  std::vector<double> cumulative_seconds; // prefix sums of mean epoch times
  double time_per_epoch_ms = 0.0;         // mean over epochs and repetitions
  std::map<int, std::optional<std::size_t>> epochs_to;      // tolerance% -> epoch
  std::map<int, std::optional<double>> time_to_convergence_s;
  double optimal_loss_used = 0.0;
  double final_loss = 0.0;
  bool diverged = false;
  std::string divergence_note;
  std::string environment;
  std::vector<std::size_t> gradient_evals_per_epoch;  // async engines
  std::optional<warpsim::WarpStats> warp_stats;
};

// First 1-based epoch e with loss_e <= (1 + tol) * l_star, or nullopt.
std::optional<std::size_t> convergence_epochs(std::span<const double> losses, double l_star,
                                              double tol);

std::string environment_fingerprint();

RunReport run(const RunConfig& config, const Dataset& ds);
RunReport run(const RunConfig& config, const Dataset& ds, const Clock& clock);
RunReport run(const RunConfig& config);  // loads config.data_path

// Lowest loss observed across the probe configurations, each run under the
// per-config budget. Results are cached per (task, dataset content).
double estimate_optimal_loss(Task task, const Dataset& ds,
                             const std::vector<RunConfig>& probes,
                             double budget_seconds_per_config = 60.0);
// Default probes: synchronous batch GD over a small step-size grid.
double estimate_optimal_loss(Task task, const Dataset& ds,
                             double budget_seconds_per_config = 60.0);
void clear_optimal_loss_cache();

std::vector<double> default_alpha_grid();  // {1e-6, ..., 1e2} by decades

// A finished run of one step size, reduced to what selection needs.
struct AlphaRun {
  double alpha = 0.0;
  std::vector<double> losses;
  std::vector<double> cumulative_seconds;
  bool diverged = false;
};

// Selection rule: fastest time to the 1% threshold; ties go to the smaller
// step size; if nothing converges, the lowest final loss wins and the result
// is flagged non-converged. l_star defaults to the minimum loss observed
// across the runs.
std::size_t select_best_alpha(const std::vector<AlphaRun>& runs, std::optional<double> l_star,
                              double tol, bool& converged_out);

struct GridSearchResult {
  double best_alpha = 0.0;
  bool converged = false;
  double optimal_loss_used = 0.0;
  std::vector<RunReport> reports;  // one per grid point, ascending alpha
};

GridSearchResult grid_search_alpha(const RunConfig& config, const Dataset& ds,
                                   std::vector<double> grid = default_alpha_grid());

// --- Export -----------------------------------------------------------------
//
// CSV: one row per (config, tolerance); fixed header, floats with 17
// significant digits. JSON: a faithful tree of RunReport, importable.
// Plot data: "time loss" columns per config, blocks separated by blank lines.
void export_csv(std::span<const RunReport> reports, std::ostream& out);
void export_json(std::span<const RunReport> reports, std::ostream& out);
std::vector<RunReport> import_json(std::istream& in);
void export_plot_data(std::span<const RunReport> reports, std::ostream& out);

extern const char* const kCsvHeader;

}  // namespace sgdbench::harness
