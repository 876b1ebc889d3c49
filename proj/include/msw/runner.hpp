#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "msw/config.hpp"
#include "msw/diagnostics.hpp"
#include "msw/timestepper.hpp"

namespace msw {

struct RunResult {
  RunConfig config;  // with dt resolved
  std::shared_ptr<const Discretisation> disc;  // owns the spaces the fields below live on
  int steps = 0;
  State initial;
  State final;
  Totals initial_totals;
  Totals final_totals;
  double max_cloud = 0.0;     // largest q_c dof value seen at any step
  double max_courant = 0.0;
  double max_limiter_excess = 0.0;
  int monotonicity_warnings = 0;
  double rain_poleward_fraction = 0.0;  // share of accumulated rain with |lat| > 30 deg
  double first_cloud_day = -1.0;        // first time any q_c > 0, -1 if never
  double first_rain_day = -1.0;
  Field pv;
  std::optional<std::string> failure;  // numerical failure message, if the run stopped early
};

/// Called after every completed step with the step index (1-based).
using StepObserver = std::function<void(int step, const State&, const StepReport&)>;

/// Resolves the timestep: the given dt, or courant / (Courant number per unit
/// dt of the initial velocity). The step count is rounded up so the run ends
/// exactly at `days` and dt is shrunk to match.
std::pair<double, int> resolve_timestep(const RunConfig& cfg, const Discretisation& disc, const Field& u0);

/// Runs one simulation. With an output directory it writes config.txt, a
/// series row per step, snapshots at the configured cadence and a final
/// checkpoint. Numerical failures are captured in RunResult::failure (the
/// outputs written so far are kept); configuration errors throw.
RunResult run_simulation(const RunConfig& cfg, const StepObserver& observer = {});

struct ConvergenceRow {
  int level = 0;
  double dt = 0.0;
  int steps = 0;
  double err_u = 0.0, err_D = 0.0, err_b = 0.0, err_qv = 0.0, err_qc = 0.0;
  double max_cloud = 0.0;
  double rain = 0.0;
  std::optional<std::string> failure;
};

struct ConvergenceResult {
  std::vector<ConvergenceRow> rows;
  /// Observed orders between consecutive levels: log2(e_l / e_{l+1}).
  std::vector<std::array<double, 4>> orders;  // u, D, b, q_v
};

/// Steady-state runs at each level with the Courant number held fixed.
/// Errors are normalised L2 against the initial state, except q_c which is
/// the plain L2 norm. Writes convergence.csv to the output directory if set.
ConvergenceResult run_convergence(const RunConfig& base, const std::vector<int>& levels, int workers = 1);

struct SweepMember {
  std::string label;  // "dry" or the beta1 value
  double beta1 = 0.0;
  RunResult result;
  double pv_difference = 0.0;  // normalised L2(PV - PV_dry), when a dry run exists
};

/// One mountain run per beta1 plus, if requested, a dry run (physics off).
/// Each member writes into <output_dir>/<label>; sweep.csv summarises.
std::vector<SweepMember> run_beta1_sweep(const RunConfig& base, const std::vector<double>& betas, bool include_dry,
                                         int workers = 1);

/// Three-state and one-way schemes on the same configuration.
std::pair<RunResult, RunResult> run_physics_comparison(const RunConfig& base, int workers = 1);

/// Runs jobs on up to `workers` threads, preserving order of the results.
template <typename T>
std::vector<T> run_parallel(const std::vector<std::function<T()>>& jobs, int workers);

/// Worker count from MSW_WORKERS (default 1). Throws ConfigError if malformed.
int workers_from_env();

}  // namespace msw

#include "msw/runner_impl.hpp"
