#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "msw/config.hpp"
#include "msw/errors.hpp"
#include "msw/runner.hpp"

using namespace msw;

namespace {

constexpr int kOk = 0;
constexpr int kNumericalFailure = 1;
constexpr int kConfigError = 2;

struct CommonOptions {
  std::string config_file;
  std::vector<std::string> sets;
  std::optional<std::string> test, framework, preset, scheme, output;
  std::optional<int> level;
  std::optional<double> days, dt, courant, beta1, beta2, xi;

  void add_to(CLI::App* app) {
    app->add_option("-c,--config", config_file, "key = value config file")->check(CLI::ExistingFile);
    app->add_option("-s,--set", sets, "override any config key: --set key=value (repeatable)");
    app->add_option("--test", test, "steady | mountain | jet");
    app->add_option("--framework", framework, "moist_convective (MC) | moist_convective_thermal (MCT) | "
                                              "moist_thermal (MT) | moist_convective_pseudo_thermal (MCPT)");
    app->add_option("--preset", preset, "paper | desk");
    app->add_option("--scheme", scheme, "three_state | one_way | off");
    app->add_option("-o,--output", output, "output directory");
    app->add_option("--level", level, "icosahedral refinement level");
    app->add_option("--days", days, "simulated days");
    app->add_option("--dt", dt, "timestep in seconds (default: from --courant)");
    app->add_option("--courant", courant, "target advective Courant number");
    app->add_option("--beta1", beta1, "convective depth feedback (m)");
    app->add_option("--beta2", beta2, "latent buoyancy feedback (m s^-2)");
    app->add_option("--xi", xi, "initial subsaturation");
  }

  KeyValues flag_layer() const {
    KeyValues kv;
    auto put = [&](const char* key, const auto& opt) {
      if (opt) kv.emplace_back(key, fmt::format("{}", *opt));
    };
    put("test", test);
    put("framework", framework);
    put("preset", preset);
    put("scheme", scheme);
    put("output_dir", output);
    put("level", level);
    put("days", days);
    put("dt", dt);
    put("courant", courant);
    put("beta1", beta1);
    put("beta2", beta2);
    put("xi", xi);
    for (const std::string& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw ConfigError(fmt::format("--set expects key=value (got '{}')", s));
      kv.emplace_back(s.substr(0, eq), s.substr(eq + 1));
    }
    return kv;
  }

  RunConfig resolve(const KeyValues& command_defaults) const {
    std::vector<KeyValues> layers{command_defaults};
    if (!config_file.empty()) layers.push_back(read_config_file(config_file));
    layers.push_back(flag_layer());
    return resolve_config(layers);
  }
};

void report(const RunResult& r) {
  const double drift = r.initial_totals.mass > 0.0 ? r.final_totals.mass / r.initial_totals.mass - 1.0 : 0.0;
  fmt::print("{} / {} level {}: {} steps of {:.6g} s, mass drift {:.3e}, total rain {:.6e}, max q_c {:.3e}\n",
             test_name(r.config.spec.test), framework_name(r.config.framework.framework), r.config.spec.level,
             r.steps, r.config.dt, drift, r.final_totals.rain, r.max_cloud);
  if (r.failure) fmt::print(stderr, "numerical failure: {}\n", *r.failure);
}

std::vector<double> default_betas() { return {1.6, 1600.0, 8500.0, 10000.0}; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Moist shallow-water simulations on the sphere"};
  app.require_subcommand(1);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace | debug | info | warn | error | off");

  CommonOptions run_opts, conv_opts, sweep_opts, cmp_opts, def_opts;
  auto* run = app.add_subcommand("run", "run one simulation");
  run_opts.add_to(run);

  auto* conv = app.add_subcommand("convergence", "steady-state convergence study at fixed Courant number");
  conv_opts.add_to(conv);
  std::vector<int> levels{3, 4, 5};
  conv->add_option("--levels", levels, "consecutive refinement levels")->delimiter(',');

  auto* sweep = app.add_subcommand("sweep-beta1", "mountain runs over beta1 plus a dry reference");
  sweep_opts.add_to(sweep);
  std::vector<double> betas = default_betas();
  bool no_dry = false;
  sweep->add_option("--betas", betas, "beta1 values (m)")->delimiter(',');
  sweep->add_flag("--no-dry", no_dry, "skip the dry reference run");

  auto* cmp = app.add_subcommand("compare-physics", "three-state vs one-way physics on the same run");
  cmp_opts.add_to(cmp);

  auto* defs = app.add_subcommand("print-defaults", "print the resolved default configuration");
  def_opts.add_to(defs);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    spdlog::set_level(spdlog::level::from_str(log_level));
    const int workers = workers_from_env();

    if (*run) {
      const RunConfig cfg = run_opts.resolve({{"output_dir", "msw_output"}});
      const RunResult r = run_simulation(cfg);
      report(r);
      return r.failure ? kNumericalFailure : kOk;
    }
    if (*conv) {
      const RunConfig cfg =
          conv_opts.resolve({{"test", "steady"}, {"courant", "0.02"}, {"xi", "0"}, {"output_dir", "msw_convergence"}});
      if (cfg.spec.test != TestCase::SteadyState) throw ConfigError("convergence runs the steady-state test only");
      const ConvergenceResult r = run_convergence(cfg, levels, workers);
      fmt::print("level,dt,err_u,err_D,err_b,err_qv,err_qc,max_qc,rain\n");
      bool failed = false;
      for (const auto& row : r.rows) {
        fmt::print("{},{:.6g},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e}\n", row.level, row.dt, row.err_u,
                   row.err_D, row.err_b, row.err_qv, row.err_qc, row.max_cloud, row.rain);
        failed = failed || row.failure.has_value();
      }
      for (std::size_t i = 0; i < r.orders.size(); ++i) {
        const auto& o = r.orders[i];
        fmt::print("order {}->{}: u {:.3f}, D {:.3f}, b {:.3f}, qv {:.3f}\n", r.rows[i].level, r.rows[i + 1].level,
                   o[0], o[1], o[2], o[3]);
      }
      return failed ? kNumericalFailure : kOk;
    }
    if (*sweep) {
      const RunConfig cfg = sweep_opts.resolve(
          {{"test", "mountain"}, {"framework", "moist_convective"}, {"output_dir", "msw_sweep"}});
      const auto members = run_beta1_sweep(cfg, betas, !no_dry, workers);
      bool failed = false;
      for (const auto& m : members) {
        fmt::print("{}: total rain {:.6e}, PV difference from dry {:.6e}\n", m.label, m.result.final_totals.rain,
                   m.pv_difference);
        failed = failed || m.result.failure.has_value();
      }
      return failed ? kNumericalFailure : kOk;
    }
    if (*cmp) {
      const RunConfig cfg = cmp_opts.resolve(
          {{"test", "mountain"}, {"framework", "moist_convective"}, {"output_dir", "msw_compare"}});
      const auto [three, one] = run_physics_comparison(cfg, workers);
      report(three);
      report(one);
      if (one.final_totals.rain > 0.0) {
        fmt::print("rain ratio three_state / one_way = {:.4f}\n", three.final_totals.rain / one.final_totals.rain);
      }
      return (three.failure || one.failure) ? kNumericalFailure : kOk;
    }
    if (*defs) {
      fmt::print("{}", echo_config(def_opts.resolve({})));
      return kOk;
    }
  } catch (const ConfigError& e) {
    fmt::print(stderr, "configuration error: {}\n", e.what());
    return kConfigError;
  } catch (const ArgumentError& e) {
    fmt::print(stderr, "argument error: {}\n", e.what());
    return kConfigError;
  } catch (const IoError& e) {
    fmt::print(stderr, "I/O error: {}\n", e.what());
    return kNumericalFailure;
  } catch (const Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kNumericalFailure;
  }
  return kOk;
}
