#include "msw/runner.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "msw/errors.hpp"

namespace msw {

namespace {

constexpr double kDay = 86400.0;

double poleward_fraction(const Discretisation& disc, const Field& q, double lat_deg) {
  const double cut = std::sin(lat_deg * std::numbers::pi / 180.0);
  double total = 0.0, pole = 0.0;
  for (int c = 0; c < disc.mesh().num_cells(); ++c) {
    const Eigen::Vector3d ql = disc.local_dg(q, c);
    for (int k = 0; k < disc.num_cell_points(); ++k) {
      const Vec3 x = disc.cell_point(c, k);
      const double v = disc.cell_weight(c, k) * (disc.dg_table().values[k] * ql)(0);
      total += v;
      if (std::abs(x.z()) / x.norm() > cut) pole += v;
    }
  }
  return total > 0.0 ? pole / total : 0.0;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
  if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
}

std::array<double, 4> steady_errors(const Discretisation& disc, const State& s, const State& ref, bool thermal) {
  return {l2_error(disc, s.u, ref.u, true), l2_error(disc, s.D, ref.D, true),
          thermal ? l2_error(disc, s.b, ref.b, true) : 0.0, l2_error(disc, s.qv, ref.qv, true)};
}

}  // namespace

std::pair<double, int> resolve_timestep(const RunConfig& cfg, const Discretisation& disc, const Field& u0) {
  double dt = cfg.dt;
  if (dt == 0.0) {
    const double per_second = courant_number(disc, u0, 1.0);
    if (!(per_second > 0.0)) throw ConfigError("cannot derive dt from a Courant number with zero initial velocity");
    dt = cfg.courant / per_second;
  }
  const double length = cfg.spec.days * kDay;
  // The tolerance keeps an echoed dt (already length / n) at exactly n steps.
  const int steps = std::max(1, static_cast<int>(std::ceil(length / dt - 1e-9)));
  return {length / steps, steps};
}

RunResult run_simulation(const RunConfig& cfg_in, const StepObserver& observer) {
  RunResult result;
  result.config = cfg_in;
  RunConfig& cfg = result.config;
  const FrameworkConfig& fw = cfg.framework;
  const PhysicsParams physics = cfg.physics_params();

  result.disc = std::make_shared<const Discretisation>(
      build_icosahedral_sphere(cfg.spec.level, cfg.spec.radius, cfg.max_level));
  const Discretisation& disc = *result.disc;
  const InitialCondition ic = make_initial_state(disc, cfg.spec, fw, physics);
  const auto [dt, total_steps] = resolve_timestep(cfg, disc, ic.state.u);
  cfg.dt = dt;

  State s = ic.state;
  int start_step = 0;
  if (!cfg.restart.empty()) {
    s = read_checkpoint(cfg.restart, disc);
    start_step = static_cast<int>(std::llround(s.time / dt));
    if (std::abs(start_step * dt - s.time) > 1e-6 * dt) {
      throw ConfigError(fmt::format("checkpoint time {} s is not a whole number of {} s steps", s.time, dt));
    }
  }
  result.initial = s;
  result.initial_totals = totals(disc, s);

  SolverConfig sc;
  sc.dt = dt;
  sc.outer_iterations = cfg.outer_iterations;
  sc.inner_iterations = cfg.inner_iterations;
  sc.linear_tolerance = cfg.linear_tolerance;
  sc.limiter = cfg.limiter;
  sc.H = cfg.spec.H;
  sc.b_ref = ic.state.b;
  Stepper stepper(disc, fw, physics, sc, &ic.theta);

  const bool steady = cfg.spec.test == TestCase::SteadyState;
  const bool write = !cfg.output_dir.empty();
  std::optional<SeriesWriter> series;
  const int snapshot_every =
      cfg.snapshot_days > 0.0 ? std::max(1, static_cast<int>(std::llround(cfg.snapshot_days * kDay / dt))) : 0;
  auto snapshot = [&](int step, const State& st) {
    if (!write) return;
    write_snapshot(cfg.output_dir / fmt::format("snapshot_{:06d}.csv", step),
                   make_snapshot(disc, st, fw, physics, &ic.theta));
  };
  auto row = [&](const State& st) {
    SeriesRow r;
    r.time_days = st.time / kDay;
    r.totals = totals(disc, st);
    r.courant = courant_number(disc, st.u, dt);
    if (steady) r.errors = steady_errors(disc, st, ic.state, fw.thermal());
    result.max_courant = std::max(result.max_courant, r.courant);
    return r;
  };
  auto track = [&](const State& st) {
    const double qc = st.qc.values.maxCoeff();
    result.max_cloud = std::max(result.max_cloud, qc);
    if (qc > 0.0 && result.first_cloud_day < 0.0) result.first_cloud_day = st.time / kDay;
    if (st.qr.values.maxCoeff() > 0.0 && result.first_rain_day < 0.0) result.first_rain_day = st.time / kDay;
  };

  if (write) {
    std::filesystem::create_directories(cfg.output_dir);
    write_text(cfg.output_dir / "config.txt", echo_config(cfg));
    series.emplace(cfg.output_dir / "series.csv", steady);
    series->append(row(s));
    snapshot(start_step, s);
  } else {
    row(s);
  }
  track(s);

  spdlog::info("{} / {} at level {}: dt = {:.6g} s, {} steps", test_name(cfg.spec.test), framework_name(fw.framework),
               cfg.spec.level, dt, total_steps - start_step);
  int step = start_step;
  try {
    while (step < total_steps) {
      const StepReport rep = stepper.step(s);
      ++step;
      result.max_limiter_excess = std::max(result.max_limiter_excess, rep.limiter_excess);
      result.monotonicity_warnings += rep.monotonicity_warnings;
      const SeriesRow r = row(s);
      if (series) series->append(r);
      track(s);
      if (snapshot_every > 0 && step % snapshot_every == 0 && step != total_steps) snapshot(step, s);
      if (observer) observer(step, s, rep);
    }
  } catch (const Error& e) {
    if (dynamic_cast<const ConfigError*>(&e)) throw;
    result.failure = e.what();
    spdlog::error("run stopped after {} steps: {}", step, e.what());
  }

  result.steps = step - start_step;
  result.final = s;
  result.final_totals = totals(disc, s);
  result.rain_poleward_fraction = poleward_fraction(disc, s.qr, 30.0);
  if (!result.failure) {
    result.pv = potential_vorticity(disc, s, fw);
    if (write) {
      snapshot(step, s);
      write_checkpoint(cfg.output_dir / "final.ckpt", s, disc.mesh().hash());
    }
  }
  return result;
}

ConvergenceResult run_convergence(const RunConfig& base, const std::vector<int>& levels, int workers) {
  if (levels.size() < 2) throw ArgumentError("a convergence study needs at least two levels");
  for (std::size_t i = 1; i < levels.size(); ++i) {
    if (levels[i] != levels[i - 1] + 1) throw ArgumentError("convergence levels must be consecutive and increasing");
  }
  std::vector<std::function<ConvergenceRow()>> jobs;
  for (int level : levels) {
    jobs.push_back([&base, level] {
      RunConfig cfg = base;
      cfg.spec.test = TestCase::SteadyState;
      cfg.spec.level = level;
      cfg.dt = 0.0;
      if (!base.output_dir.empty()) cfg.output_dir = base.output_dir / fmt::format("level_{}", level);
      const RunResult r = run_simulation(cfg);
      ConvergenceRow row;
      row.level = level;
      row.dt = r.config.dt;
      row.steps = r.steps;
      row.failure = r.failure;
      row.max_cloud = r.max_cloud;
      row.rain = r.final_totals.rain;
      const Discretisation& disc = *r.disc;
      const State& fin = r.final;
      const State& ini = r.initial;
      const auto e = steady_errors(disc, fin, ini, cfg.framework.thermal());
      row.err_u = e[0];
      row.err_D = e[1];
      row.err_b = e[2];
      row.err_qv = e[3];
      row.err_qc = l2_error(disc, fin.qc, [](const Vec3&) { return 0.0; }, false);
      return row;
    });
  }
  ConvergenceResult out;
  out.rows = run_parallel(jobs, workers);
  for (std::size_t i = 1; i < out.rows.size(); ++i) {
    const auto& a = out.rows[i - 1];
    const auto& b = out.rows[i];
    auto order = [](double ea, double eb) { return (ea > 0.0 && eb > 0.0) ? std::log2(ea / eb) : 0.0; };
    out.orders.push_back({order(a.err_u, b.err_u), order(a.err_D, b.err_D), order(a.err_b, b.err_b),
                          order(a.err_qv, b.err_qv)});
  }
  if (!base.output_dir.empty()) {
    std::filesystem::create_directories(base.output_dir);
    std::string csv = "level,dt,steps,err_u,err_D,err_b,err_qv,err_qc,max_qc,rain,order_u,order_D,order_b,order_qv\n";
    for (std::size_t i = 0; i < out.rows.size(); ++i) {
      const auto& r = out.rows[i];
      csv += fmt::format("{},{},{},{},{},{},{},{},{},{}", r.level, r.dt, r.steps, r.err_u, r.err_D, r.err_b, r.err_qv,
                         r.err_qc, r.max_cloud, r.rain);
      if (i == 0) {
        csv += ",,,,\n";
      } else {
        const auto& o = out.orders[i - 1];
        csv += fmt::format(",{},{},{},{}\n", o[0], o[1], o[2], o[3]);
      }
    }
    write_text(base.output_dir / "convergence.csv", csv);
  }
  return out;
}

std::vector<SweepMember> run_beta1_sweep(const RunConfig& base, const std::vector<double>& betas, bool include_dry,
                                         int workers) {
  if (betas.empty()) throw ArgumentError("beta1 sweep needs at least one value");
  std::vector<std::function<SweepMember()>> jobs;
  auto member = [&base](std::string label, double beta1, bool dry) {
    return [&base, label, beta1, dry] {
      RunConfig cfg = base;
      cfg.framework.beta1 = beta1;
      if (dry) cfg.physics.scheme = PhysicsScheme::Off;
      if (!base.output_dir.empty()) cfg.output_dir = base.output_dir / label;
      SweepMember m;
      m.label = label;
      m.beta1 = beta1;
      m.result = run_simulation(cfg);
      return m;
    };
  };
  if (include_dry) jobs.push_back(member("dry", base.framework.beta1, true));
  for (double b : betas) jobs.push_back(member(fmt::format("beta1_{}", b), b, false));
  std::vector<SweepMember> out = run_parallel(jobs, workers);

  if (include_dry && !out.front().result.failure) {
    const Discretisation& disc = *out.front().result.disc;
    const Field& dry = out.front().result.pv;
    for (auto& m : out) {
      if (m.result.failure) continue;
      // Same level and radius, so the fields share a mesh even though each
      // run built its own copy.
      m.pv_difference = l2_error(disc, Field(disc.dg(), m.result.pv.values), dry, true);
    }
  }
  if (!base.output_dir.empty()) {
    std::string csv = "label,beta1,total_rain,max_qc,pv_difference,failed\n";
    for (const auto& m : out) {
      csv += fmt::format("{},{},{},{},{},{}\n", m.label, m.beta1, m.result.final_totals.rain, m.result.max_cloud,
                         m.pv_difference, m.result.failure ? 1 : 0);
    }
    write_text(base.output_dir / "sweep.csv", csv);
  }
  return out;
}

std::pair<RunResult, RunResult> run_physics_comparison(const RunConfig& base, int workers) {
  std::vector<std::function<RunResult()>> jobs;
  for (PhysicsScheme scheme : {PhysicsScheme::ThreeState, PhysicsScheme::OneWay}) {
    jobs.push_back([&base, scheme] {
      RunConfig cfg = base;
      cfg.physics.scheme = scheme;
      if (!base.output_dir.empty()) cfg.output_dir = base.output_dir / std::string(scheme_name(scheme));
      return run_simulation(cfg);
    });
  }
  auto runs = run_parallel(jobs, workers);
  if (!base.output_dir.empty()) {
    std::string csv = "scheme,total_rain,rain_poleward_fraction,failed\n";
    for (const auto& r : runs) {
      csv += fmt::format("{},{},{},{}\n", scheme_name(r.config.physics.scheme), r.final_totals.rain,
                         r.rain_poleward_fraction, r.failure ? 1 : 0);
    }
    write_text(base.output_dir / "compare.csv", csv);
  }
  return {std::move(runs[0]), std::move(runs[1])};
}

int workers_from_env() {
  const char* v = std::getenv("MSW_WORKERS");
  if (!v || !*v) return 1;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (*end != '\0' || n < 1 || n > 256) throw ConfigError(fmt::format("MSW_WORKERS must be an integer in [1, 256] (got '{}')", v));
  return static_cast<int>(n);
}

}  // namespace msw
