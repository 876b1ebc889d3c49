#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "doctest.h"
#include "msw/errors.hpp"
#include "msw/runner.hpp"

using namespace msw;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    static int n = 0;
    path = std::filesystem::temp_directory_path() / ("msw_runner_" + std::to_string(::getpid()) + "_" + std::to_string(n++));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

std::vector<std::vector<double>> read_csv(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  return rows;
}

RunConfig small(const std::string& test, const std::string& framework, double days) {
  return resolve_config({{{"test", test}, {"framework", framework}, {"level", "2"}, {"days", fmt::format("{}", days)}}});
}

}  // namespace

TEST_CASE("timestep resolution lands exactly on the run length") {
  const RunConfig c = small("steady", "MC", 1.0);
  const Discretisation disc(build_icosahedral_sphere(2, c.spec.radius));
  const Field u = project_vector(disc, [](const Vec3& x) -> Vec3 { return Vec3(-x.y(), x.x(), 0.0) * (20.0 / x.norm()); });
  const auto [dt, n] = resolve_timestep(c, disc, u);
  CHECK(dt * n == doctest::Approx(86400.0).epsilon(1e-15));
  CHECK(courant_number(disc, u, dt) <= c.courant * (1.0 + 1e-12));
  RunConfig again = c;
  again.dt = dt;
  CHECK(resolve_timestep(again, disc, u) == std::pair{dt, n});
}

TEST_CASE("a run writes its outputs") {
  TempDir tmp;
  RunConfig c = small("steady", "MT", 0.5);
  c.output_dir = tmp.path / "out";
  c.snapshot_days = 0.25;
  const RunResult r = run_simulation(c);
  REQUIRE_FALSE(r.failure);
  for (const char* f : {"config.txt", "series.csv", "final.ckpt", "snapshot_000000.csv"}) {
    CHECK(std::filesystem::exists(c.output_dir / f));
  }
  int snapshots = 0;
  for (const auto& e : std::filesystem::directory_iterator(c.output_dir)) {
    if (e.path().extension() == ".csv" && e.path().filename().string().rfind("snapshot_", 0) == 0) ++snapshots;
  }
  CHECK(snapshots == 3);
  const auto rows = read_csv(c.output_dir / "series.csv");
  REQUIRE(rows.size() == static_cast<std::size_t>(r.steps + 1));
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i][0] > rows[i - 1][0]);
    CHECK(rows[i][4] >= rows[i - 1][4]);
  }
  CHECK(rows.back()[0] == doctest::Approx(0.5));
  CHECK(std::abs(r.final_totals.mass / r.initial_totals.mass - 1.0) < 1e-12);
  CHECK(r.pv.size() == r.final.D.size());
  // The echoed config names the dt actually used.
  const RunConfig echoed = resolve_config({read_config_file(c.output_dir / "config.txt")});
  CHECK(echoed.dt == r.config.dt);
}

TEST_CASE("restart continues a run bitwise") {
  TempDir tmp;
  RunConfig c = small("mountain", "MC", 0.2);
  c.dt = 1800.0;
  RunConfig first = c;
  first.spec.days = 0.1;
  first.output_dir = tmp.path / "first";
  run_simulation(first);
  RunConfig resumed = c;
  resumed.restart = first.output_dir / "final.ckpt";
  const RunResult a = run_simulation(resumed);
  const RunResult b = run_simulation(c);
  CHECK(a.steps == b.steps / 2);
  CHECK(a.final.time == b.final.time);
  CHECK(a.final.u.values == b.final.u.values);
  CHECK(a.final.D.values == b.final.D.values);
  CHECK(a.final.qv.values == b.final.qv.values);
  CHECK(a.final.qc.values == b.final.qc.values);
  CHECK(a.final.qr.values == b.final.qr.values);
}

TEST_CASE("numerical failures are captured, not thrown") {
  RunConfig c = small("jet", "MC", 1.0);
  c.dt = 20000.0;
  c.spec.balance_panels = 10000;
  const RunResult r = run_simulation(c);
  REQUIRE(r.failure.has_value());
  CHECK(r.failure->find("step from t") != std::string::npos);
  CHECK(r.steps < 5);
}

TEST_CASE("convergence input checks") {
  const RunConfig c = small("steady", "MC", 0.01);
  CHECK_THROWS_AS(run_convergence(c, {3}), ArgumentError);
  CHECK_THROWS_AS(run_convergence(c, {3, 5}), ArgumentError);
}

TEST_CASE("beta1 sweep against a dry run") {
  TempDir tmp;
  RunConfig c = small("mountain", "MC", 0.25);
  c.output_dir = tmp.path;
  const auto members = run_beta1_sweep(c, {1.6, 8500.0}, true, 2);
  REQUIRE(members.size() == 3);
  CHECK(members[0].label == "dry");
  CHECK(members[0].pv_difference == 0.0);
  CHECK(members[0].result.final_totals.rain == 0.0);
  CHECK(members[1].pv_difference <= members[2].pv_difference);
  CHECK(std::filesystem::exists(tmp.path / "sweep.csv"));
  CHECK(std::filesystem::exists(tmp.path / "beta1_8500" / "series.csv"));
}

TEST_CASE("parallel runner keeps order and propagates errors") {
  std::vector<std::function<int()>> jobs;
  for (int i = 0; i < 7; ++i) jobs.push_back([i] { return i * i; });
  const auto out = run_parallel(jobs, 3);
  for (int i = 0; i < 7; ++i) CHECK(out[i] == i * i);
  jobs.push_back([]() -> int { throw StateError("boom"); });
  CHECK_THROWS_AS(run_parallel(jobs, 2), StateError);
}

TEST_CASE("worker count from the environment") {
  ::setenv("MSW_WORKERS", "3", 1);
  CHECK(workers_from_env() == 3);
  ::setenv("MSW_WORKERS", "0", 1);
  CHECK_THROWS_AS(workers_from_env(), ConfigError);
  ::setenv("MSW_WORKERS", "2x", 1);
  CHECK_THROWS_AS(workers_from_env(), ConfigError);
  ::unsetenv("MSW_WORKERS");
  CHECK(workers_from_env() == 1);
}
