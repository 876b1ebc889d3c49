#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "msw/diagnostics.hpp"
#include "msw/errors.hpp"
#include "msw/testcases.hpp"
#include "msw/timestepper.hpp"

using namespace msw;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() / ("msw_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  static int& counter() {
    static int n = 0;
    return n;
  }
};

std::vector<std::string> read_lines(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

State resting(const Discretisation& disc, double H) {
  State s = make_zero_state(disc);
  s.D.values.setConstant(H);
  s.b.values.setConstant(constants::kGravity);
  return s;
}

}  // namespace

TEST_CASE("potential vorticity of a resting layer is f/H") {
  Discretisation disc(build_icosahedral_sphere(3, constants::kEarthRadius));
  const FrameworkConfig cfg = make_framework(Framework::MoistConvective);
  const double H = 5000.0;
  const Field pv = potential_vorticity(disc, resting(disc, H), cfg);
  const auto exact = [&](const Vec3& x) { return cfg.coriolis_parameter(x, true) / H; };
  CHECK(l2_error(disc, pv, exact, true) < 1e-2);
}

TEST_CASE("potential vorticity of solid-body rotation") {
  Discretisation disc(build_icosahedral_sphere(4, constants::kEarthRadius));
  const FrameworkConfig cfg = make_framework(Framework::MoistConvective);
  const double H = 5000.0, a = constants::kEarthRadius, u0 = 20.0;
  State s = resting(disc, H);
  s.u = project_vector(disc, [&](const Vec3& x) -> Vec3 { return Vec3(-x.y(), x.x(), 0.0) * (u0 / a); });
  const Field pv = potential_vorticity(disc, s, cfg);
  // Relative vorticity of rotation at angular rate u0/a is 2 (u0/a) sin(lat).
  const auto exact = [&](const Vec3& x) { return 2.0 * (cfg.omega + u0 / a) * x.z() / x.norm() / H; };
  const double err = l2_error(disc, pv, exact, true);
  MESSAGE("solid-body PV error: " << err);
  CHECK(err < 1e-2);
}

TEST_CASE("potential vorticity is affine in u and shifts with f") {
  Discretisation disc(build_planar_periodic(8, 8, 1.0, 1.0));
  FrameworkConfig cfg = make_framework(Framework::MoistConvective);
  cfg.f_plane = 0.0;
  State s = resting(disc, 2.0);
  s.u = project_vector(disc, [](const Vec3& x) {
    return Vec3(std::sin(2.0 * M_PI * x.y()), 0.3 * std::cos(2.0 * M_PI * x.x()), 0.0);
  });
  const Field q1 = potential_vorticity(disc, s, cfg);
  State s3 = s;
  s3.u.values *= 3.0;
  const Field q3 = potential_vorticity(disc, s3, cfg);
  CHECK((q3.values - 3.0 * q1.values).cwiseAbs().maxCoeff() < 1e-10 * q1.values.cwiseAbs().maxCoeff());
  cfg.f_plane = 0.5;
  const Field qf = potential_vorticity(disc, s, cfg);
  CHECK((qf.values - q1.values).array().abs().maxCoeff() > 0.0);
  CHECK(((qf.values - q1.values).array() - 0.25).abs().maxCoeff() < 1e-12);
}

TEST_CASE("potential vorticity scales inversely with depth") {
  Discretisation disc(build_icosahedral_sphere(3, constants::kEarthRadius));
  const FrameworkConfig cfg = make_framework(Framework::MoistConvective);
  const TestCaseSpec spec = default_spec(TestCase::Mountain, Framework::MoistConvective);
  const InitialCondition ic = make_initial_state(disc, spec, cfg, default_physics(spec));
  const Field q = potential_vorticity(disc, ic.state, cfg);
  State scaled = ic.state;
  const double alpha = 1.7;
  scaled.D.values *= alpha;
  const Field qa = potential_vorticity(disc, scaled, cfg);
  CHECK((alpha * qa.values - q.values).norm() < 1e-10 * q.values.norm());
}

TEST_CASE("potential vorticity rejects empty columns") {
  Discretisation disc(build_icosahedral_sphere(1, constants::kEarthRadius));
  State s = resting(disc, 100.0);
  s.D.values(4) = 0.0;
  CHECK_THROWS_AS(potential_vorticity(disc, s, make_framework(Framework::MoistConvective)), StateError);
}

TEST_CASE("totals and Courant number") {
  Discretisation disc(build_icosahedral_sphere(2, 1.0));
  State s = resting(disc, 2.0);
  s.qv.values.setConstant(0.5);
  s.qc.values.setConstant(0.25);
  s.qr.values.setConstant(0.125);
  const double area = disc.geometry().total_area();
  const Totals t = totals(disc, s);
  CHECK(t.mass == doctest::Approx(2.0 * area).epsilon(1e-13));
  CHECK(t.vapour == doctest::Approx(0.5 * area).epsilon(1e-13));
  CHECK(t.cloud == doctest::Approx(0.25 * area).epsilon(1e-13));
  CHECK(t.rain == doctest::Approx(0.125 * area).epsilon(1e-13));

  Discretisation plane(build_planar_periodic(4, 4, 1.0, 1.0));
  const Field u = project_vector(plane, [](const Vec3&) { return Vec3(2.0, 0.0, 0.0); });
  // Shortest edge is 1/4, so |u| dt / dx = 2 * 0.1 * 4.
  CHECK(courant_number(plane, u, 0.1) == doctest::Approx(0.8).epsilon(1e-12));
}

TEST_CASE("series output") {
  TempDir tmp;
  const auto path = tmp.path / "series.csv";
  write_series(path, {}, false);
  auto lines = read_lines(path);
  REQUIRE(lines.size() == 1);
  CHECK(lines[0] == "time_days,mass,vapour,cloud,rain,courant");

  SeriesRow row;
  row.time_days = 0.1;
  row.totals = {1.0 / 3.0, 2.0, 3.0, 4.0};
  row.courant = 0.2;
  row.errors = std::array<double, 4>{1e-3, 2e-3, 3e-3, 4e-3};
  {
    SeriesWriter w(path, true);
    w.append(row);
    // Rows are on disk before the writer closes.
    lines = read_lines(path);
    REQUIRE(lines.size() == 2);
  }
  CHECK(lines[0] == series_header(true));
  CHECK(lines[1].rfind("0.1,0.3333333333333333,2,3,4,0.2,", 0) == 0);
  CHECK(std::stod(lines[1].substr(lines[1].find(',') + 1)) == 1.0 / 3.0);
}

TEST_CASE("snapshot output") {
  TempDir tmp;
  Discretisation disc(build_icosahedral_sphere(2, constants::kEarthRadius));
  const TestCaseSpec spec = default_spec(TestCase::Mountain, Framework::MoistConvectiveThermal);
  const FrameworkConfig cfg = make_framework(Framework::MoistConvectiveThermal);
  const PhysicsParams physics = default_physics(spec);
  const InitialCondition ic = make_initial_state(disc, spec, cfg, physics);
  const Snapshot snap = make_snapshot(disc, ic.state, cfg, physics, &ic.theta);
  REQUIRE(snap.columns.size() == snap.names.size());
  CHECK(snap.lon.size() == static_cast<std::size_t>(disc.mesh().num_cells()));
  for (double lat : snap.lat) CHECK(std::abs(lat) <= 90.0);
  const auto path = tmp.path / "snap.csv";
  write_snapshot(path, snap);
  const auto lines = read_lines(path);
  CHECK(lines.size() == static_cast<std::size_t>(disc.mesh().num_cells() + 1));
  CHECK(lines[0] == "cell,lon,lat,u_zonal,u_meridional,D,b,qv,qc,qr,B,pv,qsat");
  CHECK(std::filesystem::exists(tmp.path / "snap.csv.meta"));
  // Zonal flow in the mountain case is eastward.
  const auto& uz = snap.columns[0];
  CHECK(*std::min_element(uz.begin(), uz.end()) > -1.0);
}

TEST_CASE("checkpoint round trip") {
  TempDir tmp;
  Discretisation disc(build_icosahedral_sphere(2, constants::kEarthRadius));
  const TestCaseSpec spec = default_spec(TestCase::Mountain, Framework::MoistConvectiveThermal);
  const FrameworkConfig cfg = make_framework(Framework::MoistConvectiveThermal);
  State s = make_initial_state(disc, spec, cfg, default_physics(spec)).state;
  s.time = 12345.678;
  s.qc.values.setConstant(1.0 / 7.0);
  const auto path = tmp.path / "state.ckpt";
  write_checkpoint(path, s, disc.mesh().hash());
  const State r = read_checkpoint(path, disc);
  CHECK(r.time == s.time);
  for (auto [a, b] : {std::pair{&r.u, &s.u}, {&r.D, &s.D}, {&r.b, &s.b}, {&r.qv, &s.qv}, {&r.qc, &s.qc},
                      {&r.qr, &s.qr}, {&r.B, &s.B}}) {
    CHECK(a->values == b->values);
  }

  SUBCASE("other meshes are rejected") {
    Discretisation other(build_icosahedral_sphere(3, constants::kEarthRadius));
    CHECK_THROWS_AS(read_checkpoint(path, other), IncompatibleCheckpointError);
  }
  SUBCASE("foreign files are rejected") {
    std::ofstream(tmp.path / "junk") << "not a checkpoint at all";
    CHECK_THROWS_AS(read_checkpoint(tmp.path / "junk", disc), IncompatibleCheckpointError);
  }
  SUBCASE("truncated files are rejected") {
    const auto size = std::filesystem::file_size(path);
    std::filesystem::resize_file(path, size / 2);
    CHECK_THROWS_AS(read_checkpoint(path, disc), IoError);
  }
  SUBCASE("missing files are reported") {
    CHECK_THROWS_AS(read_checkpoint(tmp.path / "absent", disc), IoError);
  }
}

TEST_CASE("restart from a checkpoint continues bitwise") {
  TempDir tmp;
  Discretisation disc(build_icosahedral_sphere(2, constants::kEarthRadius));
  const TestCaseSpec spec = default_spec(TestCase::Mountain, Framework::MoistConvective);
  const FrameworkConfig cfg = make_framework(Framework::MoistConvective);
  const PhysicsParams physics = default_physics(spec);
  const InitialCondition ic = make_initial_state(disc, spec, cfg, physics);
  SolverConfig sc;
  sc.dt = 0.2 / courant_number(disc, ic.state.u, 1.0);
  sc.H = spec.H;
  Stepper st(disc, cfg, physics, sc, &ic.theta);

  State straight = ic.state;
  for (int i = 0; i < 4; ++i) st.step(straight);

  State first = ic.state;
  for (int i = 0; i < 2; ++i) st.step(first);
  write_checkpoint(tmp.path / "mid.ckpt", first, disc.mesh().hash());
  State resumed = read_checkpoint(tmp.path / "mid.ckpt", disc);
  Stepper fresh(disc, cfg, physics, sc, &ic.theta);
  for (int i = 0; i < 2; ++i) fresh.step(resumed);

  CHECK(resumed.time == straight.time);
  CHECK(resumed.u.values == straight.u.values);
  CHECK(resumed.D.values == straight.D.values);
  CHECK(resumed.qv.values == straight.qv.values);
  CHECK(resumed.qc.values == straight.qc.values);
  CHECK(resumed.qr.values == straight.qr.values);
}
