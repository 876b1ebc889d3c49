#include <cmath>

#include "doctest.h"
#include "msw/errors.hpp"
#include "msw/physics.hpp"

using namespace msw;

TEST_CASE("framework switchboard") {
  CHECK(make_framework(Framework::MoistConvective).beta2 == 0.0);
  CHECK(make_framework(Framework::MoistConvectivePseudoThermal).beta2 == 0.0);
  CHECK(make_framework(Framework::MoistThermal).beta1 == 0.0);
  const FrameworkConfig mct = make_framework(Framework::MoistConvectiveThermal);
  CHECK(mct.beta1 == 1600.0);
  CHECK(mct.beta2 == doctest::Approx(10.0 * constants::kGravity));
  CHECK_FALSE(make_framework(Framework::MoistConvective).thermal());
  CHECK(make_framework(Framework::MoistConvectivePseudoThermal).thermal());
  CHECK(parse_framework("MCT") == Framework::MoistConvectiveThermal);
  CHECK(parse_framework("moist_thermal") == Framework::MoistThermal);
  CHECK_THROWS_AS(parse_framework("dry"), ConfigError);
  FrameworkConfig bad = make_framework(Framework::MoistThermal);
  bad.beta1 = 5.0;
  CHECK_THROWS_AS(validate(bad), ConfigError);
}

TEST_CASE("saturation function") {
  const FrameworkConfig thermal = make_framework(Framework::MoistConvectiveThermal);
  const FrameworkConfig mc = make_framework(Framework::MoistConvective);
  PhysicsParams p;
  p.q0 = 0.01;
  p.H = 1000.0;
  CHECK(saturation(800.0, thermal.g, 200.0, 0.0, p, thermal) == doctest::Approx(0.01));
  CHECK(saturation(1000.0, 0.9 * thermal.g, 0.0, 0.0, p, thermal) == doctest::Approx(0.01 * std::exp(2.0)));
  CHECK(saturation(500.0, 1.0, 0.0, 0.05, p, mc) == doctest::Approx(0.02 * std::exp(1.0)));
  p.theta_in_saturation = false;
  CHECK(saturation(500.0, 1.0, 0.0, 0.05, p, mc) == doctest::Approx(0.02));
  CHECK_THROWS_AS(saturation(-10.0, 1.0, 5.0, 0.0, p, mc), StateError);
}

TEST_CASE("condensation conserves water and lands near saturation") {
  const FrameworkConfig cfg = make_framework(Framework::MoistConvectiveThermal);
  PhysicsParams p;
  const double D = 5000.0, B = 500.0, b = cfg.g * 0.99;
  const double qsat = saturation(D, b, B, 0.0, p, cfg);
  const double qv = 1.01 * qsat;
  const double gv = gamma_v(qsat, D, B, cfg.beta1, cfg.beta2, cfg.g);
  const PointIncrements inc = three_state_point(qv, 0.0, qsat, gv, 60.0, p, cfg.beta1, cfg.beta2);
  CHECK(inc.conversion > 0.0);
  CHECK(inc.dqv + inc.dqc + inc.dqr == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(inc.dD == doctest::Approx(-cfg.beta1 * inc.conversion));
  CHECK(inc.db == doctest::Approx(-cfg.beta2 * inc.conversion));
  const double qsat_new = saturation(D + inc.dD, b + inc.db, B, 0.0, p, cfg);
  CHECK(std::abs(qv + inc.dqv - qsat_new) < 0.01 * (qv - qsat));
}

TEST_CASE("evaporation is limited by the available cloud") {
  const FrameworkConfig cfg = make_framework(Framework::MoistConvectiveThermal);
  PhysicsParams p;
  const PointIncrements inc = three_state_point(0.001, 2e-5, 0.01, 0.9, 60.0, p, cfg.beta1, cfg.beta2);
  CHECK(inc.conversion == doctest::Approx(-2e-5));
  CHECK(inc.dqc == doctest::Approx(-2e-5));
  CHECK(inc.dqr == 0.0);
  CHECK(inc.dD > 0.0);
  const PointIncrements none = three_state_point(0.001, 0.0, 0.01, 0.9, 60.0, p, cfg.beta1, cfg.beta2);
  CHECK(none.conversion == 0.0);
}

TEST_CASE("rain forms only above the threshold") {
  PhysicsParams p;
  const PointIncrements below = three_state_point(0.0, 0.5 * p.q_precip, 0.01, 1.0, 60.0, p, 0.0, 0.0);
  CHECK(below.dqr == 0.0);
  const PointIncrements above = three_state_point(1.0, 3.0 * p.q_precip, 1.0, 1.0, 60.0, p, 0.0, 0.0);
  CHECK(above.dqr == doctest::Approx(p.gamma_r * 2.0 * p.q_precip));
  CHECK(above.dqc == doctest::Approx(-above.dqr));
}

TEST_CASE("one-way scheme routes the excess to rain") {
  PhysicsParams p;
  const PointIncrements inc = one_way_point(0.02, 0.01, 60.0, p, 1600.0, 0.0);
  CHECK(inc.dqr == doctest::Approx(p.gamma_r * 0.01));
  CHECK(inc.dqv == doctest::Approx(-inc.dqr));
  CHECK(inc.dqc == 0.0);
  CHECK(inc.dD == doctest::Approx(-1600.0 * inc.dqr));
  CHECK(one_way_point(0.005, 0.01, 60.0, p, 1600.0, 0.0).dqr == 0.0);
}

TEST_CASE("nodal physics on a state") {
  Discretisation disc(build_icosahedral_sphere(1, 1.0));
  const FrameworkConfig cfg = make_framework(Framework::MoistConvectiveThermal);
  PhysicsParams p;
  State s = make_zero_state(disc);
  s.D.values.setConstant(p.H);
  s.b.values.setConstant(cfg.g);
  s.qv.values.setConstant(1.2 * p.q0);
  const double before = s.qv.values.sum();
  const PhysicsReport rep = apply_physics(s, 100.0, p, cfg, nullptr);
  CHECK(rep.clipped_dofs == 0);
  CHECK((s.qv.values.array() < 1.2 * p.q0).all());
  CHECK(s.qv.values.sum() + s.qc.values.sum() + s.qr.values.sum() == doctest::Approx(before));
  CHECK((s.D.values.array() < p.H).all());
  CHECK((s.b.values.array() < cfg.g).all());

  State off = make_zero_state(disc);
  off.D.values.setConstant(1.0);
  off.qv.values.setConstant(1.0);
  p.scheme = PhysicsScheme::Off;
  apply_physics(off, 1.0, p, cfg, nullptr);
  CHECK(off.qv.values.minCoeff() == 1.0);
}

TEST_CASE("increments clip negative moisture and reject empty columns") {
  Discretisation disc(build_icosahedral_sphere(0, 1.0));
  State s = make_zero_state(disc);
  s.D.values.setConstant(1.0);
  const Eigen::Index n = s.D.values.size();
  PhysicsIncrements inc{Eigen::VectorXd::Constant(n, -1e-16), Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n),
                        Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n)};
  const PhysicsReport rep = apply_increments(s, inc);
  CHECK(rep.clipped_dofs == n);
  CHECK(s.qv.values.minCoeff() == 0.0);
  inc.dqv.setZero();
  inc.dD.setConstant(-2.0);
  CHECK_THROWS_AS(apply_increments(s, inc), StateError);
}

TEST_CASE("physics parameter validation") {
  PhysicsParams p;
  CHECK_NOTHROW(validate(p));
  p.xi = 1.0;
  CHECK_THROWS_AS(validate(p), ConfigError);
  p = PhysicsParams{};
  p.tau_v = -1.0;
  CHECK_THROWS_AS(validate(p), ConfigError);
  CHECK(parse_scheme("one_way") == PhysicsScheme::OneWay);
  CHECK_THROWS_AS(parse_scheme("kessler"), ConfigError);
}
