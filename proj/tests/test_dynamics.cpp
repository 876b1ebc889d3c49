#include <cmath>
#include <numbers>

#include "doctest.h"
#include "msw/assembly.hpp"
#include "msw/dynamics.hpp"
#include "msw/linear_solvers.hpp"

using namespace msw;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kLen = 1.0;

Vec3 wavy_velocity(const Vec3& x) {
  const double a = 2.0 * kPi * x.x() / kLen, c = 2.0 * kPi * x.y() / kLen;
  return Vec3(1.0 + 0.3 * std::sin(c), 0.5 + 0.2 * std::cos(a), 0.0);
}

Vec3 wavy_advection(const Vec3& x) {
  const double a = 2.0 * kPi * x.x() / kLen, c = 2.0 * kPi * x.y() / kLen;
  const Vec3 u = wavy_velocity(x);
  const double k = 2.0 * kPi / kLen;
  const double dux_dy = 0.3 * k * std::cos(c);
  const double duy_dx = -0.2 * k * std::sin(a);
  return Vec3(u.y() * dux_dy, u.x() * duy_dx, 0.0);
}

Field rate_field(const Discretisation& disc, const Eigen::VectorXd& weak) {
  const SparseMatrix m = assemble_mass(disc, SpaceKind::HdivQuadratic);
  return Field(disc.hdiv(), cg_solve(m, weak, 1e-13));
}

}  // namespace

TEST_CASE("forcing vanishes at rest with flat layers") {
  Discretisation disc(build_icosahedral_sphere(2, 1.0));
  State s = make_zero_state(disc);
  s.D.values.setConstant(3.0);
  s.b.values.setConstant(9.0);
  const FrameworkConfig cfg = make_framework(Framework::MoistConvectiveThermal);
  CHECK(forcing_residual(disc, s, cfg).cwiseAbs().maxCoeff() < 1e-11);
  CHECK(forcing_residual_constant_b(disc, s, cfg).cwiseAbs().maxCoeff() < 1e-11);
}

TEST_CASE("general and constant-buoyancy forcing agree when b = g") {
  Discretisation disc(build_icosahedral_sphere(2, 1.0));
  FrameworkConfig cfg = make_framework(Framework::MoistConvectiveThermal);
  State s = make_zero_state(disc);
  s.D = project_scalar(disc, [](const Vec3& x) { return 2.0 + 0.3 * x.z() + 0.1 * x.x() * x.y(); });
  s.B = project_scalar(disc, [](const Vec3& x) { return 0.2 * x.x() * x.x(); });
  s.u = project_vector(disc, [](const Vec3& x) { return Vec3(-x.y(), x.x(), 0.0); });
  s.b.values.setConstant(cfg.g);
  const Eigen::VectorXd a = forcing_residual(disc, s, cfg);
  const Eigen::VectorXd b = forcing_residual_constant_b(disc, s, cfg);
  CHECK((a - b).norm() < 1e-12 * a.norm());
  cfg = make_framework(Framework::MoistConvective);
  CHECK((velocity_forcing(disc, s, cfg) - b).norm() < 1e-12 * b.norm());
}

TEST_CASE("Coriolis term does no work") {
  Discretisation disc(build_icosahedral_sphere(2, 1.0));
  const FrameworkConfig cfg = make_framework(Framework::MoistConvectiveThermal);
  const Field u = project_vector(disc, [](const Vec3& x) { return Vec3(Vec3(0.3, -1.0, 0.7).cross(x) + x.cross(Vec3(x.z(), 0, 0)).cross(x)); });
  const Eigen::VectorXd r = coriolis_residual(disc, u, cfg);
  CHECK(std::abs(u.values.dot(r)) < 1e-12 * u.values.norm() * r.norm());
}

TEST_CASE("pressure gradient converges to -g grad h on the sphere") {
  double prev = 0.0;
  for (int level = 2; level <= 4; ++level) {
    Discretisation disc(build_icosahedral_sphere(level, 1.0));
    FrameworkConfig cfg = make_framework(Framework::MoistConvective);
    cfg.omega = 0.0;
    cfg.g = 1.0;
    State s = make_zero_state(disc);
    // Zero-homogeneous extension so that the flat cells see no radial gradient.
    s.D = project_scalar(disc, [](const Vec3& x) { return 2.0 + x.z() * x.z() / x.squaredNorm(); });
    const Field rate = rate_field(disc, forcing_residual_constant_b(disc, s, cfg));
    const double err = l2_error(disc, rate, [](const Vec3& x) {
      const Vec3 n = x.normalized();
      const Vec3 grad(0.0, 0.0, 2.0 * n.z());
      return Vec3(-(grad - n * n.dot(grad)) / x.norm());
    }, true);
    if (level > 2) CHECK(prev / err > 3.5);
    prev = err;
  }
  CHECK(prev < 1e-3);
}

TEST_CASE("conservative transport preserves the integral") {
  Discretisation disc(build_icosahedral_sphere(2, 1.0));
  const Field ubar = project_vector(disc, [](const Vec3& x) { return Vec3(Vec3(0.2, 0.5, 1.0).cross(x) + 0.3 * x.cross(Vec3(0, 0, x.x())).cross(x)); });
  const Field q = project_scalar(disc, [](const Vec3& x) { return 1.0 + x.x() * x.y() + std::sin(3.0 * x.z()); });
  const Eigen::VectorXd t = scalar_transport_tendency(disc, q, ubar, TransportForm::Conservative);
  CHECK(std::abs(t.sum()) < 1e-12 * t.cwiseAbs().sum());
  const Field one = project_scalar(disc, [](const Vec3&) { return 1.0; });
  CHECK(scalar_transport_tendency(disc, one, ubar, TransportForm::Advective).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("transport operator matches the tendency") {
  Discretisation disc(build_icosahedral_sphere(2, 1.0));
  const Field ubar = project_vector(disc, [](const Vec3& x) { return Vec3(Vec3(0.2, 0.5, 1.0).cross(x)); });
  const Field q = project_scalar(disc, [](const Vec3& x) { return x.x() + x.z() * x.z(); });
  const SparseMatrix mdg = assemble_mass(disc, SpaceKind::DGLinear);
  TransportOperator op(disc);
  op.update(ubar);
  for (TransportForm form : {TransportForm::Conservative, TransportForm::Advective}) {
    const Eigen::VectorXd t = scalar_transport_tendency(disc, q, ubar, form);
    CHECK((mdg * op.rate(q.values, form) - t).norm() < 1e-11 * t.norm());
  }
}

TEST_CASE("uniform flow leaves a constant field unchanged") {
  Discretisation disc(build_planar_periodic(6, 6, kLen, kLen));
  const Vec3 c(0.7, -0.4, 0.0);
  const Field ubar = project_vector(disc, [c](const Vec3&) { return c; });
  Field lin(disc.dg());
  lin.values.setConstant(5.0);
  TransportOperator op(disc);
  op.update(ubar);
  CHECK(op.rate(lin.values, TransportForm::Advective).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(op.rate(lin.values, TransportForm::Conservative).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("vector-invariant transport of a uniform flow is zero") {
  Discretisation disc(build_planar_periodic(5, 4, kLen, kLen));
  const Field u = project_vector(disc, [](const Vec3&) { return Vec3(0.4, -1.1, 0.0); });
  CHECK(vector_invariant_tendency(disc, u, u).cwiseAbs().maxCoeff() < 1e-10);
  VectorInvariantOperator op(disc);
  op.update(u);
  CHECK((op.matrix() * u.values).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("vector-invariant operator matches the tendency and converges to (u.grad)u") {
  double prev = 0.0;
  for (int n : {8, 16, 32}) {
    Discretisation disc(build_planar_periodic(n, n, kLen, kLen));
    const Field u = project_vector(disc, wavy_velocity);
    const Eigen::VectorXd t = vector_invariant_tendency(disc, u, u);
    VectorInvariantOperator op(disc);
    op.update(u);
    CHECK((op.matrix() * u.values + t).norm() < 1e-11 * t.norm());
    const double err = l2_error(disc, rate_field(disc, t), [](const Vec3& x) { return Vec3(-wavy_advection(x)); }, true);
    if (n > 8) CHECK(prev / err > 3.0);
    prev = err;
  }
  CHECK(prev < 1e-2);
}

TEST_CASE("upwind transport rate converges for a smooth field") {
  const Vec3 c(0.7, -0.4, 0.0);
  auto q = [](const Vec3& x) { return std::sin(2.0 * kPi * x.x()) * std::cos(2.0 * kPi * x.y()); };
  auto exact = [c](const Vec3& x) {
    const double k = 2.0 * kPi;
    return -(c.x() * k * std::cos(k * x.x()) * std::cos(k * x.y()) - c.y() * k * std::sin(k * x.x()) * std::sin(k * x.y()));
  };
  double prev = 0.0;
  for (int n : {8, 16, 32}) {
    Discretisation disc(build_planar_periodic(n, n, kLen, kLen));
    const Field ubar = project_vector(disc, [c](const Vec3&) { return c; });
    const Field qh = project_scalar(disc, q);
    TransportOperator op(disc);
    op.update(ubar);
    const double err = l2_error(disc, Field(disc.dg(), op.rate(qh.values, TransportForm::Advective)), exact, true);
    if (n > 8) CHECK(prev / err > 1.7);
    prev = err;
  }
}
