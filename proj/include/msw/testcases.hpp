#pragma once

#include <numbers>
#include <string_view>
#include <vector>

#include "msw/assembly.hpp"
#include "msw/framework.hpp"
#include "msw/physics.hpp"

namespace msw {

enum class TestCase { SteadyState, Mountain, UnstableJet };

std::string_view test_name(TestCase t);
/// Accepts steady, mountain, jet (and the long names steady_state, unstable_jet).
TestCase parse_test(std::string_view name);

struct MountainParams {
  double h0 = 2000.0;                         // m
  double radius = std::numbers::pi / 9.0;     // rad
  double lon_c = 1.5 * std::numbers::pi;      // rad
  double lat_c = std::numbers::pi / 6.0;      // rad
};

struct JetProfile {
  double u_max = 80.0;
  double phi0 = std::numbers::pi / 7.0;
  double phi1 = std::numbers::pi / 2.0 - std::numbers::pi / 7.0;
  double h_hat = 120.0;
  double alpha = 1.0 / 3.0;
  double beta = 1.0 / 15.0;
  double phi2 = std::numbers::pi / 4.0;
  double delta_b = 1.0;  // m s^-2

  double e_n() const;
  double u(double lat) const;
  double bump(double lon, double lat) const;
};

struct TestCaseSpec {
  TestCase test = TestCase::SteadyState;
  Framework framework = Framework::MoistConvectiveThermal;
  double omega = constants::kOmega;
  double g = constants::kGravity;
  double radius = constants::kEarthRadius;
  double u0 = 20.0;
  double Phi0 = 3e4;
  double epsilon = 1.0 / 300.0;
  double xi = 0.0;
  double q0 = 0.007;
  double H = 3e4 / constants::kGravity;
  double days = 5.0;
  int level = 5;
  bool perturb = true;  // jet bump
  int balance_panels = 20000;
  MountainParams mountain;
  JetProfile jet;

  double omega_w() const { return omega * radius * u0 + 0.5 * u0 * u0; }
  double sigma() const { return omega_w() / 10.0; }
  double theta0() const { return epsilon * Phi0 * Phi0; }
};

/// Paper defaults for each test (H, q0, xi, run length, level).
TestCaseSpec default_spec(TestCase test, Framework framework);

/// Background temperature proxy theta(phi).
double theta_background(double lat, const TestCaseSpec& spec);

/// Isolated conical mountain with minimal-image longitude wrap.
double mountain_topography(double lon, double lat, const MountainParams& m);

/// Depth in thermal balance with the jet: b = g - delta_b cos(phi),
/// D = b^{-1/2} [H (g - delta_b)^{1/2} - int_{-pi/2}^{phi} b^{-1/2} (u^2 tan + R f u)].
/// With constant_b the dry balance with b = g is used instead.
class JetBalance {
 public:
  JetBalance(const TestCaseSpec& spec, const FrameworkConfig& cfg, bool constant_b);
  double depth(double lat) const;

 private:
  double integrand(double lat) const;
  double partial(double a, double b) const;

  TestCaseSpec spec_;
  FrameworkConfig cfg_;
  bool constant_b_;
  double h_;
  std::vector<double> cumulative_;
};

/// Analytic fields of a test case (lon-lat evaluated from 3D points).
struct AnalyticFields {
  VectorFunction u;
  ScalarFunction D;  // excludes topography
  ScalarFunction b;
  ScalarFunction B;
  ScalarFunction theta;  // frozen saturation field for moist convective runs
};

AnalyticFields analytic_fields(const TestCaseSpec& spec, const FrameworkConfig& cfg);

struct InitialCondition {
  State state;
  Field theta;  // nodal theta used by moist convective saturation
};

/// Projects the analytic fields and sets q_v = (1 - xi) q_sat nodally; q_c = q_r = 0.
InitialCondition make_initial_state(const Discretisation& disc, const TestCaseSpec& spec, const FrameworkConfig& cfg,
                                    const PhysicsParams& params);

/// Physics parameters matching a test spec (q0, H, xi).
PhysicsParams default_physics(const TestCaseSpec& spec);

}  // namespace msw
