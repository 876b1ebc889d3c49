#pragma once

#include <string_view>

#include "msw/framework.hpp"

namespace msw {

enum class PhysicsScheme { ThreeState, OneWay, Off };

std::string_view scheme_name(PhysicsScheme s);
PhysicsScheme parse_scheme(std::string_view name);

struct PhysicsParams {
  double q0 = 0.007;
  double H = 3e4 / constants::kGravity;  // background depth in the saturation function (m)
  double tau_v = 0.0;                    // s; 0 means "the timestep"
  double tau_r = 0.0;                    // s; 0 means "the timestep"
  double gamma_r = 1e-3;                 // applied as a pure number per step
  double q_precip = 1e-4;
  double xi = 0.0;
  PhysicsScheme scheme = PhysicsScheme::ThreeState;
  /// Moist convective saturation uses exp(20 theta) with a frozen theta field;
  /// switching this off sets theta = 0 there.
  bool theta_in_saturation = true;
};

/// Throws ConfigError on invalid parameters.
void validate(const PhysicsParams& p);

/// Thermal frameworks: q0 H/(D+B) exp(20 (1 - b/g)); moist convective:
/// q0 H/(D+B) exp(20 theta). Throws StateError if D + B <= 0.
double saturation(double D, double b, double B, double theta, const PhysicsParams& p, const FrameworkConfig& cfg);

/// Fraction of the vapour excess converted so that the final state is close
/// to saturation: 1 / (1 + q_sat (20 beta2/g + beta1/(D+B))).
double gamma_v(double q_sat, double D, double B, double beta1, double beta2, double g);

struct PointIncrements {
  double dqv = 0.0, dqc = 0.0, dqr = 0.0, dD = 0.0, db = 0.0;
  double conversion = 0.0;  // C dt: positive for condensation, negative for evaporation
};

/// Condensation/evaporation then rain at one point, with q_sat and gamma_v given.
PointIncrements three_state_point(double qv, double qc, double q_sat, double gv, double dt, const PhysicsParams& p,
                                  double beta1, double beta2);

/// Relaxation of the vapour excess, routed to accumulated rain.
PointIncrements one_way_point(double qv, double q_sat, double dt, const PhysicsParams& p, double beta1, double beta2);

struct PhysicsIncrements {
  Eigen::VectorXd dqv, dqc, dqr, dD, db;
};

/// Nodal increments at every DG dof. theta is the frozen moist convective
/// background field (ignored by thermal frameworks; may be null).
PhysicsIncrements three_state_step(const State& s, double dt, const PhysicsParams& p, const FrameworkConfig& cfg,
                                   const Field* theta);
PhysicsIncrements one_way_step(const State& s, double dt, const PhysicsParams& p, const FrameworkConfig& cfg,
                               const Field* theta);

struct PhysicsReport {
  double clipped = 0.0;  // total negative moisture removed by clipping
  int clipped_dofs = 0;
};

/// Adds increments, clips negative q_v/q_c to zero, checks D + B > 0.
PhysicsReport apply_increments(State& s, const PhysicsIncrements& inc);

/// Runs the configured scheme and applies it. No-op for PhysicsScheme::Off.
PhysicsReport apply_physics(State& s, double dt, const PhysicsParams& p, const FrameworkConfig& cfg,
                            const Field* theta);

/// Nodal q_sat of a state.
Eigen::VectorXd saturation_field(const State& s, const PhysicsParams& p, const FrameworkConfig& cfg,
                                 const Field* theta);

}  // namespace msw
