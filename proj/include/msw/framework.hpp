#pragma once

#include <string>
#include <string_view>

#include "msw/fem.hpp"

namespace msw {

namespace constants {
inline constexpr double kGravity = 9.80616;
inline constexpr double kOmega = 7.292e-5;
inline constexpr double kEarthRadius = 6371220.0;
}  // namespace constants

enum class Framework { MoistConvective, MoistConvectiveThermal, MoistThermal, MoistConvectivePseudoThermal };
enum class CoriolisKind { Sine, PaperCosine };

std::string_view framework_name(Framework f);
/// Accepts the snake_case names (moist_convective, ...) and the short codes MC, MCT, MT, MCPT.
Framework parse_framework(std::string_view name);
std::string_view coriolis_name(CoriolisKind k);
CoriolisKind parse_coriolis(std::string_view name);

struct FrameworkConfig {
  Framework framework = Framework::MoistConvectiveThermal;
  double beta1 = 1600.0;                        // m
  double beta2 = 10.0 * constants::kGravity;    // m s^-2
  double g = constants::kGravity;
  double omega = constants::kOmega;
  CoriolisKind coriolis = CoriolisKind::Sine;
  double f_plane = 0.0;  // Coriolis parameter on planar meshes

  /// Buoyancy is prognostic (every framework except moist convective).
  bool thermal() const { return framework != Framework::MoistConvective; }
  double coriolis_parameter(const Vec3& x, bool sphere) const;
};

/// Applies the framework switchboard: moist convective and pseudo-thermal
/// have no latent-heat buoyancy feedback (beta2 = 0), moist thermal has no
/// convective depth feedback (beta1 = 0).
FrameworkConfig make_framework(Framework f, double beta1 = 1600.0, double beta2 = 10.0 * constants::kGravity);

/// Throws ConfigError if the betas contradict the framework.
void validate(const FrameworkConfig& cfg);

/// Prognostic tuple plus fixed topography. For moist convective runs b holds g.
struct State {
  Field u, D, b, qv, qc, qr, B;
  double time = 0.0;  // s
};

State make_zero_state(const Discretisation& disc);

/// Throws StateError on non-finite values or nonpositive D + B at any dof.
void check_state(const State& s);

}  // namespace msw
