#include "msw/framework.hpp"

#include <cmath>

#include <fmt/format.h>

#include "msw/errors.hpp"

namespace msw {

std::string_view framework_name(Framework f) {
  switch (f) {
    case Framework::MoistConvective: return "moist_convective";
    case Framework::MoistConvectiveThermal: return "moist_convective_thermal";
    case Framework::MoistThermal: return "moist_thermal";
    case Framework::MoistConvectivePseudoThermal: return "moist_convective_pseudo_thermal";
  }
  return "?";
}

Framework parse_framework(std::string_view name) {
  if (name == "moist_convective" || name == "MC") return Framework::MoistConvective;
  if (name == "moist_convective_thermal" || name == "MCT") return Framework::MoistConvectiveThermal;
  if (name == "moist_thermal" || name == "MT") return Framework::MoistThermal;
  if (name == "moist_convective_pseudo_thermal" || name == "MCPT") return Framework::MoistConvectivePseudoThermal;
  throw ConfigError(fmt::format("unknown framework '{}' (expected moist_convective, moist_convective_thermal, "
                                "moist_thermal or moist_convective_pseudo_thermal)", name));
}

std::string_view coriolis_name(CoriolisKind k) { return k == CoriolisKind::Sine ? "sin" : "paper-cos"; }

CoriolisKind parse_coriolis(std::string_view name) {
  if (name == "sin") return CoriolisKind::Sine;
  if (name == "paper-cos") return CoriolisKind::PaperCosine;
  throw ConfigError(fmt::format("unknown coriolis variant '{}' (expected sin or paper-cos)", name));
}

double FrameworkConfig::coriolis_parameter(const Vec3& x, bool sphere) const {
  if (!sphere) return f_plane;
  const double sin_lat = x.z() / x.norm();
  if (coriolis == CoriolisKind::Sine) return 2.0 * omega * sin_lat;
  return 2.0 * omega * std::sqrt(std::max(0.0, 1.0 - sin_lat * sin_lat));
}

FrameworkConfig make_framework(Framework f, double beta1, double beta2) {
  FrameworkConfig cfg;
  cfg.framework = f;
  cfg.beta1 = f == Framework::MoistThermal ? 0.0 : beta1;
  cfg.beta2 = (f == Framework::MoistConvective || f == Framework::MoistConvectivePseudoThermal) ? 0.0 : beta2;
  return cfg;
}

void validate(const FrameworkConfig& cfg) {
  const bool no_beta2 = cfg.framework == Framework::MoistConvective ||
                        cfg.framework == Framework::MoistConvectivePseudoThermal;
  if (no_beta2 && cfg.beta2 != 0.0) {
    throw ConfigError(fmt::format("{} requires beta2 = 0", framework_name(cfg.framework)));
  }
  if (cfg.framework == Framework::MoistThermal && cfg.beta1 != 0.0) {
    throw ConfigError("moist_thermal requires beta1 = 0");
  }
  if (cfg.beta1 < 0.0 || cfg.beta2 < 0.0) throw ConfigError("beta1 and beta2 must be nonnegative");
  if (!(cfg.g > 0.0)) throw ConfigError("g must be positive");
}

State make_zero_state(const Discretisation& disc) {
  State s;
  s.u = Field(disc.hdiv());
  s.D = Field(disc.dg());
  s.b = Field(disc.dg());
  s.qv = Field(disc.dg());
  s.qc = Field(disc.dg());
  s.qr = Field(disc.dg());
  s.B = Field(disc.dg());
  return s;
}

void check_state(const State& s) {
  const std::pair<const char*, const Field*> fields[] = {{"u", &s.u},   {"D", &s.D},   {"b", &s.b}, {"q_v", &s.qv},
                                                         {"q_c", &s.qc}, {"q_r", &s.qr}, {"B", &s.B}};
  for (const auto& [name, f] : fields) {
    for (Eigen::Index i = 0; i < f->values.size(); ++i) {
      if (!std::isfinite(f->values(i))) {
        throw StateError(fmt::format("non-finite {} at dof {} (t = {:.6g} s)", name, i, s.time));
      }
    }
  }
  for (Eigen::Index i = 0; i < s.D.values.size(); ++i) {
    if (!(s.D.values(i) + s.B.values(i) > 0.0)) {
      throw StateError(fmt::format("nonpositive total depth D + B = {:.6g} at dof {} (t = {:.6g} s)",
                                   s.D.values(i) + s.B.values(i), i, s.time));
    }
  }
}

}  // namespace msw
