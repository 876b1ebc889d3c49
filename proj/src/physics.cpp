#include "msw/physics.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "msw/errors.hpp"

namespace msw {

std::string_view scheme_name(PhysicsScheme s) {
  switch (s) {
    case PhysicsScheme::ThreeState: return "three_state";
    case PhysicsScheme::OneWay: return "one_way";
    case PhysicsScheme::Off: return "off";
  }
  return "?";
}

PhysicsScheme parse_scheme(std::string_view name) {
  if (name == "three_state") return PhysicsScheme::ThreeState;
  if (name == "one_way") return PhysicsScheme::OneWay;
  if (name == "off") return PhysicsScheme::Off;
  throw ConfigError(fmt::format("unknown physics scheme '{}' (expected three_state, one_way or off)", name));
}

void validate(const PhysicsParams& p) {
  if (p.tau_v < 0.0 || p.tau_r < 0.0) throw ConfigError("tau_v and tau_r must be positive (or 0 for the timestep)");
  if (!(p.xi >= 0.0 && p.xi < 1.0)) throw ConfigError("xi must satisfy 0 <= xi < 1");
  if (!(p.q_precip > 0.0)) throw ConfigError("q_precip must be positive");
  if (p.gamma_r < 0.0) throw ConfigError("gamma_r must be nonnegative");
  if (!(p.q0 >= 0.0)) throw ConfigError("q0 must be nonnegative");
  if (!(p.H > 0.0)) throw ConfigError("H must be positive");
}

double saturation(double D, double b, double B, double theta, const PhysicsParams& p, const FrameworkConfig& cfg) {
  const double depth = D + B;
  if (!(depth > 0.0)) throw StateError(fmt::format("saturation needs D + B > 0 (got {:.6g})", depth));
  const double exponent = cfg.thermal() ? 20.0 * (1.0 - b / cfg.g) : (p.theta_in_saturation ? 20.0 * theta : 0.0);
  return p.q0 * p.H / depth * std::exp(exponent);
}

double gamma_v(double q_sat, double D, double B, double beta1, double beta2, double g) {
  return 1.0 / (1.0 + q_sat * (20.0 * beta2 / g + beta1 / (D + B)));
}

PointIncrements three_state_point(double qv, double qc, double q_sat, double gv, double dt, const PhysicsParams& p,
                                  double beta1, double beta2) {
  PointIncrements inc;
  const double rv = dt / (p.tau_v > 0.0 ? p.tau_v : dt);
  const double rr = dt / (p.tau_r > 0.0 ? p.tau_r : dt);
  double cdt = 0.0;
  if (qv > q_sat) {
    cdt = gv * (qv - q_sat) * rv;
  } else if (qv < q_sat && qc > 0.0) {
    cdt = -std::min(qc, gv * (q_sat - qv) * rv);
  }
  inc.conversion = cdt;
  inc.dqv = -cdt;
  inc.dqc = cdt;
  const double qc_new = qc + cdt;
  if (qc_new > p.q_precip) {
    const double pdt = p.gamma_r * (qc_new - p.q_precip) * rr;
    inc.dqc -= pdt;
    inc.dqr = pdt;
  }
  inc.dD = -beta1 * cdt;
  inc.db = -beta2 * cdt;
  return inc;
}

PointIncrements one_way_point(double qv, double q_sat, double dt, const PhysicsParams& p, double beta1, double beta2) {
  PointIncrements inc;
  if (!(qv > q_sat)) return inc;
  const double r = dt / (p.tau_v > 0.0 ? p.tau_v : dt);
  const double sv_dt = -p.gamma_r * (qv - q_sat) * r;
  inc.conversion = -sv_dt;
  inc.dqv = sv_dt;
  inc.dqr = -sv_dt;
  inc.dD = beta1 * sv_dt;
  inc.db = beta2 * sv_dt;
  return inc;
}

namespace {

template <typename Kernel>
PhysicsIncrements nodal_step(const State& s, const PhysicsParams& p, const FrameworkConfig& cfg, const Field* theta,
                             Kernel&& kernel) {
  const Eigen::Index n = s.D.values.size();
  PhysicsIncrements inc{Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n),
                        Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const double D = s.D.values(i), B = s.B.values(i), b = s.b.values(i);
    const double th = theta ? theta->values(i) : 0.0;
    const double qsat = saturation(D, b, B, th, p, cfg);
    const PointIncrements pi = kernel(i, qsat, D, B);
    inc.dqv(i) = pi.dqv;
    inc.dqc(i) = pi.dqc;
    inc.dqr(i) = pi.dqr;
    inc.dD(i) = pi.dD;
    inc.db(i) = pi.db;
  }
  return inc;
}

}  // namespace

PhysicsIncrements three_state_step(const State& s, double dt, const PhysicsParams& p, const FrameworkConfig& cfg,
                                   const Field* theta) {
  if (!(dt > 0.0)) throw ArgumentError("physics timestep must be positive");
  return nodal_step(s, p, cfg, theta, [&](Eigen::Index i, double qsat, double D, double B) {
    const double gv = gamma_v(qsat, D, B, cfg.beta1, cfg.beta2, cfg.g);
    return three_state_point(s.qv.values(i), s.qc.values(i), qsat, gv, dt, p, cfg.beta1, cfg.beta2);
  });
}

PhysicsIncrements one_way_step(const State& s, double dt, const PhysicsParams& p, const FrameworkConfig& cfg,
                               const Field* theta) {
  if (!(dt > 0.0)) throw ArgumentError("physics timestep must be positive");
  return nodal_step(s, p, cfg, theta, [&](Eigen::Index i, double qsat, double, double) {
    return one_way_point(s.qv.values(i), qsat, dt, p, cfg.beta1, cfg.beta2);
  });
}

PhysicsReport apply_increments(State& s, const PhysicsIncrements& inc) {
  s.qv.values += inc.dqv;
  s.qc.values += inc.dqc;
  s.qr.values += inc.dqr;
  s.D.values += inc.dD;
  s.b.values += inc.db;
  PhysicsReport report;
  double worst = 0.0;
  for (Field* f : {&s.qv, &s.qc}) {
    for (Eigen::Index i = 0; i < f->values.size(); ++i) {
      if (f->values(i) < 0.0) {
        report.clipped -= f->values(i);
        ++report.clipped_dofs;
        worst = std::min(worst, f->values(i));
        f->values(i) = 0.0;
      }
    }
  }
  // Rounding-level negatives are expected; anything larger means the
  // increments overshot and is reported.
  if (worst < -1e-14) {
    spdlog::error("physics: clipped negative moisture at {} dofs (total {:.3e}, most negative {:.3e})",
                  report.clipped_dofs, report.clipped, worst);
  } else if (report.clipped_dofs > 0) {
    spdlog::debug("physics: clipped {} rounding-level negatives", report.clipped_dofs);
  }
  for (Eigen::Index i = 0; i < s.D.values.size(); ++i) {
    if (!(s.D.values(i) + s.B.values(i) > 0.0)) {
      throw StateError(fmt::format("physics drove D + B nonpositive ({:.6g}) at dof {}", s.D.values(i) + s.B.values(i), i));
    }
  }
  return report;
}

PhysicsReport apply_physics(State& s, double dt, const PhysicsParams& p, const FrameworkConfig& cfg,
                            const Field* theta) {
  switch (p.scheme) {
    case PhysicsScheme::ThreeState: return apply_increments(s, three_state_step(s, dt, p, cfg, theta));
    case PhysicsScheme::OneWay: return apply_increments(s, one_way_step(s, dt, p, cfg, theta));
    case PhysicsScheme::Off: return {};
  }
  return {};
}

Eigen::VectorXd saturation_field(const State& s, const PhysicsParams& p, const FrameworkConfig& cfg,
                                 const Field* theta) {
  Eigen::VectorXd out(s.D.values.size());
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    out(i) = saturation(s.D.values(i), s.b.values(i), s.B.values(i), theta ? theta->values(i) : 0.0, p, cfg);
  }
  return out;
}

}  // namespace msw
