#include "msw/timestepper.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "msw/diagnostics.hpp"
#include "msw/errors.hpp"

namespace msw {

namespace {

using Vec12 = Eigen::Matrix<double, kHdivDofs, 1>;
using Row3 = Eigen::Matrix<double, 1, 3>;

void check_finite(const Eigen::VectorXd& v, const char* what) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v(i))) throw InstabilityError(fmt::format("{} produced a non-finite value at dof {}", what, i));
  }
}

SparseMatrix to_sparse(int rows, int cols, const Triplets& t) {
  SparseMatrix m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

SparseMatrix block_diagonal_dg_inverse(const Discretisation& disc) {
  Triplets t;
  for (int c = 0; c < disc.mesh().num_cells(); ++c) {
    const Eigen::Matrix3d m = disc.dg_mass_inverse(c);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) t.emplace_back(3 * c + i, 3 * c + j, m(i, j));
    }
  }
  return to_sparse(disc.dg().num_dofs(), disc.dg().num_dofs(), t);
}

}  // namespace

void validate(const SolverConfig& s, const FrameworkConfig& cfg) {
  if (!(s.dt > 0.0)) throw ConfigError("dt must be positive");
  if (s.outer_iterations < 1 || s.inner_iterations < 1) throw ConfigError("outer and inner iteration counts must be >= 1");
  if (!(s.linear_tolerance > 0.0 && s.linear_tolerance < 1.0)) throw ConfigError("linear tolerance must lie in (0, 1)");
  if (!(s.H > 0.0)) throw ConfigError("reference depth H must be positive");
  if (cfg.thermal() && s.b_ref.space == nullptr) throw ConfigError("thermal frameworks need a reference buoyancy");
}

void vertex_limiter(const Discretisation& disc, Field& q) {
  const Mesh& mesh = disc.mesh();
  const int nc = mesh.num_cells();
  Eigen::VectorXd mean(nc);
  for (int c = 0; c < nc; ++c) mean(c) = q.values.segment<3>(3 * c).mean();
  const int nv = mesh.num_vertices();
  std::vector<double> lo(nv, std::numeric_limits<double>::infinity());
  std::vector<double> hi(nv, -std::numeric_limits<double>::infinity());
  for (int c = 0; c < nc; ++c) {
    for (int v : mesh.cells()[c]) {
      lo[v] = std::min(lo[v], mean(c));
      hi[v] = std::max(hi[v], mean(c));
    }
  }
  for (int c = 0; c < nc; ++c) {
    double alpha = 1.0;
    for (int k = 0; k < 3; ++k) {
      const int v = mesh.cells()[c][k];
      const double dev = q.values(3 * c + k) - mean(c);
      if (dev > 0.0) {
        alpha = std::min(alpha, (hi[v] - mean(c)) / dev);
      } else if (dev < 0.0) {
        alpha = std::min(alpha, (lo[v] - mean(c)) / dev);
      }
    }
    alpha = std::max(alpha, 0.0);
    if (alpha < 1.0) {
      for (int k = 0; k < 3; ++k) q.values(3 * c + k) = mean(c) + alpha * (q.values(3 * c + k) - mean(c));
    }
  }
}

Field ssprk3_transport(const Discretisation& disc, const TransportOperator& op, const Field& q, double dt,
                       TransportForm form, bool limit) {
  const SparseMatrix& K = op.matrix(form);
  auto stage = [&](Field& f, const char* name) {
    if (limit) vertex_limiter(disc, f);
    check_finite(f.values, name);
  };
  Field q1(*q.space, q.values + dt * (K * q.values));
  stage(q1, "SSPRK3 stage 1");
  Field q2(*q.space, 0.75 * q.values + 0.25 * (q1.values + dt * (K * q1.values)));
  stage(q2, "SSPRK3 stage 2");
  Field q3(*q.space, (1.0 / 3.0) * q.values + (2.0 / 3.0) * (q2.values + dt * (K * q2.values)));
  stage(q3, "SSPRK3 stage 3");
  return q3;
}

Field ssprk3_transport(const Discretisation& disc, const Field& q, const Field& ubar, double dt, TransportForm form,
                       bool limit) {
  const double cn = courant_number(disc, ubar, dt);
  if (cn > 0.5) spdlog::warn("SSPRK3 transport at Courant number {:.3f}", cn);
  TransportOperator op(disc);
  op.update(ubar);
  return ssprk3_transport(disc, op, q, dt, form, limit);
}

Field implicit_midpoint_u(const VectorInvariantOperator& op, const SparseMatrix& mass, const SpdSolver& mass_solver,
                          const Field& u, double dt, double tol, int* iterations) {
  const SparseMatrix& A = op.matrix();
  const SparseMatrix lhs = mass + (0.5 * dt) * A;
  const Eigen::VectorXd rhs = mass * u.values - (0.5 * dt) * (A * u.values);
  Field out(*u.space, bicgstab_solve(lhs, rhs, mass_solver, u.values, tol, iterations));
  check_finite(out.values, "implicit midpoint velocity transport");
  return out;
}

Field implicit_midpoint_u(const Discretisation& disc, const Field& u, const Field& ubar, double dt, double tol) {
  const SparseMatrix mass = assemble_mass(disc, SpaceKind::HdivQuadratic);
  const SpdSolver solver(mass);
  VectorInvariantOperator op(disc);
  op.update(ubar);
  return implicit_midpoint_u(op, mass, solver, u, dt, tol);
}

QuasiNewtonOperator::QuasiNewtonOperator(const Discretisation& disc, const FrameworkConfig& cfg, double H,
                                         const Field* b_ref, double dt, double tol)
    : disc_(&disc), thermal_(cfg.thermal()), tau_(0.5 * dt), H_(H), tol_(tol) {
  if (!(dt > 0.0) || !(H > 0.0)) throw ArgumentError("quasi-Newton operator needs dt > 0 and H > 0");
  if (thermal_ && (b_ref == nullptr || b_ref->space != &disc.dg())) {
    throw ArgumentError("thermal quasi-Newton operator needs a DG reference buoyancy");
  }
  const FunctionSpace& V = disc.hdiv();
  const FunctionSpace& W = disc.dg();
  const int nu = V.num_dofs(), nd = W.num_dofs();
  if (!(tol > 0.0)) throw ArgumentError("quasi-Newton tolerance must be positive");
  const bool sphere = disc.on_sphere();
  mass_u_ = assemble_mass(disc, SpaceKind::HdivQuadratic);
  mass_dg_ = assemble_mass(disc, SpaceKind::DGLinear);

  // coriolis(i, j) = (psi_i, f k x psi_j); div(k, i) = (lam_k, div psi_i);
  // pressure(k, i) = (lam_k, div(b psi_i)) - <<lam_k>, [[b psi_i]]>;
  // buoyancy(k, i) = -(b, div(lam_k psi_i)) + <<b>, [[lam_k psi_i]]>.
  Triplets tc, td, tp, tb;
  HdivCellEval ev;
  for (int c = 0; c < disc.mesh().num_cells(); ++c) {
    disc.eval_hdiv_cell(c, ev, false);
    const int* ud = V.cell_dofs(c);
    const Vec3& k = disc.geometry().cells[c].normal;
    const Eigen::Matrix3d G = disc.dg_gradients(c);
    const Eigen::Vector3d bl = thermal_ ? disc.local_dg(*b_ref, c) : Eigen::Vector3d::Constant(cfg.g);
    const Vec3 grad_b = G * bl;
    Eigen::Matrix<double, kHdivDofs, kHdivDofs> cor = Eigen::Matrix<double, kHdivDofs, kHdivDofs>::Zero();
    Eigen::Matrix<double, 3, kHdivDofs> dv = Eigen::Matrix<double, 3, kHdivDofs>::Zero();
    Eigen::Matrix<double, 3, kHdivDofs> pr = dv, bu = dv;
    for (int q = 0; q < disc.num_cell_points(); ++q) {
      const double w = disc.cell_weight(c, q);
      const double f = cfg.coriolis_parameter(disc.cell_point(c, q), sphere);
      Eigen::Matrix<double, 3, kHdivDofs> kx;
      for (int j = 0; j < kHdivDofs; ++j) kx.col(j) = k.cross(Vec3(ev.values[q].col(j)));
      cor.noalias() += (w * f) * ev.values[q].transpose() * kx;
      const Row3 lam = disc.dg_table().values[q];
      const double b = lam.dot(bl);
      dv.noalias() += w * lam.transpose() * ev.divs[q];
      // div(b psi) = b div psi + psi . grad b
      pr.noalias() += w * lam.transpose() * (b * ev.divs[q] + grad_b.transpose() * ev.values[q]);
      // div(lam psi) = lam div psi + psi . grad lam
      bu.noalias() -= (w * b) * (lam.transpose() * ev.divs[q] + G.transpose() * ev.values[q]);
    }
    for (int i = 0; i < kHdivDofs; ++i) {
      for (int j = 0; j < kHdivDofs; ++j) tc.emplace_back(ud[i], ud[j], cor(i, j));
    }
    for (int a = 0; a < 3; ++a) {
      for (int j = 0; j < kHdivDofs; ++j) {
        td.emplace_back(3 * c + a, ud[j], dv(a, j));
        tp.emplace_back(3 * c + a, ud[j], pr(a, j));
        tb.emplace_back(3 * c + a, ud[j], bu(a, j));
      }
    }
  }
  for (int f = 0; f < disc.mesh().num_facets(); ++f) {
    const FacetSide side[2] = {disc.facet_side(f, 0), disc.facet_side(f, 1)};
    Eigen::Vector3d bl[2];
    for (int t = 0; t < 2; ++t) {
      bl[t] = thermal_ ? disc.local_dg(*b_ref, side[t].cell) : Eigen::Vector3d::Constant(cfg.g);
    }
    Eigen::Matrix<double, 3, kHdivDofs> pr[2][2], bu[2];
    for (int s = 0; s < 2; ++s) {
      bu[s].setZero();
      for (int t = 0; t < 2; ++t) pr[s][t].setZero();
    }
    for (int q = 0; q < disc.num_facet_points(); ++q) {
      const double w = disc.facet_weight(f, q);
      Row3 lam[2];
      double b[2];
      Eigen::Matrix<double, 1, kHdivDofs> flux[2];
      for (int t = 0; t < 2; ++t) {
        lam[t] = disc.dg_facet_table(side[t].edge, side[t].reversed).values[q];
        b[t] = lam[t].dot(bl[t]);
        flux[t] = side[t].normal.transpose() * disc.hdiv_facet_values(side[t], q);
      }
      const double avg_b = 0.5 * (b[0] + b[1]);
      for (int s = 0; s < 2; ++s) {
        bu[s].noalias() += (w * avg_b) * lam[s].transpose() * flux[s];
        for (int t = 0; t < 2; ++t) pr[s][t].noalias() -= (0.5 * w * b[t]) * lam[s].transpose() * flux[t];
      }
    }
    for (int s = 0; s < 2; ++s) {
      const int rc = side[s].cell;
      for (int a = 0; a < 3; ++a) {
        for (int t = 0; t < 2; ++t) {
          const int* ud = V.cell_dofs(side[t].cell);
          for (int j = 0; j < kHdivDofs; ++j) tp.emplace_back(3 * rc + a, ud[j], pr[s][t](a, j));
        }
        const int* ud = V.cell_dofs(rc);
        for (int j = 0; j < kHdivDofs; ++j) tb.emplace_back(3 * rc + a, ud[j], bu[s](a, j));
      }
    }
  }
  coriolis_ = to_sparse(nu, nu, tc);
  div_ = to_sparse(nd, nu, td);
  pressure_ = to_sparse(nd, nu, tp);
  buoyancy_ = to_sparse(nd, nu, tb);
  if (!thermal_) {
    // Plain shallow-water system: constant g, no buoyancy block.
    pressure_ = cfg.g * div_;
    buoyancy_.setZero();
  }

  mass_dg_inv_ = block_diagonal_dg_inverse(disc);
  const SparseMatrix div_t = div_.transpose();
  SparseMatrix auu = mass_u_ + tau_ * coriolis_;
  if (thermal_) auu += (tau_ * tau_ * H_ / 2.0) * SparseMatrix(div_t * mass_dg_inv_ * buoyancy_);
  coupling_ud_ = SparseMatrix((-tau_) * pressure_.transpose() + (tau_ / 2.0) * buoyancy_.transpose());
  // dD = Mdg^{-1}(r_D - tau H Div du)
  schur_ = auu - (tau_ * H_) * SparseMatrix(coupling_ud_ * mass_dg_inv_ * div_);
  schur_.makeCompressed();

  double b_mean = cfg.g;
  if (thermal_) b_mean = integrate(disc, *b_ref) / disc.geometry().total_area();
  const SparseMatrix spd = mass_u_ + (tau_ * tau_ * H_ * b_mean) * SparseMatrix(div_t * mass_dg_inv_ * div_);
  preconditioner_ = std::make_unique<SpdSolver>(spd);
}

QuasiNewtonOperator::~QuasiNewtonOperator() = default;

Eigen::VectorXd QuasiNewtonOperator::dg_mass_solve(const Eigen::VectorXd& r) const { return mass_dg_inv_ * r; }

QuasiNewtonOperator::Vectors QuasiNewtonOperator::solve(const Vectors& r, int* iterations) const {
  const int nu = static_cast<int>(mass_u_.rows()), nd = static_cast<int>(mass_dg_.rows());
  if (r.u.size() != nu || r.D.size() != nd || (thermal_ && r.b.size() != nd)) {
    throw ArgumentError("quasi-Newton residual has the wrong size");
  }
  Eigen::VectorXd rhs = r.u;
  Eigen::VectorXd mb;
  if (thermal_) {
    mb = dg_mass_solve(r.b);
    rhs += (tau_ * H_ / 2.0) * (div_.transpose() * mb);
  }
  const Eigen::VectorXd mD = dg_mass_solve(r.D);
  rhs -= coupling_ud_ * mD;
  Vectors out;
  out.u = bicgstab_solve(schur_, rhs, *preconditioner_, Eigen::VectorXd::Zero(nu), tol_, iterations);
  check_finite(out.u, "quasi-Newton solve");
  out.D = mD - (tau_ * H_) * dg_mass_solve(div_ * out.u);
  if (thermal_) out.b = mb - tau_ * dg_mass_solve(buoyancy_ * out.u);
  return out;
}

QuasiNewtonOperator::Vectors QuasiNewtonOperator::apply(const Vectors& x) const {
  Vectors r;
  r.u = mass_u_ * x.u + tau_ * (coriolis_ * x.u) + coupling_ud_ * x.D;
  r.D = mass_dg_ * x.D + tau_ * H_ * (div_ * x.u);
  if (thermal_) {
    r.u -= (tau_ * H_ / 2.0) * (div_.transpose() * x.b);
    r.b = mass_dg_ * x.b + tau_ * (buoyancy_ * x.u);
  }
  return r;
}

Stepper::Stepper(const Discretisation& disc, FrameworkConfig cfg, PhysicsParams physics, SolverConfig solver,
                 const Field* theta)
    : disc_(&disc),
      cfg_(cfg),
      physics_(physics),
      solver_(std::move(solver)),
      theta_(theta),
      transport_(disc),
      vector_transport_(disc) {
  validate(cfg_);
  validate(physics_);
  validate(solver_, cfg_);
  mass_u_ = assemble_mass(disc, SpaceKind::HdivQuadratic);
  mass_dg_ = assemble_mass(disc, SpaceKind::DGLinear);
  mass_solver_ = std::make_unique<SpdSolver>(mass_u_);
  qn_ = std::make_unique<QuasiNewtonOperator>(disc, cfg_, solver_.H, cfg_.thermal() ? &solver_.b_ref : nullptr,
                                              solver_.dt, solver_.linear_tolerance);
}

State Stepper::explicit_forcing_half_step(const State& s) const {
  State out = s;
  const Eigen::VectorXd F = velocity_forcing(*disc_, s, cfg_);
  out.u.values += (0.5 * solver_.dt) * mass_solver_->solve(F);
  check_finite(out.u.values, "explicit forcing");
  return out;
}

StepReport Stepper::step(State& s) {
  int outer = -1, inner = -1;
  const double t0 = s.time;
  auto context = [&] {
    return fmt::format("step from t = {:.6g} s (outer {}, inner {})", t0, outer, inner);
  };
  try {
    return step_impl(s, outer, inner);
  } catch (const InstabilityError& e) {
    throw InstabilityError(fmt::format("{}: {}", context(), e.what()));
  } catch (const SolverError& e) {
    throw SolverError(fmt::format("{}: {}", context(), e.what()));
  } catch (const StateError& e) {
    throw StateError(fmt::format("{}: {}", context(), e.what()));
  }
}

StepReport Stepper::step_impl(State& s, int& outer, int& inner) {
  const Discretisation& disc = *disc_;
  const double dt = solver_.dt;
  const bool thermal = cfg_.thermal();
  StepReport report;

  State next = s;
  const State fe = explicit_forcing_half_step(s);

  auto limited_transport = [&](const Field& q) {
    Field out = ssprk3_transport(disc, transport_, q, dt, TransportForm::Advective, solver_.limiter);
    if (solver_.limiter) {
      const double excess = std::max(out.values.maxCoeff() - q.values.maxCoeff(), q.values.minCoeff() - out.values.minCoeff());
      report.limiter_excess = std::max(report.limiter_excess, excess);
    }
    return out;
  };

  for (outer = 0; outer < solver_.outer_iterations; ++outer) {
    inner = -1;
    const Field ubar(disc.hdiv(), 0.5 * (s.u.values + next.u.values));
    transport_.update(ubar);
    vector_transport_.update(ubar);
    int its = 0;
    const Field uT = implicit_midpoint_u(vector_transport_, mass_u_, *mass_solver_, fe.u, dt, solver_.linear_tolerance, &its);
    report.transport_iterations += its;
    const Field DT = ssprk3_transport(disc, transport_, fe.D, dt, TransportForm::Conservative, false);
    Field bT = fe.b;
    if (thermal) bT = ssprk3_transport(disc, transport_, fe.b, dt, TransportForm::Advective, false);
    next.qv = limited_transport(fe.qv);
    next.qc = limited_transport(fe.qc);

    double previous = -1.0;
    for (inner = 0; inner < solver_.inner_iterations; ++inner) {
      QuasiNewtonOperator::Vectors r;
      r.u = mass_u_ * (uT.values - next.u.values) + (0.5 * dt) * velocity_forcing(disc, next, cfg_);
      r.D = mass_dg_ * (DT.values - next.D.values);
      if (thermal) r.b = mass_dg_ * (bT.values - next.b.values);
      const double norm = std::sqrt(r.u.squaredNorm() + r.D.squaredNorm() + (thermal ? r.b.squaredNorm() : 0.0));
      report.residual_norms.push_back(norm);
      if (previous >= 0.0 && norm > previous) {
        ++report.monotonicity_warnings;
        spdlog::debug("quasi-Newton residual grew from {:.3e} to {:.3e} (outer {}, inner {})", previous, norm, outer, inner);
      }
      previous = norm;
      int its = 0;
      const QuasiNewtonOperator::Vectors dx = qn_->solve(r, &its);
      report.linear_iterations += its;
      next.u.values += dx.u;
      next.D.values += dx.D;
      if (thermal) next.b.values += dx.b;
    }
  }
  inner = -1;
  outer = -1;
  check_state(next);
  if (physics_.scheme != PhysicsScheme::Off) report.physics = apply_physics(next, dt, physics_, cfg_, theta_);
  next.time = s.time + dt;
  s = std::move(next);
  return report;
}

}  // namespace msw
