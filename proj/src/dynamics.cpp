#include "msw/dynamics.hpp"

#include "msw/errors.hpp"

namespace msw {

namespace {

using Vec12 = Eigen::Matrix<double, kHdivDofs, 1>;
using Mat3x12 = Eigen::Matrix<double, 3, kHdivDofs>;
using Row3 = Eigen::Matrix<double, 1, 3>;

void scatter_hdiv(const FunctionSpace& space, int cell, const Vec12& local, Eigen::VectorXd& out) {
  const int* d = space.cell_dofs(cell);
  for (int i = 0; i < kHdivDofs; ++i) out(d[i]) += local(i);
}

Eigen::VectorXd forcing_impl(const Discretisation& disc, const State& s, const FrameworkConfig& cfg,
                             bool constant_b, bool coriolis_only) {
  const FunctionSpace& V = disc.hdiv();
  Eigen::VectorXd r = Eigen::VectorXd::Zero(V.num_dofs());
  const bool sphere = disc.on_sphere();
  HdivCellEval ev;
  for (int c = 0; c < disc.mesh().num_cells(); ++c) {
    disc.eval_hdiv_cell(c, ev, false);
    const Vec12 cu = disc.local_hdiv(s.u, c);
    const Vec3& k = disc.geometry().cells[c].normal;
    Vec12 local = Vec12::Zero();
    Eigen::Vector3d Dl, Sl, bl;
    Vec3 grad_D, grad_b;
    if (!coriolis_only) {
      Dl = disc.local_dg(s.D, c);
      Sl = Dl + disc.local_dg(s.B, c);
      bl = disc.local_dg(s.b, c);
      const Eigen::Matrix3d G = disc.dg_gradients(c);
      grad_D = G * Dl;
      grad_b = G * bl;
    }
    for (int q = 0; q < disc.num_cell_points(); ++q) {
      const double w = disc.cell_weight(c, q);
      const double f = cfg.coriolis_parameter(disc.cell_point(c, q), sphere);
      const Vec3 u = ev.values[q] * cu;
      local.noalias() -= (w * f) * ev.values[q].transpose() * k.cross(u);
      if (coriolis_only) continue;
      const Row3 lam = disc.dg_table().values[q];
      const double S = lam.dot(Sl);
      if (constant_b) {
        local.noalias() += (w * cfg.g * S) * ev.divs[q].transpose();
      } else {
        const double D = lam.dot(Dl);
        const double b = lam.dot(bl);
        local.noalias() += (w * (S * b + 0.5 * b * D)) * ev.divs[q].transpose();
        local.noalias() += w * ev.values[q].transpose() * (S * grad_b + 0.5 * b * grad_D);
      }
    }
    scatter_hdiv(V, c, local, r);
  }
  if (coriolis_only) return r;

  for (int f = 0; f < disc.mesh().num_facets(); ++f) {
    const FacetSide side[2] = {disc.facet_side(f, 0), disc.facet_side(f, 1)};
    Eigen::Vector3d Sl[2], Dl[2], bl[2];
    for (int t = 0; t < 2; ++t) {
      Dl[t] = disc.local_dg(s.D, side[t].cell);
      Sl[t] = Dl[t] + disc.local_dg(s.B, side[t].cell);
      bl[t] = disc.local_dg(s.b, side[t].cell);
    }
    Vec12 local[2] = {Vec12::Zero(), Vec12::Zero()};
    for (int q = 0; q < disc.num_facet_points(); ++q) {
      const double w = disc.facet_weight(f, q);
      double S[2], D[2], b[2];
      for (int t = 0; t < 2; ++t) {
        const Row3 lam = disc.dg_facet_table(side[t].edge, side[t].reversed).values[q];
        S[t] = lam.dot(Sl[t]);
        D[t] = lam.dot(Dl[t]);
        b[t] = lam.dot(bl[t]);
      }
      const double avg_S = 0.5 * (S[0] + S[1]);
      const double avg_b = 0.5 * (b[0] + b[1]);
      for (int t = 0; t < 2; ++t) {
        const Vec12 flux = disc.hdiv_facet_values(side[t], q).transpose() * side[t].normal;
        const double coeff = constant_b ? -cfg.g * avg_S : -(avg_S * b[t] + 0.5 * avg_b * D[t]);
        local[t].noalias() += (w * coeff) * flux;
      }
    }
    for (int t = 0; t < 2; ++t) scatter_hdiv(V, side[t].cell, local[t], r);
  }
  return r;
}

// Emits every DG transport block: 3x3 cell blocks, then 6x6 facet blocks
// with rows/cols ordered (+, -).
template <typename CellSink, typename FacetSink>
void transport_blocks(const Discretisation& disc, const Field& ubar, TransportForm form, CellSink&& cell_sink,
                      FacetSink&& facet_sink) {
  const int nc = disc.mesh().num_cells();
  HdivCellEval ev;
  for (int c = 0; c < nc; ++c) {
    disc.eval_hdiv_cell(c, ev, false);
    const Vec12 cb = disc.local_hdiv(ubar, c);
    const Eigen::Matrix3d G = disc.dg_gradients(c);
    Eigen::Matrix3d local = Eigen::Matrix3d::Zero();
    for (int q = 0; q < disc.num_cell_points(); ++q) {
      const double w = disc.cell_weight(c, q);
      const Row3 lam = disc.dg_table().values[q];
      const Vec3 ub = ev.values[q] * cb;
      // local(i, j) = (lam_j ubar, grad lam_i)
      local.noalias() += w * (G.transpose() * ub) * lam;
      if (form == TransportForm::Advective) local.noalias() += (w * ev.divs[q].dot(cb)) * lam.transpose() * lam;
    }
    cell_sink(c, local);
  }
  for (int f = 0; f < disc.mesh().num_facets(); ++f) {
    const FacetSide p = disc.facet_side(f, 0);
    const FacetSide m = disc.facet_side(f, 1);
    const Vec12 cb = disc.local_hdiv(ubar, p.cell);
    Eigen::Matrix<double, 6, 6> local = Eigen::Matrix<double, 6, 6>::Zero();
    for (int q = 0; q < disc.num_facet_points(); ++q) {
      const double w = disc.facet_weight(f, q);
      const double un = (disc.hdiv_facet_values(p, q) * cb).dot(p.normal);
      const Row3 lp = disc.dg_facet_table(p.edge, p.reversed).values[q];
      const Row3 lm = disc.dg_facet_table(m.edge, m.reversed).values[q];
      Eigen::Matrix<double, 1, 6> upwind;
      upwind << upwind_value(1.0, 0.0, un) * lp, upwind_value(0.0, 1.0, un) * lm;
      Eigen::Matrix<double, 6, 1> jump;
      jump << lp.transpose(), -lm.transpose();
      local.noalias() -= (w * un) * jump * upwind;
    }
    facet_sink(f, local);
  }
}

BlockAssembler dg_transport_pattern(const Discretisation& disc) {
  BlockAssembler a = cell_block_pattern(disc.dg(), disc.dg());
  add_facet_blocks(a, disc, disc.dg(), disc.dg());
  a.finalize();
  return a;
}

}  // namespace

Eigen::VectorXd forcing_residual(const Discretisation& disc, const State& s, const FrameworkConfig& cfg) {
  return forcing_impl(disc, s, cfg, false, false);
}

Eigen::VectorXd forcing_residual_constant_b(const Discretisation& disc, const State& s, const FrameworkConfig& cfg) {
  return forcing_impl(disc, s, cfg, true, false);
}

Eigen::VectorXd coriolis_residual(const Discretisation& disc, const Field& u, const FrameworkConfig& cfg) {
  State s;
  s.u = u;
  return forcing_impl(disc, s, cfg, true, true);
}

Eigen::VectorXd velocity_forcing(const Discretisation& disc, const State& s, const FrameworkConfig& cfg) {
  return forcing_impl(disc, s, cfg, !cfg.thermal(), false);
}

Eigen::VectorXd scalar_transport_tendency(const Discretisation& disc, const Field& q, const Field& ubar,
                                          TransportForm form) {
  if (q.space != &disc.dg() || ubar.space != &disc.hdiv()) {
    throw ArgumentError("scalar transport needs a DG scalar and an H(div) velocity on the same discretisation");
  }
  Eigen::VectorXd r = Eigen::VectorXd::Zero(q.size());
  transport_blocks(
      disc, ubar, form,
      [&](int c, const Eigen::Matrix3d& local) { r.segment<3>(3 * c) += local * q.values.segment<3>(3 * c); },
      [&](int facet, const Eigen::Matrix<double, 6, 6>& local) {
        const Facet& f = disc.mesh().facets()[facet];
        Eigen::Matrix<double, 6, 1> x;
        x << q.values.segment<3>(3 * f.cell_plus), q.values.segment<3>(3 * f.cell_minus);
        const Eigen::Matrix<double, 6, 1> y = local * x;
        r.segment<3>(3 * f.cell_plus) += y.head<3>();
        r.segment<3>(3 * f.cell_minus) += y.tail<3>();
      });
  return r;
}

Eigen::VectorXd vector_invariant_tendency(const Discretisation& disc, const Field& u, const Field& ubar) {
  VectorInvariantOperator op(disc);
  op.update(ubar);
  return -(op.matrix() * u.values);
}

TransportOperator::TransportOperator(const Discretisation& disc)
    : disc_(&disc), conservative_(dg_transport_pattern(disc)), advective_(dg_transport_pattern(disc)) {}

void TransportOperator::update(const Field& ubar) {
  const int nc = disc_->mesh().num_cells();
  std::vector<Eigen::Matrix3d> minv(nc);
  for (int c = 0; c < nc; ++c) minv[c] = disc_->dg_mass_inverse(c);
  for (auto form : {TransportForm::Conservative, TransportForm::Advective}) {
    BlockAssembler& a = form == TransportForm::Conservative ? conservative_ : advective_;
    a.set_zero();
    transport_blocks(
        *disc_, ubar, form, [&](int c, const Eigen::Matrix3d& local) { a.scatter(c, minv[c] * local); },
        [&](int facet, const Eigen::Matrix<double, 6, 6>& local) {
          const Facet& f = disc_->mesh().facets()[facet];
          Eigen::Matrix<double, 6, 6> scaled;
          scaled.topRows<3>() = minv[f.cell_plus] * local.topRows<3>();
          scaled.bottomRows<3>() = minv[f.cell_minus] * local.bottomRows<3>();
          a.scatter(nc + facet, scaled);
        });
  }
}

const SparseMatrix& TransportOperator::matrix(TransportForm form) const {
  return form == TransportForm::Conservative ? conservative_.matrix() : advective_.matrix();
}

VectorInvariantOperator::VectorInvariantOperator(const Discretisation& disc)
    : disc_(&disc), assembler_(cell_block_pattern(disc.hdiv(), disc.hdiv())) {
  add_facet_blocks(assembler_, disc, disc.hdiv(), disc.hdiv());
  assembler_.finalize();
}

void VectorInvariantOperator::update(const Field& ubar) {
  const Discretisation& disc = *disc_;
  assembler_.set_zero();
  const int nc = disc.mesh().num_cells();
  HdivCellEval ev;
  for (int c = 0; c < nc; ++c) {
    disc.eval_hdiv_cell(c, ev, true);
    const Vec12 cb = disc.local_hdiv(ubar, c);
    const Vec3& k = disc.geometry().cells[c].normal;
    Eigen::Matrix<double, kHdivDofs, kHdivDofs> local = Eigen::Matrix<double, kHdivDofs, kHdivDofs>::Zero();
    for (int q = 0; q < disc.num_cell_points(); ++q) {
      const double w = disc.cell_weight(c, q);
      const Mat3x12& V = ev.values[q];
      const Vec3 ub = V * cb;
      Mat3 G_ub = Mat3::Zero();
      for (int j = 0; j < kHdivDofs; ++j) G_ub.noalias() += cb(j) * ev.grads[q][j];
      const Vec3 k_x_ub = k.cross(ub);
      Mat3x12 P, GW;
      for (int j = 0; j < kHdivDofs; ++j) {
        const Vec3 psi = V.col(j);
        P.col(j) = k.cross(psi);
        GW.col(j) = G_ub.transpose() * psi.cross(k) + ev.grads[q][j].transpose() * k_x_ub;
      }
      local.noalias() += w * GW.transpose() * P;
      local.noalias() -= (0.5 * w) * ev.divs[q].transpose() * (ub.transpose() * V);
    }
    assembler_.scatter(c, local);
  }
  for (int f = 0; f < disc.mesh().num_facets(); ++f) {
    const FacetSide side[2] = {disc.facet_side(f, 0), disc.facet_side(f, 1)};
    const Vec12 cb[2] = {disc.local_hdiv(ubar, side[0].cell), disc.local_hdiv(ubar, side[1].cell)};
    const Vec3 k[2] = {disc.geometry().cells[side[0].cell].normal, disc.geometry().cells[side[1].cell].normal};
    Eigen::Matrix<double, 2 * kHdivDofs, 2 * kHdivDofs> local =
        Eigen::Matrix<double, 2 * kHdivDofs, 2 * kHdivDofs>::Zero();
    for (int q = 0; q < disc.num_facet_points(); ++q) {
      const double w = disc.facet_weight(f, q);
      const Mat3x12 V[2] = {disc.hdiv_facet_values(side[0], q), disc.hdiv_facet_values(side[1], q)};
      const Vec3 ub[2] = {V[0] * cb[0], V[1] * cb[1]};
      const double un = ub[0].dot(side[0].normal);
      const double up_weight[2] = {upwind_value(1.0, 0.0, un), upwind_value(0.0, 1.0, un)};
      for (int s = 0; s < 2; ++s) {
        const Eigen::Matrix<double, kHdivDofs, 1> ws = V[s].transpose() * k[s].cross(ub[s]);
        for (int up = 0; up < 2; ++up) {
          if (up_weight[up] == 0.0) continue;
          const Eigen::Matrix<double, 1, kHdivDofs> tu = side[s].tangent.transpose() * V[up];
          local.block<kHdivDofs, kHdivDofs>(kHdivDofs * s, kHdivDofs * up).noalias() += (w * up_weight[up]) * ws * tu;
        }
      }
    }
    assembler_.scatter(nc + f, local);
  }
}

}  // namespace msw
