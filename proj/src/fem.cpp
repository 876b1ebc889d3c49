#include "msw/fem.hpp"

#include <fmt/format.h>

#include "msw/errors.hpp"

namespace msw {

FunctionSpace::FunctionSpace(const Mesh& mesh, const GeometryTables& geometry, SpaceKind kind)
    : mesh_(&mesh), kind_(kind) {
  const int nc = mesh.num_cells();
  if (kind == SpaceKind::DGLinear) {
    per_cell_ = kDgDofs;
    num_dofs_ = kDgDofs * nc;
    dofs_.resize(num_dofs_);
    signs_.assign(num_dofs_, 1.0);
    for (int i = 0; i < num_dofs_; ++i) dofs_[i] = i;
    return;
  }
  per_cell_ = kHdivDofs;
  const int nf = mesh.num_facets();
  num_dofs_ = 3 * nf + 3 * nc;
  dofs_.resize(static_cast<std::size_t>(kHdivDofs) * nc);
  signs_.resize(dofs_.size());
  for (int c = 0; c < nc; ++c) {
    int* d = &dofs_[kHdivDofs * c];
    double* s = &signs_[kHdivDofs * c];
    for (int e = 0; e < 3; ++e) {
      const int f = mesh.cell_facet(c, e);
      const Facet& fc = mesh.facets()[f];
      const bool plus = fc.cell_plus == c && fc.edge_plus == e;
      const double dir = geometry.facets[f].same_direction ? 1.0 : -1.0;
      for (int k = 0; k < 3; ++k) {
        d[3 * e + k] = 3 * f + k;
        s[3 * e + k] = plus ? 1.0 : -std::pow(dir, k);
      }
    }
    for (int j = 0; j < 3; ++j) {
      d[9 + j] = 3 * nf + 3 * c + j;
      s[9 + j] = 1.0;
    }
  }
}

Field::Field(const FunctionSpace& s, Eigen::VectorXd v) : space(&s), values(std::move(v)) {
  if (values.size() != s.num_dofs()) {
    throw ArgumentError(fmt::format("field has {} coefficients, space has {} dofs", values.size(), s.num_dofs()));
  }
}

Discretisation::Discretisation(Mesh mesh, int cell_degree, int facet_degree)
    : mesh_(std::move(mesh)),
      geometry_(compute_geometry(mesh_)),
      cell_rule_(triangle_rule(cell_degree)),
      facet_rule_(gauss_legendre(facet_degree)) {
  if (cell_degree < 4) throw ArgumentError("cell quadrature degree must be at least 4");
  if (facet_degree < 4) throw ArgumentError("facet quadrature degree must be at least 4");
  hdiv_ = std::make_unique<FunctionSpace>(mesh_, geometry_, SpaceKind::HdivQuadratic);
  dg_ = std::make_unique<FunctionSpace>(mesh_, geometry_, SpaceKind::DGLinear);
  hdiv_table_ = tabulate_basis(SpaceKind::HdivQuadratic, cell_rule_);
  dg_table_ = tabulate_basis(SpaceKind::DGLinear, cell_rule_);
  for (int e = 0; e < 3; ++e) {
    for (int r = 0; r < 2; ++r) {
      std::vector<Eigen::Vector2d> pts;
      for (double s : facet_rule_.points) pts.push_back(reference_edge_point(e, r ? 1.0 - s : s));
      hdiv_facet_[e][r] = tabulate_basis_at(SpaceKind::HdivQuadratic, pts);
      dg_facet_[e][r] = tabulate_basis_at(SpaceKind::DGLinear, pts);
    }
  }
}

Vec3 Discretisation::cell_point(int cell, int q) const {
  const auto& p = cell_rule_.points[q];
  return geometry_.cells[cell].map(p.x(), p.y());
}

Vec3 Discretisation::facet_point(int facet, int q) const {
  const Facet& fc = mesh_.facets()[facet];
  const Eigen::Vector2d xi = reference_edge_point(fc.edge_plus, facet_rule_.points[q]);
  return geometry_.cells[fc.cell_plus].map(xi.x(), xi.y());
}

FacetSide Discretisation::facet_side(int facet, int side) const {
  const Facet& fc = mesh_.facets()[facet];
  const FacetGeometry& fg = geometry_.facets[facet];
  FacetSide s;
  if (side == 0) {
    s.cell = fc.cell_plus;
    s.edge = fc.edge_plus;
    s.reversed = false;
    s.tangent = fg.tangent;
  } else {
    s.cell = fc.cell_minus;
    s.edge = fc.edge_minus;
    s.reversed = !fg.same_direction;
    s.tangent = fg.same_direction ? Vec3(fg.tangent) : Vec3(-fg.tangent);
  }
  s.normal = s.tangent.cross(geometry_.cells[s.cell].normal).normalized();
  return s;
}

void Discretisation::eval_hdiv_cell(int cell, HdivCellEval& out, bool with_grads) const {
  const CellGeometry& g = geometry_.cells[cell];
  const double* sg = hdiv_->cell_signs(cell);
  const int nq = cell_rule_.size();
  out.values.resize(nq);
  out.divs.resize(nq);
  if (with_grads) out.grads.resize(nq);
  const double inv_det = 1.0 / g.det;
  for (int q = 0; q < nq; ++q) {
    out.values[q].noalias() = (g.jacobian * hdiv_table_.values[q]) * inv_det;
    out.divs[q] = hdiv_table_.divergence[q] * inv_det;
    for (int i = 0; i < kHdivDofs; ++i) {
      out.values[q].col(i) *= sg[i];
      out.divs[q](i) *= sg[i];
    }
    if (with_grads) {
      for (int i = 0; i < kHdivDofs; ++i) {
        out.grads[q][i].noalias() = (sg[i] * inv_det) * (g.jacobian * hdiv_table_.hdiv_gradients[q][i] * g.pinv);
      }
    }
  }
}

Eigen::Matrix<double, 3, kHdivDofs> Discretisation::hdiv_facet_values(const FacetSide& side, int q) const {
  const CellGeometry& g = geometry_.cells[side.cell];
  const double* sg = hdiv_->cell_signs(side.cell);
  Eigen::Matrix<double, 3, kHdivDofs> v = (g.jacobian * hdiv_facet_[side.edge][side.reversed].values[q]) / g.det;
  for (int i = 0; i < kHdivDofs; ++i) v.col(i) *= sg[i];
  return v;
}

Eigen::Matrix3d Discretisation::dg_gradients(int cell) const {
  return geometry_.cells[cell].pinv.transpose() * DgReference::gradients();
}

Eigen::Matrix<double, kHdivDofs, 1> Discretisation::local_hdiv(const Field& u, int cell) const {
  const int* d = hdiv_->cell_dofs(cell);
  Eigen::Matrix<double, kHdivDofs, 1> c;
  for (int i = 0; i < kHdivDofs; ++i) c(i) = u.values(d[i]);
  return c;
}

Vec3 Discretisation::eval_vector(const Field& u, int cell, const Eigen::Vector2d& xi) const {
  Eigen::Matrix<double, 2, kHdivDofs> v;
  Eigen::Matrix<double, 1, kHdivDofs> dv;
  bdm_element().evaluate(xi, v, dv);
  const CellGeometry& g = geometry_.cells[cell];
  const double* s = hdiv_->cell_signs(cell);
  Eigen::Matrix<double, kHdivDofs, 1> c = local_hdiv(u, cell);
  for (int i = 0; i < kHdivDofs; ++i) c(i) *= s[i];
  return g.jacobian * (v * c) / g.det;
}

double Discretisation::eval_scalar(const Field& q, int cell, const Eigen::Vector2d& xi) const {
  return DgReference::values(xi).dot(local_dg(q, cell));
}

Eigen::Matrix3d Discretisation::dg_mass_inverse(int cell) const {
  const double a = geometry_.cells[cell].area;
  Eigen::Matrix3d m = Eigen::Matrix3d::Constant(-3.0 / a);
  m.diagonal().setConstant(9.0 / a);
  return m;
}

}  // namespace msw
