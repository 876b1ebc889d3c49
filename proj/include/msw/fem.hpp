#pragma once

#include <array>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "msw/geometry.hpp"
#include "msw/mesh.hpp"
#include "msw/quadrature.hpp"
#include "msw/reference_element.hpp"

namespace msw {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Global dof numbering. H(div) edge dofs are 3*facet + k; interior dofs
/// follow all edge dofs. The "-" cell sees edge moment k with sign
/// -(+-1)^k depending on whether it traverses the edge against the "+" cell.
class FunctionSpace {
 public:
  FunctionSpace(const Mesh& mesh, const GeometryTables& geometry, SpaceKind kind);

  SpaceKind kind() const { return kind_; }
  const Mesh& mesh() const { return *mesh_; }
  int num_dofs() const { return num_dofs_; }
  int dofs_per_cell() const { return per_cell_; }
  const int* cell_dofs(int cell) const { return &dofs_[per_cell_ * cell]; }
  const double* cell_signs(int cell) const { return &signs_[per_cell_ * cell]; }

 private:
  const Mesh* mesh_;
  SpaceKind kind_;
  int per_cell_;
  int num_dofs_;
  std::vector<int> dofs_;
  std::vector<double> signs_;
};

struct Field {
  const FunctionSpace* space = nullptr;
  Eigen::VectorXd values;

  Field() = default;
  explicit Field(const FunctionSpace& s) : space(&s), values(Eigen::VectorXd::Zero(s.num_dofs())) {}
  Field(const FunctionSpace& s, Eigen::VectorXd v);

  int size() const { return static_cast<int>(values.size()); }
  bool all_finite() const { return values.allFinite(); }
};

/// Mapped H(div) basis on one cell at the cell quadrature points (signs applied).
struct HdivCellEval {
  std::vector<Eigen::Matrix<double, 3, kHdivDofs>> values;
  std::vector<Eigen::Matrix<double, 1, kHdivDofs>> divs;
  std::vector<std::array<Mat3, kHdivDofs>> grads;  // filled on request
};

/// One side of a facet evaluated at the facet quadrature points.
struct FacetSide {
  int cell = -1;
  int edge = -1;
  bool reversed = false;  // reference parameter runs 1 - s
  Vec3 normal;            // in-plane outward normal of this cell
  Vec3 tangent;           // in-plane direction of this cell's local edge
};

/// Mesh, geometry, spaces, quadrature and reference tabulations in one place.
class Discretisation {
 public:
  explicit Discretisation(Mesh mesh, int cell_degree = 6, int facet_degree = 5);
  Discretisation(const Discretisation&) = delete;
  Discretisation& operator=(const Discretisation&) = delete;

  const Mesh& mesh() const { return mesh_; }
  const GeometryTables& geometry() const { return geometry_; }
  const FunctionSpace& hdiv() const { return *hdiv_; }
  const FunctionSpace& dg() const { return *dg_; }
  const TriangleRule& cell_rule() const { return cell_rule_; }
  const IntervalRule& facet_rule() const { return facet_rule_; }
  const BasisTable& hdiv_table() const { return hdiv_table_; }
  const BasisTable& dg_table() const { return dg_table_; }
  int num_cell_points() const { return cell_rule_.size(); }
  int num_facet_points() const { return facet_rule_.size(); }

  /// Reference tabulation on local edge e; reversed uses parameter 1 - s.
  const BasisTable& hdiv_facet_table(int edge, bool reversed) const { return hdiv_facet_[edge][reversed]; }
  const BasisTable& dg_facet_table(int edge, bool reversed) const { return dg_facet_[edge][reversed]; }

  /// Physical point of cell quadrature point q.
  Vec3 cell_point(int cell, int q) const;
  double cell_weight(int cell, int q) const { return cell_rule_.weights[q] * geometry_.cells[cell].det; }
  Vec3 facet_point(int facet, int q) const;
  double facet_weight(int facet, int q) const { return facet_rule_.weights[q] * geometry_.facets[facet].length; }
  FacetSide facet_side(int facet, int side) const;

  void eval_hdiv_cell(int cell, HdivCellEval& out, bool with_grads) const;
  /// Mapped H(div) basis values (signs applied) on one facet side at point q.
  Eigen::Matrix<double, 3, kHdivDofs> hdiv_facet_values(const FacetSide& side, int q) const;
  /// Physical gradients of the DG basis on a cell, column i for basis i.
  Eigen::Matrix3d dg_gradients(int cell) const;

  /// Field evaluation helpers.
  Vec3 eval_vector(const Field& u, int cell, const Eigen::Vector2d& xi) const;
  double eval_scalar(const Field& q, int cell, const Eigen::Vector2d& xi) const;
  /// Gathered global coefficients; pair with the signed basis values above.
  Eigen::Matrix<double, kHdivDofs, 1> local_hdiv(const Field& u, int cell) const;
  Eigen::Vector3d local_dg(const Field& q, int cell) const { return q.values.segment<3>(3 * cell); }

  /// Inverse of the DG mass block of a cell.
  Eigen::Matrix3d dg_mass_inverse(int cell) const;

  /// Lon-lat position, or planar (x, y) on periodic meshes.
  bool on_sphere() const { return mesh_.kind() == MeshKind::Sphere; }

 private:
  Mesh mesh_;
  GeometryTables geometry_;
  std::unique_ptr<FunctionSpace> hdiv_;
  std::unique_ptr<FunctionSpace> dg_;
  TriangleRule cell_rule_;
  IntervalRule facet_rule_;
  BasisTable hdiv_table_;
  BasisTable dg_table_;
  std::array<std::array<BasisTable, 2>, 3> hdiv_facet_;
  std::array<std::array<BasisTable, 2>, 3> dg_facet_;
};

}  // namespace msw
