#pragma once

#include <array>
#include <vector>

#include <Eigen/Dense>

#include "msw/quadrature.hpp"

namespace msw {

enum class SpaceKind { HdivQuadratic, DGLinear };

constexpr int kHdivDofs = 12;
constexpr int kDgDofs = 3;

/// Reference vertices (0,0), (1,0), (0,1). Edge e is opposite vertex e and
/// runs from vertex (e+1)%3 to vertex (e+2)%3.
Eigen::Vector2d reference_vertex(int v);
Eigen::Vector2d reference_edge_point(int edge, double s);
/// Outward edge normal scaled by the edge length.
Eigen::Vector2d reference_edge_normal(int edge);

/// Shifted Legendre polynomial of degree k on [0, 1].
double shifted_legendre(int k, double s);

/// Quadratic H(div) element. Dofs 3e+k are the normal moments on edge e
/// against shifted Legendre L_k; dofs 9..11 are interior moments against
/// (1,0), (0,1) and (-eta, xi).
class BdmElement {
 public:
  BdmElement();

  /// Values, divergence and reference gradient (d phi_i / d xi_j) at a point.
  void evaluate(const Eigen::Vector2d& xi, Eigen::Matrix<double, 2, kHdivDofs>& values,
                Eigen::Matrix<double, 1, kHdivDofs>& divs,
                std::array<Eigen::Matrix2d, kHdivDofs>* grads = nullptr) const;

  /// Applies every dof functional to every basis function by quadrature.
  Eigen::Matrix<double, kHdivDofs, kHdivDofs> duality_matrix() const;

 private:
  // Row m of coeffs_ multiplies monomial m; column i is basis function i.
  Eigen::Matrix<double, kHdivDofs, kHdivDofs> coeffs_;
};

const BdmElement& bdm_element();

struct DgReference {
  static Eigen::Vector3d values(const Eigen::Vector2d& xi) {
    return {1.0 - xi.x() - xi.y(), xi.x(), xi.y()};
  }
  /// Column i is the reference gradient of basis i.
  static Eigen::Matrix<double, 2, 3> gradients() {
    Eigen::Matrix<double, 2, 3> g;
    g << -1, 1, 0, -1, 0, 1;
    return g;
  }
};

/// Reference tabulation at the points of a rule.
struct BasisTable {
  SpaceKind kind;
  int num_points = 0;
  int num_basis = 0;
  std::vector<Eigen::MatrixXd> values;  // per point: (components x basis); DG has 1 component
  std::vector<Eigen::RowVectorXd> divergence;        // H(div) only
  std::vector<Eigen::MatrixXd> gradients;            // DG only: 2 x basis
  std::vector<std::array<Eigen::Matrix2d, kHdivDofs>> hdiv_gradients;  // H(div) only
};

/// Throws ArgumentError if the rule degree is below twice the space degree.
BasisTable tabulate_basis(SpaceKind kind, const TriangleRule& rule);

/// Tabulation at arbitrary reference points (no degree check).
BasisTable tabulate_basis_at(SpaceKind kind, const std::vector<Eigen::Vector2d>& points);

}  // namespace msw
