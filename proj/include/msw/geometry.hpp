#pragma once

#include <vector>

#include <Eigen/Dense>

#include "msw/mesh.hpp"

namespace msw {

using Jacobian = Eigen::Matrix<double, 3, 2>;
using PseudoInverse = Eigen::Matrix<double, 2, 3>;

/// Affine map x = origin + jacobian * xi from the reference triangle
/// (0,0), (1,0), (0,1) onto a flat cell embedded in 3D.
struct CellGeometry {
  Point origin;
  Jacobian jacobian;
  PseudoInverse pinv;  // (J^T J)^{-1} J^T, maps in-plane vectors to reference coordinates
  double det = 0.0;    // |J_1 x J_2|, twice the area
  double area = 0.0;
  Point normal;  // unit normal, outward on the sphere
  Point centroid;
  double min_edge = 0.0;
  double max_edge = 0.0;

  Point map(double xi, double eta) const { return origin + jacobian * Eigen::Vector2d(xi, eta); }
};

struct FacetGeometry {
  double length = 0.0;
  Point normal;   // unit, pointing out of the "+" cell; the "-" side uses -normal
  Point tangent;  // unit, along the "+" cell's local edge direction
  Point midpoint;
  bool same_direction = false;  // "-" cell traverses the edge in the "+" direction
};

struct GeometryTables {
  std::vector<CellGeometry> cells;
  std::vector<FacetGeometry> facets;

  double total_area() const;
  double min_edge() const;
  double max_edge() const;
};

/// Cells are flat triangles; throws MeshQualityError for degenerate cells.
GeometryTables compute_geometry(const Mesh& mesh);

}  // namespace msw
