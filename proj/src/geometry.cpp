#include "msw/geometry.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "msw/errors.hpp"

namespace msw {

double GeometryTables::total_area() const {
  return std::accumulate(cells.begin(), cells.end(), 0.0,
                         [](double s, const CellGeometry& c) { return s + c.area; });
}

double GeometryTables::min_edge() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& c : cells) m = std::min(m, c.min_edge);
  return m;
}

double GeometryTables::max_edge() const {
  double m = 0.0;
  for (const auto& c : cells) m = std::max(m, c.max_edge);
  return m;
}

GeometryTables compute_geometry(const Mesh& mesh) {
  GeometryTables g;
  g.cells.resize(mesh.num_cells());
  for (int c = 0; c < mesh.num_cells(); ++c) {
    CellGeometry& cg = g.cells[c];
    const Point x0 = mesh.corner(c, 0);
    const Point x1 = mesh.corner(c, 1);
    const Point x2 = mesh.corner(c, 2);
    cg.origin = x0;
    cg.jacobian.col(0) = x1 - x0;
    cg.jacobian.col(1) = x2 - x0;
    const Point cross = cg.jacobian.col(0).cross(cg.jacobian.col(1));
    cg.det = cross.norm();
    cg.area = 0.5 * cg.det;
    cg.normal = cross / cg.det;
    const Eigen::Matrix2d gram = cg.jacobian.transpose() * cg.jacobian;
    cg.pinv = gram.inverse() * cg.jacobian.transpose();
    cg.centroid = (x0 + x1 + x2) / 3.0;
    const double e0 = (x2 - x1).norm();
    const double e1 = (x0 - x2).norm();
    const double e2 = (x1 - x0).norm();
    cg.min_edge = std::min({e0, e1, e2});
    cg.max_edge = std::max({e0, e1, e2});
  }

  const double mean_area = g.total_area() / std::max(1, mesh.num_cells());
  for (int c = 0; c < mesh.num_cells(); ++c) {
    if (!(g.cells[c].area >= 1e-12 * mean_area)) {
      throw MeshQualityError(fmt::format("cell {} is degenerate (area {:.3e})", c, g.cells[c].area));
    }
  }

  g.facets.resize(mesh.num_facets());
  for (int f = 0; f < mesh.num_facets(); ++f) {
    const Facet& fc = mesh.facets()[f];
    const int ep = fc.edge_plus;
    const Point a = mesh.corner(fc.cell_plus, (ep + 1) % 3);
    const Point b = mesh.corner(fc.cell_plus, (ep + 2) % 3);
    FacetGeometry& fg = g.facets[f];
    fg.length = (b - a).norm();
    fg.tangent = (b - a) / fg.length;
    fg.midpoint = 0.5 * (a + b);
    const Point k = g.cells[fc.cell_plus].normal + g.cells[fc.cell_minus].normal;
    fg.normal = fg.tangent.cross(k).normalized();
    const auto& cp = mesh.cells()[fc.cell_plus];
    const auto& cm = mesh.cells()[fc.cell_minus];
    fg.same_direction = cp[(ep + 1) % 3] == cm[(fc.edge_minus + 1) % 3];
  }
  return g;
}

}  // namespace msw
