#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace msw {

using Point = Eigen::Vector3d;

enum class MeshKind { Sphere, PlanarPeriodic };

/// Interior facet shared by two cells. The "+" side is always the lower cell
/// index. Local edge i of a cell is opposite local vertex i and runs from
/// vertex (i+1)%3 to vertex (i+2)%3.
struct Facet {
  int cell_plus;
  int edge_plus;
  int cell_minus;
  int edge_minus;
};

/// Triangulation of the sphere or of a doubly periodic rectangle.
///
/// Cell vertex orderings are counter-clockwise seen from outside the sphere
/// (or from +z on the plane). Planar periodic cells keep per-corner shifts so
/// that corner() returns unwrapped coordinates.
class Mesh {
 public:
  MeshKind kind() const { return kind_; }
  double radius() const { return radius_; }
  /// Refinement level for sphere meshes, -1 for planar meshes.
  int level() const { return level_; }
  double period_x() const { return period_x_; }
  double period_y() const { return period_y_; }

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_cells() const { return static_cast<int>(cells_.size()); }
  int num_facets() const { return static_cast<int>(facets_.size()); }

  const std::vector<Point>& vertices() const { return vertices_; }
  const std::vector<std::array<int, 3>>& cells() const { return cells_; }
  const std::vector<Facet>& facets() const { return facets_; }

  int cell_facet(int cell, int edge) const { return cell_facets_[cell][edge]; }
  Point corner(int cell, int k) const;

  /// Cells touching each vertex, in increasing cell order.
  const std::vector<std::vector<int>>& vertex_cells() const { return vertex_cells_; }

  /// FNV-1a hash over kind, vertex coordinates and connectivity.
  std::uint64_t hash() const;

 private:
  friend Mesh build_icosahedral_sphere(int, double, int);
  friend Mesh build_planar_periodic(int, int, double, double);
  void finalize();

  MeshKind kind_ = MeshKind::Sphere;
  double radius_ = 0.0;
  int level_ = -1;
  double period_x_ = 0.0;
  double period_y_ = 0.0;
  std::vector<Point> vertices_;
  std::vector<std::array<int, 3>> cells_;
  std::vector<std::array<Point, 3>> cell_shifts_;
  std::vector<std::array<std::int64_t, 3>> edge_keys_;
  std::vector<Facet> facets_;
  std::vector<std::array<int, 3>> cell_facets_;
  std::vector<std::vector<int>> vertex_cells_;
};

constexpr int kDefaultMaxLevel = 8;

Mesh build_icosahedral_sphere(int level, double radius, int max_level = kDefaultMaxLevel);
Mesh build_planar_periodic(int nx, int ny, double lx, double ly);

/// Longitude in (-pi, pi] and latitude in [-pi/2, pi/2]; longitude is 0 at the poles.
std::pair<double, double> lonlat_of(const Point& p);

/// Plain-text dump with VERTICES / CELLS sections.
void write_mesh_dump(const Mesh& mesh, const std::filesystem::path& path);

}  // namespace msw
