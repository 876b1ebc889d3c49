#include "msw/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <numbers>
#include <tuple>

#include <fmt/format.h>

#include "msw/errors.hpp"

namespace msw {

namespace {

constexpr std::array<std::array<int, 3>, 20> kIcosahedronFaces = {{
    {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
    {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
    {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
    {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1},
}};

std::vector<Point> icosahedron_vertices(double radius) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Point> v = {
      {-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
      {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1},
  };
  for (auto& p : v) p = radius * p.normalized();
  return v;
}

std::int64_t pair_key(int a, int b, std::int64_t n) {
  const auto lo = static_cast<std::int64_t>(std::min(a, b));
  const auto hi = static_cast<std::int64_t>(std::max(a, b));
  return lo * n + hi;
}

template <typename T>
void hash_bytes(std::uint64_t& h, const T& value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
}

}  // namespace

Point Mesh::corner(int cell, int k) const {
  const Point& v = vertices_[cells_[cell][k]];
  if (kind_ == MeshKind::Sphere) return v;
  return v + cell_shifts_[cell][k];
}

std::uint64_t Mesh::hash() const {
  std::uint64_t h = 14695981039346656037ULL;
  hash_bytes(h, static_cast<int>(kind_));
  hash_bytes(h, radius_);
  hash_bytes(h, period_x_);
  hash_bytes(h, period_y_);
  for (const auto& p : vertices_) {
    for (int d = 0; d < 3; ++d) hash_bytes(h, p[d]);
  }
  for (const auto& c : cells_) {
    for (int k = 0; k < 3; ++k) hash_bytes(h, c[k]);
  }
  return h;
}

void Mesh::finalize() {
  struct EdgeRef {
    std::int64_t key;
    int cell;
    int edge;
  };
  std::vector<EdgeRef> refs;
  refs.reserve(cells_.size() * 3);
  for (int c = 0; c < num_cells(); ++c) {
    for (int e = 0; e < 3; ++e) refs.push_back({edge_keys_[c][e], c, e});
  }
  std::sort(refs.begin(), refs.end(), [](const EdgeRef& a, const EdgeRef& b) {
    return std::tie(a.key, a.cell, a.edge) < std::tie(b.key, b.cell, b.edge);
  });

  facets_.clear();
  for (std::size_t i = 0; i < refs.size();) {
    if (i + 1 >= refs.size() || refs[i + 1].key != refs[i].key ||
        (i + 2 < refs.size() && refs[i + 2].key == refs[i].key)) {
      throw MeshQualityError(
          fmt::format("edge of cell {} is not shared by exactly two cells", refs[i].cell));
    }
    facets_.push_back({refs[i].cell, refs[i].edge, refs[i + 1].cell, refs[i + 1].edge});
    i += 2;
  }
  std::sort(facets_.begin(), facets_.end(), [](const Facet& a, const Facet& b) {
    return std::tie(a.cell_plus, a.edge_plus) < std::tie(b.cell_plus, b.edge_plus);
  });

  cell_facets_.assign(cells_.size(), {-1, -1, -1});
  for (int f = 0; f < num_facets(); ++f) {
    cell_facets_[facets_[f].cell_plus][facets_[f].edge_plus] = f;
    cell_facets_[facets_[f].cell_minus][facets_[f].edge_minus] = f;
  }

  vertex_cells_.assign(vertices_.size(), {});
  for (int c = 0; c < num_cells(); ++c) {
    for (int k = 0; k < 3; ++k) vertex_cells_[cells_[c][k]].push_back(c);
  }
}

Mesh build_icosahedral_sphere(int level, double radius, int max_level) {
  if (level < 0) throw ArgumentError("refinement level must be nonnegative");
  if (!(radius > 0.0)) throw ArgumentError("sphere radius must be positive");
  if (level > max_level) {
    throw ResourceLimitError(
        fmt::format("refinement level {} exceeds the configured maximum {}", level, max_level));
  }

  std::vector<Point> vertices = icosahedron_vertices(radius);
  std::vector<std::array<int, 3>> cells(kIcosahedronFaces.begin(), kIcosahedronFaces.end());
  for (auto& c : cells) {
    const Point n = (vertices[c[1]] - vertices[c[0]]).cross(vertices[c[2]] - vertices[c[0]]);
    if (n.dot(vertices[c[0]]) < 0.0) std::swap(c[1], c[2]);
  }

  for (int l = 0; l < level; ++l) {
    std::map<std::pair<int, int>, int> midpoints;
    auto midpoint = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = midpoints.find(key);
      if (it != midpoints.end()) return it->second;
      const int id = static_cast<int>(vertices.size());
      vertices.push_back(radius * (vertices[a] + vertices[b]).normalized());
      midpoints.emplace(key, id);
      return id;
    };
    std::vector<std::array<int, 3>> refined;
    refined.reserve(cells.size() * 4);
    for (const auto& c : cells) {
      const int ab = midpoint(c[0], c[1]);
      const int bc = midpoint(c[1], c[2]);
      const int ca = midpoint(c[2], c[0]);
      refined.push_back({c[0], ab, ca});
      refined.push_back({ab, c[1], bc});
      refined.push_back({ca, bc, c[2]});
      refined.push_back({ab, bc, ca});
    }
    cells = std::move(refined);
  }

  Mesh mesh;
  mesh.kind_ = MeshKind::Sphere;
  mesh.radius_ = radius;
  mesh.level_ = level;
  mesh.vertices_ = std::move(vertices);
  mesh.cells_ = std::move(cells);
  const auto n = static_cast<std::int64_t>(mesh.vertices_.size());
  mesh.edge_keys_.resize(mesh.cells_.size());
  for (std::size_t c = 0; c < mesh.cells_.size(); ++c) {
    const auto& v = mesh.cells_[c];
    for (int e = 0; e < 3; ++e) mesh.edge_keys_[c][e] = pair_key(v[(e + 1) % 3], v[(e + 2) % 3], n);
  }
  mesh.finalize();
  return mesh;
}

Mesh build_planar_periodic(int nx, int ny, double lx, double ly) {
  if (nx < 2 || ny < 2) throw ArgumentError("planar mesh needs nx, ny >= 2");
  if (!(lx > 0.0) || !(ly > 0.0)) throw ArgumentError("planar mesh needs positive extents");

  Mesh mesh;
  mesh.kind_ = MeshKind::PlanarPeriodic;
  mesh.period_x_ = lx;
  mesh.period_y_ = ly;
  const double dx = lx / nx;
  const double dy = ly / ny;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) mesh.vertices_.emplace_back(i * dx, j * dy, 0.0);
  }

  using Lattice = std::array<int, 2>;
  auto add_cell = [&](const std::array<Lattice, 3>& corners) {
    std::array<int, 3> ids{};
    std::array<Point, 3> shifts;
    for (int k = 0; k < 3; ++k) {
      const int wi = corners[k][0] / nx;
      const int wj = corners[k][1] / ny;
      ids[k] = (corners[k][1] % ny) * nx + corners[k][0] % nx;
      shifts[k] = Point(wi * lx, wj * ly, 0.0);
    }
    std::array<std::int64_t, 3> keys{};
    for (int e = 0; e < 3; ++e) {
      const Lattice& a = corners[(e + 1) % 3];
      const Lattice& b = corners[(e + 2) % 3];
      const std::int64_t mx = (a[0] + b[0]) % (2 * nx);
      const std::int64_t my = (a[1] + b[1]) % (2 * ny);
      keys[e] = mx * (2 * ny) + my;
    }
    mesh.cells_.push_back(ids);
    mesh.cell_shifts_.push_back(shifts);
    mesh.edge_keys_.push_back(keys);
  };
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      add_cell({Lattice{i, j}, Lattice{i + 1, j}, Lattice{i + 1, j + 1}});
      add_cell({Lattice{i, j}, Lattice{i + 1, j + 1}, Lattice{i, j + 1}});
    }
  }
  mesh.finalize();
  return mesh;
}

std::pair<double, double> lonlat_of(const Point& p) {
  const double r = p.norm();
  if (!(r > 0.0)) throw ArgumentError("lonlat_of: zero vector has no direction");
  const double rho = std::hypot(p.x(), p.y());
  const double lat = std::atan2(p.z(), rho);
  if (rho == 0.0) return {0.0, lat};
  double lon = std::atan2(p.y(), p.x());
  if (lon <= -std::numbers::pi) lon = std::numbers::pi;
  return {lon, lat};
}

void write_mesh_dump(const Mesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError(fmt::format("cannot open mesh dump '{}' for writing", path.string()));
  out << "VERTICES " << mesh.num_vertices() << '\n';
  for (const auto& v : mesh.vertices()) out << fmt::format("{} {} {}\n", v.x(), v.y(), v.z());
  out << "CELLS " << mesh.num_cells() << '\n';
  for (const auto& c : mesh.cells()) out << fmt::format("{} {} {}\n", c[0], c[1], c[2]);
  if (!out) throw IoError(fmt::format("failed writing mesh dump '{}'", path.string()));
}

}  // namespace msw
