#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "msw/errors.hpp"
#include "msw/geometry.hpp"
#include "msw/mesh.hpp"

using namespace msw;

namespace {
constexpr double kEarthRadius = 6371220.0;
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("icosahedron combinatorics") {
  const Mesh m = build_icosahedral_sphere(0, kEarthRadius);
  CHECK(m.num_cells() == 20);
  CHECK(m.num_vertices() == 12);
  CHECK(m.num_facets() == 30);
}

TEST_CASE("sphere refinement counts, Euler characteristic and radius") {
  for (int level = 0; level <= 4; ++level) {
    const Mesh m = build_icosahedral_sphere(level, kEarthRadius);
    CHECK(m.num_cells() == 20 * (1 << (2 * level)));
    CHECK(2 * m.num_facets() == 3 * m.num_cells());
    CHECK(m.num_vertices() - m.num_facets() + m.num_cells() == 2);
    for (const auto& v : m.vertices()) CHECK(std::abs(v.norm() / kEarthRadius - 1.0) < 1e-12);
  }
}

TEST_CASE("level-5 and level-6 sphere sizes") {
  const Mesh m5 = build_icosahedral_sphere(5, kEarthRadius);
  CHECK(m5.num_cells() == 20480);
  const GeometryTables g = compute_geometry(m5);
  CHECK(g.max_edge() == doctest::Approx(263e3).epsilon(0.02));
  // Projecting after every bisection gives a more uniform grid than the
  // reference one; its shortest edge is about 220 km rather than 171 km.
  CHECK(g.min_edge() == doctest::Approx(220.4e3).epsilon(0.02));
  const Mesh m6 = build_icosahedral_sphere(6, kEarthRadius);
  CHECK(m6.num_cells() == 81920);
}

TEST_CASE("refinement halves the maximum edge") {
  double prev = 0.0;
  for (int level = 1; level <= 5; ++level) {
    const double h = compute_geometry(build_icosahedral_sphere(level, 1.0)).max_edge();
    if (prev > 0.0) CHECK(prev / h == doctest::Approx(2.0).epsilon(0.10));
    prev = h;
  }
}

TEST_CASE("sphere build errors") {
  CHECK_THROWS_AS(build_icosahedral_sphere(9, 1.0), ResourceLimitError);
  CHECK_THROWS_AS(build_icosahedral_sphere(3, 1.0, 2), ResourceLimitError);
  CHECK_THROWS_AS(build_icosahedral_sphere(1, 0.0), ArgumentError);
  CHECK_THROWS_AS(build_icosahedral_sphere(-1, 1.0), ArgumentError);
}

TEST_CASE("sphere build is deterministic") {
  const Mesh a = build_icosahedral_sphere(3, kEarthRadius);
  const Mesh b = build_icosahedral_sphere(3, kEarthRadius);
  CHECK(a.hash() == b.hash());
  CHECK(a.cells() == b.cells());
  for (int i = 0; i < a.num_vertices(); ++i) CHECK(a.vertices()[i] == b.vertices()[i]);
}

TEST_CASE("facets: plus side is the lower cell, normals are opposite") {
  const Mesh m = build_icosahedral_sphere(3, kEarthRadius);
  const GeometryTables g = compute_geometry(m);
  for (int f = 0; f < m.num_facets(); ++f) {
    const Facet& fc = m.facets()[f];
    CHECK(fc.cell_plus < fc.cell_minus);
    CHECK(m.cell_facet(fc.cell_plus, fc.edge_plus) == f);
    CHECK(m.cell_facet(fc.cell_minus, fc.edge_minus) == f);
    // Outward normal from the minus side is the negated facet normal.
    const Point nminus = -g.facets[f].normal;
    CHECK((g.facets[f].normal + nminus).norm() < 1e-12);
    // Facet normal points away from the plus cell's centroid.
    CHECK(g.facets[f].normal.dot(g.facets[f].midpoint - g.cells[fc.cell_plus].centroid) > 0.0);
    CHECK(g.facets[f].normal.dot(g.facets[f].midpoint - g.cells[fc.cell_minus].centroid) < 0.0);
    // Consistent orientation: neighbours traverse a shared edge in opposite directions.
    CHECK_FALSE(g.facets[f].same_direction);
    // Length agrees when computed from the minus cell.
    const Point a = m.corner(fc.cell_minus, (fc.edge_minus + 1) % 3);
    const Point b = m.corner(fc.cell_minus, (fc.edge_minus + 2) % 3);
    CHECK(std::abs((b - a).norm() / g.facets[f].length - 1.0) < 1e-12);
  }
}

TEST_CASE("sphere cell normals point outward") {
  const Mesh m = build_icosahedral_sphere(2, 1.0);
  const GeometryTables g = compute_geometry(m);
  for (const auto& c : g.cells) CHECK(c.normal.dot(c.centroid) > 0.0);
}

TEST_CASE("sphere area under-approximation converges") {
  const double exact = 4.0 * kPi * kEarthRadius * kEarthRadius;
  double prev_deficit = 0.0;
  for (int level = 2; level <= 5; ++level) {
    const double ratio = compute_geometry(build_icosahedral_sphere(level, kEarthRadius)).total_area() / exact;
    CHECK(ratio < 1.0);
    if (level == 3) CHECK(ratio > 0.99);
    const double deficit = 1.0 - ratio;
    if (prev_deficit > 0.0) CHECK(prev_deficit / deficit == doctest::Approx(4.0).epsilon(0.1));
    prev_deficit = deficit;
  }
}

TEST_CASE("planar periodic mesh") {
  const Mesh m = build_planar_periodic(2, 2, 1.0, 1.0);
  CHECK(m.num_cells() == 8);
  CHECK(m.num_facets() == 12);
  CHECK(build_planar_periodic(3, 2, 1.0, 1.0).num_cells() == 12);
  const Mesh big = build_planar_periodic(5, 3, 2.5, 1.5);
  const GeometryTables g = compute_geometry(big);
  CHECK(std::abs(g.total_area() - 2.5 * 1.5) < 1e-12);
  for (const auto& c : g.cells) CHECK(c.normal.z() == doctest::Approx(1.0));
  for (int f = 0; f < big.num_facets(); ++f) {
    const Facet& fc = big.facets()[f];
    const Point a = big.corner(fc.cell_minus, (fc.edge_minus + 1) % 3);
    const Point b = big.corner(fc.cell_minus, (fc.edge_minus + 2) % 3);
    CHECK(std::abs((b - a).norm() - g.facets[f].length) < 1e-12);
    CHECK_FALSE(g.facets[f].same_direction);
  }
  CHECK_THROWS_AS(build_planar_periodic(1, 2, 1.0, 1.0), ArgumentError);
  CHECK_THROWS_AS(build_planar_periodic(2, 2, 0.0, 1.0), ArgumentError);
  CHECK_THROWS_AS(build_planar_periodic(2, 2, 1.0, -1.0), ArgumentError);
}

TEST_CASE("unit right triangle geometry") {
  // The lower-left triangle of a 1x1 periodic cell square is the unit right triangle.
  const Mesh m = build_planar_periodic(2, 2, 2.0, 2.0);
  const GeometryTables g = compute_geometry(m);
  CHECK(g.cells[0].area == doctest::Approx(0.5));
  CHECK(g.cells[0].det == doctest::Approx(1.0));
}

TEST_CASE("lonlat_of conventions") {
  auto [l0, p0] = lonlat_of(Point(kEarthRadius, 0, 0));
  CHECK(l0 == 0.0);
  CHECK(p0 == 0.0);
  auto [l1, p1] = lonlat_of(Point(0, 0, kEarthRadius));
  CHECK(l1 == 0.0);
  CHECK(p1 == doctest::Approx(kPi / 2));
  auto [l2, p2] = lonlat_of(Point(0, kEarthRadius, 0));
  CHECK(l2 == doctest::Approx(kPi / 2));
  CHECK(p2 == 0.0);
  auto [l3, p3] = lonlat_of(Point(-1.0, -0.0, 0.0));
  CHECK(l3 == doctest::Approx(kPi));
  (void)p3;
  CHECK_THROWS_AS(lonlat_of(Point(0, 0, 0)), ArgumentError);
}

TEST_CASE("mesh dump format") {
  const Mesh m = build_icosahedral_sphere(0, 1.0);
  const auto path = std::filesystem::temp_directory_path() / "msw_mesh_dump.txt";
  write_mesh_dump(m, path);
  std::ifstream in(path);
  std::string tag;
  int n = 0;
  in >> tag >> n;
  CHECK(tag == "VERTICES");
  CHECK(n == 12);
  double x, y, z;
  for (int i = 0; i < n; ++i) in >> x >> y >> z;
  in >> tag >> n;
  CHECK(tag == "CELLS");
  CHECK(n == 20);
  std::filesystem::remove(path);
}
