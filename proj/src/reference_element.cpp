#include "msw/reference_element.hpp"

#include <fmt/format.h>

#include "msw/errors.hpp"

namespace msw {

namespace {

// Vector monomials: m < 6 is (p_m, 0), m >= 6 is (0, p_{m-6}) with
// p = {1, xi, eta, xi^2, xi*eta, eta^2}.
void scalar_monomials(const Eigen::Vector2d& x, double p[6], double dp[6][2]) {
  const double a = x.x(), b = x.y();
  p[0] = 1;     dp[0][0] = 0;     dp[0][1] = 0;
  p[1] = a;     dp[1][0] = 1;     dp[1][1] = 0;
  p[2] = b;     dp[2][0] = 0;     dp[2][1] = 1;
  p[3] = a * a; dp[3][0] = 2 * a; dp[3][1] = 0;
  p[4] = a * b; dp[4][0] = b;     dp[4][1] = a;
  p[5] = b * b; dp[5][0] = 0;     dp[5][1] = 2 * b;
}

Eigen::Matrix<double, 2, kHdivDofs> monomial_values(const Eigen::Vector2d& x) {
  double p[6], dp[6][2];
  scalar_monomials(x, p, dp);
  Eigen::Matrix<double, 2, kHdivDofs> v = Eigen::Matrix<double, 2, kHdivDofs>::Zero();
  for (int m = 0; m < 6; ++m) {
    v(0, m) = p[m];
    v(1, m + 6) = p[m];
  }
  return v;
}

// Dof functionals applied to a set of vector fields given by value callbacks.
template <typename Eval>
Eigen::Matrix<double, kHdivDofs, kHdivDofs> apply_dofs(Eval&& eval) {
  Eigen::Matrix<double, kHdivDofs, kHdivDofs> out = Eigen::Matrix<double, kHdivDofs, kHdivDofs>::Zero();
  const IntervalRule line = gauss_legendre(5);
  for (int e = 0; e < 3; ++e) {
    const Eigen::Vector2d n = reference_edge_normal(e);
    for (int q = 0; q < line.size(); ++q) {
      const double s = line.points[q];
      const Eigen::Matrix<double, 2, kHdivDofs> v = eval(reference_edge_point(e, s));
      const Eigen::Matrix<double, 1, kHdivDofs> flux = n.transpose() * v;
      for (int k = 0; k < 3; ++k) out.row(3 * e + k) += line.weights[q] * shifted_legendre(k, s) * flux;
    }
  }
  const TriangleRule tri = triangle_rule(6);
  for (int q = 0; q < tri.size(); ++q) {
    const Eigen::Vector2d& x = tri.points[q];
    const Eigen::Matrix<double, 2, kHdivDofs> v = eval(x);
    out.row(9) += tri.weights[q] * v.row(0);
    out.row(10) += tri.weights[q] * v.row(1);
    out.row(11) += tri.weights[q] * (-x.y() * v.row(0) + x.x() * v.row(1));
  }
  return out;
}

}  // namespace

Eigen::Vector2d reference_vertex(int v) {
  static const Eigen::Vector2d verts[3] = {{0, 0}, {1, 0}, {0, 1}};
  return verts[v];
}

Eigen::Vector2d reference_edge_point(int edge, double s) {
  const Eigen::Vector2d a = reference_vertex((edge + 1) % 3);
  const Eigen::Vector2d b = reference_vertex((edge + 2) % 3);
  return a + s * (b - a);
}

Eigen::Vector2d reference_edge_normal(int edge) {
  static const Eigen::Vector2d normals[3] = {{1, 1}, {-1, 0}, {0, -1}};
  return normals[edge];
}

double shifted_legendre(int k, double s) {
  switch (k) {
    case 0: return 1.0;
    case 1: return 2.0 * s - 1.0;
    case 2: return 6.0 * s * s - 6.0 * s + 1.0;
    default: throw ArgumentError(fmt::format("shifted Legendre degree {} not supported", k));
  }
}

BdmElement::BdmElement() {
  const Eigen::Matrix<double, kHdivDofs, kHdivDofs> v = apply_dofs(monomial_values);
  coeffs_ = v.fullPivLu().inverse();
}

void BdmElement::evaluate(const Eigen::Vector2d& xi, Eigen::Matrix<double, 2, kHdivDofs>& values,
                          Eigen::Matrix<double, 1, kHdivDofs>& divs,
                          std::array<Eigen::Matrix2d, kHdivDofs>* grads) const {
  double p[6], dp[6][2];
  scalar_monomials(xi, p, dp);
  values.setZero();
  divs.setZero();
  if (grads) {
    for (auto& g : *grads) g.setZero();
  }
  for (int m = 0; m < 6; ++m) {
    const auto cx = coeffs_.row(m);
    const auto cy = coeffs_.row(m + 6);
    values.row(0) += p[m] * cx;
    values.row(1) += p[m] * cy;
    divs += dp[m][0] * cx + dp[m][1] * cy;
    if (grads) {
      for (int i = 0; i < kHdivDofs; ++i) {
        (*grads)[i](0, 0) += dp[m][0] * cx(i);
        (*grads)[i](0, 1) += dp[m][1] * cx(i);
        (*grads)[i](1, 0) += dp[m][0] * cy(i);
        (*grads)[i](1, 1) += dp[m][1] * cy(i);
      }
    }
  }
}

Eigen::Matrix<double, kHdivDofs, kHdivDofs> BdmElement::duality_matrix() const {
  return apply_dofs([this](const Eigen::Vector2d& x) {
    Eigen::Matrix<double, 2, kHdivDofs> v;
    Eigen::Matrix<double, 1, kHdivDofs> d;
    evaluate(x, v, d);
    return v;
  });
}

const BdmElement& bdm_element() {
  static const BdmElement element;
  return element;
}

BasisTable tabulate_basis(SpaceKind kind, const TriangleRule& rule) {
  const int poly_degree = kind == SpaceKind::HdivQuadratic ? 2 : 1;
  if (rule.degree < 2 * poly_degree) {
    throw ArgumentError(fmt::format("quadrature degree {} is too low for a degree-{} space",
                                    rule.degree, poly_degree));
  }
  return tabulate_basis_at(kind, rule.points);
}

BasisTable tabulate_basis_at(SpaceKind kind, const std::vector<Eigen::Vector2d>& points) {
  BasisTable t;
  t.kind = kind;
  t.num_points = static_cast<int>(points.size());
  if (kind == SpaceKind::DGLinear) {
    t.num_basis = kDgDofs;
    for (const auto& x : points) {
      t.values.emplace_back(DgReference::values(x).transpose());
      t.gradients.emplace_back(DgReference::gradients());
    }
    return t;
  }
  t.num_basis = kHdivDofs;
  const BdmElement& el = bdm_element();
  for (const auto& x : points) {
    Eigen::Matrix<double, 2, kHdivDofs> v;
    Eigen::Matrix<double, 1, kHdivDofs> d;
    std::array<Eigen::Matrix2d, kHdivDofs> g;
    el.evaluate(x, v, d, &g);
    t.values.emplace_back(v);
    t.divergence.emplace_back(d);
    t.hdiv_gradients.push_back(g);
  }
  return t;
}

}  // namespace msw
