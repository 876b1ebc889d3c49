#include "msw/quadrature.hpp"

#include <array>

#include "msw/errors.hpp"

namespace msw {

IntervalRule gauss_legendre(int degree) {
  if (degree < 0) throw ArgumentError("quadrature degree must be nonnegative");
  const int n = degree / 2 + 1;
  // Golub-Welsch: nodes are eigenvalues of the Jacobi matrix on [-1, 1].
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) {
    const double b = i / std::sqrt(4.0 * i * i - 1.0);
    jac(i, i - 1) = b;
    jac(i - 1, i) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jac);
  IntervalRule rule;
  rule.degree = 2 * n - 1;
  for (int i = 0; i < n; ++i) {
    const double v0 = eig.eigenvectors()(0, i);
    rule.points.push_back(0.5 * (eig.eigenvalues()(i) + 1.0));
    rule.weights.push_back(v0 * v0);
  }
  return rule;
}

TriangleRule collapsed_triangle_rule(int degree) {
  if (degree < 0) throw ArgumentError("quadrature degree must be nonnegative");
  const IntervalRule g = gauss_legendre(degree + 1);
  TriangleRule rule;
  rule.degree = degree;
  for (int i = 0; i < g.size(); ++i) {
    for (int j = 0; j < g.size(); ++j) {
      const double u = g.points[i];
      const double v = g.points[j];
      rule.points.emplace_back(u, v * (1.0 - u));
      rule.weights.push_back(g.weights[i] * g.weights[j] * (1.0 - u));
    }
  }
  return rule;
}

TriangleRule triangle_rule(int degree) {
  if (degree < 0) throw ArgumentError("quadrature degree must be nonnegative");
  if (degree > 6) return collapsed_triangle_rule(degree);

  struct Orbit {
    double w;
    std::array<double, 3> bary;
  };
  // Dunavant (1985), degree 6.
  constexpr std::array<Orbit, 3> orbits = {{
      {0.116786275726379, {0.501426509658179, 0.249286745170910, 0.249286745170910}},
      {0.050844906370207, {0.873821971016996, 0.063089014491502, 0.063089014491502}},
      {0.082851075618374, {0.053145049844817, 0.310352451033784, 0.636502499121399}},
  }};
  TriangleRule rule;
  rule.degree = 6;
  for (const auto& o : orbits) {
    const auto& b = o.bary;
    std::vector<std::array<double, 3>> perms;
    if (b[1] == b[2]) {
      perms = {{b[0], b[1], b[2]}, {b[1], b[0], b[2]}, {b[1], b[2], b[0]}};
    } else {
      perms = {{b[0], b[1], b[2]}, {b[0], b[2], b[1]}, {b[1], b[0], b[2]},
               {b[1], b[2], b[0]}, {b[2], b[0], b[1]}, {b[2], b[1], b[0]}};
    }
    for (const auto& p : perms) {
      rule.points.emplace_back(p[1], p[2]);
      rule.weights.push_back(0.5 * o.w);
    }
  }
  return rule;
}

}  // namespace msw
