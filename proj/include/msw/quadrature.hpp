#pragma once

#include <vector>

#include <Eigen/Dense>

namespace msw {

/// Rule on the reference triangle (0,0), (1,0), (0,1); weights sum to 1/2.
struct TriangleRule {
  std::vector<Eigen::Vector2d> points;
  std::vector<double> weights;
  int degree = 0;

  int size() const { return static_cast<int>(points.size()); }
};

/// Rule on [0, 1]; weights sum to 1.
struct IntervalRule {
  std::vector<double> points;
  std::vector<double> weights;
  int degree = 0;

  int size() const { return static_cast<int>(points.size()); }
};

/// Gauss-Legendre rule exact to the requested degree.
IntervalRule gauss_legendre(int degree);

/// Dunavant's 12-point rule for degree <= 6, collapsed Gauss product rules beyond.
TriangleRule triangle_rule(int degree);

/// Collapsed (Duffy) Gauss product rule; used for high-degree reference integrals.
TriangleRule collapsed_triangle_rule(int degree);

}  // namespace msw
