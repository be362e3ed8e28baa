#pragma once

#include <array>
#include <vector>

namespace dpg {

/// Interval rule on [0, 1].
struct IntervalRule {
  std::vector<double> points;
  std::vector<double> weights;
  int degree;  ///< polynomial exactness
};

/// Rule on the reference triangle {x, y >= 0, x + y <= 1}.
struct TriangleRule {
  std::vector<std::array<double, 2>> points;
  std::vector<double> weights;
  int degree;
};

inline constexpr int kMaxQuadratureDegree = 30;

/// n-point Gauss-Legendre on [0, 1]; no degree cap (used for adaptive loads).
IntervalRule gauss_legendre(int npoints);

/// Gauss-Legendre rule exact for degree <= d on [0, 1]. 0 <= d <= 30.
IntervalRule quad_interval(int d);

/// Collapsed (Duffy) tensor Gauss rule exact for total degree <= d on the
/// reference triangle. Weights are positive. 0 <= d <= 30.
TriangleRule quad_triangle(int d);

}  // namespace dpg
