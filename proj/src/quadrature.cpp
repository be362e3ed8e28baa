#include "dpg/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "dpg/errors.hpp"

namespace dpg {

IntervalRule gauss_legendre(int npoints) {
  if (npoints < 1) throw UnsupportedDegree("gauss_legendre: need at least one point");
  const int n = npoints;
  IntervalRule rule{std::vector<double>(static_cast<std::size_t>(n)),
                    std::vector<double>(static_cast<std::size_t>(n)), 2 * n - 1};
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      // p1 = P_n(x), p0 = P_{n-1}(x)
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      if (n == 1) dp = 1.0;
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n == 1 ? 1.0 : n * (x * p1 - p0) / (x * x - 1.0);
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    // Map [-1,1] -> [0,1]; x is descending in i, so fill symmetric slots.
    const auto lo = static_cast<std::size_t>(i);
    const auto hi = static_cast<std::size_t>(n - 1 - i);
    rule.points[lo] = 0.5 * (1.0 - x);
    rule.points[hi] = 0.5 * (1.0 + x);
    rule.weights[lo] = 0.5 * w;
    rule.weights[hi] = 0.5 * w;
  }
  return rule;
}

IntervalRule quad_interval(int d) {
  if (d < 0 || d > kMaxQuadratureDegree)
    throw UnsupportedDegree("quad_interval: unsupported degree " + std::to_string(d));
  IntervalRule r = gauss_legendre(d / 2 + 1);
  return r;
}

TriangleRule quad_triangle(int d) {
  if (d < 0 || d > kMaxQuadratureDegree)
    throw UnsupportedDegree("quad_triangle: unsupported degree " + std::to_string(d));
  // x = u, y = v (1 - u), Jacobian (1 - u): degree d + 1 in u, d in v.
  const IntervalRule ru = gauss_legendre((d + 1) / 2 + 1);
  const IntervalRule rv = gauss_legendre(d / 2 + 1);
  TriangleRule rule;
  rule.degree = d;
  for (std::size_t i = 0; i < ru.points.size(); ++i) {
    const double u = ru.points[i];
    for (std::size_t j = 0; j < rv.points.size(); ++j) {
      const double v = rv.points[j];
      rule.points.push_back({u, v * (1.0 - u)});
      rule.weights.push_back(ru.weights[i] * rv.weights[j] * (1.0 - u));
    }
  }
  return rule;
}

}  // namespace dpg
