#include "dpg/basis.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "dpg/errors.hpp"
#include "dpg/quadrature.hpp"

namespace dpg {

namespace {

// P_n(x) and P_n'(x) on [-1, 1].
std::pair<double, double> legendre_and_derivative(int n, double x) {
  double p0 = 1.0, p1 = x, d0 = 0.0, d1 = 1.0;
  if (n == 0) return {1.0, 0.0};
  for (int k = 1; k < n; ++k) {
    const double p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
    const double d2 = d0 + (2.0 * k + 1.0) * p1;
    p0 = p1;
    p1 = p2;
    d0 = d1;
    d1 = d2;
  }
  return {p1, d1};
}

}  // namespace

std::vector<double> gll_points(int p) {
  if (p < 0) throw InvalidArgument("gll_points: negative degree");
  if (p == 0) return {0.5};
  std::vector<double> x(static_cast<std::size_t>(p) + 1);
  x.front() = 0.0;
  x.back() = 1.0;
  for (int i = 1; i < p; ++i) {
    double s = -std::cos(std::numbers::pi * i / p);
    for (int it = 0; it < 100; ++it) {
      const auto [pn, dpn] = legendre_and_derivative(p, s);
      const double d2 = (2.0 * s * dpn - p * (p + 1.0) * pn) / (1.0 - s * s);
      const double ds = dpn / d2;
      s -= ds;
      if (std::abs(ds) < 1e-16) break;
    }
    x[static_cast<std::size_t>(i)] = 0.5 * (s + 1.0);
  }
  return x;
}

// ---------------------------------------------------------------------------

LagrangeIntervalBasis::LagrangeIntervalBasis(int p)
    : PolyBasis(ElementKind::Interval, p, static_cast<std::size_t>(p < 0 ? 0 : p + 1)) {
  if (p < 0) throw InvalidArgument("LagrangeIntervalBasis: negative degree");
  nodes_ = gll_points(p);
}

BasisValues LagrangeIntervalBasis::eval(double x, double) const {
  const std::size_t n = size();
  BasisValues out{Vector(n, 1.0), Vector(n, 0.0), {}};
  for (std::size_t i = 0; i < n; ++i) {
    double v = 1.0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) v *= (x - nodes_[j]) / (nodes_[i] - nodes_[j]);
    out.values[i] = v;
    double d = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      if (k == i) continue;
      double term = 1.0 / (nodes_[i] - nodes_[k]);
      for (std::size_t j = 0; j < n; ++j)
        if (j != i && j != k) term *= (x - nodes_[j]) / (nodes_[i] - nodes_[j]);
      d += term;
    }
    out.dx[i] = d;
  }
  return out;
}

LegendreEdgeBasis::LegendreEdgeBasis(int p)
    : PolyBasis(ElementKind::Edge, p, static_cast<std::size_t>(p < 0 ? 0 : p + 1)) {
  if (p < 0) throw InvalidArgument("LegendreEdgeBasis: negative degree");
}

BasisValues LegendreEdgeBasis::eval(double x, double) const {
  const std::size_t n = size();
  BasisValues out{Vector(n), Vector(n), {}};
  const double s = 2.0 * x - 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    const auto [pk, dk] = legendre_and_derivative(static_cast<int>(k), s);
    out.values[k] = pk;
    out.dx[k] = 2.0 * dk;
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

void centred_monomials(const std::vector<std::array<int, 2>>& ex, double x, double y, Vector& m,
                       Vector& mx, Vector& my) {
  const double s = x - 1.0 / 3.0;
  const double t = y - 1.0 / 3.0;
  const std::size_t n = ex.size();
  m.assign(n, 0.0);
  mx.assign(n, 0.0);
  my.assign(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const int i = ex[k][0], j = ex[k][1];
    m[k] = std::pow(s, i) * std::pow(t, j);
    mx[k] = i > 0 ? i * std::pow(s, i - 1) * std::pow(t, j) : 0.0;
    my[k] = j > 0 ? j * std::pow(s, i) * std::pow(t, j - 1) : 0.0;
  }
}

// Rows of the returned matrix are L⁻¹ for the Cholesky factor of `mass`.
DenseMat inverse_lower_factor(const DenseMat& mass) {
  const Cholesky chol(mass);
  const std::size_t n = mass.rows();
  DenseMat inv(n, n);
  for (std::size_t c = 0; c < n; ++c) {
    Vector e(n, 0.0);
    e[c] = 1.0;
    inv.set_col(c, chol.solve_lower(e));
  }
  return inv;
}

}  // namespace

OrthonormalTriangleBasis::OrthonormalTriangleBasis(int p)
    : PolyBasis(ElementKind::Triangle, p,
                static_cast<std::size_t>(p < 0 ? 0 : (p + 1) * (p + 2) / 2)) {
  if (p < 0) throw InvalidArgument("OrthonormalTriangleBasis: negative degree");
  if (2 * p > kMaxQuadratureDegree) throw UnsupportedDegree("OrthonormalTriangleBasis: degree too high");
  for (int d = 0; d <= p; ++d)
    for (int j = 0; j <= d; ++j) exponents_.push_back({d - j, j});
  const std::size_t n = size();
  const TriangleRule rule = quad_triangle(2 * p);

  coeff_ = DenseMat::identity(n);
  Vector m, mx, my;
  for (int pass = 0; pass < 2; ++pass) {
    DenseMat mass(n, n);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      centred_monomials(exponents_, rule.points[q][0], rule.points[q][1], m, mx, my);
      const Vector phi = coeff_ * m;
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) mass(a, b) += rule.weights[q] * phi[a] * phi[b];
    }
    // Symmetrize rounding noise before factorizing.
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = a + 1; b < n; ++b) mass(a, b) = mass(b, a) = 0.5 * (mass(a, b) + mass(b, a));
    coeff_ = inverse_lower_factor(mass) * coeff_;
  }
}

BasisValues OrthonormalTriangleBasis::eval(double x, double y) const {
  Vector m, mx, my;
  centred_monomials(exponents_, x, y, m, mx, my);
  return {coeff_ * m, coeff_ * mx, coeff_ * my};
}

LagrangeTriangleBasis::LagrangeTriangleBasis(int k)
    : PolyBasis(ElementKind::Triangle, k,
                static_cast<std::size_t>(k < 1 ? 0 : (k + 1) * (k + 2) / 2)),
      ortho_(k < 1 ? 0 : k) {
  if (k < 1) throw InvalidArgument("LagrangeTriangleBasis: degree must be at least 1");
  const double dk = k;
  const std::array<std::array<double, 2>, 3> v{{{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}}};
  for (const auto& vert : v) nodes_.push_back(vert);
  for (int e = 0; e < 3; ++e) {
    const auto& a = v[static_cast<std::size_t>((e + 1) % 3)];
    const auto& b = v[static_cast<std::size_t>((e + 2) % 3)];
    for (int i = 1; i < k; ++i)
      nodes_.push_back({a[0] + i / dk * (b[0] - a[0]), a[1] + i / dk * (b[1] - a[1])});
  }
  for (int j = 1; j < k; ++j)
    for (int i = 1; i + j < k; ++i) nodes_.push_back({i / dk, j / dk});

  const std::size_t n = size();
  DenseMat vdm(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto ev = ortho_.eval(nodes_[i][0], nodes_[i][1]);
    for (std::size_t j = 0; j < n; ++j) vdm(i, j) = ev.values[j];
  }
  const HouseholderQr qr(vdm);
  vcond_ = 1.0 / qr.diag_ratio();
  // ψ_i(node_l) = δ_il  ⇔  to_nodal = V⁻ᵀ.
  to_nodal_ = DenseMat(n, n);
  for (std::size_t c = 0; c < n; ++c) {
    Vector e(n, 0.0);
    e[c] = 1.0;
    const Vector col = qr.solve_r(qr.apply_qt(e));  // V⁻¹ e_c
    for (std::size_t j = 0; j < n; ++j) to_nodal_(c, j) = col[j];
  }
}

BasisValues LagrangeTriangleBasis::eval(double x, double y) const {
  const auto ev = ortho_.eval(x, y);
  return {to_nodal_ * ev.values, to_nodal_ * ev.dx, to_nodal_ * ev.dy};
}

std::unique_ptr<PolyBasis> interval_basis(int p) { return std::make_unique<LagrangeIntervalBasis>(p); }
std::unique_ptr<PolyBasis> edge_basis(int p) { return std::make_unique<LegendreEdgeBasis>(p); }
std::unique_ptr<PolyBasis> triangle_basis(int p) { return std::make_unique<OrthonormalTriangleBasis>(p); }

}  // namespace dpg
