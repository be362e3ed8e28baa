#include "dpg/poisson2d.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dpg/engine.hpp"
#include "dpg/errors.hpp"

namespace dpg::poisson {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::array<Point2, 3> kRefVertex{{{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}}};

// Affine map data of one triangle: x = v0 + J ξ.
struct Affine {
  Point2 v0;
  double j00, j01, j10, j11, det;

  Point2 map(Point2 xi) const {
    return {v0[0] + j00 * xi[0] + j01 * xi[1], v0[1] + j10 * xi[0] + j11 * xi[1]};
  }
  // J⁻ᵀ ĝ
  Point2 grad(double gx, double gy) const {
    return {(j11 * gx - j10 * gy) / det, (-j01 * gx + j00 * gy) / det};
  }
};

Affine affine(const TriMesh& mesh, std::size_t t) {
  const auto& tri = mesh.triangles[t];
  const Point2 a = mesh.vertices[tri[0]], b = mesh.vertices[tri[1]], c = mesh.vertices[tri[2]];
  Affine m{a, b[0] - a[0], c[0] - a[0], b[1] - a[1], c[1] - a[1], 0.0};
  m.det = m.j00 * m.j11 - m.j01 * m.j10;
  return m;
}

int capped(int d) { return std::min(d, kMaxQuadratureDegree); }

}  // namespace

Manufactured sine_solution() {
  Manufactured m;
  m.name = "sin(pi x) sin(pi y)";
  m.u = [](double x, double y) { return std::sin(kPi * x) * std::sin(kPi * y); };
  m.grad = [](double x, double y) {
    return Point2{kPi * std::cos(kPi * x) * std::sin(kPi * y), kPi * std::sin(kPi * x) * std::cos(kPi * y)};
  };
  m.f = [](double x, double y) { return 2.0 * kPi * kPi * std::sin(kPi * x) * std::sin(kPi * y); };
  return m;
}

Manufactured bubble_solution() {
  Manufactured m;
  m.name = "x(1-x) y(1-y)";
  m.u = [](double x, double y) { return x * (1 - x) * y * (1 - y); };
  m.grad = [](double x, double y) { return Point2{(1 - 2 * x) * y * (1 - y), x * (1 - x) * (1 - 2 * y)}; };
  m.f = [](double x, double y) { return 2.0 * (y * (1 - y) + x * (1 - x)); };
  return m;
}

PoissonFormulation::PoissonFormulation(int p, int r, TriMesh mesh, ScalarFn f, PoissonOptions opts)
    : p_(p),
      r_(r),
      mesh_(std::move(mesh)),
      f_(std::move(f)),
      opts_(opts),
      lagrange_(std::max(p, 0) + 1),
      test_(std::max(r, 0)),
      trace_(std::max(p, 0)) {
  if (p < 0) throw InvalidArgument("Poisson formulation: negative degree");
  if (r < p + 2) throw DegreeViolation("Poisson formulation needs r >= p + 2");
  if (mesh_.num_triangles() == 0) throw EmptyMesh("Poisson formulation: mesh has no triangles");
  mesh_.validate();
  skeleton_ = build_skeleton(mesh_);

  matrix_rule_ = quad_triangle(capped(2 * r + 2));
  load_rule_ = quad_triangle(capped(2 * r + 6));
  edge_rule_ = quad_interval(capped(2 * r));
  for (const auto& q : matrix_rule_.points) {
    test_at_matrix_.push_back(test_.eval(q[0], q[1]));
    lag_at_matrix_.push_back(lagrange_.eval(q[0], q[1]));
  }
  for (const auto& q : load_rule_.points) test_at_load_.push_back(test_.eval(q[0], q[1]));
  test_at_edge_.resize(3);
  for (int e = 0; e < 3; ++e) {
    const Point2 a = kRefVertex[static_cast<std::size_t>((e + 1) % 3)];
    const Point2 b = kRefVertex[static_cast<std::size_t>((e + 2) % 3)];
    for (double t : edge_rule_.points)
      test_at_edge_[static_cast<std::size_t>(e)].push_back(
          test_.eval(a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])));
  }
  for (double t : edge_rule_.points) {
    trace_fwd_.push_back(trace_.eval(t));
    trace_rev_.push_back(trace_.eval(1.0 - t));
  }

  // Interior numbering: free vertices, then facet nodes, then cell nodes.
  const int k = p_ + 1;
  std::vector<bool> on_boundary(mesh_.num_vertices(), false);
  for (const auto& f : skeleton_.facets)
    if (f.is_boundary()) on_boundary[f.lo] = on_boundary[f.hi] = true;
  std::size_t next = 0;
  vertex_dof_.assign(mesh_.num_vertices(), -1);
  for (std::size_t v = 0; v < mesh_.num_vertices(); ++v)
    if (!on_boundary[v]) vertex_dof_[v] = static_cast<std::ptrdiff_t>(next++);
  facet_dof_.assign(skeleton_.facets.size(), -1);
  for (std::size_t f = 0; f < skeleton_.facets.size(); ++f) {
    if (skeleton_.facets[f].is_boundary()) continue;
    facet_dof_[f] = static_cast<std::ptrdiff_t>(next);
    next += static_cast<std::size_t>(k - 1);
  }
  const std::size_t per_cell = static_cast<std::size_t>((k - 1) * (k - 2) / 2);
  cell_dof_.resize(mesh_.num_triangles());
  for (std::size_t t = 0; t < mesh_.num_triangles(); ++t) {
    cell_dof_[t] = next;
    next += per_cell;
  }
  n_interior_ = next;
}

std::vector<std::ptrdiff_t> PoissonFormulation::interior_dofs(std::size_t t) const {
  const int k = p_ + 1;
  const auto& tri = mesh_.triangles[t];
  std::vector<std::ptrdiff_t> d;
  d.reserve(lagrange_.size());
  for (int v = 0; v < 3; ++v) d.push_back(vertex_dof_[tri[static_cast<std::size_t>(v)]]);
  for (int e = 0; e < 3; ++e) {
    const std::size_t f = skeleton_.element_facets[t][static_cast<std::size_t>(e)];
    const bool forward = tri[static_cast<std::size_t>((e + 1) % 3)] == skeleton_.facets[f].lo;
    for (int i = 1; i < k; ++i) {
      if (facet_dof_[f] < 0) {
        d.push_back(-1);
        continue;
      }
      const int idx = forward ? i - 1 : k - 1 - i;
      d.push_back(facet_dof_[f] + idx);
    }
  }
  const std::size_t per_cell = static_cast<std::size_t>((k - 1) * (k - 2) / 2);
  for (std::size_t j = 0; j < per_cell; ++j) d.push_back(static_cast<std::ptrdiff_t>(cell_dof_[t] + j));
  return d;
}

ElementBlock PoissonFormulation::element(std::size_t t) const {
  const Affine m = affine(mesh_, t);
  const double jac = std::abs(m.det);
  const std::size_t ny = test_.size();
  const std::size_t nl = lagrange_.size();
  const std::size_t nm = modes();

  ElementBlock blk;
  blk.gram = DenseMat(ny, ny);
  blk.bmat = DenseMat(ny, nl + 3 * nm);
  blk.load.assign(ny, 0.0);

  std::vector<Point2> gy(ny), gl(nl);
  for (std::size_t q = 0; q < matrix_rule_.points.size(); ++q) {
    const double w = matrix_rule_.weights[q] * jac;
    const BasisValues& y = test_at_matrix_[q];
    const BasisValues& l = lag_at_matrix_[q];
    for (std::size_t i = 0; i < ny; ++i) gy[i] = m.grad(y.dx[i], y.dy[i]);
    for (std::size_t j = 0; j < nl; ++j) gl[j] = m.grad(l.dx[j], l.dy[j]);
    for (std::size_t i = 0; i < ny; ++i) {
      for (std::size_t j = 0; j < ny; ++j)
        blk.gram(i, j) += w * (y.values[i] * y.values[j] + gy[i][0] * gy[j][0] + gy[i][1] * gy[j][1]);
      for (std::size_t j = 0; j < nl; ++j) blk.bmat(i, j) += w * (gy[i][0] * gl[j][0] + gy[i][1] * gl[j][1]);
    }
  }

  const auto& tri = mesh_.triangles[t];
  for (std::size_t e = 0; e < 3; ++e) {
    const std::size_t f = skeleton_.element_facets[t][e];
    const Facet& facet = skeleton_.facets[f];
    const bool forward = tri[(e + 1) % 3] == facet.lo;
    const double sign = opts_.flip_flux_sign ? 1.0 : skeleton_.element_signs[t][e];
    const auto& mu = forward ? trace_fwd_ : trace_rev_;
    for (std::size_t q = 0; q < edge_rule_.points.size(); ++q) {
      const double w = edge_rule_.weights[q] * facet.length;
      const BasisValues& y = test_at_edge_[e][q];
      for (std::size_t i = 0; i < ny; ++i)
        for (std::size_t a = 0; a < nm; ++a) blk.bmat(i, nl + e * nm + a) -= sign * w * y.values[i] * mu[q].values[a];
    }
  }

  if (f_) {
    for (std::size_t q = 0; q < load_rule_.points.size(); ++q) {
      const Point2 x = m.map(load_rule_.points[q]);
      const double w = load_rule_.weights[q] * jac * f_(x[0], x[1]);
      for (std::size_t i = 0; i < ny; ++i) blk.load[i] += w * test_at_load_[q].values[i];
    }
  }

  blk.trial_dofs = interior_dofs(t);
  for (std::size_t e = 0; e < 3; ++e)
    for (std::size_t a = 0; a < nm; ++a)
      blk.trial_dofs.push_back(static_cast<std::ptrdiff_t>(trace_dof(skeleton_.element_facets[t][e], a)));
  return blk;
}

SparseMat PoissonFormulation::trial_norm_gram() const {
  const std::size_t n = num_trial_dofs();
  const std::size_t nl = lagrange_.size();
  TripletList trip(n, n);
  std::vector<Point2> gl(nl);
  for (std::size_t t = 0; t < mesh_.num_triangles(); ++t) {
    const Affine m = affine(mesh_, t);
    DenseMat h1(nl, nl);
    for (std::size_t q = 0; q < matrix_rule_.points.size(); ++q) {
      const double w = matrix_rule_.weights[q] * std::abs(m.det);
      const BasisValues& l = lag_at_matrix_[q];
      for (std::size_t j = 0; j < nl; ++j) gl[j] = m.grad(l.dx[j], l.dy[j]);
      for (std::size_t i = 0; i < nl; ++i)
        for (std::size_t j = 0; j < nl; ++j)
          h1(i, j) += w * (l.values[i] * l.values[j] + gl[i][0] * gl[j][0] + gl[i][1] * gl[j][1]);
    }
    const auto d = interior_dofs(t);
    trip.add_block(d, d, h1);
  }
  // h_F ‖q̂‖²_{L²(F)}: a mesh-dependent stand-in for the H^{-1/2} trace norm.
  for (std::size_t f = 0; f < skeleton_.facets.size(); ++f) {
    const double len = skeleton_.facets[f].length;
    for (std::size_t a = 0; a < modes(); ++a) trip.add(trace_dof(f, a), trace_dof(f, a), len * len / (2.0 * a + 1.0));
  }
  return trip.compress();
}

Point2 PoissonFormulation::map(std::size_t t, Point2 xi) const { return affine(mesh_, t).map(xi); }

double PoissonFormulation::value(std::span<const double> x, std::size_t t, Point2 xi) const {
  const auto d = interior_dofs(t);
  const Vector phi = lagrange_.eval(xi[0], xi[1]).values;
  double s = 0.0;
  for (std::size_t j = 0; j < d.size(); ++j)
    if (d[j] >= 0) s += x[static_cast<std::size_t>(d[j])] * phi[j];
  return s;
}

Point2 PoissonFormulation::gradient(std::span<const double> x, std::size_t t, Point2 xi) const {
  const Affine m = affine(mesh_, t);
  const auto d = interior_dofs(t);
  const BasisValues l = lagrange_.eval(xi[0], xi[1]);
  double gx = 0.0, gy = 0.0;
  for (std::size_t j = 0; j < d.size(); ++j)
    if (d[j] >= 0) {
      gx += x[static_cast<std::size_t>(d[j])] * l.dx[j];
      gy += x[static_cast<std::size_t>(d[j])] * l.dy[j];
    }
  return m.grad(gx, gy);
}

double h1_error(const PoissonFormulation& form, std::span<const double> x, const ScalarFn& u,
                const GradFn& grad) {
  const TriangleRule rule = quad_triangle(capped(2 * (form.p() + 1) + 4));
  const auto& lag = form.trial_basis();
  std::vector<BasisValues> tab;
  for (const auto& q : rule.points) tab.push_back(lag.eval(q[0], q[1]));

  double sum = 0.0;
  for (std::size_t t = 0; t < form.num_elements(); ++t) {
    const Affine m = affine(form.mesh(), t);
    const auto d = form.interior_dofs(t);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      double uh = 0.0, gx = 0.0, gy = 0.0;
      for (std::size_t j = 0; j < d.size(); ++j) {
        if (d[j] < 0) continue;
        const double c = x[static_cast<std::size_t>(d[j])];
        uh += c * tab[q].values[j];
        gx += c * tab[q].dx[j];
        gy += c * tab[q].dy[j];
      }
      const Point2 guh = m.grad(gx, gy);
      const Point2 p = m.map(rule.points[q]);
      const Point2 g = grad(p[0], p[1]);
      const double e0 = u(p[0], p[1]) - uh, ex = g[0] - guh[0], ey = g[1] - guh[1];
      sum += rule.weights[q] * std::abs(m.det) * (e0 * e0 + ex * ex + ey * ey);
    }
  }
  return std::sqrt(sum);
}

Vector project_flux(const PoissonFormulation& form, const GradFn& grad) {
  const IntervalRule rule = gauss_legendre(form.p() + 12);
  const LegendreEdgeBasis leg(form.p());
  const auto& mesh = form.mesh();
  Vector out(form.num_trace_dofs(), 0.0);
  for (std::size_t f = 0; f < form.skeleton().facets.size(); ++f) {
    const Facet& facet = form.skeleton().facets[f];
    const Point2 a = mesh.vertices[facet.lo], b = mesh.vertices[facet.hi];
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const double s = rule.points[q];
      const Point2 g = grad(a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1]));
      const double dn = g[0] * facet.normal[0] + g[1] * facet.normal[1];
      const Vector mu = leg.eval(s).values;
      for (std::size_t m = 0; m < form.modes(); ++m)
        out[f * form.modes() + m] += (2.0 * m + 1.0) * rule.weights[q] * dn * mu[m];
    }
  }
  return out;
}

double least_squares_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("least_squares_slope: need two or more points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

ConvergenceStudy convergence_study(int p, int r, const std::vector<std::size_t>& ns, const Manufactured& mf) {
  ConvergenceStudy study;
  std::vector<double> lh, le;
  for (std::size_t n : ns) {
    const PoissonFormulation form(p, r, uniform_square_mesh(n), mf.f);
    const DpgSolution sol = solve(assemble_normal(form));
    ConvergenceRow row{};
    row.n = n;
    row.h_over_sqrt2 = 1.0 / static_cast<double>(n);
    row.h1_error = h1_error(form, sol.x, mf.u, mf.grad);
    row.estimator = sol.eta;
    row.ratio = row.h1_error > 0 ? sol.eta / row.h1_error : 0.0;
    row.solver_residual = sol.solver_residual;
    study.rows.push_back(row);
    lh.push_back(std::log(row.h_over_sqrt2));
    le.push_back(std::log(row.h1_error));
  }
  if (study.rows.size() >= 2) study.slope = least_squares_slope(lh, le);
  return study;
}

}  // namespace dpg::poisson
