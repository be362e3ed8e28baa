#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "dpg/engine.hpp"
#include "dpg/errors.hpp"
#include "dpg/poisson2d.hpp"

using namespace dpg;
using namespace dpg::poisson;

namespace {

TriMesh shuffled(const TriMesh& m, std::uint64_t seed) {
  std::vector<std::size_t> order(m.num_triangles());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  TriMesh out;
  out.vertices = m.vertices;
  for (std::size_t t : order) {
    out.triangles.push_back(m.triangles[t]);
    out.refinement_edge.push_back(m.refinement_edge[t]);
    out.generation.push_back(m.generation[t]);
  }
  return out;
}

}  // namespace

TEST_CASE("degree rule") {
  CHECK_THROWS_AS(PoissonFormulation(1, 2, uniform_square_mesh(2), nullptr), DegreeViolation);
  CHECK_NOTHROW(PoissonFormulation(1, 3, uniform_square_mesh(2), nullptr));
}

TEST_CASE("dof counts") {
  // p = 1: quadratic field; n = 2 has 1 interior vertex and 8 interior facets.
  const PoissonFormulation f(1, 3, uniform_square_mesh(2), nullptr);
  CHECK(f.num_interior_dofs() == 1 + 8);
  CHECK(f.num_trace_dofs() == 16 * 2);
  const PoissonFormulation g(2, 4, uniform_square_mesh(2), nullptr);
  CHECK(g.num_interior_dofs() == 1 + 8 * 2 + 8 * 1);
}

TEST_CASE("zero load gives zero solution") {
  const PoissonFormulation f(1, 3, uniform_square_mesh(3), [](double, double) { return 0.0; });
  const DpgSolution sol = solve(assemble_normal(f));
  CHECK(max_abs(sol.x) == 0.0);
  CHECK(sol.eta == 0.0);
}

TEST_CASE("representable quartic is recovered with its fluxes") {
  const Manufactured mf = bubble_solution();
  for (std::size_t n : {1u, 2u, 3u}) {
    const PoissonFormulation f(3, 5, uniform_square_mesh(n), mf.f);
    const DpgSolution sol = solve(assemble_normal(f));
    CHECK(h1_error(f, sol.x, mf.u, mf.grad) <= 1e-9);
    CHECK(sol.eta <= 1e-9);
    const Vector q = project_flux(f, mf.grad);
    for (std::size_t i = 0; i < q.size(); ++i) CHECK(std::abs(sol.x[f.num_interior_dofs() + i] - q[i]) <= 1e-8);
  }
}

TEST_CASE("trace values do not depend on triangle order") {
  const Manufactured mf = sine_solution();
  const TriMesh m = bisect(uniform_square_mesh(3), {0, 5, 7});
  const PoissonFormulation a(1, 3, m, mf.f);
  const PoissonFormulation b(1, 3, shuffled(m, 4), mf.f);
  const DpgSolution sa = solve(assemble_normal(a));
  const DpgSolution sb = solve(assemble_normal(b));
  for (std::size_t i = 0; i < a.num_trace_dofs(); ++i)
    CHECK(std::abs(sa.x[a.num_interior_dofs() + i] - sb.x[b.num_interior_dofs() + i]) <= 1e-10);
  CHECK(std::abs(sa.eta - sb.eta) <= 1e-12);
}

TEST_CASE("single triangle: brute-force element assembly") {
  // Physical triangle, p = 0, r = 2: all Lagrange nodes are on the boundary,
  // so the trial space is the three constant fluxes.
  TriMesh m;
  m.vertices = {{0.2, 0.1}, {1.3, 0.4}, {0.5, 1.2}};
  m.triangles = {{0, 1, 2}};
  m.refinement_edge = {0};
  m.generation = {0};
  const PoissonFormulation form(0, 2, m, [](double x, double y) { return 1.0 + x * y; });
  const DpgSystem sys = assemble_normal(form);
  REQUIRE(sys.num_trial() == 3);

  // Independent path: physical test functions y(x) = ŷ(F⁻¹x), gradients by
  // central differences (exact for quadratics), Gauss rules built here.
  const OrthonormalTriangleBasis ref(2);
  const auto& v = m.vertices;
  const double j00 = v[1][0] - v[0][0], j01 = v[2][0] - v[0][0], j10 = v[1][1] - v[0][1], j11 = v[2][1] - v[0][1];
  const double det = j00 * j11 - j01 * j10;
  auto inv = [&](double x, double y) {
    const double dx = x - v[0][0], dy = y - v[0][1];
    return Point2{(j11 * dx - j01 * dy) / det, (-j10 * dx + j00 * dy) / det};
  };
  auto phys = [&](double x, double y) {
    const Point2 r = inv(x, y);
    return ref.eval(r[0], r[1]).values;
  };
  const std::size_t ny = ref.size();
  const double h = 1e-4;
  DenseMat g(ny, ny);
  Vector load(ny, 0.0);
  const IntervalRule gl = gauss_legendre(12);
  // Duffy-free integration: tensor Gauss on the square mapped by collapse.
  for (std::size_t a = 0; a < gl.points.size(); ++a)
    for (std::size_t b = 0; b < gl.points.size(); ++b) {
      const double s = gl.points[a], t = gl.points[b] * (1 - gl.points[a]);
      const double w = gl.weights[a] * gl.weights[b] * (1 - gl.points[a]) * det;
      const double x = v[0][0] + j00 * s + j01 * t, y = v[0][1] + j10 * s + j11 * t;
      const Vector val = phys(x, y);
      const Vector xp = phys(x + h, y), xm = phys(x - h, y), yp = phys(x, y + h), ym = phys(x, y - h);
      for (std::size_t i = 0; i < ny; ++i) {
        const double gxi = (xp[i] - xm[i]) / (2 * h), gyi = (yp[i] - ym[i]) / (2 * h);
        load[i] += w * (1.0 + x * y) * val[i];
        for (std::size_t j = 0; j < ny; ++j) {
          const double gxj = (xp[j] - xm[j]) / (2 * h), gyj = (yp[j] - ym[j]) / (2 * h);
          g(i, j) += w * (val[i] * val[j] + gxi * gxj + gyi * gyj);
        }
      }
    }
  // Facets sorted by (lo, hi): (0,1), (0,2), (1,2). On a single triangle every
  // facet is boundary with outward normal, so the sign is +1.
  const std::array<std::array<std::size_t, 2>, 3> facets{{{0, 1}, {0, 2}, {1, 2}}};
  DenseMat bm(ny, 3);
  for (std::size_t f = 0; f < 3; ++f) {
    const Point2 a = v[facets[f][0]], b = v[facets[f][1]];
    const double len = std::hypot(b[0] - a[0], b[1] - a[1]);
    for (std::size_t q = 0; q < gl.points.size(); ++q) {
      const double s = gl.points[q];
      const Vector val = phys(a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1]));
      for (std::size_t i = 0; i < ny; ++i) bm(i, f) -= gl.weights[q] * len * val[i];
    }
  }
  const Cholesky gc(g);
  const DenseMat a_ref = bm.transpose() * gc.solve(bm);
  const Vector rhs_ref = mul_transpose(bm, gc.solve(load));
  const DenseMat a_dpg = sys.a.to_dense();
  CHECK((a_dpg - a_ref).max_abs() <= 1e-7 * a_ref.max_abs());
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(sys.rhs[i] - rhs_ref[i]) <= 1e-7 * max_abs(rhs_ref));
}

TEST_CASE("A is SPD for several degree pairs") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (auto [p, r] : {std::pair{0, 2}, {0, 3}, {1, 3}, {1, 4}, {2, 4}}) {
    const PoissonFormulation f(p, r, bisect(uniform_square_mesh(2), {1, 4}), nullptr);
    const DpgSystem sys = assemble_normal(f);
    CHECK(sys.a.is_symmetric(1e-10));
    CHECK_NOTHROW(SparseCholesky{sys.a});
    for (int k = 0; k < 20; ++k) {
      Vector z(sys.num_trial());
      for (double& x : z) x = d(rng);
      CHECK(dot(z, sys.a.multiply(z)) > 0);
    }
  }
}

TEST_CASE("H1 error of the zero function") {
  const Manufactured mf = sine_solution();
  const PoissonFormulation f(1, 3, uniform_square_mesh(8), nullptr);
  const Vector zero(f.num_trial_dofs(), 0.0);
  const double expected = std::sqrt(0.25 + std::numbers::pi * std::numbers::pi / 2.0);
  CHECK(std::abs(h1_error(f, zero, mf.u, mf.grad) - expected) < 1e-5);
  CHECK(std::abs(expected - 2.2769) < 2e-4);
}

TEST_CASE("convergence rates and estimator ratio") {
  const Manufactured mf = sine_solution();
  const ConvergenceStudy s1 = convergence_study(1, 3, {4, 8, 16, 32}, mf);
  REQUIRE(s1.slope);
  CHECK(std::abs(*s1.slope - 2.0) <= 0.15);
  double lo = 1e9, hi = 0;
  for (std::size_t i = 0; i < s1.rows.size(); ++i) {
    CHECK(s1.rows[i].ratio >= 0.8);
    CHECK(s1.rows[i].ratio <= 1.3);
    if (i > 0) CHECK(s1.rows[i].h1_error < s1.rows[i - 1].h1_error);
    lo = std::min(lo, s1.rows[i].ratio);
    hi = std::max(hi, s1.rows[i].ratio);
  }
  CHECK((hi - lo) / lo <= 0.15);

  const ConvergenceStudy s0 = convergence_study(0, 2, {4, 8, 16, 32}, mf);
  CHECK(std::abs(*s0.slope - 1.0) <= 0.15);

  const ConvergenceStudy single = convergence_study(1, 3, {4}, mf);
  CHECK(single.rows.size() == 1);
  CHECK(!single.slope);
}

TEST_CASE("raising the test degree barely changes the error") {
  const Manufactured mf = sine_solution();
  const auto a = convergence_study(1, 3, {8}, mf).rows[0].h1_error;
  const auto b = convergence_study(1, 4, {8}, mf).rows[0].h1_error;
  CHECK(std::abs(a - b) / a < 0.05);
}

TEST_CASE("inf-sup surrogate stays bounded under refinement") {
  std::vector<double> vals;
  for (std::size_t n : {4u, 8u, 16u, 32u}) {
    const PoissonFormulation f(1, 3, uniform_square_mesh(n), nullptr);
    vals.push_back(infsup_surrogate(assemble_normal(f), f.trial_norm_gram()));
  }
  const double mx = *std::max_element(vals.begin(), vals.end());
  for (double v : vals) CHECK(v >= 0.5 * mx);
}

TEST_CASE("least-squares slope") {
  const std::vector<double> x{0, 1, 2, 3}, y{1, 3, 5, 7};
  CHECK(least_squares_slope(x, y) == doctest::Approx(2.0));
  CHECK_THROWS_AS(least_squares_slope(std::vector<double>{1}, std::vector<double>{1}), InvalidArgument);
}
