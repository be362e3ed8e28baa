#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "dpg/engine.hpp"
#include "dpg/errors.hpp"
#include "dpg/ode1d.hpp"
#include "dpg/quadrature.hpp"

using namespace dpg;
using namespace dpg::ode1d;

namespace {

// Independent projection oracle: Legendre expansion on (0,1) with
// coefficients (2k+1)∫u P_k(2x−1) by a high-order Gauss rule.
double legendre_projection_at(const Fn& u, int p, double x) {
  const IntervalRule rule = gauss_legendre(200);
  const LegendreEdgeBasis leg(p);
  Vector c(static_cast<std::size_t>(p) + 1, 0.0);
  for (std::size_t q = 0; q < rule.points.size(); ++q) {
    const Vector v = leg.eval(rule.points[q]).values;
    for (std::size_t k = 0; k < c.size(); ++k) c[k] += rule.weights[q] * u(rule.points[q]) * v[k];
  }
  const Vector v = leg.eval(x).values;
  double s = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k) s += (2.0 * k + 1.0) * c[k] * v[k];
  return s;
}

double sup_diff(const Fn& a, const Fn& b) {
  double d = 0.0;
  for (int i = 0; i <= 200; ++i) d = std::max(d, std::abs(a(i / 200.0) - b(i / 200.0)));
  return d;
}

}  // namespace

TEST_CASE("layer solution values") {
  const Problem pr = layer_solution(40.0);
  CHECK(pr.u(0.0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(pr.u(1.0) == doctest::Approx(1.0).epsilon(1e-14));
  const double expected = (std::exp(-4.0) - std::exp(-40.0)) / (1.0 - std::exp(-40.0));
  CHECK(std::abs(pr.u(0.9) - expected) < 1e-15);
  CHECK(std::abs(pr.u(0.9) - 0.0183156) < 1e-7);

  const Problem small = layer_solution(1e-6);
  for (double x : {0.1, 0.5, 0.9}) CHECK(std::abs(small.u(x) - x) < 1e-5);
  // f = u′ by central differences.
  for (double x : {0.3, 0.7, 0.95}) {
    const double h = 1e-6;
    CHECK(std::abs((pr.u(x + h) - pr.u(x - h)) / (2 * h) - pr.f(x)) < 1e-5 * std::max(1.0, pr.f(x)));
  }
  CHECK_THROWS_AS(layer_solution(0.0), InvalidArgument);
}

TEST_CASE("adaptive load integrates polynomials and layers") {
  const LagrangeIntervalBasis basis(2);
  const Vector l = adaptive_load([](double) { return 1.0; }, 0.0, 2.0, basis);
  // GLL degree-2 weights on [0,2]: 1/3, 4/3, 1/3.
  CHECK(l[0] == doctest::Approx(1.0 / 3.0));
  CHECK(l[1] == doctest::Approx(4.0 / 3.0));
  CHECK(l[2] == doctest::Approx(1.0 / 3.0));
  const Problem pr = layer_solution(400.0);
  const Vector s = adaptive_load(pr.f, 0.0, 1.0, LagrangeIntervalBasis(0));
  CHECK(std::abs(s[0] - 1.0) < 1e-12);
}

TEST_CASE("NoIBP: representable solutions and degree check") {
  CHECK_THROWS_AS(NoIbpFormulation(0, uniform_interval_mesh(2), nullptr), DegreeTooLow);

  for (int p = 1; p <= 3; ++p) {
    const NoIbpFormulation form(p, uniform_interval_mesh(3), [](double) { return 1.0; });
    const DpgSolution sol = solve(assemble_normal(form));
    for (double x : {0.0, 0.2, 0.5, 0.99}) CHECK(std::abs(form.eval(sol.x, x) - x) < 1e-12);
    CHECK(sol.eta < 1e-12);
  }
  // f = 2x, p = 1, one element: best constant fit to 2x is 1, so u_h = x.
  const NoIbpFormulation form(1, uniform_interval_mesh(1), [](double x) { return 2 * x; });
  const DpgSolution sol = solve(assemble_normal(form));
  CHECK(std::abs(form.eval(sol.x, 1.0) - 1.0) < 1e-12);
  CHECK(std::abs(form.eval(sol.x, 0.5) - 0.5) < 1e-12);
}

TEST_CASE("NoIBP differs from L2 projection on the layer problem") {
  const Problem pr = layer_solution(40.0);
  const NoIbpFormulation form(4, uniform_interval_mesh(1), pr.f);
  const DpgSolution sol = solve(assemble_normal(form));
  const Fn lsq = [&](double x) { return form.eval(sol.x, x); };
  const Fn proj = [&](double x) { return legendre_projection_at(pr.u, 4, x); };
  CHECK(sup_diff(lsq, proj) > 1e-3);
}

TEST_CASE("OneElem: trial-to-test matches the closed form") {
  for (int p = 0; p <= 3; ++p) {
    const OneElemFormulation form(p, nullptr);
    const ElementBlock blk = form.element(0);
    const DenseMat t = trial_to_test(blk.gram, blk.bmat);
    const auto& nodes = form.test_basis().nodes();
    const IntervalRule rule = gauss_legendre(20);
    for (std::size_t j = 0; j < form.trial_basis().size(); ++j) {
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        // ∫_x¹ e_j by Gauss on (x, 1).
        const double a = nodes[i];
        double s = 0.0;
        for (std::size_t q = 0; q < rule.points.size(); ++q)
          s += rule.weights[q] * (1 - a) * form.trial_basis().eval(a + (1 - a) * rule.points[q]).values[j];
        CHECK(std::abs(t(i, j) - s) < 1e-10);
      }
    }
    for (std::size_t i = 0; i < nodes.size(); ++i) CHECK(std::abs(t(i, t.cols() - 1) - 1.0) < 1e-10);
  }
}

TEST_CASE("OneElem: solution is the L2 projection, random polynomials") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const int p = trial % 4;
    const int deg = p + 3;
    Vector c(static_cast<std::size_t>(deg) + 1);
    for (double& v : c) v = dist(rng);
    c[0] = 0.0;  // u(0) = 0
    const Fn u = [c](double x) {
      double s = 0.0;
      for (std::size_t k = c.size(); k-- > 0;) s = s * x + c[k];
      return s;
    };
    const Fn f = [c](double x) {
      double s = 0.0;
      for (std::size_t k = c.size(); k-- > 1;) s = s * x + k * c[k];
      return s;
    };
    const OneElemFormulation form(p, f);
    const DpgSolution sol = solve(assemble_normal(form));
    const Fn uh = [&](double x) { return form.eval(sol.x, x); };
    const Fn proj = [&](double x) { return legendre_projection_at(u, p, x); };
    CHECK(sup_diff(uh, proj) < 1e-10);
    CHECK(std::abs(sol.x.back() - u(1.0)) < 1e-10);
  }
}

TEST_CASE("OneElem: layer problem error equals projection error") {
  const Problem pr = layer_solution(40.0);
  const Mesh1D mesh = uniform_interval_mesh(1);
  for (int p : {2, 4, 8}) {
    const OneElemFormulation form(p, pr.f);
    const DpgSolution sol = solve(assemble_normal(form));
    const double e_pg = l2_error(pr.u, [&](double x) { return form.eval(sol.x, x); }, mesh);
    const double e_proj = l2_error(pr.u, [&](double x) { return legendre_projection_at(pr.u, p, x); }, mesh);
    CHECK(std::abs(e_pg - e_proj) < 1e-8);
    CHECK(std::abs(sol.x.back() - 1.0) < 1e-8);
  }
  // IBP beats NoIBP on the layer (p = 4).
  const OneElemFormulation ibp(4, pr.f);
  const NoIbpFormulation noibp(4, mesh, pr.f);
  const DpgSolution s1 = solve(assemble_normal(ibp));
  const DpgSolution s2 = solve(assemble_normal(noibp));
  CHECK(l2_error(pr.u, [&](double x) { return ibp.eval(s1.x, x); }, mesh) <=
        l2_error(pr.u, [&](double x) { return noibp.eval(s2.x, x); }, mesh));
}

TEST_CASE("OneElem: zero data gives zero solution") {
  const OneElemFormulation form(3, [](double) { return 0.0; });
  const DpgSolution sol = solve(assemble_normal(form));
  CHECK(max_abs(sol.x) == 0.0);
}

TEST_CASE("hybrid with one element reduces to OneElem") {
  const Problem pr = layer_solution(5.0);
  for (int p = 0; p <= 3; ++p) {
    const DpgSystem a = assemble_normal(OneElemFormulation(p, pr.f));
    const DpgSystem b = assemble_normal(Dpg1dFormulation(p, uniform_interval_mesh(1), pr.f));
    REQUIRE(a.num_trial() == b.num_trial());
    const DenseMat da = a.a.to_dense(), db = b.a.to_dense();
    CHECK((da - db).max_abs() < 1e-12);
    for (std::size_t i = 0; i < a.rhs.size(); ++i) CHECK(std::abs(a.rhs[i] - b.rhs[i]) < 1e-12);
  }
}

TEST_CASE("hybrid flux test functions match the piecewise formula") {
  for (std::size_t m : {2u, 4u, 8u}) {
    const Mesh1D mesh = uniform_interval_mesh(m);
    const Dpg1dFormulation form(1, mesh, nullptr);
    const auto& nodes = form.test_basis().nodes();
    for (std::size_t i = 1; i <= m; ++i) {
      double worst = 0.0;
      for (std::size_t k = 0; k < m; ++k) {
        const ElementBlock blk = form.element(k);
        const DenseMat t = trial_to_test(blk.gram, blk.bmat);
        std::ptrdiff_t col = -1;
        for (std::size_t j = 0; j < blk.trial_dofs.size(); ++j)
          if (blk.trial_dofs[j] == static_cast<std::ptrdiff_t>(form.flux_dof(i))) col = static_cast<std::ptrdiff_t>(j);
        for (std::size_t n = 0; n < nodes.size(); ++n) {
          const double x = mesh.left(k) + nodes[n] * mesh.length(k);
          double expected = 0.0;
          if (k + 1 == i) expected = 1.0;
          if (k == i) expected = x - mesh.vertices()[i + 1] - 1.0;
          const double got = col < 0 ? 0.0 : t(n, static_cast<std::size_t>(col));
          worst = std::max(worst, std::abs(got - expected));
        }
      }
      CHECK(worst < 1e-10);
    }
  }
}

TEST_CASE("hybrid: smooth solution gives elementwise projection and nodal fluxes") {
  const Fn u = [](double x) { return std::sin(3 * x); };
  const Fn f = [](double x) { return 3 * std::cos(3 * x); };
  const Mesh1D mesh = uniform_interval_mesh(8);
  const Dpg1dFormulation form(1, mesh, f);
  const DpgSolution sol = solve(assemble_normal(form));
  const Vector proj = l2_projection(1, mesh, u);
  for (std::size_t i = 0; i < form.num_interior_dofs(); ++i) CHECK(std::abs(sol.x[i] - proj[i]) < 1e-8);
  for (std::size_t i = 1; i <= 8; ++i) CHECK(std::abs(sol.x[form.flux_dof(i)] - u(mesh.vertices()[i])) < 1e-8);
}

TEST_CASE("hybrid reproduces piecewise polynomials exactly") {
  const Fn f = [](double x) { return 2 * x - 1; };  // u = x² − x
  const Dpg1dFormulation form(2, Mesh1D({0.0, 0.3, 0.45, 1.0}), f);
  const DpgSolution sol = solve(assemble_normal(form));
  CHECK(sol.eta < 1e-9);
  CHECK(std::abs(form.eval(sol.x, 0.4) - (0.16 - 0.4)) < 1e-12);
}

TEST_CASE("hybrid containment") {
  CHECK(hybrid_containment_check(0, uniform_interval_mesh(1)) < 1e-12);
  for (std::size_t m : {2u, 4u})
    for (int p : {0, 1}) CHECK(hybrid_containment_check(p, uniform_interval_mesh(m)) <= 1e-8);
  CHECK(hybrid_containment_check(2, Mesh1D({0.0, 0.1, 0.5, 1.0})) <= 1e-8);
}

TEST_CASE("one-element inf-sup surrogate equals one") {
  for (int p = 0; p <= 4; ++p) {
    const OneElemFormulation form(p, nullptr);
    const DpgSystem sys = assemble_normal(form);
    CHECK(std::abs(infsup_surrogate(sys, form.trial_norm_gram()) - 1.0) < 1e-8);
  }
}
