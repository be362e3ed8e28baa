#include "dpg/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <random>

#include "dpg/engine.hpp"
#include "dpg/ode1d.hpp"
#include "dpg/poisson2d.hpp"
#include "dpg/quadrature.hpp"

namespace dpg::verify {

namespace {

CheckResult check(std::string name, double measured, double tol) {
  return {std::move(name), measured, tol, std::isfinite(measured) && measured <= tol};
}

double rel_diff(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d / std::max(max_abs(b), 1e-300);
}

// max over p of |T^r − (û₁ + ∫_x¹ u)| at the test nodes.
}  // namespace

double trial_to_test_error() {
  double worst = 0.0;
  const IntervalRule rule = gauss_legendre(20);
  for (int p = 0; p <= 3; ++p) {
    const ode1d::OneElemFormulation form(p, nullptr);
    const ElementBlock blk = form.element(0);
    const DenseMat t = trial_to_test(blk.gram, blk.bmat);
    const auto& nodes = form.test_basis().nodes();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const double a = nodes[i];
      for (std::size_t j = 0; j < form.trial_basis().size(); ++j) {
        double s = 0.0;
        for (std::size_t q = 0; q < rule.points.size(); ++q)
          s += rule.weights[q] * (1 - a) * form.trial_basis().eval(a + (1 - a) * rule.points[q]).values[j];
        worst = std::max(worst, std::abs(t(i, j) - s));
      }
      worst = std::max(worst, std::abs(t(i, t.cols() - 1) - 1.0));
    }
  }
  return worst;
}

double flux_test_function_error() {
  double worst = 0.0;
  for (std::size_t m : {2u, 4u, 8u}) {
    const Mesh1D mesh = uniform_interval_mesh(m);
    const ode1d::Dpg1dFormulation form(1, mesh, nullptr);
    const auto& nodes = form.test_basis().nodes();
    for (std::size_t k = 0; k < m; ++k) {
      const ElementBlock blk = form.element(k);
      const DenseMat t = trial_to_test(blk.gram, blk.bmat);
      for (std::size_t i = 1; i <= m; ++i) {
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
    }
  }
  return worst;
}

// Projection onto P_p by Legendre moments, compared with the PG solution.
namespace {

double onelem_projection(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<ode1d::Problem> problems{ode1d::layer_solution(40.0)};
  for (int k = 0; k < 3; ++k) {
    std::vector<double> c(6);
    for (double& v : c) v = dist(rng);
    c[0] = 0.0;
    problems.push_back({[c](double x) {
                          double s = 0.0;
                          for (std::size_t i = c.size(); i-- > 1;) s = s * x + static_cast<double>(i) * c[i];
                          return s;
                        },
                        [c](double x) {
                          double s = 0.0;
                          for (std::size_t i = c.size(); i-- > 0;) s = s * x + c[i];
                          return s;
                        }});
  }
  const IntervalRule rule = gauss_legendre(120);
  double worst = 0.0;
  for (const auto& pr : problems) {
    for (int p : {2, 4}) {
      const ode1d::OneElemFormulation form(p, pr.f);
      const DpgSolution sol = solve(assemble_normal(form));
      const LegendreEdgeBasis leg(p);
      Vector mom(static_cast<std::size_t>(p) + 1, 0.0);
      for (std::size_t q = 0; q < rule.points.size(); ++q) {
        const Vector v = leg.eval(rule.points[q]).values;
        for (std::size_t k = 0; k < mom.size(); ++k) mom[k] += rule.weights[q] * pr.u(rule.points[q]) * v[k];
      }
      for (int s = 0; s <= 50; ++s) {
        const double x = s / 50.0;
        const Vector v = leg.eval(x).values;
        double proj = 0.0;
        for (std::size_t k = 0; k < mom.size(); ++k) proj += (2.0 * k + 1.0) * mom[k] * v[k];
        worst = std::max(worst, std::abs(form.eval(sol.x, x) - proj));
      }
      worst = std::max(worst, std::abs(sol.x.back() - pr.u(1.0)));
    }
  }
  return worst;
}

struct Problem {
  std::string name;
  std::shared_ptr<DpgFormulation> form;
  std::shared_ptr<DpgFormulation> reference;  // correct-sign twin for 2D problems
};

std::vector<Problem> problems(bool inject) {
  std::vector<Problem> out;
  const ode1d::Problem layer = ode1d::layer_solution(40.0);
  auto add1d = [&](std::string name, std::shared_ptr<DpgFormulation> f) { out.push_back({std::move(name), f, f}); };
  add1d("noibp p=2 m=4", std::make_shared<ode1d::NoIbpFormulation>(2, uniform_interval_mesh(4), layer.f));
  add1d("onelem p=4", std::make_shared<ode1d::OneElemFormulation>(4, layer.f));
  add1d("hybrid p=2 m=8", std::make_shared<ode1d::Dpg1dFormulation>(2, uniform_interval_mesh(8), layer.f));
  const poisson::Manufactured mf = poisson::sine_solution();
  for (std::size_t n : {4u, 8u}) {
    poisson::PoissonOptions opt;
    opt.flip_flux_sign = inject;
    auto good = std::make_shared<poisson::PoissonFormulation>(1, 3, uniform_square_mesh(n), mf.f);
    auto used = inject ? std::make_shared<poisson::PoissonFormulation>(1, 3, uniform_square_mesh(n), mf.f, opt) : good;
    out.push_back({"poisson p=1 r=3 n=" + std::to_string(n), used, good});
  }
  return out;
}

// Residual representer of x with respect to `system` (element blocks).
std::vector<Vector> representer(const DpgSystem& system, std::span<const double> x) {
  std::vector<Vector> eps(system.elements.size());
  for (std::size_t k = 0; k < eps.size(); ++k) {
    const auto& blk = system.elements[k];
    const Vector bx = blk.bmat * gather(blk, x);
    Vector r(blk.load);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= bx[i];
    eps[k] = Cholesky(blk.gram).solve(r);
  }
  return eps;
}

}  // namespace

std::vector<CheckResult> run_suite(const Options& opts) {
  std::mt19937_64 rng(opts.seed);
  std::vector<CheckResult> out;
  out.push_back(check("trial-to-test closed form (1D one element)", trial_to_test_error(), 1e-10));
  out.push_back(check("flux test functions (1D hybrid)", flux_test_function_error(), 1e-10));
  out.push_back(check("PG solution equals L2 projection", onelem_projection(rng), 1e-8));
  double contain = 0.0;
  for (std::size_t m : {2u, 4u})
    for (int p : {0, 1}) contain = std::max(contain, ode1d::hybrid_containment_check(p, uniform_interval_mesh(m)));
  out.push_back(check("hybrid test space containment", contain, 1e-8));

  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (const auto& pr : problems(opts.inject_flux_sign_error)) {
    const DpgSystem sys = assemble_normal(*pr.form);
    const DpgSolution sol = solve(sys);
    const SaddleSolution mixed = solve_mixed(sys);
    out.push_back(check("mixed equals normal equations: " + pr.name, rel_diff(mixed.x, sol.x), 1e-8));

    const DpgSystem ref = pr.reference == pr.form ? DpgSystem{} : assemble_normal(*pr.reference);
    const DpgSystem& check_sys = pr.reference == pr.form ? sys : ref;
    const std::vector<Vector> eps = representer(check_sys, sol.x);
    out.push_back(check("Galerkin orthogonality: " + pr.name, galerkin_orthogonality(check_sys, eps), 1e-8));
    out.push_back(check("residual orthogonal to test space: " + pr.name, test_space_orthogonality(check_sys, eps), 1e-8));

    Vector z(sys.num_trial());
    for (double& v : z) v = dist(rng);
    const double e1 = energy_norm(sys, z), e2 = energy_norm_global(sys, z);
    out.push_back(check("energy norm local vs global (random z): " + pr.name, std::abs(e1 - e2) / e2, 1e-10));

    std::vector<std::size_t> order(sys.elements.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::shuffle(order.begin(), order.end(), rng);
    AssembleOptions shuffled;
    shuffled.visit_order = order;
    shuffled.retain_elements = false;
    const DpgSystem sys2 = assemble_normal(*pr.form, shuffled);
    const bool same = std::equal(sys.a.values().begin(), sys.a.values().end(), sys2.a.values().begin(),
                                 sys2.a.values().end()) &&
                      sys.rhs == sys2.rhs;
    out.push_back(check("assembly independent of visit order: " + pr.name, same ? 0.0 : 1.0, 0.0));
  }
  return out;
}

}  // namespace dpg::verify
