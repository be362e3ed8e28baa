#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "dpg/engine.hpp"
#include "dpg/errors.hpp"
#include "dpg/ode1d.hpp"
#include "dpg/poisson2d.hpp"

using namespace dpg;

namespace {

// A chain of elements with random SPD Gram blocks. Element k owns interior
// unknown k and shares trace unknowns ne+k and ne+k+1 with its neighbours.
class RandomFormulation final : public DpgFormulation {
 public:
  RandomFormulation(std::size_t ne, std::uint64_t seed, bool indefinite_at = false, std::size_t bad = 0)
      : ne_(ne) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    for (std::size_t k = 0; k < ne; ++k) {
      ElementBlock blk;
      DenseMat r(4, 4);
      for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) r(i, j) = d(rng);
      blk.gram = r.transpose() * r + DenseMat::identity(4);
      if (indefinite_at && k == bad) blk.gram(0, 0) = -1.0;
      blk.bmat = DenseMat(4, 3);
      for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 3; ++j) blk.bmat(i, j) = d(rng);
      blk.load.resize(4);
      for (double& v : blk.load) v = d(rng);
      blk.trial_dofs = {static_cast<std::ptrdiff_t>(k), static_cast<std::ptrdiff_t>(ne + k),
                        static_cast<std::ptrdiff_t>(ne + k + 1)};
      blocks_.push_back(blk);
    }
  }
  std::size_t num_elements() const override { return ne_; }
  std::size_t num_interior_dofs() const override { return ne_; }
  std::size_t num_trace_dofs() const override { return ne_ + 1; }
  ElementBlock element(std::size_t k) const override { return blocks_[k]; }
  SparseMat trial_norm_gram() const override {
    TripletList t(num_trial_dofs(), num_trial_dofs());
    for (std::size_t i = 0; i < num_trial_dofs(); ++i) t.add(i, i, 1.0);
    return t.compress();
  }
  // Replaces every load by B_K x* so x* is the exact discrete solution.
  void make_consistent(std::span<const double> xs) {
    for (auto& blk : blocks_) blk.load = blk.bmat * gather(blk, xs);
  }

 private:
  std::size_t ne_;
  std::vector<ElementBlock> blocks_;
};

class ScalarFormulation final : public DpgFormulation {
 public:
  ScalarFormulation(double b, double g) : b_(b), g_(g) {}
  std::size_t num_elements() const override { return 1; }
  std::size_t num_interior_dofs() const override { return 1; }
  std::size_t num_trace_dofs() const override { return 0; }
  ElementBlock element(std::size_t) const override {
    ElementBlock blk;
    blk.gram = DenseMat(1, 1, g_);
    blk.bmat = DenseMat(1, 1, b_);
    blk.load = {1.0};
    blk.trial_dofs = {0};
    return blk;
  }
  SparseMat trial_norm_gram() const override {
    TripletList t(1, 1);
    t.add(0, 0, 4.0);
    return t.compress();
  }

 private:
  double b_, g_;
};

Vector random_vector(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  Vector v(n);
  for (double& x : v) x = d(rng);
  return v;
}

}  // namespace

TEST_CASE("trial_to_test") {
  DenseMat b(3, 2);
  b(0, 0) = 1;
  b(1, 1) = 2;
  b(2, 0) = 3;
  CHECK((trial_to_test(DenseMat::identity(3), b) - b).max_abs() == 0.0);
  const RandomFormulation form(1, 4);
  const ElementBlock blk = form.element(0);
  const DenseMat t = trial_to_test(blk.gram, blk.bmat);
  CHECK((blk.gram * t - blk.bmat).max_abs() <= 1e-10 * blk.bmat.max_abs());
  CHECK_THROWS_AS(trial_to_test(DenseMat::identity(2), b), DimensionMismatch);
}

TEST_CASE("scalar system: A = b²/g and direct inf-sup") {
  const ScalarFormulation form(3.0, 2.0);
  const DpgSystem sys = assemble_normal(form);
  CHECK(sys.a.at(0, 0) == doctest::Approx(4.5).epsilon(1e-15));
  CHECK(infsup_surrogate(sys, form.trial_norm_gram()) == doctest::Approx(std::sqrt(4.5 / 4.0)));
}

TEST_CASE("two assembly paths agree") {
  const RandomFormulation rf(6, 8);
  const DenseMat a1 = assemble_normal(rf).a.to_dense();
  const DenseMat a2 = assemble_explicit_test(rf).a.to_dense();
  CHECK((a1 - a2).max_abs() <= 1e-12 * a1.max_abs());

  const ode1d::OneElemFormulation one(1, [](double x) { return std::cos(x); });
  const DpgSystem s1 = assemble_normal(one), s2 = assemble_explicit_test(one);
  CHECK((s1.a.to_dense() - s2.a.to_dense()).max_abs() <= 1e-12);
  for (std::size_t i = 0; i < s1.rhs.size(); ++i) CHECK(std::abs(s1.rhs[i] - s2.rhs[i]) <= 1e-12);

  const poisson::PoissonFormulation pf(1, 3, uniform_square_mesh(2), poisson::sine_solution().f);
  const DenseMat p1 = assemble_normal(pf).a.to_dense(), p2 = assemble_explicit_test(pf).a.to_dense();
  CHECK((p1 - p2).max_abs() <= 1e-12 * p1.max_abs());
}

TEST_CASE("assembly is independent of element visit order") {
  const RandomFormulation rf(12, 3);
  const DpgSystem a = assemble_normal(rf);
  std::vector<std::size_t> order(12);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(5);
  std::shuffle(order.begin(), order.end(), rng);
  AssembleOptions opts;
  opts.visit_order = order;
  const DpgSystem b = assemble_normal(rf, opts);
  CHECK(std::equal(a.a.values().begin(), a.a.values().end(), b.a.values().begin(), b.a.values().end()));
  CHECK(a.rhs == b.rhs);
  opts.visit_order = {0, 0, 1};
  CHECK_THROWS_AS(assemble_normal(rf, opts), InvalidArgument);
}

TEST_CASE("assembled A is symmetric positive definite") {
  std::mt19937_64 rng(2);
  const RandomFormulation rf(10, 77);
  const DpgSystem sys = assemble_normal(rf);
  CHECK(sys.a.is_symmetric(1e-10));
  for (int k = 0; k < 100; ++k) {
    const Vector z = random_vector(sys.num_trial(), rng);
    CHECK(dot(z, sys.a.multiply(z)) > 0);
  }
}

TEST_CASE("Gram failure names the element") {
  const RandomFormulation rf(5, 1, true, 3);
  try {
    assemble_normal(rf);
    FAIL("expected NotSpd");
  } catch (const NotSpd& e) {
    CHECK(e.pivot() == 3);
    CHECK(std::string(e.what()).find("element 3") != std::string::npos);
  }
}

TEST_CASE("consistent data is reproduced with zero estimator") {
  std::mt19937_64 rng(4);
  RandomFormulation rf(8, 19);
  const Vector xs = random_vector(rf.num_trial_dofs(), rng);
  rf.make_consistent(xs);
  const DpgSolution sol = solve(assemble_normal(rf));
  for (std::size_t i = 0; i < xs.size(); ++i) CHECK(std::abs(sol.x[i] - xs[i]) < 1e-9);
  CHECK(sol.eta <= 1e-9);
}

TEST_CASE("estimator bookkeeping and orthogonality") {
  const RandomFormulation rf(9, 31);
  const DpgSystem sys = assemble_normal(rf);
  const DpgSolution sol = solve(sys);
  double s = 0.0;
  for (double e : sol.eta_k) s += e * e;
  CHECK(std::abs(sol.eta * sol.eta - s) <= 1e-12 * s);
  const Vector loc = estimator_localize(sys, sol.x);
  for (std::size_t k = 0; k < loc.size(); ++k) CHECK(loc[k] == doctest::Approx(sol.eta_k[k]).epsilon(1e-14));
  for (std::size_t k = 0; k < sol.eps.size(); ++k) {
    const auto& blk = sys.elements[k];
    CHECK(std::abs(std::sqrt(dot(sol.eps[k], blk.gram * sol.eps[k])) - sol.eta_k[k]) < 1e-12);
  }
  CHECK(galerkin_orthogonality(sys, sol.eps) <= 1e-8);
  CHECK(test_space_orthogonality(sys, sol.eps) <= 1e-8);

  AssembleOptions lean;
  lean.retain_elements = false;
  const DpgSystem bare = assemble_normal(rf, lean);
  CHECK_THROWS_AS(estimator_localize(bare, sol.x), MissingElementData);
  CHECK_THROWS_AS(energy_norm(bare, sol.x), MissingElementData);
}

TEST_CASE("energy norm: two paths, zero and homogeneity") {
  std::mt19937_64 rng(6);
  const RandomFormulation rf(7, 12);
  const DpgSystem sys = assemble_normal(rf);
  CHECK(energy_norm(sys, Vector(sys.num_trial(), 0.0)) == 0.0);
  for (int k = 0; k < 20; ++k) {
    const Vector z = random_vector(sys.num_trial(), rng);
    const double e1 = energy_norm(sys, z), e2 = energy_norm_global(sys, z);
    CHECK(std::abs(e1 - e2) <= 1e-10 * e2);
    Vector z2(z);
    for (double& v : z2) v *= 2;
    CHECK(std::abs(energy_norm(sys, z2) - 2 * e1) <= 1e-12 * e1);
  }
}

TEST_CASE("the supremum is attained at the trial-to-test image") {
  const RandomFormulation rf(1, 55);
  const ElementBlock blk = rf.element(0);
  const Cholesky g(blk.gram);
  const DenseMat t = trial_to_test(blk.gram, blk.bmat);
  for (std::size_t j = 0; j < blk.trial_size(); ++j) {
    const Vector bj = blk.bmat.col(j);
    // sup_y |b(e_j, y)| / ‖y‖ = ‖b_j‖_{G⁻¹}.
    const double s1 = std::sqrt(dot(bj, g.solve(bj)));
    const Vector tj = t.col(j);
    const double s2 = std::abs(dot(bj, tj)) / std::sqrt(dot(tj, blk.gram * tj));
    CHECK(std::abs(s1 - s2) <= 1e-9 * s1);
  }
}

TEST_CASE("the DPG solution minimizes the energy-norm error") {
  std::mt19937_64 rng(8);
  const Mesh1D mesh = uniform_interval_mesh(4);
  const ode1d::Dpg1dFormulation form(1, mesh, [](double x) { return std::exp(x); });
  // Exact solution is not discrete; compare against the best discrete candidates.
  const poisson::PoissonFormulation pf(1, 3, uniform_square_mesh(3), poisson::sine_solution().f);
  for (const DpgFormulation* f : {static_cast<const DpgFormulation*>(&form), static_cast<const DpgFormulation*>(&pf)}) {
    const DpgSystem sys = assemble_normal(*f);
    const DpgSolution sol = solve(sys);
    // Residual norm ‖ℓ − Bx‖_{Y*} is minimal at x_h.
    auto residual = [&](std::span<const double> x) {
      double s = 0.0;
      for (std::size_t k = 0; k < sys.elements.size(); ++k) {
        const auto& blk = sys.elements[k];
        const Vector bx = blk.bmat * gather(blk, x);
        Vector r(blk.load);
        for (std::size_t i = 0; i < r.size(); ++i) r[i] -= bx[i];
        s += dot(r, Cholesky(blk.gram).solve(r));
      }
      return std::sqrt(s);
    };
    const double r0 = residual(sol.x);
    CHECK(std::abs(r0 - sol.eta) <= 1e-10 * std::max(1.0, sol.eta));
    for (int k = 0; k < 20; ++k) {
      Vector x = sol.x;
      const Vector d = random_vector(x.size(), rng);
      for (std::size_t i = 0; i < x.size(); ++i) x[i] += 1e-3 * d[i];
      CHECK(residual(x) >= r0);
    }
  }
}

TEST_CASE("mixed and normal solves agree") {
  const RandomFormulation rf(6, 90);
  const DpgSystem sys = assemble_normal(rf);
  const DpgSolution sol = solve(sys);
  const SaddleSolution mixed = solve_mixed(sys);
  for (std::size_t i = 0; i < sol.x.size(); ++i) CHECK(std::abs(mixed.x[i] - sol.x[i]) <= 1e-8 * max_abs(sol.x));
  // The saddle eps is the same representer, element by element.
  for (std::size_t k = 0; k < sol.eps.size(); ++k)
    for (std::size_t i = 0; i < sol.eps[k].size(); ++i)
      CHECK(std::abs(mixed.eps[sys.test_offsets[k] + i] - sol.eps[k][i]) <= 1e-8 * std::max(1.0, max_abs(sol.eps[k])));
}

TEST_CASE("inf-sup surrogate") {
  const RandomFormulation rf(5, 14);
  const DpgSystem sys = assemble_normal(rf);
  const double beta = infsup_surrogate(sys, rf.trial_norm_gram());
  // With X = I this is the smallest singular value of L⁻¹B.
  const SymmetricEigen e = symmetric_eigen(sys.a.to_dense());
  CHECK(std::abs(beta - std::sqrt(e.values.front())) <= 1e-8 * beta);
  CHECK_THROWS_AS(infsup_surrogate(sys, SparseMat(2, 2)), DimensionMismatch);
}
