#pragma once

#include <functional>
#include <span>
#include <vector>

#include "dpg/basis.hpp"
#include "dpg/formulation.hpp"
#include "dpg/mesh.hpp"

namespace dpg::ode1d {

using Fn = std::function<double(double)>;

/// u′ = f on (0,1), u(0) = 0.
struct Problem {
  Fn f;
  Fn u;  ///< optional exact solution
};

/// u = (e^{M(x−1)} − e^{−M}) / (1 − e^{−M}), f = u′. Evaluated with expm1 so
/// that small M does not cancel.
Problem layer_solution(double big_m);

/// ∫_a^b f·φ_i for the Lagrange basis mapped to (a, b). The Gauss order is
/// doubled until the vector changes by less than 1e-12 (relative to its size).
Vector adaptive_load(const Fn& f, double a, double b, const LagrangeIntervalBasis& basis);

/// b(u, v) = ∫ u′ v with Y = L²: the classical least-squares method. Trial is
/// continuous P_p with u(0) = 0 eliminated; test is broken P_p.
class NoIbpFormulation final : public DpgFormulation {
 public:
  NoIbpFormulation(int p, Mesh1D mesh, Fn f);

  std::size_t num_elements() const override { return mesh_.num_elements(); }
  std::size_t num_interior_dofs() const override { return mesh_.num_elements() * static_cast<std::size_t>(p_); }
  std::size_t num_trace_dofs() const override { return 0; }
  ElementBlock element(std::size_t k) const override;
  SparseMat trial_norm_gram() const override;

  double eval(std::span<const double> x, double pt) const;

 private:
  std::vector<std::ptrdiff_t> dofs(std::size_t k) const;
  int p_;
  Mesh1D mesh_;
  Fn f_;
  LagrangeIntervalBasis trial_, test_;
};

/// One element on (0,1): b((u, û₁), v) = û₁ v(1) − ∫ u v′ with
/// ‖v‖²_Y = ‖v′‖² + |v(1)|². Trial P_p × ℝ, test P_{p+1}.
class OneElemFormulation final : public DpgFormulation {
 public:
  OneElemFormulation(int p, Fn f);

  std::size_t num_elements() const override { return 1; }
  std::size_t num_interior_dofs() const override { return static_cast<std::size_t>(p_) + 1; }
  std::size_t num_trace_dofs() const override { return 1; }
  ElementBlock element(std::size_t k) const override;
  SparseMat trial_norm_gram() const override;

  double eval(std::span<const double> x, double pt) const;
  const LagrangeIntervalBasis& trial_basis() const { return trial_; }
  const LagrangeIntervalBasis& test_basis() const { return test_; }

 private:
  int p_;
  Fn f_;
  LagrangeIntervalBasis trial_, test_;
};

/// Hybrid DPG on a partition: b = Σ_i (û_i y⁻(x_i) − û_{i−1} y⁺(x_{i−1}) − ∫ u y′)
/// with û₀ = 0 and ‖y‖²_Y = Σ_i (|y⁻(x_i)|² + ∫|y′|²). Trial broken P_p plus
/// fluxes û₁…û_m; test broken P_{p+1}.
///
/// Local trial layout of element k: p+1 field coefficients, then û_{k+1},
/// then û_k when k > 0.
class Dpg1dFormulation final : public DpgFormulation {
 public:
  Dpg1dFormulation(int p, Mesh1D mesh, Fn f);

  std::size_t num_elements() const override { return mesh_.num_elements(); }
  std::size_t num_interior_dofs() const override {
    return mesh_.num_elements() * (static_cast<std::size_t>(p_) + 1);
  }
  std::size_t num_trace_dofs() const override { return mesh_.num_elements(); }
  ElementBlock element(std::size_t k) const override;
  SparseMat trial_norm_gram() const override;

  double eval(std::span<const double> x, double pt) const;
  /// Global index of û_i, i = 1..m.
  std::size_t flux_dof(std::size_t i) const { return num_interior_dofs() + i - 1; }
  const Mesh1D& mesh() const { return mesh_; }
  const LagrangeIntervalBasis& test_basis() const { return test_; }

 private:
  int p_;
  Mesh1D mesh_;
  Fn f_;
  LagrangeIntervalBasis trial_, test_;
};

/// Element-wise L² projection onto broken P_p, as GLL-Lagrange coefficients
/// (p+1 per element, element-major).
Vector l2_projection(int p, const Mesh1D& mesh, const Fn& u);
double eval_broken(int p, const Mesh1D& mesh, std::span<const double> coeffs, double pt);

/// ‖u − u_h‖_{L²(0,1)} for u_h given by an evaluator, by composite Gauss.
double l2_error(const Fn& u, const Fn& uh, const Mesh1D& mesh);

/// Hybrid containment: builds every test function of the non-hybrid method
/// (test functions continuous at interior nodes, fluxes û₁…û_{m−1} removed)
/// and returns the largest Y-distance, relative to its Y-norm, to the span of
/// the hybrid method's test functions.
double hybrid_containment_check(int p, const Mesh1D& mesh);

}  // namespace dpg::ode1d
