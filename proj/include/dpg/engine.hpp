#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dpg/dense.hpp"
#include "dpg/formulation.hpp"
#include "dpg/saddle.hpp"
#include "dpg/sparse.hpp"

namespace dpg {

/// Global normal equations A x = rhs with A = Bᵀ M⁻¹ B assembled element by
/// element. Element blocks are kept (unless disabled) so the residual
/// representer can be recovered locally after the solve.
struct DpgSystem {
  SparseMat a;
  Vector rhs;
  std::size_t n_interior = 0;
  std::size_t n_trace = 0;
  std::vector<ElementBlock> elements;
  std::vector<std::size_t> test_offsets;  ///< size num_elements + 1

  std::size_t num_trial() const { return n_interior + n_trace; }
  std::size_t num_test() const { return test_offsets.empty() ? 0 : test_offsets.back(); }
  bool retains_elements() const { return !elements.empty(); }
};

struct AssembleOptions {
  bool retain_elements = true;
  /// Element visit order; empty means 0..n-1. The result does not depend on it.
  std::vector<std::size_t> visit_order;
};

struct DpgSolution {
  Vector x;                 ///< interior coefficients then trace coefficients
  std::vector<Vector> eps;  ///< per-element coefficients of ε^r in the test basis
  Vector eta_k;             ///< ‖ε^r‖_{Y(K)}
  double eta = 0.0;         ///< (Σ η_K²)^{1/2}
  double solver_residual = 0.0;
};

/// Columns of G⁻¹ B: the test-basis coefficients of T^r applied to each
/// local trial function.
DenseMat trial_to_test(const DenseMat& gram, const DenseMat& bmat);

/// A_K = B_Kᵀ G_K⁻¹ B_K through the whitened block C = L⁻¹ B_K.
DpgSystem assemble_normal(const DpgFormulation& form, const AssembleOptions& opts = {});

/// A_ij = b(e_j, T^r e_i) with T^r e_i formed explicitly, i.e. the square
/// matrix of test functions applied to trial functions.
DpgSystem assemble_explicit_test(const DpgFormulation& form);

DpgSolution solve(const DpgSystem& system);

/// Local trial coefficients of element k (zero for eliminated unknowns).
Vector gather(const ElementBlock& block, std::span<const double> x);

/// Recovers η_K = ‖G_K⁻¹(ℓ_K − B_K x_K)‖_{G_K}.
Vector estimator_localize(const DpgSystem& system, std::span<const double> x);

/// ⫼z⫼_r = (Σ_K ‖T_K z_K‖²_{G_K})^{1/2}, evaluated element-wise.
double energy_norm(const DpgSystem& system, std::span<const double> z);
/// The same quantity as (zᵀ A z)^{1/2}.
double energy_norm_global(const DpgSystem& system, std::span<const double> z);

/// Global block-diagonal Gram M, rectangular B and load ℓ of the mixed system.
struct MixedSystem {
  SparseMat m;
  SparseMat b;
  Vector load;
};
MixedSystem assemble_mixed(const DpgSystem& system);
SaddleSolution solve_mixed(const DpgSystem& system);

/// max_j |b(e_j, ε^r)| / scale with scale = ‖B‖_F ‖ε‖ + ‖ℓ‖, evaluated
/// through the retained B blocks. eps is per element.
double galerkin_orthogonality(const DpgSystem& system, const std::vector<Vector>& eps);
/// max_j |(ε^r, T^r e_j)_Y| / scale, with the test functions formed explicitly.
double test_space_orthogonality(const DpgSystem& system, const std::vector<Vector>& eps);

/// Smallest generalized eigenvalue of (A, X) by inverse subspace iteration;
/// returns its square root, the discrete inf-sup surrogate min ⫼z⫼_r / ‖z‖_X.
double infsup_surrogate(const DpgSystem& system, const SparseMat& trial_gram);

}  // namespace dpg
