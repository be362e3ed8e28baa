#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dpg/basis.hpp"
#include "dpg/formulation.hpp"
#include "dpg/mesh.hpp"
#include "dpg/quadrature.hpp"

namespace dpg::poisson {

using ScalarFn = std::function<double(double, double)>;
using GradFn = std::function<Point2(double, double)>;

/// −Δu = f on the unit square with u = 0 on the boundary.
struct Manufactured {
  std::string name;
  ScalarFn u;
  GradFn grad;
  ScalarFn f;
};

/// u = sin(πx) sin(πy).
Manufactured sine_solution();
/// u = x(1−x) y(1−y), a quartic.
Manufactured bubble_solution();

struct PoissonOptions {
  /// Testing hook: uses the facet sign +1 on both sides of every facet, which
  /// breaks flux conservation. Only for the negative verification test.
  bool flip_flux_sign = false;
};

/// Ultraweak-in-flux DPG form b((u, q̂), v) = (∇u, ∇v)_K − ⟨q̂ n_F·n_K, v⟩_{∂K}
/// with Y(K) = H¹(K). Trial: continuous P_{p+1} with boundary nodes removed,
/// then p+1 Legendre modes per facet (boundary facets included). Test:
/// orthonormal P_r per element.
class PoissonFormulation final : public DpgFormulation {
 public:
  PoissonFormulation(int p, int r, TriMesh mesh, ScalarFn f, PoissonOptions opts = {});

  std::size_t num_elements() const override { return mesh_.num_triangles(); }
  std::size_t num_interior_dofs() const override { return n_interior_; }
  std::size_t num_trace_dofs() const override { return skeleton_.facets.size() * modes(); }
  ElementBlock element(std::size_t k) const override;
  SparseMat trial_norm_gram() const override;

  int p() const { return p_; }
  int r() const { return r_; }
  std::size_t modes() const { return static_cast<std::size_t>(p_) + 1; }
  const TriMesh& mesh() const { return mesh_; }
  const Skeleton& skeleton() const { return skeleton_; }
  const LagrangeTriangleBasis& trial_basis() const { return lagrange_; }
  int matrix_quadrature_degree() const { return matrix_rule_.degree; }
  int load_quadrature_degree() const { return load_rule_.degree; }

  std::size_t trace_dof(std::size_t facet, std::size_t mode) const {
    return n_interior_ + facet * modes() + mode;
  }
  /// Global indices of the Lagrange nodes of triangle t (-1 on the boundary).
  std::vector<std::ptrdiff_t> interior_dofs(std::size_t t) const;

  /// u_h and ∇u_h at reference point ξ of triangle t.
  double value(std::span<const double> x, std::size_t t, Point2 xi) const;
  Point2 gradient(std::span<const double> x, std::size_t t, Point2 xi) const;
  /// Physical point of reference coordinates ξ in triangle t.
  Point2 map(std::size_t t, Point2 xi) const;

 private:
  int p_, r_;
  TriMesh mesh_;
  Skeleton skeleton_;
  ScalarFn f_;
  PoissonOptions opts_;
  LagrangeTriangleBasis lagrange_;
  OrthonormalTriangleBasis test_;
  LegendreEdgeBasis trace_;
  TriangleRule matrix_rule_, load_rule_;
  IntervalRule edge_rule_;
  std::vector<BasisValues> test_at_matrix_, lag_at_matrix_, test_at_load_;
  std::vector<std::vector<BasisValues>> test_at_edge_;  // [edge][point]
  std::vector<BasisValues> trace_fwd_, trace_rev_;      // at t and 1 − t

  std::size_t n_interior_ = 0;
  std::vector<std::ptrdiff_t> vertex_dof_, facet_dof_;
  std::vector<std::size_t> cell_dof_;
};

/// (Σ_K ‖u − u_h‖²_{L²(K)} + ‖∇(u − u_h)‖²_{L²(K)})^{1/2} with quadrature
/// exact to degree 2(p+1)+4.
double h1_error(const PoissonFormulation& form, std::span<const double> x, const ScalarFn& u,
                const GradFn& grad);

/// L²(F) projection of n_F·∇u onto the trace modes of every facet, laid out
/// like the trace block of the trial vector.
Vector project_flux(const PoissonFormulation& form, const GradFn& grad);

struct ConvergenceRow {
  std::size_t n;
  double h_over_sqrt2;
  double h1_error;
  double estimator;
  double ratio;
  double solver_residual;
};

struct ConvergenceStudy {
  std::vector<ConvergenceRow> rows;
  std::optional<double> slope;  ///< needs at least two rows
};

double least_squares_slope(std::span<const double> x, std::span<const double> y);

/// Uniform n×n meshes for each n; slope of log(error) against log(h).
ConvergenceStudy convergence_study(int p, int r, const std::vector<std::size_t>& ns, const Manufactured& mf);

}  // namespace dpg::poisson
