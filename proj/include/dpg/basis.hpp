#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <vector>

#include "dpg/dense.hpp"

namespace dpg {

enum class ElementKind { Interval, Edge, Triangle };

/// Values and reference gradients of every basis function at one point.
/// For 1D kinds `dy` is empty.
struct BasisValues {
  Vector values;
  Vector dx;
  Vector dy;
};

/// Polynomial basis on a reference element ([0,1] or the unit triangle).
class PolyBasis {
 public:
  virtual ~PolyBasis() = default;

  ElementKind kind() const { return kind_; }
  int degree() const { return degree_; }
  std::size_t size() const { return size_; }

  virtual BasisValues eval(double x, double y = 0.0) const = 0;

 protected:
  PolyBasis(ElementKind kind, int degree, std::size_t size)
      : kind_(kind), degree_(degree), size_(size) {}

 private:
  ElementKind kind_;
  int degree_;
  std::size_t size_;
};

/// Gauss-Lobatto-Legendre points of degree p on [0,1] (p+1 points, ascending).
std::vector<double> gll_points(int p);

/// Nodal Lagrange basis on [0,1] at the GLL points. Endpoint functions are the
/// first and last, which makes continuous assembly straightforward.
class LagrangeIntervalBasis final : public PolyBasis {
 public:
  explicit LagrangeIntervalBasis(int p);
  const std::vector<double>& nodes() const { return nodes_; }
  BasisValues eval(double x, double y = 0.0) const override;

 private:
  std::vector<double> nodes_;
};

/// Legendre polynomials P_k(2t − 1), k = 0..p, on [0,1]. Orthogonal with
/// ∫ P_j P_k = δ_jk / (2k + 1).
class LegendreEdgeBasis final : public PolyBasis {
 public:
  explicit LegendreEdgeBasis(int p);
  BasisValues eval(double x, double y = 0.0) const override;
};

/// Monomials (x − 1/3)^i (y − 1/3)^j orthonormalized in L² of the reference
/// triangle. The Gram-Schmidt is done twice against quadrature-exact mass
/// matrices so that orthonormality holds to rounding for moderate degrees.
class OrthonormalTriangleBasis final : public PolyBasis {
 public:
  explicit OrthonormalTriangleBasis(int p);
  BasisValues eval(double x, double y = 0.0) const override;
  /// Coefficients: row k holds φ_k in terms of the centred monomials.
  const DenseMat& coefficients() const { return coeff_; }

 private:
  std::vector<std::array<int, 2>> exponents_;
  DenseMat coeff_;
};

/// Equispaced Lagrange basis of degree k on the reference triangle. Node order:
/// the three vertices, then k−1 nodes on each local edge e (opposite vertex e,
/// running from vertex e+1 to vertex e+2), then interior nodes.
class LagrangeTriangleBasis final : public PolyBasis {
 public:
  explicit LagrangeTriangleBasis(int k);
  const std::vector<std::array<double, 2>>& nodes() const { return nodes_; }
  BasisValues eval(double x, double y = 0.0) const override;
  /// max|R_ii| / min|R_ii| of the Vandermonde QR, a cheap condition estimate.
  double vandermonde_condition() const { return vcond_; }

 private:
  OrthonormalTriangleBasis ortho_;
  std::vector<std::array<double, 2>> nodes_;
  DenseMat to_nodal_;  // ψ_i = Σ_j to_nodal_(i, j) φ_j
  double vcond_ = 0.0;
};

std::unique_ptr<PolyBasis> interval_basis(int p);
std::unique_ptr<PolyBasis> edge_basis(int p);
std::unique_ptr<PolyBasis> triangle_basis(int p);

}  // namespace dpg
