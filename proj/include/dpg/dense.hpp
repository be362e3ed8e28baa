#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace dpg {

using Vector = std::vector<double>;

/// Row-major dense matrix. Element matrices (Gram, trial-test blocks) live here.
class DenseMat {
 public:
  DenseMat() = default;
  DenseMat(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static DenseMat identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }
  Vector col(std::size_t j) const;
  void set_col(std::size_t j, std::span<const double> v);

  std::span<const double> data() const { return data_; }

  DenseMat transpose() const;
  double max_abs() const;
  double frobenius() const;
  bool is_symmetric(double rel_tol = 1e-12) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

DenseMat operator*(const DenseMat& a, const DenseMat& b);
DenseMat operator+(const DenseMat& a, const DenseMat& b);
DenseMat operator-(const DenseMat& a, const DenseMat& b);
DenseMat operator*(double s, const DenseMat& a);
Vector operator*(const DenseMat& a, std::span<const double> x);
/// aᵀ x without forming the transpose.
Vector mul_transpose(const DenseMat& a, std::span<const double> x);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
double max_abs(std::span<const double> a);
Vector axpy(double alpha, std::span<const double> x, std::span<const double> y);

/// Unpivoted Cholesky factorization A = L Lᵀ of a symmetric positive definite
/// matrix. A nonpositive pivot raises NotSpd: Gram matrices are SPD by
/// construction, so an indefinite one points at an assembly bug.
class Cholesky {
 public:
  explicit Cholesky(const DenseMat& a);

  std::size_t size() const { return l_.rows(); }
  const DenseMat& factor() const { return l_; }

  Vector solve(std::span<const double> rhs) const;
  DenseMat solve(const DenseMat& rhs) const;
  /// L⁻¹ x (forward substitution only).
  Vector solve_lower(std::span<const double> rhs) const;
  DenseMat solve_lower(const DenseMat& rhs) const;
  Vector solve_upper(std::span<const double> rhs) const;

 private:
  DenseMat l_;
};

Vector solve_spd_dense(const DenseMat& a, std::span<const double> rhs);

/// Householder QR of a tall matrix (rows >= cols), kept in compact form.
class HouseholderQr {
 public:
  explicit HouseholderQr(DenseMat a);

  std::size_t rows() const { return qr_.rows(); }
  std::size_t cols() const { return qr_.cols(); }
  /// Qᵀ b for a vector of length rows().
  Vector apply_qt(std::span<const double> b) const;
  /// Q y for y of length rows().
  Vector apply_q(std::span<const double> y) const;
  /// Solves R x = y using the leading cols() entries of y.
  Vector solve_r(std::span<const double> y) const;
  /// Solves Rᵀ x = y.
  Vector solve_rt(std::span<const double> y) const;
  /// |R_kk| smallest / largest, the usual rank-revealing ratio.
  double diag_ratio() const;

 private:
  DenseMat qr_;
  Vector beta_;
  Vector rdiag_;
};

/// Eigen-decomposition of a small symmetric matrix by cyclic Jacobi
/// rotations. Eigenvalues ascend; eigenvectors are the matching columns.
struct SymmetricEigen {
  Vector values;
  DenseMat vectors;
};
SymmetricEigen symmetric_eigen(const DenseMat& a);

}  // namespace dpg
