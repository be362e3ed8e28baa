#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dpg/dense.hpp"

namespace dpg {

/// Compressed-row sparse matrix. Column indices are sorted within each row and
/// unique; build through TripletList.
class SparseMat {
 public:
  SparseMat() = default;
  SparseMat(std::size_t rows, std::size_t cols);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return values_.size(); }

  std::span<const std::size_t> row_ptr() const { return row_ptr_; }
  std::span<const std::size_t> col_index() const { return col_idx_; }
  std::span<const double> values() const { return values_; }

  /// Entry (i, j), zero when not stored.
  double at(std::size_t i, std::size_t j) const;

  Vector multiply(std::span<const double> x) const;
  Vector multiply_transpose(std::span<const double> x) const;

  SparseMat transpose() const;
  DenseMat to_dense() const;
  static SparseMat from_dense(const DenseMat& d, double drop_tol = 0.0);

  double max_abs() const;
  double frobenius() const;
  bool is_symmetric(double rel_tol) const;

 private:
  friend class TripletList;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::size_t> col_idx_;
  std::vector<double> values_;
};

/// Coordinate-format accumulator. compress() sums duplicates in a canonical
/// order (sorted by row, column, then value), so the result is bitwise
/// independent of insertion order.
class TripletList {
 public:
  TripletList(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols) {}

  void add(std::size_t i, std::size_t j, double v);
  void add_block(std::span<const std::ptrdiff_t> row_map, std::span<const std::ptrdiff_t> col_map,
                 const DenseMat& block);
  std::size_t size() const { return entries_.size(); }
  SparseMat compress() const;

 private:
  struct Entry {
    std::size_t i, j;
    double v;
  };
  std::size_t rows_, cols_;
  std::vector<Entry> entries_;
};

/// Envelope (skyline) Cholesky factorization under a reverse Cuthill-McKee
/// ordering. Factor once, solve many times.
class SparseCholesky {
 public:
  explicit SparseCholesky(const SparseMat& a);

  std::size_t size() const { return perm_.size(); }
  Vector solve(std::span<const double> rhs) const;
  /// Half solves with A = Pᵀ L Lᵀ P: forward gives L⁻¹ P b (permuted
  /// coordinates), backward maps y back to Pᵀ L⁻ᵀ y.
  Vector forward(std::span<const double> rhs) const;
  Vector backward(std::span<const double> y) const;
  /// Number of stored factor entries.
  std::size_t envelope_size() const { return env_.size(); }
  std::span<const std::size_t> permutation() const { return perm_; }

 private:
  std::vector<std::size_t> perm_;   // new -> old
  std::vector<std::size_t> first_;  // first stored column of each row
  std::vector<std::size_t> start_;  // offset of each row in env_
  std::vector<double> env_;         // row i holds columns first_[i]..i
};

/// Reverse Cuthill-McKee ordering of the symmetric pattern of a. Returns the
/// permutation new -> old; ties are broken by index so it is deterministic.
std::vector<std::size_t> reverse_cuthill_mckee(const SparseMat& a);

struct SparseSolveReport {
  Vector x;
  double relative_residual = 0.0;
};

/// Solves an SPD sparse system; the relative residual is reported and must be
/// at most 1e-9 (one refinement sweep is applied if needed).
SparseSolveReport solve_sparse_spd_report(const SparseMat& a, std::span<const double> rhs);
Vector solve_sparse_spd(const SparseMat& a, std::span<const double> rhs);

}  // namespace dpg
