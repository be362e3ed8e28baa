#pragma once

#include <cstddef>
#include <vector>

#include "dpg/dense.hpp"
#include "dpg/sparse.hpp"

namespace dpg {

/// Everything the engine needs from one element K.
///
/// Test functions are element-local (broken test space), so only the trial
/// side needs a global map. Entries of `trial_dofs` equal to -1 are
/// eliminated unknowns (homogeneous Dirichlet data) and are dropped.
struct ElementBlock {
  DenseMat gram;  ///< (y_i, y_j)_{Y(K)}
  DenseMat bmat;  ///< b(e_j, y_i)
  Vector load;    ///< ℓ(y_i)
  std::vector<std::ptrdiff_t> trial_dofs;

  std::size_t test_size() const { return gram.rows(); }
  std::size_t trial_size() const { return bmat.cols(); }
};

/// A discretized variational problem b(x, y) = ℓ(y) with a broken test space.
/// Global trial numbering puts the interior (field) unknowns first and the
/// trace/flux unknowns after them.
class DpgFormulation {
 public:
  virtual ~DpgFormulation() = default;

  virtual std::size_t num_elements() const = 0;
  virtual std::size_t num_interior_dofs() const = 0;
  virtual std::size_t num_trace_dofs() const = 0;
  std::size_t num_trial_dofs() const { return num_interior_dofs() + num_trace_dofs(); }

  virtual ElementBlock element(std::size_t k) const = 0;

  /// Gram matrix of a computable trial norm, used by the inf-sup diagnostic.
  virtual SparseMat trial_norm_gram() const = 0;
};

}  // namespace dpg
