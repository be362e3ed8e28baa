#include "dpg/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "dpg/errors.hpp"

namespace dpg {

SparseMat::SparseMat(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), row_ptr_(rows + 1, 0) {}

double SparseMat::at(std::size_t i, std::size_t j) const {
  if (i >= rows_ || j >= cols_) throw InvalidArgument("SparseMat::at: index out of range");
  const auto begin = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i]);
  const auto end = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i + 1]);
  const auto it = std::lower_bound(begin, end, j);
  if (it == end || *it != j) return 0.0;
  return values_[static_cast<std::size_t>(it - col_idx_.begin())];
}

Vector SparseMat::multiply(std::span<const double> x) const {
  if (x.size() != cols_) throw DimensionMismatch("SparseMat::multiply: length mismatch");
  Vector y(rows_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i) {
    double s = 0.0;
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) s += values_[k] * x[col_idx_[k]];
    y[i] = s;
  }
  return y;
}

Vector SparseMat::multiply_transpose(std::span<const double> x) const {
  if (x.size() != rows_) throw DimensionMismatch("SparseMat::multiply_transpose: length mismatch");
  Vector y(cols_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) y[col_idx_[k]] += values_[k] * x[i];
  return y;
}

SparseMat SparseMat::transpose() const {
  TripletList t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) t.add(col_idx_[k], i, values_[k]);
  return t.compress();
}

DenseMat SparseMat::to_dense() const {
  DenseMat d(rows_, cols_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) d(i, col_idx_[k]) = values_[k];
  return d;
}

SparseMat SparseMat::from_dense(const DenseMat& d, double drop_tol) {
  TripletList t(d.rows(), d.cols());
  for (std::size_t i = 0; i < d.rows(); ++i)
    for (std::size_t j = 0; j < d.cols(); ++j)
      if (std::abs(d(i, j)) > drop_tol) t.add(i, j, d(i, j));
  return t.compress();
}

double SparseMat::max_abs() const { return dpg::max_abs(values_); }

double SparseMat::frobenius() const { return norm2(values_); }

bool SparseMat::is_symmetric(double rel_tol) const {
  if (rows_ != cols_) return false;
  const double tol = rel_tol * max_abs();
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
      if (std::abs(values_[k] - at(col_idx_[k], i)) > tol) return false;
  return true;
}

// ---------------------------------------------------------------------------

void TripletList::add(std::size_t i, std::size_t j, double v) {
  if (i >= rows_ || j >= cols_)
    throw InvalidArgument("TripletList::add: index (" + std::to_string(i) + ", " +
                          std::to_string(j) + ") out of range");
  entries_.push_back({i, j, v});
}

void TripletList::add_block(std::span<const std::ptrdiff_t> row_map,
                            std::span<const std::ptrdiff_t> col_map, const DenseMat& block) {
  if (row_map.size() != block.rows() || col_map.size() != block.cols())
    throw DimensionMismatch("TripletList::add_block: map size does not match block");
  for (std::size_t a = 0; a < row_map.size(); ++a) {
    if (row_map[a] < 0) continue;
    for (std::size_t b = 0; b < col_map.size(); ++b) {
      if (col_map[b] < 0) continue;
      add(static_cast<std::size_t>(row_map[a]), static_cast<std::size_t>(col_map[b]), block(a, b));
    }
  }
}

SparseMat TripletList::compress() const {
  std::vector<Entry> sorted = entries_;
  std::sort(sorted.begin(), sorted.end(), [](const Entry& a, const Entry& b) {
    if (a.i != b.i) return a.i < b.i;
    if (a.j != b.j) return a.j < b.j;
    return a.v < b.v;
  });
  SparseMat m(rows_, cols_);
  m.col_idx_.reserve(sorted.size());
  m.values_.reserve(sorted.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < rows_; ++i) {
    while (k < sorted.size() && sorted[k].i == i) {
      const std::size_t j = sorted[k].j;
      double s = 0.0;
      while (k < sorted.size() && sorted[k].i == i && sorted[k].j == j) s += sorted[k++].v;
      m.col_idx_.push_back(j);
      m.values_.push_back(s);
    }
    m.row_ptr_[i + 1] = m.col_idx_.size();
  }
  return m;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::vector<std::size_t>> symmetric_adjacency(const SparseMat& a) {
  const std::size_t n = a.rows();
  std::vector<std::vector<std::size_t>> adj(n);
  const auto rp = a.row_ptr();
  const auto ci = a.col_index();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = rp[i]; k < rp[i + 1]; ++k) {
      const std::size_t j = ci[k];
      if (j == i) continue;
      adj[i].push_back(j);
      adj[j].push_back(i);
    }
  for (auto& nb : adj) {
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
  }
  return adj;
}

// Level structure from root restricted to unvisited nodes; returns the nodes
// of the last level and the depth.
std::pair<std::vector<std::size_t>, std::size_t> bfs_levels(
    const std::vector<std::vector<std::size_t>>& adj, std::size_t root,
    const std::vector<char>& done) {
  std::vector<int> level(adj.size(), -1);
  std::vector<std::size_t> frontier{root};
  level[root] = 0;
  std::size_t depth = 0;
  std::vector<std::size_t> last = frontier;
  while (!frontier.empty()) {
    last = frontier;
    std::vector<std::size_t> next;
    for (std::size_t u : frontier)
      for (std::size_t v : adj[u])
        if (!done[v] && level[v] < 0) {
          level[v] = level[u] + 1;
          next.push_back(v);
        }
    if (next.empty()) break;
    ++depth;
    frontier = std::move(next);
  }
  return {last, depth};
}

}  // namespace

std::vector<std::size_t> reverse_cuthill_mckee(const SparseMat& a) {
  const std::size_t n = a.rows();
  const auto adj = symmetric_adjacency(a);
  std::vector<char> done(n, 0);
  std::vector<std::size_t> order;
  order.reserve(n);
  auto degree = [&](std::size_t v) { return adj[v].size(); };

  for (std::size_t seed = 0; seed < n; ++seed) {
    if (done[seed]) continue;
    // Pseudo-peripheral root (George-Liu).
    std::size_t root = seed;
    auto [last, depth] = bfs_levels(adj, root, done);
    for (int it = 0; it < 8; ++it) {
      std::size_t cand = *std::min_element(last.begin(), last.end(), [&](auto x, auto y) {
        return degree(x) != degree(y) ? degree(x) < degree(y) : x < y;
      });
      auto [last2, depth2] = bfs_levels(adj, cand, done);
      if (depth2 <= depth) break;
      root = cand;
      last = std::move(last2);
      depth = depth2;
    }

    const std::size_t begin = order.size();
    order.push_back(root);
    done[root] = 1;
    for (std::size_t head = begin; head < order.size(); ++head) {
      std::vector<std::size_t> nb;
      for (std::size_t v : adj[order[head]])
        if (!done[v]) nb.push_back(v);
      std::sort(nb.begin(), nb.end(), [&](auto x, auto y) {
        return degree(x) != degree(y) ? degree(x) < degree(y) : x < y;
      });
      for (std::size_t v : nb) {
        done[v] = 1;
        order.push_back(v);
      }
    }
  }
  std::reverse(order.begin(), order.end());
  return order;
}

SparseCholesky::SparseCholesky(const SparseMat& a) {
  if (a.rows() != a.cols()) throw DimensionMismatch("SparseCholesky: matrix is not square");
  const std::size_t n = a.rows();
  perm_ = reverse_cuthill_mckee(a);
  std::vector<std::size_t> inv(n);
  for (std::size_t k = 0; k < n; ++k) inv[perm_[k]] = k;

  const auto rp = a.row_ptr();
  const auto ci = a.col_index();
  const auto va = a.values();

  first_.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) first_[i] = i;
  double max_diag = 0.0;
  for (std::size_t old = 0; old < n; ++old) {
    const std::size_t i = inv[old];
    bool has_diag = false;
    for (std::size_t k = rp[old]; k < rp[old + 1]; ++k) {
      const std::size_t j = inv[ci[k]];
      if (j == i) {
        has_diag = true;
        max_diag = std::max(max_diag, std::abs(va[k]));
      }
      if (j < i) first_[i] = std::min(first_[i], j);
      else first_[j] = std::min(first_[j], i);
    }
    if (!has_diag) throw Singular("SparseCholesky: row " + std::to_string(old) + " has no diagonal");
  }
  start_.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) start_[i + 1] = start_[i] + (i - first_[i] + 1);
  env_.assign(start_[n], 0.0);
  for (std::size_t old = 0; old < n; ++old) {
    const std::size_t i = inv[old];
    for (std::size_t k = rp[old]; k < rp[old + 1]; ++k) {
      const std::size_t j = inv[ci[k]];
      if (j <= i) env_[start_[i] + (j - first_[i])] += va[k];
    }
  }

  const double floor = 1e-15 * max_diag;
  for (std::size_t i = 0; i < n; ++i) {
    double* li = env_.data() + start_[i];
    const std::size_t fi = first_[i];
    for (std::size_t j = fi; j < i; ++j) {
      const double* lj = env_.data() + start_[j];
      const std::size_t fj = first_[j];
      const std::size_t k0 = std::max(fi, fj);
      double s = li[j - fi];
      for (std::size_t k = k0; k < j; ++k) s -= li[k - fi] * lj[k - fj];
      li[j - fi] = s / lj[j - fj];
    }
    double d = li[i - fi];
    for (std::size_t k = fi; k < i; ++k) d -= li[k - fi] * li[k - fi];
    if (!(d > floor))
      throw NotSpd("SparseCholesky: nonpositive pivot at row " + std::to_string(perm_[i]),
                   static_cast<long>(perm_[i]));
    li[i - fi] = std::sqrt(d);
  }
}

Vector SparseCholesky::forward(std::span<const double> rhs) const {
  const std::size_t n = size();
  if (rhs.size() != n) throw DimensionMismatch("SparseCholesky: rhs length mismatch");
  Vector y(n);
  for (std::size_t k = 0; k < n; ++k) y[k] = rhs[perm_[k]];
  for (std::size_t i = 0; i < n; ++i) {
    const double* li = env_.data() + start_[i];
    double s = y[i];
    for (std::size_t k = first_[i]; k < i; ++k) s -= li[k - first_[i]] * y[k];
    y[i] = s / li[i - first_[i]];
  }
  return y;
}

Vector SparseCholesky::backward(std::span<const double> yin) const {
  const std::size_t n = size();
  if (yin.size() != n) throw DimensionMismatch("SparseCholesky: vector length mismatch");
  Vector y(yin.begin(), yin.end());
  for (std::size_t i = n; i-- > 0;) {
    const double* li = env_.data() + start_[i];
    y[i] /= li[i - first_[i]];
    const double yi = y[i];
    for (std::size_t k = first_[i]; k < i; ++k) y[k] -= li[k - first_[i]] * yi;
  }
  Vector x(n);
  for (std::size_t k = 0; k < n; ++k) x[perm_[k]] = y[k];
  return x;
}

Vector SparseCholesky::solve(std::span<const double> rhs) const { return backward(forward(rhs)); }

SparseSolveReport solve_sparse_spd_report(const SparseMat& a, std::span<const double> rhs) {
  if (a.rows() != rhs.size()) throw DimensionMismatch("solve_sparse_spd: rhs length mismatch");
  const SparseCholesky chol(a);
  SparseSolveReport rep;
  rep.x = chol.solve(rhs);
  const double bnorm = norm2(rhs);
  auto residual = [&](const Vector& x) {
    Vector r = a.multiply(x);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = rhs[i] - r[i];
    return r;
  };
  Vector r = residual(rep.x);
  rep.relative_residual = bnorm > 0 ? norm2(r) / bnorm : norm2(r);
  if (rep.relative_residual > 1e-12) {
    const Vector dx = chol.solve(r);
    for (std::size_t i = 0; i < dx.size(); ++i) rep.x[i] += dx[i];
    r = residual(rep.x);
    rep.relative_residual = bnorm > 0 ? norm2(r) / bnorm : norm2(r);
  }
  if (rep.relative_residual > 1e-9)
    throw Singular("solve_sparse_spd: relative residual " + std::to_string(rep.relative_residual) +
                   " exceeds 1e-9");
  return rep;
}

Vector solve_sparse_spd(const SparseMat& a, std::span<const double> rhs) {
  return solve_sparse_spd_report(a, rhs).x;
}

}  // namespace dpg
