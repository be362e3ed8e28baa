#include "dpg/engine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "dpg/errors.hpp"

namespace dpg {

namespace {

Cholesky factor_gram(const DenseMat& gram, std::size_t element) {
  try {
    return Cholesky(gram);
  } catch (const NotSpd& e) {
    throw NotSpd("element " + std::to_string(element) + ": " + e.what(),
                 static_cast<long>(element));
  }
}

std::vector<std::size_t> element_order(std::size_t n, const std::vector<std::size_t>& requested) {
  if (requested.empty()) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    return order;
  }
  std::vector<std::size_t> sorted = requested;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < n; ++i)
    if (sorted.size() != n || sorted[i] != i)
      throw InvalidArgument("assemble: visit order is not a permutation of the elements");
  return requested;
}

DpgSystem init_system(const DpgFormulation& form) {
  DpgSystem sys;
  sys.n_interior = form.num_interior_dofs();
  sys.n_trace = form.num_trace_dofs();
  sys.rhs.assign(sys.num_trial(), 0.0);
  return sys;
}

void scatter_rhs(Vector& rhs, const ElementBlock& blk, std::span<const double> local) {
  for (std::size_t j = 0; j < blk.trial_dofs.size(); ++j)
    if (blk.trial_dofs[j] >= 0) rhs[static_cast<std::size_t>(blk.trial_dofs[j])] += local[j];
}

double scale_of(const DpgSystem& system, const std::vector<Vector>& eps) {
  double bf = 0.0, en = 0.0, ln = 0.0;
  for (std::size_t k = 0; k < system.elements.size(); ++k) {
    const auto& blk = system.elements[k];
    bf += blk.bmat.frobenius() * blk.bmat.frobenius();
    en += dot(eps[k], eps[k]);
    ln += dot(blk.load, blk.load);
  }
  const double s = std::sqrt(bf) * std::sqrt(en) + std::sqrt(ln);
  return s > 0 ? s : 1.0;
}

void require_elements(const DpgSystem& system, std::size_t eps_size = SIZE_MAX) {
  if (!system.retains_elements())
    throw MissingElementData("system was assembled without retained element data");
  if (eps_size != SIZE_MAX && eps_size != system.elements.size())
    throw DimensionMismatch("per-element vector count does not match the system");
}

}  // namespace

DenseMat trial_to_test(const DenseMat& gram, const DenseMat& bmat) {
  if (gram.rows() != bmat.rows()) throw DimensionMismatch("trial_to_test: Gram and B row counts differ");
  return Cholesky(gram).solve(bmat);
}

DpgSystem assemble_normal(const DpgFormulation& form, const AssembleOptions& opts) {
  const std::size_t ne = form.num_elements();
  DpgSystem sys = init_system(form);
  TripletList trip(sys.num_trial(), sys.num_trial());
  std::vector<ElementBlock> blocks(ne);
  std::vector<Vector> local_rhs(ne);

  for (std::size_t k : element_order(ne, opts.visit_order)) {
    ElementBlock blk = form.element(k);
    if (blk.bmat.rows() != blk.test_size() || blk.load.size() != blk.test_size() ||
        blk.trial_dofs.size() != blk.trial_size())
      throw DimensionMismatch("element " + std::to_string(k) + ": inconsistent block sizes");
    const Cholesky chol = factor_gram(blk.gram, k);
    const DenseMat c = chol.solve_lower(blk.bmat);
    const Vector lw = chol.solve_lower(blk.load);
    const DenseMat ak = c.transpose() * c;
    trip.add_block(blk.trial_dofs, blk.trial_dofs, ak);
    local_rhs[k] = mul_transpose(c, lw);
    blocks[k] = std::move(blk);
  }
  // Element-id order for the load keeps rhs bitwise independent of visit order.
  for (std::size_t k = 0; k < ne; ++k) scatter_rhs(sys.rhs, blocks[k], local_rhs[k]);

  sys.a = trip.compress();
  sys.test_offsets.assign(ne + 1, 0);
  for (std::size_t k = 0; k < ne; ++k) sys.test_offsets[k + 1] = sys.test_offsets[k] + blocks[k].test_size();
  if (opts.retain_elements) sys.elements = std::move(blocks);
  return sys;
}

DpgSystem assemble_explicit_test(const DpgFormulation& form) {
  const std::size_t ne = form.num_elements();
  DpgSystem sys = init_system(form);
  TripletList trip(sys.num_trial(), sys.num_trial());
  sys.test_offsets.assign(ne + 1, 0);
  for (std::size_t k = 0; k < ne; ++k) {
    ElementBlock blk = form.element(k);
    factor_gram(blk.gram, k);
    const DenseMat t = trial_to_test(blk.gram, blk.bmat);
    // Row i: trial function e_i's test function; column j: trial e_j.
    const DenseMat ak = t.transpose() * blk.bmat;
    trip.add_block(blk.trial_dofs, blk.trial_dofs, ak);
    scatter_rhs(sys.rhs, blk, mul_transpose(t, blk.load));
    sys.test_offsets[k + 1] = sys.test_offsets[k] + blk.test_size();
    sys.elements.push_back(std::move(blk));
  }
  sys.a = trip.compress();
  return sys;
}

Vector gather(const ElementBlock& block, std::span<const double> x) {
  Vector xk(block.trial_size(), 0.0);
  for (std::size_t j = 0; j < xk.size(); ++j)
    if (block.trial_dofs[j] >= 0) xk[j] = x[static_cast<std::size_t>(block.trial_dofs[j])];
  return xk;
}

namespace {

struct LocalResidual {
  Vector eps;
  double eta;
};

LocalResidual local_residual(const ElementBlock& blk, std::span<const double> x, std::size_t k) {
  const Vector xk = gather(blk, x);
  const Vector bx = blk.bmat * xk;
  Vector r(blk.load);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= bx[i];
  const Cholesky chol = factor_gram(blk.gram, k);
  LocalResidual out{chol.solve(r), 0.0};
  // ‖ε‖²_G = rᵀ G⁻¹ r = ‖L⁻¹ r‖².
  out.eta = norm2(chol.solve_lower(r));
  return out;
}

}  // namespace

DpgSolution solve(const DpgSystem& system) {
  DpgSolution sol;
  const SparseSolveReport rep = solve_sparse_spd_report(system.a, system.rhs);
  sol.x = rep.x;
  sol.solver_residual = rep.relative_residual;
  if (system.retains_elements()) {
    sol.eps.resize(system.elements.size());
    sol.eta_k.resize(system.elements.size());
    double sum = 0.0;
    for (std::size_t k = 0; k < system.elements.size(); ++k) {
      auto lr = local_residual(system.elements[k], sol.x, k);
      sol.eps[k] = std::move(lr.eps);
      sol.eta_k[k] = lr.eta;
      sum += lr.eta * lr.eta;
    }
    sol.eta = std::sqrt(sum);
  }
  return sol;
}

Vector estimator_localize(const DpgSystem& system, std::span<const double> x) {
  require_elements(system);
  if (x.size() != system.num_trial()) throw DimensionMismatch("estimator_localize: wrong length");
  Vector eta(system.elements.size());
  for (std::size_t k = 0; k < eta.size(); ++k) eta[k] = local_residual(system.elements[k], x, k).eta;
  return eta;
}

double energy_norm(const DpgSystem& system, std::span<const double> z) {
  require_elements(system);
  if (z.size() != system.num_trial()) throw DimensionMismatch("energy_norm: wrong length");
  double sum = 0.0;
  for (std::size_t k = 0; k < system.elements.size(); ++k) {
    const auto& blk = system.elements[k];
    const Vector tz = trial_to_test(blk.gram, blk.bmat) * gather(blk, z);
    sum += dot(tz, blk.gram * tz);
  }
  return std::sqrt(std::max(sum, 0.0));
}

double energy_norm_global(const DpgSystem& system, std::span<const double> z) {
  if (z.size() != system.num_trial()) throw DimensionMismatch("energy_norm_global: wrong length");
  return std::sqrt(std::max(dot(z, system.a.multiply(z)), 0.0));
}

MixedSystem assemble_mixed(const DpgSystem& system) {
  require_elements(system);
  const std::size_t ny = system.num_test();
  TripletList m(ny, ny), b(ny, system.num_trial());
  MixedSystem out;
  out.load.assign(ny, 0.0);
  for (std::size_t k = 0; k < system.elements.size(); ++k) {
    const auto& blk = system.elements[k];
    std::vector<std::ptrdiff_t> rows(blk.test_size());
    std::iota(rows.begin(), rows.end(), static_cast<std::ptrdiff_t>(system.test_offsets[k]));
    m.add_block(rows, rows, blk.gram);
    b.add_block(rows, blk.trial_dofs, blk.bmat);
    for (std::size_t i = 0; i < blk.test_size(); ++i) out.load[system.test_offsets[k] + i] = blk.load[i];
  }
  out.m = m.compress();
  out.b = b.compress();
  return out;
}

SaddleSolution solve_mixed(const DpgSystem& system) {
  const MixedSystem mixed = assemble_mixed(system);
  const Vector zero(system.num_trial(), 0.0);
  return solve_saddle(mixed.m, mixed.b, mixed.load, zero);
}

double galerkin_orthogonality(const DpgSystem& system, const std::vector<Vector>& eps) {
  require_elements(system, eps.size());
  Vector acc(system.num_trial(), 0.0);
  for (std::size_t k = 0; k < system.elements.size(); ++k)
    scatter_rhs(acc, system.elements[k], mul_transpose(system.elements[k].bmat, eps[k]));
  return max_abs(acc) / scale_of(system, eps);
}

double test_space_orthogonality(const DpgSystem& system, const std::vector<Vector>& eps) {
  require_elements(system, eps.size());
  Vector acc(system.num_trial(), 0.0);
  for (std::size_t k = 0; k < system.elements.size(); ++k) {
    const auto& blk = system.elements[k];
    const DenseMat t = trial_to_test(blk.gram, blk.bmat);
    const Vector geps = blk.gram * eps[k];
    scatter_rhs(acc, blk, mul_transpose(t, geps));
  }
  return max_abs(acc) / scale_of(system, eps);
}

double infsup_surrogate(const DpgSystem& system, const SparseMat& xgram) {
  const std::size_t n = system.num_trial();
  if (xgram.rows() != n || xgram.cols() != n)
    throw DimensionMismatch("infsup_surrogate: trial Gram has the wrong size");
  if (n == 1) return std::sqrt(system.a.at(0, 0) / xgram.at(0, 0));

  const SparseCholesky chol(system.a);
  const std::size_t bs = std::min<std::size_t>(n, 8);
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<Vector> z(bs, Vector(n));
  for (auto& v : z)
    for (auto& e : v) e = dist(rng);

  double lambda_prev = -1.0;
  for (int it = 1; it <= 1000; ++it) {
    std::vector<Vector> y(bs), ay(bs), xy(bs);
    for (std::size_t c = 0; c < bs; ++c) {
      y[c] = chol.solve(xgram.multiply(z[c]));
      ay[c] = system.a.multiply(y[c]);
      xy[c] = xgram.multiply(y[c]);
    }
    DenseMat ar(bs, bs), xr(bs, bs);
    for (std::size_t i = 0; i < bs; ++i)
      for (std::size_t j = 0; j < bs; ++j) {
        ar(i, j) = 0.5 * (dot(y[i], ay[j]) + dot(y[j], ay[i]));
        xr(i, j) = 0.5 * (dot(y[i], xy[j]) + dot(y[j], xy[i]));
      }
    // Reduce (ar, xr) to a standard problem with xr = L Lᵀ.
    const Cholesky lx(xr);
    DenseMat c = lx.solve_lower(ar);
    c = lx.solve_lower(c.transpose());
    for (std::size_t i = 0; i < bs; ++i)
      for (std::size_t j = i + 1; j < bs; ++j) c(i, j) = c(j, i) = 0.5 * (c(i, j) + c(j, i));
    const SymmetricEigen eig = symmetric_eigen(c);
    // New X-orthonormal block: Z = Y L⁻ᵀ V.
    for (std::size_t col = 0; col < bs; ++col) {
      const Vector w = lx.solve_upper(eig.vectors.col(col));
      Vector zc(n, 0.0);
      for (std::size_t r = 0; r < bs; ++r)
        for (std::size_t i = 0; i < n; ++i) zc[i] += w[r] * y[r][i];
      z[col] = std::move(zc);
    }
    const double lambda = eig.values[0];
    if (!(lambda > 0)) throw NotSpd("infsup_surrogate: nonpositive Rayleigh quotient");
    if (lambda_prev > 0 && std::abs(lambda - lambda_prev) <= 1e-12 * lambda) return std::sqrt(lambda);
    lambda_prev = lambda;
  }
  throw NonConvergence("infsup_surrogate: inverse subspace iteration did not converge", 1000);
}

}  // namespace dpg
