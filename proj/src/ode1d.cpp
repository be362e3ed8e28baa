#include "dpg/ode1d.hpp"

#include <algorithm>
#include <cmath>

#include "dpg/errors.hpp"
#include "dpg/quadrature.hpp"

namespace dpg::ode1d {

namespace {

constexpr int kMaxLoadPoints = 2048;

std::size_t locate(const Mesh1D& mesh, double x) {
  const auto& v = mesh.vertices();
  const auto it = std::upper_bound(v.begin(), v.end(), x);
  const std::size_t k = static_cast<std::size_t>(it - v.begin());
  return std::clamp<std::size_t>(k, 1, mesh.num_elements()) - 1;
}

double eval_local(const LagrangeIntervalBasis& basis, std::span<const double> coeffs, double t) {
  const Vector phi = basis.eval(t).values;
  double s = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i) s += coeffs[i] * phi[i];
  return s;
}

// ∫₀¹ of products of basis values/derivatives on the reference interval.
struct RefTables {
  IntervalRule rule;
  std::vector<BasisValues> at;
};

RefTables tabulate(const LagrangeIntervalBasis& basis, int npoints) {
  RefTables t{gauss_legendre(npoints), {}};
  for (double x : t.rule.points) t.at.push_back(basis.eval(x));
  return t;
}

DenseMat reference_mass(const LagrangeIntervalBasis& basis) {
  const std::size_t n = basis.size();
  const RefTables t = tabulate(basis, static_cast<int>(n) + 1);
  DenseMat m(n, n);
  for (std::size_t q = 0; q < t.rule.points.size(); ++q)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        m(i, j) += t.rule.weights[q] * t.at[q].values[i] * t.at[q].values[j];
  return m;
}

DenseMat reference_stiffness(const LagrangeIntervalBasis& basis) {
  const std::size_t n = basis.size();
  const RefTables t = tabulate(basis, static_cast<int>(n) + 1);
  DenseMat m(n, n);
  for (std::size_t q = 0; q < t.rule.points.size(); ++q)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) m(i, j) += t.rule.weights[q] * t.at[q].dx[i] * t.at[q].dx[j];
  return m;
}

// ∫₀¹ trial_j · test_i′ (deriv_test) or trial_j′ · test_i (otherwise).
DenseMat reference_mixed(const LagrangeIntervalBasis& test, const LagrangeIntervalBasis& trial,
                         bool deriv_test) {
  const int npts = static_cast<int>(test.size() + trial.size()) / 2 + 2;
  const IntervalRule rule = gauss_legendre(npts);
  DenseMat m(test.size(), trial.size());
  for (std::size_t q = 0; q < rule.points.size(); ++q) {
    const BasisValues y = test.eval(rule.points[q]);
    const BasisValues u = trial.eval(rule.points[q]);
    for (std::size_t i = 0; i < test.size(); ++i)
      for (std::size_t j = 0; j < trial.size(); ++j)
        m(i, j) += rule.weights[q] * (deriv_test ? y.dx[i] * u.values[j] : y.values[i] * u.dx[j]);
  }
  return m;
}

Vector zero_or_load(const Fn& f, double a, double b, const LagrangeIntervalBasis& basis) {
  if (!f) return Vector(basis.size(), 0.0);
  return adaptive_load(f, a, b, basis);
}

}  // namespace

Problem layer_solution(double big_m) {
  if (!(big_m > 0.0)) throw InvalidArgument("layer_solution: M must be positive");
  const double denom = -std::expm1(-big_m);  // 1 − e^{−M}
  Problem pr;
  pr.u = [big_m, denom](double x) { return std::exp(-big_m) * std::expm1(big_m * x) / denom; };
  pr.f = [big_m, denom](double x) { return big_m * std::exp(big_m * (x - 1.0)) / denom; };
  return pr;
}

Vector adaptive_load(const Fn& f, double a, double b, const LagrangeIntervalBasis& basis) {
  const double h = b - a;
  const std::size_t n = basis.size();
  auto integrate = [&](int npts) {
    const IntervalRule rule = gauss_legendre(npts);
    Vector out(n, 0.0);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const double w = rule.weights[q] * h * f(a + h * rule.points[q]);
      const Vector phi = basis.eval(rule.points[q]).values;
      for (std::size_t i = 0; i < n; ++i) out[i] += w * phi[i];
    }
    return out;
  };
  int npts = static_cast<int>(n) + 2;
  Vector prev = integrate(npts);
  while (npts < kMaxLoadPoints) {
    npts *= 2;
    Vector cur = integrate(npts);
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) change = std::max(change, std::abs(cur[i] - prev[i]));
    if (change < 1e-12 * std::max(1.0, max_abs(cur))) return cur;
    prev = std::move(cur);
  }
  throw NonConvergence("adaptive_load: quadrature did not settle", npts);
}

// ---------------------------------------------------------------------------

NoIbpFormulation::NoIbpFormulation(int p, Mesh1D mesh, Fn f)
    : p_(p), mesh_(std::move(mesh)), f_(std::move(f)), trial_(std::max(p, 0)), test_(std::max(p, 0)) {
  if (p < 1) throw DegreeTooLow("NoIBP formulation needs p >= 1");
}

std::vector<std::ptrdiff_t> NoIbpFormulation::dofs(std::size_t k) const {
  std::vector<std::ptrdiff_t> d(static_cast<std::size_t>(p_) + 1);
  for (int l = 0; l <= p_; ++l)
    d[static_cast<std::size_t>(l)] = static_cast<std::ptrdiff_t>(k) * p_ + l - 1;
  return d;  // node x₀ maps to -1: u(0) = 0 eliminated
}

ElementBlock NoIbpFormulation::element(std::size_t k) const {
  const double h = mesh_.length(k);
  ElementBlock blk;
  blk.gram = h * reference_mass(test_);
  blk.bmat = reference_mixed(test_, trial_, false);
  blk.load = zero_or_load(f_, mesh_.left(k), mesh_.right(k), test_);
  blk.trial_dofs = dofs(k);
  return blk;
}

SparseMat NoIbpFormulation::trial_norm_gram() const {
  const DenseMat mass = reference_mass(trial_);
  const DenseMat stiff = reference_stiffness(trial_);
  TripletList trip(num_trial_dofs(), num_trial_dofs());
  for (std::size_t k = 0; k < num_elements(); ++k) {
    const double h = mesh_.length(k);
    const auto d = dofs(k);
    trip.add_block(d, d, h * mass + (1.0 / h) * stiff);
  }
  return trip.compress();
}

double NoIbpFormulation::eval(std::span<const double> x, double pt) const {
  const std::size_t k = locate(mesh_, pt);
  const auto d = dofs(k);
  Vector c(d.size(), 0.0);
  for (std::size_t l = 0; l < d.size(); ++l)
    if (d[l] >= 0) c[l] = x[static_cast<std::size_t>(d[l])];
  return eval_local(trial_, c, (pt - mesh_.left(k)) / mesh_.length(k));
}

// ---------------------------------------------------------------------------

OneElemFormulation::OneElemFormulation(int p, Fn f)
    : p_(p), f_(std::move(f)), trial_(std::max(p, 0)), test_(std::max(p, 0) + 1) {
  if (p < 0) throw InvalidArgument("OneElem formulation: negative degree");
}

ElementBlock OneElemFormulation::element(std::size_t k) const {
  if (k != 0) throw InvalidArgument("OneElem formulation has a single element");
  const std::size_t ny = test_.size();
  const std::size_t nu = trial_.size();
  const Vector y1 = test_.eval(1.0).values;

  ElementBlock blk;
  blk.gram = reference_stiffness(test_);
  for (std::size_t i = 0; i < ny; ++i)
    for (std::size_t j = 0; j < ny; ++j) blk.gram(i, j) += y1[i] * y1[j];

  const DenseMat uyx = reference_mixed(test_, trial_, true);
  blk.bmat = DenseMat(ny, nu + 1);
  for (std::size_t i = 0; i < ny; ++i) {
    for (std::size_t j = 0; j < nu; ++j) blk.bmat(i, j) = -uyx(i, j);
    blk.bmat(i, nu) = y1[i];
  }
  blk.load = zero_or_load(f_, 0.0, 1.0, test_);
  for (std::size_t j = 0; j <= nu; ++j) blk.trial_dofs.push_back(static_cast<std::ptrdiff_t>(j));
  return blk;
}

SparseMat OneElemFormulation::trial_norm_gram() const {
  const std::size_t nu = trial_.size();
  DenseMat g(nu + 1, nu + 1);
  const DenseMat mass = reference_mass(trial_);
  for (std::size_t i = 0; i < nu; ++i)
    for (std::size_t j = 0; j < nu; ++j) g(i, j) = mass(i, j);
  g(nu, nu) = 1.0;
  return SparseMat::from_dense(g);
}

double OneElemFormulation::eval(std::span<const double> x, double pt) const {
  return eval_local(trial_, x.subspan(0, trial_.size()), pt);
}

// ---------------------------------------------------------------------------

Dpg1dFormulation::Dpg1dFormulation(int p, Mesh1D mesh, Fn f)
    : p_(p), mesh_(std::move(mesh)), f_(std::move(f)), trial_(std::max(p, 0)), test_(std::max(p, 0) + 1) {
  if (p < 0) throw InvalidArgument("hybrid 1D formulation: negative degree");
}

ElementBlock Dpg1dFormulation::element(std::size_t k) const {
  const double h = mesh_.length(k);
  const std::size_t ny = test_.size();
  const std::size_t nu = trial_.size();
  const Vector y0 = test_.eval(0.0).values;
  const Vector y1 = test_.eval(1.0).values;
  const bool has_left = k > 0;

  ElementBlock blk;
  blk.gram = (1.0 / h) * reference_stiffness(test_);
  for (std::size_t i = 0; i < ny; ++i)
    for (std::size_t j = 0; j < ny; ++j) blk.gram(i, j) += y1[i] * y1[j];

  // −∫ u y′ dx: the 1/h of y′ cancels the Jacobian.
  const DenseMat uyx = reference_mixed(test_, trial_, true);
  blk.bmat = DenseMat(ny, nu + (has_left ? 2 : 1));
  for (std::size_t i = 0; i < ny; ++i) {
    for (std::size_t j = 0; j < nu; ++j) blk.bmat(i, j) = -uyx(i, j);
    blk.bmat(i, nu) = y1[i];
    if (has_left) blk.bmat(i, nu + 1) = -y0[i];
  }
  blk.load = zero_or_load(f_, mesh_.left(k), mesh_.right(k), test_);

  for (std::size_t j = 0; j < nu; ++j) blk.trial_dofs.push_back(static_cast<std::ptrdiff_t>(k * nu + j));
  blk.trial_dofs.push_back(static_cast<std::ptrdiff_t>(flux_dof(k + 1)));
  if (has_left) blk.trial_dofs.push_back(static_cast<std::ptrdiff_t>(flux_dof(k)));
  return blk;
}

SparseMat Dpg1dFormulation::trial_norm_gram() const {
  const DenseMat mass = reference_mass(trial_);
  const std::size_t nu = trial_.size();
  TripletList trip(num_trial_dofs(), num_trial_dofs());
  for (std::size_t k = 0; k < num_elements(); ++k) {
    std::vector<std::ptrdiff_t> d(nu);
    for (std::size_t j = 0; j < nu; ++j) d[j] = static_cast<std::ptrdiff_t>(k * nu + j);
    trip.add_block(d, d, mesh_.length(k) * mass);
  }
  for (std::size_t i = 1; i <= num_elements(); ++i) trip.add(flux_dof(i), flux_dof(i), 1.0);
  return trip.compress();
}

double Dpg1dFormulation::eval(std::span<const double> x, double pt) const {
  return eval_broken(p_, mesh_, x.subspan(0, num_interior_dofs()), pt);
}

// ---------------------------------------------------------------------------

Vector l2_projection(int p, const Mesh1D& mesh, const Fn& u) {
  const LagrangeIntervalBasis basis(p);
  const DenseMat mass = reference_mass(basis);
  const Cholesky chol(mass);
  const std::size_t n = basis.size();
  Vector out(mesh.num_elements() * n);
  for (std::size_t k = 0; k < mesh.num_elements(); ++k) {
    const double h = mesh.length(k);
    Vector rhs = adaptive_load(u, mesh.left(k), mesh.right(k), basis);
    for (double& v : rhs) v /= h;
    const Vector c = chol.solve(rhs);
    std::copy(c.begin(), c.end(), out.begin() + static_cast<std::ptrdiff_t>(k * n));
  }
  return out;
}

double eval_broken(int p, const Mesh1D& mesh, std::span<const double> coeffs, double pt) {
  const LagrangeIntervalBasis basis(p);
  const std::size_t k = locate(mesh, pt);
  const std::size_t n = basis.size();
  return eval_local(basis, coeffs.subspan(k * n, n), (pt - mesh.left(k)) / mesh.length(k));
}

double l2_error(const Fn& u, const Fn& uh, const Mesh1D& mesh) {
  const IntervalRule rule = gauss_legendre(64);
  double s = 0.0;
  for (std::size_t k = 0; k < mesh.num_elements(); ++k) {
    const double a = mesh.left(k), h = mesh.length(k);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const double x = a + h * rule.points[q];
      const double e = u(x) - uh(x);
      s += rule.weights[q] * h * e * e;
    }
  }
  return std::sqrt(s);
}

// ---------------------------------------------------------------------------

double hybrid_containment_check(int p, const Mesh1D& mesh) {
  const Dpg1dFormulation form(p, mesh, nullptr);
  const std::size_t m = mesh.num_elements();
  const std::size_t nt = form.test_basis().size();
  const std::size_t ny = m * nt;
  const std::size_t nx = form.num_trial_dofs();

  DenseMat g(ny, ny), b(ny, nx);
  for (std::size_t k = 0; k < m; ++k) {
    const ElementBlock blk = form.element(k);
    const std::size_t off = k * nt;
    for (std::size_t i = 0; i < nt; ++i) {
      for (std::size_t j = 0; j < nt; ++j) g(off + i, off + j) = blk.gram(i, j);
      for (std::size_t j = 0; j < blk.trial_size(); ++j)
        b(off + i, static_cast<std::size_t>(blk.trial_dofs[j])) += blk.bmat(i, j);
    }
  }
  const Cholesky gchol(g);

  // Columns of û₁…û_{m−1}: Cᵀy = 0 is continuity of y at interior nodes.
  const std::size_t nc = m - 1;
  DenseMat c(ny, nc);
  for (std::size_t i = 1; i < m; ++i) c.set_col(i - 1, b.col(form.flux_dof(i)));
  std::vector<std::size_t> x0;
  for (std::size_t j = 0; j < form.num_interior_dofs(); ++j) x0.push_back(j);
  x0.push_back(form.flux_dof(m));

  const DenseMat ginv_c = gchol.solve(c);
  const DenseMat schur = c.transpose() * ginv_c;
  const DenseMat tb = gchol.solve(b);  // hybrid optimal test functions
  const DenseMat normal = b.transpose() * tb;
  const Cholesky nchol(normal);

  double worst = 0.0;
  for (std::size_t j : x0) {
    const Vector bj = b.col(j);
    Vector t = gchol.solve(bj);
    if (nc > 0) {
      const Vector lambda = Cholesky(schur).solve(mul_transpose(c, bj));
      const Vector corr = ginv_c * lambda;
      for (std::size_t i = 0; i < ny; ++i) t[i] -= corr[i];
    }
    const double tn = std::sqrt(dot(t, g * t));
    if (tn == 0.0) continue;
    for (double& v : t) v /= tn;
    // G-orthogonal projection onto span(G⁻¹B): coefficients solve (BᵀG⁻¹B)a = Bᵀt.
    const Vector a = nchol.solve(mul_transpose(b, t));
    const Vector proj = tb * a;
    Vector r(ny);
    for (std::size_t i = 0; i < ny; ++i) r[i] = t[i] - proj[i];
    worst = std::max(worst, std::sqrt(std::max(0.0, dot(r, g * r))));
  }
  return worst;
}

}  // namespace dpg::ode1d
