#include "dpg/dense.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dpg/errors.hpp"

namespace dpg {

DenseMat DenseMat::identity(std::size_t n) {
  DenseMat m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Vector DenseMat::col(std::size_t j) const {
  Vector v(rows_);
  for (std::size_t i = 0; i < rows_; ++i) v[i] = (*this)(i, j);
  return v;
}

void DenseMat::set_col(std::size_t j, std::span<const double> v) {
  if (v.size() != rows_) throw DimensionMismatch("set_col: length mismatch");
  for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = v[i];
}

DenseMat DenseMat::transpose() const {
  DenseMat t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

double DenseMat::max_abs() const { return dpg::max_abs(data_); }

double DenseMat::frobenius() const { return norm2(data_); }

bool DenseMat::is_symmetric(double rel_tol) const {
  if (rows_ != cols_) return false;
  const double tol = rel_tol * max_abs();
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = i + 1; j < cols_; ++j)
      if (std::abs((*this)(i, j) - (*this)(j, i)) > tol) return false;
  return true;
}

DenseMat operator*(const DenseMat& a, const DenseMat& b) {
  if (a.cols() != b.rows()) throw DimensionMismatch("matrix product: inner dimensions differ");
  DenseMat c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

namespace {
DenseMat combine(const DenseMat& a, const DenseMat& b, double sb) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionMismatch("matrix sum: shapes differ");
  DenseMat c(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) = a(i, j) + sb * b(i, j);
  return c;
}
}  // namespace

DenseMat operator+(const DenseMat& a, const DenseMat& b) { return combine(a, b, 1.0); }
DenseMat operator-(const DenseMat& a, const DenseMat& b) { return combine(a, b, -1.0); }

DenseMat operator*(double s, const DenseMat& a) {
  DenseMat c(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) = s * a(i, j);
  return c;
}

Vector operator*(const DenseMat& a, std::span<const double> x) {
  if (a.cols() != x.size()) throw DimensionMismatch("matvec: length mismatch");
  Vector y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) y[i] = dot(a.row(i), x);
  return y;
}

Vector mul_transpose(const DenseMat& a, std::span<const double> x) {
  if (a.rows() != x.size()) throw DimensionMismatch("transposed matvec: length mismatch");
  Vector y(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto r = a.row(i);
    for (std::size_t j = 0; j < a.cols(); ++j) y[j] += r[j] * x[i];
  }
  return y;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionMismatch("dot: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double max_abs(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

Vector axpy(double alpha, std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DimensionMismatch("axpy: length mismatch");
  Vector r(y.begin(), y.end());
  for (std::size_t i = 0; i < x.size(); ++i) r[i] += alpha * x[i];
  return r;
}

// ---------------------------------------------------------------------------
// Cholesky

Cholesky::Cholesky(const DenseMat& a) {
  if (a.rows() != a.cols()) throw DimensionMismatch("Cholesky: matrix is not square");
  if (!a.is_symmetric(1e-12)) throw NotSpd("Cholesky: matrix is not symmetric");
  const std::size_t n = a.rows();
  double max_diag = 0.0;
  for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, std::abs(a(i, i)));
  const double floor = 1e-15 * max_diag;

  l_ = DenseMat(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l_(j, k) * l_(j, k);
    if (!(d > floor))
      throw NotSpd("Cholesky: nonpositive pivot " + std::to_string(d) + " at row " +
                       std::to_string(j),
                   static_cast<long>(j));
    const double ljj = std::sqrt(d);
    l_(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l_(i, k) * l_(j, k);
      l_(i, j) = s / ljj;
    }
  }
}

Vector Cholesky::solve_lower(std::span<const double> rhs) const {
  const std::size_t n = size();
  if (rhs.size() != n) throw DimensionMismatch("Cholesky: rhs length mismatch");
  Vector y(rhs.begin(), rhs.end());
  for (std::size_t i = 0; i < n; ++i) {
    double s = y[i];
    for (std::size_t k = 0; k < i; ++k) s -= l_(i, k) * y[k];
    y[i] = s / l_(i, i);
  }
  return y;
}

Vector Cholesky::solve_upper(std::span<const double> rhs) const {
  const std::size_t n = size();
  if (rhs.size() != n) throw DimensionMismatch("Cholesky: rhs length mismatch");
  Vector x(rhs.begin(), rhs.end());
  for (std::size_t ii = n; ii-- > 0;) {
    double s = x[ii];
    for (std::size_t k = ii + 1; k < n; ++k) s -= l_(k, ii) * x[k];
    x[ii] = s / l_(ii, ii);
  }
  return x;
}

Vector Cholesky::solve(std::span<const double> rhs) const { return solve_upper(solve_lower(rhs)); }

DenseMat Cholesky::solve(const DenseMat& rhs) const {
  DenseMat x(rhs.rows(), rhs.cols());
  for (std::size_t j = 0; j < rhs.cols(); ++j) x.set_col(j, solve(rhs.col(j)));
  return x;
}

DenseMat Cholesky::solve_lower(const DenseMat& rhs) const {
  DenseMat x(rhs.rows(), rhs.cols());
  for (std::size_t j = 0; j < rhs.cols(); ++j) x.set_col(j, solve_lower(rhs.col(j)));
  return x;
}

Vector solve_spd_dense(const DenseMat& a, std::span<const double> rhs) {
  if (a.rows() != rhs.size()) throw DimensionMismatch("solve_spd_dense: rhs length mismatch");
  return Cholesky(a).solve(rhs);
}

// ---------------------------------------------------------------------------
// Householder QR

HouseholderQr::HouseholderQr(DenseMat a) : qr_(std::move(a)) {
  const std::size_t m = qr_.rows();
  const std::size_t n = qr_.cols();
  if (m < n) throw DimensionMismatch("HouseholderQr: need rows >= cols");
  beta_.assign(n, 0.0);
  rdiag_.assign(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    double sigma = 0.0;
    for (std::size_t i = k; i < m; ++i) sigma += qr_(i, k) * qr_(i, k);
    const double norm = std::sqrt(sigma);
    if (norm == 0.0) {
      rdiag_[k] = 0.0;
      continue;
    }
    const double alpha = qr_(k, k) > 0 ? -norm : norm;
    // v = x - alpha e1, stored in place (v_k in qr_(k,k)).
    qr_(k, k) -= alpha;
    const double vtv = sigma - 2.0 * alpha * (qr_(k, k) + alpha) + alpha * alpha;
    beta_[k] = vtv > 0 ? 2.0 / vtv : 0.0;
    for (std::size_t j = k + 1; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = k; i < m; ++i) s += qr_(i, k) * qr_(i, j);
      s *= beta_[k];
      for (std::size_t i = k; i < m; ++i) qr_(i, j) -= s * qr_(i, k);
    }
    rdiag_[k] = alpha;
  }
}

Vector HouseholderQr::apply_qt(std::span<const double> b) const {
  const std::size_t m = rows();
  if (b.size() != m) throw DimensionMismatch("HouseholderQr: rhs length mismatch");
  Vector y(b.begin(), b.end());
  for (std::size_t k = 0; k < cols(); ++k) {
    if (beta_[k] == 0.0) continue;
    double s = 0.0;
    for (std::size_t i = k; i < m; ++i) s += qr_(i, k) * y[i];
    s *= beta_[k];
    for (std::size_t i = k; i < m; ++i) y[i] -= s * qr_(i, k);
  }
  return y;
}

Vector HouseholderQr::apply_q(std::span<const double> yin) const {
  const std::size_t m = rows();
  if (yin.size() != m) throw DimensionMismatch("HouseholderQr: vector length mismatch");
  Vector y(yin.begin(), yin.end());
  for (std::size_t k = cols(); k-- > 0;) {
    if (beta_[k] == 0.0) continue;
    double s = 0.0;
    for (std::size_t i = k; i < m; ++i) s += qr_(i, k) * y[i];
    s *= beta_[k];
    for (std::size_t i = k; i < m; ++i) y[i] -= s * qr_(i, k);
  }
  return y;
}

Vector HouseholderQr::solve_r(std::span<const double> y) const {
  const std::size_t n = cols();
  if (y.size() < n) throw DimensionMismatch("HouseholderQr: vector too short");
  Vector x(n);
  for (std::size_t ii = n; ii-- > 0;) {
    double s = y[ii];
    for (std::size_t j = ii + 1; j < n; ++j) s -= qr_(ii, j) * x[j];
    x[ii] = s / rdiag_[ii];
  }
  return x;
}

Vector HouseholderQr::solve_rt(std::span<const double> y) const {
  const std::size_t n = cols();
  if (y.size() != n) throw DimensionMismatch("HouseholderQr: vector length mismatch");
  Vector x(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = y[i];
    for (std::size_t k = 0; k < i; ++k) s -= qr_(k, i) * x[k];
    x[i] = s / rdiag_[i];
  }
  return x;
}

double HouseholderQr::diag_ratio() const {
  if (rdiag_.empty()) return 1.0;
  double lo = std::abs(rdiag_[0]);
  double hi = lo;
  for (double d : rdiag_) {
    lo = std::min(lo, std::abs(d));
    hi = std::max(hi, std::abs(d));
  }
  return hi > 0 ? lo / hi : 0.0;
}

// ---------------------------------------------------------------------------
// Jacobi eigenvalue iteration

SymmetricEigen symmetric_eigen(const DenseMat& input) {
  if (input.rows() != input.cols()) throw DimensionMismatch("symmetric_eigen: not square");
  const std::size_t n = input.rows();
  DenseMat a = input;
  DenseMat v = DenseMat::identity(n);
  const double scale = std::max(a.max_abs(), 1e-300);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(off) <= 1e-15 * scale) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });
  SymmetricEigen out{Vector(n), DenseMat(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
  }
  return out;
}

}  // namespace dpg
