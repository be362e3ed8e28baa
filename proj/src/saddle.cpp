#include "dpg/saddle.hpp"

#include <algorithm>
#include <string>

#include "dpg/errors.hpp"

namespace dpg {

SaddleSolution solve_saddle(const SparseMat& m, const SparseMat& b, std::span<const double> f,
                            std::span<const double> g) {
  const std::size_t ny = m.rows();
  const std::size_t nx = b.cols();
  if (m.cols() != ny || b.rows() != ny || f.size() != ny || g.size() != nx)
    throw DimensionMismatch("solve_saddle: block sizes are inconsistent");
  if (nx > ny) throw RankDeficient("solve_saddle: B has more columns than rows");
  if (!m.is_symmetric(1e-12)) throw NotSpd("solve_saddle: M is not symmetric");

  // C = L⁻¹ P B in the factor's permuted coordinates.
  const SparseCholesky chol(m);
  DenseMat c(ny, nx);
  const SparseMat bt = b.transpose();
  {
    const auto rp = bt.row_ptr();
    const auto ci = bt.col_index();
    const auto va = bt.values();
    Vector col(ny);
    for (std::size_t j = 0; j < nx; ++j) {
      std::fill(col.begin(), col.end(), 0.0);
      for (std::size_t k = rp[j]; k < rp[j + 1]; ++k) col[ci[k]] = va[k];
      c.set_col(j, chol.forward(col));
    }
  }

  const HouseholderQr qr(c);
  if (qr.diag_ratio() < 1e-12)
    throw RankDeficient("solve_saddle: B is numerically rank deficient (|R| ratio " +
                        std::to_string(qr.diag_ratio()) + ")");

  const Vector lf = chol.forward(f);
  const Vector qtlf = qr.apply_qt(lf);
  const Vector w = qr.solve_rt(g);
  Vector y(qtlf.begin(), qtlf.begin() + static_cast<std::ptrdiff_t>(nx));
  for (std::size_t i = 0; i < nx; ++i) y[i] -= w[i];

  SaddleSolution out;
  out.x = qr.solve_r(y);

  const Vector bx = b.multiply(out.x);
  Vector r(ny);
  for (std::size_t i = 0; i < ny; ++i) r[i] = f[i] - bx[i];
  out.eps = chol.solve(r);

  const Vector meps = m.multiply(out.eps);
  Vector top(ny);
  for (std::size_t i = 0; i < ny; ++i) top[i] = meps[i] + bx[i] - f[i];
  const double fn = norm2(f);
  out.residual_top = norm2(top) / (fn > 0 ? fn : 1.0);
  Vector bot = b.multiply_transpose(out.eps);
  for (std::size_t i = 0; i < nx; ++i) bot[i] -= g[i];
  const double scale = b.frobenius() * norm2(out.eps) + norm2(g);
  out.residual_bottom = norm2(bot) / (scale > 0 ? scale : 1.0);
  return out;
}

}  // namespace dpg
