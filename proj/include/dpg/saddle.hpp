#pragma once

#include <span>

#include "dpg/dense.hpp"
#include "dpg/sparse.hpp"

namespace dpg {

struct SaddleSolution {
  Vector eps;  ///< test-space block (residual representer)
  Vector x;    ///< trial-space block
  double residual_top = 0.0;     ///< ‖M eps + B x − f‖ / ‖f‖
  double residual_bottom = 0.0;  ///< ‖Bᵀ eps − g‖ / (‖B‖_F ‖eps‖ + ‖g‖)
};

/// Solves the mixed system
///
///     [ M   B ] [eps]   [f]
///     [ Bᵀ  0 ] [ x ] = [g]
///
/// without forming BᵀM⁻¹B. With M = L Lᵀ and C = L⁻¹ B = Q R, the bottom row
/// becomes Rᵀ(Qᵀ L⁻¹ f − R x) = g, so x = R⁻¹(Qᵀ L⁻¹ f − R⁻ᵀ g) and
/// eps = M⁻¹(f − B x). C is held densely, so this is meant for
/// cross-validation at desk scale.
SaddleSolution solve_saddle(const SparseMat& m, const SparseMat& b, std::span<const double> f,
                            std::span<const double> g);

}  // namespace dpg
