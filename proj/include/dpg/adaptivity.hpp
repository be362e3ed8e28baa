#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dpg/mesh.hpp"
#include "dpg/poisson2d.hpp"

namespace dpg::adapt {

/// ⌈n/2⌉ ids with the largest indicators, ties to the smaller id, returned in
/// ascending id order.
std::vector<std::size_t> mark_top_half(std::span<const double> eta);

/// Share of triangles whose centroid lies within `radius` of the origin.
double near_origin_fraction(const TriMesh& mesh, double radius = 0.25);

/// f = exp(−100 (x² + y²)).
poisson::ScalarFn peak_load();

struct IterationRecord {
  std::size_t iter = 0;
  TriMesh mesh;
  Vector eta_k;
  double eta = 0.0;
  double near_origin_fraction = 0.0;
  double solver_residual = 0.0;
  std::vector<std::size_t> marked;  ///< empty on the final iterate
};

/// Solve, localize, mark, bisect, `iterations` times; the final mesh is solved
/// too, so the history has iterations + 1 entries.
std::vector<IterationRecord> adapt_loop(int p, int r, const poisson::ScalarFn& f, TriMesh initial,
                                        std::size_t iterations);

}  // namespace dpg::adapt
