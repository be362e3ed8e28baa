#include "dpg/adaptivity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dpg/engine.hpp"
#include "dpg/errors.hpp"

namespace dpg::adapt {

std::vector<std::size_t> mark_top_half(std::span<const double> eta) {
  if (eta.empty()) throw EmptyMesh("mark_top_half: no indicators");
  std::vector<std::size_t> ids(eta.size());
  std::iota(ids.begin(), ids.end(), std::size_t{0});
  std::stable_sort(ids.begin(), ids.end(), [&](std::size_t a, std::size_t b) { return eta[a] > eta[b]; });
  ids.resize((eta.size() + 1) / 2);
  std::sort(ids.begin(), ids.end());
  return ids;
}

double near_origin_fraction(const TriMesh& mesh, double radius) {
  if (mesh.num_triangles() == 0) throw EmptyMesh("near_origin_fraction: mesh has no triangles");
  std::size_t near = 0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const Point2 c = mesh.centroid(t);
    if (std::hypot(c[0], c[1]) <= radius) ++near;
  }
  return static_cast<double>(near) / static_cast<double>(mesh.num_triangles());
}

poisson::ScalarFn peak_load() {
  return [](double x, double y) { return std::exp(-100.0 * (x * x + y * y)); };
}

std::vector<IterationRecord> adapt_loop(int p, int r, const poisson::ScalarFn& f, TriMesh initial,
                                        std::size_t iterations) {
  if (iterations < 1) throw InvalidArgument("adapt_loop: need at least one iteration");
  std::vector<IterationRecord> history;
  TriMesh mesh = std::move(initial);
  for (std::size_t it = 0; it <= iterations; ++it) {
    mesh.validate();
    const poisson::PoissonFormulation form(p, r, mesh, f);
    const DpgSolution sol = solve(assemble_normal(form));
    IterationRecord rec;
    rec.iter = it;
    rec.eta_k = sol.eta_k;
    rec.eta = sol.eta;
    rec.near_origin_fraction = near_origin_fraction(mesh);
    rec.solver_residual = sol.solver_residual;
    if (it < iterations) rec.marked = mark_top_half(sol.eta_k);
    TriMesh next = it < iterations ? bisect(mesh, rec.marked) : TriMesh{};
    if (it < iterations && next.num_triangles() <= mesh.num_triangles())
      throw NonConformingMesh("adapt_loop: refinement did not add elements");
    rec.mesh = std::move(mesh);
    history.push_back(std::move(rec));
    mesh = std::move(next);
  }
  return history;
}

}  // namespace dpg::adapt
