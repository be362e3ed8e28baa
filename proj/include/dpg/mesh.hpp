#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace dpg {

/// Partition 0 = x₀ < x₁ < … < x_m of an interval.
class Mesh1D {
 public:
  explicit Mesh1D(std::vector<double> vertices);

  std::size_t num_elements() const { return vertices_.size() - 1; }
  const std::vector<double>& vertices() const { return vertices_; }
  double left(std::size_t i) const { return vertices_[i]; }
  double right(std::size_t i) const { return vertices_[i + 1]; }
  double length(std::size_t i) const { return vertices_[i + 1] - vertices_[i]; }

 private:
  std::vector<double> vertices_;
};

/// m equal elements on (0, 1).
Mesh1D uniform_interval_mesh(std::size_t m);

using Point2 = std::array<double, 2>;
using Tri = std::array<std::size_t, 3>;

/// Conforming triangulation with newest-vertex-bisection bookkeeping.
///
/// Local edge e of a triangle is the one opposite local vertex e. The
/// refinement edge of each triangle is stored explicitly; the vertex opposite
/// it is the newest vertex.
struct TriMesh {
  std::vector<Point2> vertices;
  std::vector<Tri> triangles;
  std::vector<int> refinement_edge;
  std::vector<int> generation;

  std::size_t num_vertices() const { return vertices.size(); }
  std::size_t num_triangles() const { return triangles.size(); }

  double signed_area(std::size_t t) const;
  Point2 centroid(std::size_t t) const;
  /// Throws NonConformingMesh / InvalidArgument when an invariant fails:
  /// positive orientation, at most two triangles per edge, no vertex lying in
  /// the interior of another triangle's edge.
  void validate() const;
};

/// n×n squares on the unit square, each split along the (i,j)-(i+1,j+1)
/// diagonal. The diagonal is every triangle's refinement edge.
TriMesh uniform_square_mesh(std::size_t n);

struct ElementMetrics {
  double area;
  double diameter;
};
std::vector<ElementMetrics> element_metrics(const TriMesh& mesh);
double min_angle(const TriMesh& mesh);

/// One edge of the mesh skeleton. The normal of an interior facet is the
/// direction lo→hi rotated by +90°; `left` is the triangle for which it is the
/// outward normal. Boundary facets store the outward normal and have
/// `right == kBoundary`.
struct Facet {
  static constexpr std::ptrdiff_t kBoundary = -1;

  std::size_t lo, hi;  ///< global vertex ids, lo < hi
  std::size_t left;
  std::ptrdiff_t right;
  Point2 normal;
  double length;

  bool is_boundary() const { return right == kBoundary; }
};

struct Skeleton {
  std::vector<Facet> facets;  ///< sorted by (lo, hi)
  /// facet id of local edge e of triangle t.
  std::vector<std::array<std::size_t, 3>> element_facets;
  /// +1 when the facet normal is outward for triangle t on local edge e.
  std::vector<std::array<int, 3>> element_signs;

  std::size_t num_boundary() const;
};

Skeleton build_skeleton(const TriMesh& mesh);

/// Newest-vertex bisection of the marked triangles plus the closure needed to
/// remove hanging vertices. Returns a new mesh; triangles are ordered by
/// (generation, parent id, child index).
TriMesh bisect(const TriMesh& mesh, const std::vector<std::size_t>& marked);

std::string mesh_to_json(const TriMesh& mesh);
TriMesh mesh_from_json(const std::string& text);

}  // namespace dpg
