#include "dpg/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>
#include <tuple>
#include <utility>

#include "dpg/errors.hpp"
#include "json.hpp"

namespace dpg {

namespace {

using EdgeKey = std::pair<std::size_t, std::size_t>;

EdgeKey edge_key(std::size_t a, std::size_t b) { return a < b ? EdgeKey{a, b} : EdgeKey{b, a}; }

// Local edge e runs from vertex e+1 to vertex e+2 (counter-clockwise).
std::pair<std::size_t, std::size_t> local_edge(const Tri& t, int e) {
  return {t[static_cast<std::size_t>((e + 1) % 3)], t[static_cast<std::size_t>((e + 2) % 3)]};
}

double dist(const Point2& a, const Point2& b) { return std::hypot(a[0] - b[0], a[1] - b[1]); }

}  // namespace

// ---------------------------------------------------------------------------
// 1D

Mesh1D::Mesh1D(std::vector<double> vertices) : vertices_(std::move(vertices)) {
  if (vertices_.size() < 2) throw InvalidArgument("Mesh1D: need at least one element");
  for (std::size_t i = 1; i < vertices_.size(); ++i)
    if (!(vertices_[i] > vertices_[i - 1]))
      throw InvalidArgument("Mesh1D: vertices must be strictly increasing");
}

Mesh1D uniform_interval_mesh(std::size_t m) {
  if (m == 0) throw ZeroElements("uniform_interval_mesh: zero elements");
  std::vector<double> x(m + 1);
  for (std::size_t i = 0; i <= m; ++i) x[i] = static_cast<double>(i) / static_cast<double>(m);
  return Mesh1D(std::move(x));
}

// ---------------------------------------------------------------------------
// Triangles

double TriMesh::signed_area(std::size_t t) const {
  const auto& p = vertices[triangles[t][0]];
  const auto& q = vertices[triangles[t][1]];
  const auto& r = vertices[triangles[t][2]];
  return 0.5 * ((q[0] - p[0]) * (r[1] - p[1]) - (r[0] - p[0]) * (q[1] - p[1]));
}

Point2 TriMesh::centroid(std::size_t t) const {
  Point2 c{0.0, 0.0};
  for (std::size_t v : triangles[t]) {
    c[0] += vertices[v][0] / 3.0;
    c[1] += vertices[v][1] / 3.0;
  }
  return c;
}

void TriMesh::validate() const {
  if (refinement_edge.size() != triangles.size() || generation.size() != triangles.size())
    throw InvalidArgument("TriMesh: per-triangle arrays have inconsistent lengths");
  std::map<EdgeKey, int> incidence;
  for (std::size_t t = 0; t < triangles.size(); ++t) {
    for (std::size_t v : triangles[t])
      if (v >= vertices.size()) throw InvalidArgument("TriMesh: vertex index out of range");
    if (!(signed_area(t) > 0.0))
      throw NonConformingMesh("TriMesh: triangle " + std::to_string(t) + " is not positively oriented");
    if (refinement_edge[t] < 0 || refinement_edge[t] > 2)
      throw InvalidArgument("TriMesh: refinement edge out of range");
    for (int e = 0; e < 3; ++e) {
      auto [a, b] = local_edge(triangles[t], e);
      if (++incidence[edge_key(a, b)] > 2)
        throw NonConformingMesh("TriMesh: edge shared by more than two triangles");
    }
  }
  // A hanging vertex sits strictly inside an edge that has only one neighbour.
  for (const auto& [key, count] : incidence) {
    if (count != 1) continue;
    const Point2& a = vertices[key.first];
    const Point2& b = vertices[key.second];
    const double len = dist(a, b);
    for (std::size_t v = 0; v < vertices.size(); ++v) {
      if (v == key.first || v == key.second) continue;
      const Point2& p = vertices[v];
      const double cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
      if (std::abs(cross) > 1e-12 * len * len) continue;
      const double s = ((p[0] - a[0]) * (b[0] - a[0]) + (p[1] - a[1]) * (b[1] - a[1])) / (len * len);
      if (s > 1e-12 && s < 1.0 - 1e-12)
        throw NonConformingMesh("TriMesh: hanging vertex " + std::to_string(v));
    }
  }
}

TriMesh uniform_square_mesh(std::size_t n) {
  if (n == 0) throw ZeroElements("uniform_square_mesh: zero elements");
  TriMesh mesh;
  const double h = 1.0 / static_cast<double>(n);
  for (std::size_t j = 0; j <= n; ++j)
    for (std::size_t i = 0; i <= n; ++i)
      mesh.vertices.push_back({static_cast<double>(i) * h, static_cast<double>(j) * h});
  auto id = [n](std::size_t i, std::size_t j) { return j * (n + 1) + i; };
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
      // The a-c diagonal is opposite b in (a,b,c) and opposite d in (a,c,d).
      mesh.triangles.push_back({a, b, c});
      mesh.refinement_edge.push_back(1);
      mesh.triangles.push_back({a, c, d});
      mesh.refinement_edge.push_back(2);
    }
  }
  mesh.generation.assign(mesh.triangles.size(), 0);
  return mesh;
}

std::vector<ElementMetrics> element_metrics(const TriMesh& mesh) {
  std::vector<ElementMetrics> out(mesh.num_triangles());
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    double diam = 0.0;
    for (int e = 0; e < 3; ++e) {
      auto [a, b] = local_edge(tri, e);
      diam = std::max(diam, dist(mesh.vertices[a], mesh.vertices[b]));
    }
    out[t] = {std::abs(mesh.signed_area(t)), diam};
  }
  return out;
}

double min_angle(const TriMesh& mesh) {
  double best = std::numbers::pi;
  for (const auto& tri : mesh.triangles) {
    for (int k = 0; k < 3; ++k) {
      const Point2& p = mesh.vertices[tri[static_cast<std::size_t>(k)]];
      const Point2& q = mesh.vertices[tri[static_cast<std::size_t>((k + 1) % 3)]];
      const Point2& r = mesh.vertices[tri[static_cast<std::size_t>((k + 2) % 3)]];
      const double ux = q[0] - p[0], uy = q[1] - p[1], vx = r[0] - p[0], vy = r[1] - p[1];
      const double ang = std::atan2(std::abs(ux * vy - uy * vx), ux * vx + uy * vy);
      best = std::min(best, ang);
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Skeleton

std::size_t Skeleton::num_boundary() const {
  return static_cast<std::size_t>(
      std::count_if(facets.begin(), facets.end(), [](const Facet& f) { return f.is_boundary(); }));
}

Skeleton build_skeleton(const TriMesh& mesh) {
  struct Side {
    std::size_t tri;
    int edge;
    bool forward;  // traversed lo -> hi in the triangle's CCW order
  };
  std::map<EdgeKey, std::vector<Side>> sides;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    for (int e = 0; e < 3; ++e) {
      auto [a, b] = local_edge(mesh.triangles[t], e);
      if (a == b) throw NonConformingMesh("build_skeleton: degenerate edge");
      sides[edge_key(a, b)].push_back({t, e, a < b});
    }
  }

  Skeleton sk;
  sk.element_facets.assign(mesh.num_triangles(), {0, 0, 0});
  sk.element_signs.assign(mesh.num_triangles(), {0, 0, 0});
  sk.facets.reserve(sides.size());
  for (const auto& [key, list] : sides) {
    const Point2& plo = mesh.vertices[key.first];
    const Point2& phi = mesh.vertices[key.second];
    const double len = dist(plo, phi);
    // lo -> hi rotated by +90 degrees.
    const Point2 rot{-(phi[1] - plo[1]) / len, (phi[0] - plo[0]) / len};
    Facet f{key.first, key.second, 0, Facet::kBoundary, rot, len};
    const std::size_t fid = sk.facets.size();
    if (list.size() == 1) {
      const Side& s = list[0];
      // CCW traversal p -> q has outward normal (q - p) rotated by -90 degrees.
      if (s.forward) f.normal = {-rot[0], -rot[1]};
      f.left = s.tri;
      sk.element_facets[s.tri][static_cast<std::size_t>(s.edge)] = fid;
      sk.element_signs[s.tri][static_cast<std::size_t>(s.edge)] = 1;
    } else if (list.size() == 2) {
      if (list[0].forward == list[1].forward)
        throw NonConformingMesh("build_skeleton: neighbouring triangles have opposite orientation");
      const Side& l = list[0].forward ? list[1] : list[0];
      const Side& r = list[0].forward ? list[0] : list[1];
      f.left = l.tri;
      f.right = static_cast<std::ptrdiff_t>(r.tri);
      sk.element_facets[l.tri][static_cast<std::size_t>(l.edge)] = fid;
      sk.element_signs[l.tri][static_cast<std::size_t>(l.edge)] = 1;
      sk.element_facets[r.tri][static_cast<std::size_t>(r.edge)] = fid;
      sk.element_signs[r.tri][static_cast<std::size_t>(r.edge)] = -1;
    } else {
      throw NonConformingMesh("build_skeleton: edge shared by more than two triangles");
    }
    sk.facets.push_back(f);
  }
  return sk;
}

// ---------------------------------------------------------------------------
// Newest-vertex bisection

TriMesh bisect(const TriMesh& mesh, const std::vector<std::size_t>& marked) {
  if (marked.empty()) throw InvalidArgument("bisect: no triangles marked");
  for (std::size_t t : marked)
    if (t >= mesh.num_triangles()) throw InvalidId("bisect: invalid triangle id " + std::to_string(t));

  auto ref_key = [&](std::size_t t) {
    auto [a, b] = local_edge(mesh.triangles[t], mesh.refinement_edge[t]);
    return edge_key(a, b);
  };

  std::set<EdgeKey> cut;
  for (std::size_t t : marked) cut.insert(ref_key(t));
  // Closure: a triangle with any cut edge must also cut its refinement edge.
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
      const EdgeKey rk = ref_key(t);
      if (cut.count(rk)) continue;
      for (int e = 0; e < 3; ++e) {
        auto [a, b] = local_edge(mesh.triangles[t], e);
        if (cut.count(edge_key(a, b))) {
          cut.insert(rk);
          changed = true;
          break;
        }
      }
    }
  }

  TriMesh out;
  out.vertices = mesh.vertices;
  std::map<EdgeKey, std::size_t> midpoint;
  for (const EdgeKey& k : cut) {
    const Point2& a = mesh.vertices[k.first];
    const Point2& b = mesh.vertices[k.second];
    midpoint[k] = out.vertices.size();
    out.vertices.push_back({0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])});
  }

  struct Leaf {
    int generation;
    std::size_t parent;
    std::size_t child;
    Tri tri;
    int ref;
  };
  std::vector<Leaf> leaves;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    std::size_t child = 0;
    auto recurse = [&](auto&& self, const Tri& tri, int ref, int gen) -> void {
      auto [a, b] = local_edge(tri, ref);
      const auto it = midpoint.find(edge_key(a, b));
      if (it == midpoint.end()) {
        leaves.push_back({gen, t, child++, tri, ref});
        return;
      }
      const std::size_t n = tri[static_cast<std::size_t>(ref)];
      const std::size_t m = it->second;
      self(self, Tri{n, a, m}, 2, gen + 1);
      self(self, Tri{n, m, b}, 1, gen + 1);
    };
    recurse(recurse, mesh.triangles[t], mesh.refinement_edge[t], mesh.generation[t]);
  }
  std::stable_sort(leaves.begin(), leaves.end(), [](const Leaf& x, const Leaf& y) {
    return std::tie(x.generation, x.parent, x.child) < std::tie(y.generation, y.parent, y.child);
  });
  for (const Leaf& l : leaves) {
    out.triangles.push_back(l.tri);
    out.refinement_edge.push_back(l.ref);
    out.generation.push_back(l.generation);
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON

std::string mesh_to_json(const TriMesh& mesh) {
  nlohmann::ordered_json j;
  j["vertices"] = nlohmann::ordered_json::array();
  for (const auto& v : mesh.vertices) j["vertices"].push_back({v[0], v[1]});
  j["triangles"] = nlohmann::ordered_json::array();
  for (const auto& t : mesh.triangles) j["triangles"].push_back({t[0], t[1], t[2]});
  j["refinement_edge"] = mesh.refinement_edge;
  j["generation"] = mesh.generation;
  return j.dump();
}

TriMesh mesh_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  TriMesh mesh;
  for (const auto& v : j.at("vertices")) mesh.vertices.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
  for (const auto& t : j.at("triangles"))
    mesh.triangles.push_back({t.at(0).get<std::size_t>(), t.at(1).get<std::size_t>(), t.at(2).get<std::size_t>()});
  if (j.contains("refinement_edge")) {
    mesh.refinement_edge = j["refinement_edge"].get<std::vector<int>>();
  } else {
    // Longest edge as refinement edge when the file carries no bisection data.
    for (const auto& t : mesh.triangles) {
      int best = 0;
      double len = -1.0;
      for (int e = 0; e < 3; ++e) {
        auto [a, b] = local_edge(t, e);
        const double l = dist(mesh.vertices[a], mesh.vertices[b]);
        if (l > len + 1e-14) {
          len = l;
          best = e;
        }
      }
      mesh.refinement_edge.push_back(best);
    }
  }
  mesh.generation = j.contains("generation") ? j["generation"].get<std::vector<int>>()
                                             : std::vector<int>(mesh.triangles.size(), 0);
  mesh.validate();
  return mesh;
}

}  // namespace dpg
