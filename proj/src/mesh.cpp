#include "nudge/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <unordered_map>

#include <fmt/format.h>

#include "nudge/error.hpp"

namespace nudge {

namespace {

constexpr double kGeomTol = 1e-12;

std::uint8_t classify_point(const Vec2& p) {
  std::uint8_t s = side_none;
  if (std::abs(p.x()) < kGeomTol) s |= side_left;
  if (std::abs(p.x() - 1.0) < kGeomTol) s |= side_right;
  if (std::abs(p.y()) < kGeomTol) s |= side_bottom;
  if (std::abs(p.y() - 1.0) < kGeomTol) s |= side_top;
  return s;
}

Side lowest_side(std::uint8_t mask) {
  for (std::uint8_t bit : {side_left, side_right, side_bottom, side_top})
    if (mask & bit) return static_cast<Side>(bit);
  return side_none;
}

}  // namespace

const char* side_name(Side s) {
  switch (s) {
    case side_left: return "left";
    case side_right: return "right";
    case side_bottom: return "bottom";
    case side_top: return "top";
    default: return "none";
  }
}

Mesh::Mesh(std::vector<Vec2> vertices, std::vector<std::array<Index, 3>> triangles)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)) {
  const Index nv = vertex_count();
  vertex_sides_.resize(vertices_.size());
  for (Index v = 0; v < nv; ++v) vertex_sides_[v] = classify_point(vertices_[v]);

  std::unordered_map<std::int64_t, Index> lookup;
  lookup.reserve(triangles_.size() * 2);
  triangle_edges_.resize(triangles_.size());
  for (Index t = 0; t < triangle_count(); ++t) {
    for (int k = 0; k < 3; ++k) {
      Index a = triangles_[t][k];
      Index b = triangles_[t][(k + 1) % 3];
      if (a < 0 || a >= nv || b < 0 || b >= nv)
        throw Error(fmt::format("triangle {} references a missing vertex", t));
      if (a > b) std::swap(a, b);
      const std::int64_t key = a * nv + b;
      auto [it, inserted] = lookup.try_emplace(key, edge_count());
      if (inserted) {
        edges_.push_back(Edge{{a, b}, {t, -1}, side_none});
      } else {
        Edge& e = edges_[it->second];
        if (e.triangles[1] >= 0)
          throw Error(fmt::format("edge ({}, {}) shared by more than two triangles", a, b));
        e.triangles[1] = t;
      }
      triangle_edges_[t][k] = it->second;
    }
  }
  for (Edge& e : edges_) {
    if (!e.on_boundary()) continue;
    e.side = lowest_side(vertex_sides_[e.vertices[0]] & vertex_sides_[e.vertices[1]]);
  }
}

double Mesh::signed_area(Index t) const {
  const auto& tri = triangles_[t];
  const Vec2 a = vertices_[tri[1]] - vertices_[tri[0]];
  const Vec2 b = vertices_[tri[2]] - vertices_[tri[0]];
  return 0.5 * (a.x() * b.y() - a.y() * b.x());
}

Vec2 Mesh::barycenter(Index t) const {
  const auto& tri = triangles_[t];
  return (vertices_[tri[0]] + vertices_[tri[1]] + vertices_[tri[2]]) / 3.0;
}

double Mesh::max_edge_length() const {
  double h = 0.0;
  for (const Edge& e : edges_)
    h = std::max(h, (vertices_[e.vertices[0]] - vertices_[e.vertices[1]]).norm());
  return h;
}

void Mesh::validate() const {
  double total = 0.0;
  for (Index t = 0; t < triangle_count(); ++t) {
    const double a = signed_area(t);
    if (!(a > 0.0)) throw Error(fmt::format("triangle {} has non-positive area {}", t, a));
    total += a;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw Error(fmt::format("triangle areas sum to {}, expected 1", total));
  for (Index e = 0; e < edge_count(); ++e) {
    const Edge& edge = edges_[e];
    if (edge.on_boundary() && edge.side == side_none)
      throw Error(fmt::format("boundary edge {} does not lie on a side of the square", e));
    if (!edge.on_boundary() && edge.side != side_none)
      throw Error(fmt::format("interior edge {} carries a boundary marker", e));
  }
}

MeshPtr build_unit_square_mesh(int n) {
  if (n < 1) throw ConfigError("n", fmt::format("mesh resolution must be >= 1, got {}", n));
  std::vector<Vec2> vertices;
  vertices.reserve(static_cast<std::size_t>(n + 1) * (n + 1));
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i)
      vertices.emplace_back(static_cast<double>(i) / n, static_cast<double>(j) / n);

  auto id = [n](int i, int j) { return static_cast<Index>(j) * (n + 1) + i; };
  std::vector<std::array<Index, 3>> triangles;
  triangles.reserve(2 * static_cast<std::size_t>(n) * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  return std::make_shared<const Mesh>(std::move(vertices), std::move(triangles));
}

MeshPtr barycentric_refine(const Mesh& mesh) {
  std::vector<Vec2> vertices = mesh.vertices();
  std::vector<std::array<Index, 3>> triangles;
  triangles.reserve(3 * mesh.triangles().size());
  for (Index t = 0; t < mesh.triangle_count(); ++t) {
    const Index c = static_cast<Index>(vertices.size());
    vertices.push_back(mesh.barycenter(t));
    const auto& tri = mesh.triangle(t);
    for (int k = 0; k < 3; ++k) triangles.push_back({tri[k], tri[(k + 1) % 3], c});
  }
  return std::make_shared<const Mesh>(std::move(vertices), std::move(triangles));
}

std::array<double, 3> barycentric_coordinates(const Mesh& mesh, Index t, const Vec2& p) {
  const auto& tri = mesh.triangle(t);
  const Vec2& a = mesh.vertex(tri[0]);
  const Vec2& b = mesh.vertex(tri[1]);
  const Vec2& c = mesh.vertex(tri[2]);
  const double det = (b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y());
  const double l1 = ((p.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (p.y() - a.y())) / det;
  const double l2 = ((b.x() - a.x()) * (p.y() - a.y()) - (p.x() - a.x()) * (b.y() - a.y())) / det;
  return {1.0 - l1 - l2, l1, l2};
}

CellMap build_cell_map(const Mesh& fine, const Mesh& coarse) {
  CellMap map;
  map.coarse_count = coarse.triangle_count();
  map.coarse_of_fine.assign(fine.triangles().size(), -1);

  // Bounding boxes prune most point-in-triangle tests.
  std::vector<Eigen::Vector4d> boxes(coarse.triangles().size());
  for (Index c = 0; c < coarse.triangle_count(); ++c) {
    const auto& tri = coarse.triangle(c);
    Eigen::Vector4d box(1e300, -1e300, 1e300, -1e300);
    for (Index v : tri) {
      const Vec2& x = coarse.vertex(v);
      box[0] = std::min(box[0], x.x());
      box[1] = std::max(box[1], x.x());
      box[2] = std::min(box[2], x.y());
      box[3] = std::max(box[3], x.y());
    }
    boxes[c] = box;
  }

  for (Index f = 0; f < fine.triangle_count(); ++f) {
    const Vec2 p = fine.barycenter(f);
    for (Index c = 0; c < coarse.triangle_count(); ++c) {
      const auto& box = boxes[c];
      if (p.x() < box[0] - kGeomTol || p.x() > box[1] + kGeomTol || p.y() < box[2] - kGeomTol ||
          p.y() > box[3] + kGeomTol)
        continue;
      const auto lambda = barycentric_coordinates(coarse, c, p);
      if (lambda[0] >= -kGeomTol && lambda[1] >= -kGeomTol && lambda[2] >= -kGeomTol) {
        map.coarse_of_fine[f] = c;
        break;
      }
    }
    if (map.coarse_of_fine[f] < 0)
      throw Error(fmt::format("fine cell {} at ({}, {}) lies in no coarse cell", f, p.x(), p.y()));
  }
  return map;
}

void write_vtk_mesh(std::ostream& out, const Mesh& mesh, const char* title) {
  out << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.vertex_count() << " double\n";
  for (const Vec2& v : mesh.vertices()) out << fmt::format("{:.17g} {:.17g} 0\n", v.x(), v.y());
  out << "CELLS " << mesh.triangle_count() << ' ' << 4 * mesh.triangle_count() << '\n';
  for (const auto& t : mesh.triangles()) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  out << "CELL_TYPES " << mesh.triangle_count() << '\n';
  for (Index t = 0; t < mesh.triangle_count(); ++t) out << "5\n";
}

}  // namespace nudge
