#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <vector>

#include <Eigen/Core>

namespace nudge {

using Index = std::int64_t;
using Vec2 = Eigen::Vector2d;

/// Sides of the unit square, usable as a bitmask.
enum Side : std::uint8_t {
  side_none = 0,
  side_left = 1,    // x = 0
  side_right = 2,   // x = 1
  side_bottom = 4,  // y = 0
  side_top = 8,     // y = 1
};

const char* side_name(Side s);

struct Edge {
  std::array<Index, 2> vertices;    // sorted ascending
  std::array<Index, 2> triangles;   // second is -1 on the boundary
  Side side = side_none;            // set for boundary edges only
  bool on_boundary() const { return triangles[1] < 0; }
};

/// Conforming triangulation of [0,1]^2. Immutable once built.
class Mesh {
 public:
  Mesh(std::vector<Vec2> vertices, std::vector<std::array<Index, 3>> triangles);

  Index vertex_count() const { return static_cast<Index>(vertices_.size()); }
  Index triangle_count() const { return static_cast<Index>(triangles_.size()); }
  Index edge_count() const { return static_cast<Index>(edges_.size()); }

  const Vec2& vertex(Index v) const { return vertices_[v]; }
  const std::array<Index, 3>& triangle(Index t) const { return triangles_[t]; }
  const Edge& edge(Index e) const { return edges_[e]; }
  const std::vector<Vec2>& vertices() const { return vertices_; }
  const std::vector<std::array<Index, 3>>& triangles() const { return triangles_; }
  const std::vector<Edge>& edges() const { return edges_; }

  /// Global edge index of local edge k of triangle t; local edge k joins
  /// local vertices k and (k+1)%3.
  Index triangle_edge(Index t, int k) const { return triangle_edges_[t][k]; }

  double signed_area(Index t) const;
  Vec2 barycenter(Index t) const;
  /// Sides (bitmask) that a vertex lies on.
  std::uint8_t vertex_sides(Index v) const { return vertex_sides_[v]; }
  /// Longest edge length, the characteristic width of the mesh.
  double max_edge_length() const;

  /// Checks every structural invariant; throws nudge::Error on violation.
  void validate() const;

 private:
  std::vector<Vec2> vertices_;
  std::vector<std::array<Index, 3>> triangles_;
  std::vector<Edge> edges_;
  std::vector<std::array<Index, 3>> triangle_edges_;
  std::vector<std::uint8_t> vertex_sides_;
};

using MeshPtr = std::shared_ptr<const Mesh>;

/// Structured n x n grid of the unit square, each square split along its
/// lower-left to upper-right diagonal.
MeshPtr build_unit_square_mesh(int n);

/// Splits every triangle into three around its barycenter.
MeshPtr barycentric_refine(const Mesh& mesh);

/// For each fine triangle, the coarse triangle containing its barycenter.
struct CellMap {
  std::vector<Index> coarse_of_fine;
  Index coarse_count = 0;
};

CellMap build_cell_map(const Mesh& fine, const Mesh& coarse);

/// Barycentric coordinates of p with respect to triangle t.
std::array<double, 3> barycentric_coordinates(const Mesh& mesh, Index t, const Vec2& p);

void write_vtk_mesh(std::ostream& out, const Mesh& mesh, const char* title);

}  // namespace nudge
