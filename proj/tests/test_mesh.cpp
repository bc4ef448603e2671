#include <doctest.h>

#include <map>
#include <set>
#include <sstream>

#include "nudge/error.hpp"
#include "nudge/mesh.hpp"

using namespace nudge;

namespace {

double total_area(const Mesh& m) {
  double a = 0.0;
  for (Index t = 0; t < m.triangle_count(); ++t) a += m.signed_area(t);
  return a;
}

std::set<std::pair<Vec2::Scalar, Vec2::Scalar>> boundary_midpoints(const Mesh& m) {
  std::set<std::pair<double, double>> out;
  for (const Edge& e : m.edges())
    if (e.on_boundary()) {
      const Vec2 mid = 0.5 * (m.vertex(e.vertices[0]) + m.vertex(e.vertices[1]));
      out.emplace(mid.x(), mid.y());
    }
  return out;
}

}  // namespace

TEST_SUITE("mesh") {
  TEST_CASE("unit square counts") {
    const MeshPtr m1 = build_unit_square_mesh(1);
    CHECK(m1->vertex_count() == 4);
    CHECK(m1->triangle_count() == 2);
    CHECK(m1->edge_count() == 5);
    const MeshPtr m4 = build_unit_square_mesh(4);
    CHECK(m4->vertex_count() == 25);
    CHECK(m4->triangle_count() == 32);
  }

  TEST_CASE("areas and edge sharing") {
    for (int n : {1, 3, 8, 17}) {
      const MeshPtr m = build_unit_square_mesh(n);
      CHECK(total_area(*m) == doctest::Approx(1.0).epsilon(1e-12));
      for (Index t = 0; t < m->triangle_count(); ++t) CHECK(m->signed_area(t) > 0.0);
      Index boundary = 0;
      for (const Edge& e : m->edges()) {
        CHECK(e.triangles[0] >= 0);
        if (e.on_boundary()) {
          ++boundary;
          CHECK(e.side != side_none);
        }
      }
      CHECK(boundary == 4 * n);
      CHECK_NOTHROW(m->validate());
    }
  }

  TEST_CASE("boundary edges partition into the four sides") {
    const MeshPtr m = build_unit_square_mesh(5);
    std::map<int, int> per_side;
    for (const Edge& e : m->edges())
      if (e.on_boundary()) ++per_side[e.side];
    CHECK(per_side[side_left] == 5);
    CHECK(per_side[side_right] == 5);
    CHECK(per_side[side_bottom] == 5);
    CHECK(per_side[side_top] == 5);
  }

  TEST_CASE("diagonal runs lower-left to upper-right") {
    const MeshPtr m = build_unit_square_mesh(1);
    bool found = false;
    for (const Edge& e : m->edges())
      if (!e.on_boundary()) {
        const Vec2 a = m->vertex(e.vertices[0]), b = m->vertex(e.vertices[1]);
        found = (a - Vec2(0, 0)).norm() + (b - Vec2(1, 1)).norm() < 1e-15;
      }
    CHECK(found);
  }

  TEST_CASE("n = 0 rejected") {
    CHECK_THROWS_AS(build_unit_square_mesh(0), ConfigError);
    CHECK_THROWS_AS(build_unit_square_mesh(-3), ConfigError);
  }

  TEST_CASE("barycentric refinement") {
    const MeshPtr coarse = build_unit_square_mesh(1);
    const MeshPtr fine = barycentric_refine(*coarse);
    CHECK(fine->triangle_count() == 6);
    CHECK(fine->vertex_count() == 6);
    CHECK(total_area(*fine) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(boundary_midpoints(*fine) == boundary_midpoints(*coarse));
    const MeshPtr m3 = build_unit_square_mesh(3);
    CHECK(boundary_midpoints(*barycentric_refine(*m3)) == boundary_midpoints(*m3));
  }

  TEST_CASE("cell map") {
    SUBCASE("identity when fine == coarse") {
      const MeshPtr m = build_unit_square_mesh(4);
      const CellMap map = build_cell_map(*m, *m);
      for (Index t = 0; t < m->triangle_count(); ++t) CHECK(map.coarse_of_fine[t] == t);
    }
    SUBCASE("n = 8 onto n = 2: 16 fine triangles per coarse triangle") {
      const MeshPtr fine = build_unit_square_mesh(8);
      const MeshPtr coarse = build_unit_square_mesh(2);
      const CellMap map = build_cell_map(*fine, *coarse);
      CHECK(map.coarse_count == 8);
      std::vector<int> count(8, 0);
      std::vector<double> area(8, 0.0);
      for (Index t = 0; t < fine->triangle_count(); ++t) {
        const Index c = map.coarse_of_fine[t];
        ++count[c];
        area[c] += fine->signed_area(t);
        // Exhaustive oracle: the fine barycenter lies inside c.
        const auto lam = barycentric_coordinates(*coarse, c, fine->barycenter(t));
        for (double l : lam) CHECK(l >= -1e-12);
      }
      for (Index c = 0; c < 8; ++c) {
        CHECK(count[c] == 16);
        CHECK(area[c] == doctest::Approx(coarse->signed_area(c)).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("unassignable fine cell is a hard error") {
    const MeshPtr coarse = build_unit_square_mesh(2);
    const Mesh outside({Vec2(2, 2), Vec2(3, 2), Vec2(2, 3)}, {{0, 1, 2}});
    CHECK_THROWS_AS(build_cell_map(outside, *coarse), Error);
  }

  TEST_CASE("barycentric coordinates") {
    const MeshPtr m = build_unit_square_mesh(1);
    const auto lam = barycentric_coordinates(*m, 0, m->barycenter(0));
    for (double l : lam) CHECK(l == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  }

  TEST_CASE("VTK mesh export") {
    const MeshPtr m = build_unit_square_mesh(1);
    std::ostringstream out;
    write_vtk_mesh(out, *m, "t");
    const std::string s = out.str();
    CHECK(s.rfind("# vtk DataFile Version 3.0\nt\nASCII\nDATASET UNSTRUCTURED_GRID\n", 0) == 0);
    CHECK(s.find("POINTS 4 double") != std::string::npos);
    CHECK(s.find("CELLS 2 8") != std::string::npos);
    CHECK(s.find("CELL_TYPES 2\n5\n5\n") != std::string::npos);
  }
}
