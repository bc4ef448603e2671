#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "nudge/error.hpp"
#include "nudge/observation.hpp"

using namespace nudge;

namespace {

DofMapPtr velocity_space(int n) { return build_dofmap(build_unit_square_mesh(n), ElementKind::p2_vector); }

Eigen::VectorXd random_vector(Index n, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  Eigen::VectorXd v(n);
  for (Index i = 0; i < n; ++i) v[i] = d(gen);
  return v;
}

// int (I_H a) . b by quadrature on the fine cells.
double projected_inner(const ObservationOperator& op, const Field& a, const Field& b) {
  const Eigen::VectorXd means = op.apply(a.values());
  const Mesh& fine = op.fine_velocity().mesh();
  const QuadratureRule& rule = triangle_rule_degree6();
  double s = 0.0;
  for (Index t = 0; t < fine.triangle_count(); ++t) {
    const Vec2 m = means.segment<2>(2 * op.cell_map().coarse_of_fine[t]);
    for (std::size_t q = 0; q < rule.weights.size(); ++q) {
      const double w = 2.0 * fine.signed_area(t) * rule.weights[q];
      s += w * (m.x() * b.evaluate(t, rule.points[q], 0) + m.y() * b.evaluate(t, rule.points[q], 1));
    }
  }
  return s;
}

}  // namespace

TEST_SUITE("observation") {
  TEST_CASE("coarse equal to fine averages each cell") {
    const DofMapPtr vel = velocity_space(4);
    const ObservationOperator op(vel, 4);
    CHECK(op.coarse_cell_count() == vel->mesh().triangle_count());
    CHECK(op.width() == 0.25);
    auto f = [](double x, double y, double) { return Vec2(x * x, x * y); };
    const Eigen::VectorXd means = op.apply(interpolate(vel, VectorFunction(f), 0).values());
    const Eigen::VectorXd exact = op.apply(VectorFunction(f), 0);
    CHECK((means - exact).cwiseAbs().maxCoeff() <= 1e-14);
  }

  TEST_CASE("constants are reproduced") {
    const DofMapPtr vel = velocity_space(8);
    for (int H : {1, 2, 3, 4, 8}) {
      const ObservationOperator op(vel, H);
      const Eigen::VectorXd c =
          op.apply(interpolate(vel, VectorFunction([](double, double, double) { return Vec2(2.5, -1.0); }), 0).values());
      for (Index k = 0; k < op.coarse_cell_count(); ++k) {
        CHECK(c[2 * k] == doctest::Approx(2.5).epsilon(1e-13));
        CHECK(c[2 * k + 1] == doctest::Approx(-1.0).epsilon(1e-13));
      }
      CHECK(op.cell_areas().sum() == doctest::Approx(1.0).epsilon(1e-14));
    }
  }

  TEST_CASE("(x, 0) on a single coarse square") {
    // The diagonal splits the square into triangles with centroids at
    // x = 2/3 and x = 1/3; the mean of x over a triangle is its centroid.
    const DofMapPtr vel = velocity_space(4);
    const ObservationOperator op(vel, 1);
    REQUIRE(op.coarse_cell_count() == 2);
    const Eigen::VectorXd c =
        op.apply(interpolate(vel, VectorFunction([](double x, double, double) { return Vec2(x, 0.0); }), 0).values());
    for (Index k = 0; k < 2; ++k) {
      const double centroid = op.coarse_mesh().barycenter(k).x();
      CHECK(c[2 * k] == doctest::Approx(centroid).epsilon(1e-13));
      CHECK(std::abs(c[2 * k + 1]) <= 1e-15);
    }
    CHECK(std::abs(c[0] - c[2]) == doctest::Approx(1.0 / 3.0).epsilon(1e-13));
    CHECK(op.inner(c, Eigen::Vector4d(1, 0, 1, 0)) == doctest::Approx(0.5).epsilon(1e-13));
  }

  TEST_CASE("projection is idempotent, self-adjoint and a contraction") {
    const DofMapPtr vel = velocity_space(6);
    for (int H : {1, 2, 3, 4}) {
      const ObservationOperator op(vel, H);
      const Field a(vel, random_vector(vel->dof_count(), H));
      const Field b(vel, random_vector(vel->dof_count(), 10 + H));
      const Eigen::VectorXd pa = op.apply(a.values());
      CHECK((op.apply_cellwise(op.lift(pa)) - pa).cwiseAbs().maxCoeff() <= 1e-14);
      const double ab = projected_inner(op, a, b), ba = projected_inner(op, b, a);
      CHECK(ab == doctest::Approx(ba).epsilon(1e-12));
      CHECK(ab == doctest::Approx(op.inner(pa, op.apply(b.values()))).epsilon(1e-12));
      CHECK(std::sqrt(op.norm_squared(pa)) <= norms(a).l2 * (1 + 1e-12));
    }
  }

  TEST_CASE("invalid configurations") {
    const DofMapPtr vel = velocity_space(4);
    CHECK_THROWS_AS(ObservationOperator(vel, 8), ConfigError);
    CHECK_THROWS_AS(ObservationOperator(vel, 0), ConfigError);
    CHECK_THROWS_AS(ObservationOperator(build_dofmap(vel->mesh_ptr(), ElementKind::p2_scalar), 2), Error);
    const ObservationOperator op(vel, 2);
    CHECK_THROWS_AS(op.apply(Eigen::VectorXd::Zero(vel->dof_count() + 1)), Error);
    CHECK_THROWS_AS(assemble_nudging(op, -1.0), ConfigError);
  }

  TEST_CASE("nudging form") {
    const DofMapPtr vel = velocity_space(6);
    const ObservationOperator op(vel, 3);
    const NudgingForm zero = assemble_nudging(op, 0.0);
    CHECK(zero.matrix.nonZeros() == 0);
    CHECK(zero.data_to_load.nonZeros() == 0);

    const double chi = 40.0;
    const NudgingForm g = assemble_nudging(op, chi);
    const Eigen::VectorXd v = random_vector(vel->dof_count(), 5);
    // Observing v itself leaves no misfit.
    CHECK((g.matrix * v - g.data_to_load * op.apply(v)).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(v.dot(g.matrix * v) == doctest::Approx(chi * op.norm_squared(op.apply(v))).epsilon(1e-12));
    const Eigen::MatrixXd G(g.matrix);
    CHECK((G - G.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
  }

  TEST_CASE("interpolation constant C1 H") {
    const DofMapPtr vel = velocity_space(16);
    const double c4 = estimate_C1H(ObservationOperator(vel, 4));
    const double c8 = estimate_C1H(ObservationOperator(vel, 8));
    // Poincare bound on convex cells: diam / pi, diam = sqrt(2) H.
    CHECK(c4 <= std::sqrt(2.0) * 0.25 / std::numbers::pi);
    CHECK(c8 <= std::sqrt(2.0) * 0.125 / std::numbers::pi);
    CHECK(c8 / c4 >= 0.4);
    CHECK(c8 / c4 <= 0.6);
  }

  TEST_CASE("snapshot CSV round trip and time interpolation") {
    SnapshotObservations obs;
    obs.append(0.0, Eigen::Vector4d(1.0, 2.0, 3.0, 4.0));
    obs.append(0.5, Eigen::Vector4d(3.0, 2.0, 1.0, 1.0 / 3.0));
    CHECK_THROWS_AS(obs.append(0.5, Eigen::Vector4d::Zero()), Error);
    CHECK_THROWS_AS(obs.append(1.0, Eigen::Vector2d::Zero()), Error);
    std::stringstream ss;
    obs.write_csv(ss);
    CHECK(ss.str().rfind("t,cell_id,ubar_x,ubar_y\n", 0) == 0);
    const SnapshotObservations back = SnapshotObservations::read_csv(ss);
    REQUIRE(back.size() == 2);
    CHECK(back.times() == obs.times());
    for (std::size_t i = 0; i < 2; ++i) CHECK((back.snapshot(i).array() == obs.snapshot(i).array()).all());

    CHECK((back.coarse_means(0.25) - Eigen::Vector4d(2.0, 2.0, 2.0, 13.0 / 6.0)).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK((back.coarse_means(-1.0) - obs.snapshot(0)).norm() == 0.0);
    CHECK((back.coarse_means(9.0) - obs.snapshot(1)).norm() == 0.0);
    CHECK_THROWS_AS(SnapshotObservations().coarse_means(0.0), Error);

    std::istringstream bad_header("time,cell,x,y\n0,0,1,1\n");
    CHECK_THROWS_AS(SnapshotObservations::read_csv(bad_header), Error);
    std::istringstream bad_row("t,cell_id,ubar_x,ubar_y\n0,0,1\n");
    CHECK_THROWS_AS(SnapshotObservations::read_csv(bad_row), Error);
  }
}
