#include <doctest.h>

#include <string>

#include "nudge/error.hpp"
#include "nudge/linsolve.hpp"
#include "nudge/stepping.hpp"

using namespace nudge;

namespace {

SparseOperator from_dense(const Eigen::MatrixXd& d) { return d.sparseView(); }

}  // namespace

TEST_SUITE("linsolve") {
  TEST_CASE("no constraints leaves the system unchanged") {
    Eigen::Matrix3d a;
    a << 4, 1, 0, 1, 3, 1, 0, 1, 2;
    const LinearSystem sys{from_dense(a), Eigen::Vector3d(1, 2, 3), {}};
    const LinearSystem out = apply_dirichlet(sys);
    CHECK((Eigen::MatrixXd(out.matrix) - a).cwiseAbs().maxCoeff() == 0.0);
    CHECK((out.rhs - sys.rhs).norm() == 0.0);
    const Eigen::VectorXd x = solve(sys);
    CHECK((a * x - sys.rhs).norm() <= 1e-12);
  }

  TEST_CASE("all dofs constrained returns the prescribed values") {
    Eigen::Matrix2d a;
    a << 2, -1, -1, 2;
    const LinearSystem sys{from_dense(a), Eigen::Vector2d(5, 5), {{0, 0.25}, {1, -3.0}}};
    const Eigen::VectorXd x = solve(sys);
    CHECK(x[0] == 0.25);
    CHECK(x[1] == -3.0);
  }

  TEST_CASE("three-point Laplacian with end values") {
    // -u'' = 0 with u(0) = 0, u(1) = 1 on three nodes: u(1/2) = 1/2.
    Eigen::Matrix3d a;
    a << 1, -1, 0, -1, 2, -1, 0, -1, 1;
    const LinearSystem sys{from_dense(a), Eigen::Vector3d::Zero(), {{0, 0.0}, {2, 1.0}}};
    const LinearSystem red = apply_dirichlet(sys);
    CHECK(red.constraints.empty());
    CHECK(Eigen::MatrixXd(red.matrix)(0, 1) == 0.0);
    CHECK(Eigen::MatrixXd(red.matrix)(1, 2) == 0.0);
    const Eigen::VectorXd x = solve(sys);
    CHECK(x[1] == doctest::Approx(0.5).epsilon(1e-14));
  }

  TEST_CASE("2x2 system") {
    Eigen::Matrix2d a;
    a << 2, 1, 1, 2;
    const Eigen::VectorXd x = solve(LinearSystem{from_dense(a), Eigen::Vector2d(1, 0), {}});
    CHECK(x[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    CHECK(x[1] == doctest::Approx(-1.0 / 3.0).epsilon(1e-14));
  }

  TEST_CASE("constraint errors") {
    const SparseOperator a = from_dense(Eigen::Matrix2d::Identity());
    CHECK_THROWS_AS(apply_dirichlet(LinearSystem{a, Eigen::Vector2d::Zero(), {{0, 1.0}, {0, 2.0}}}), Error);
    CHECK_NOTHROW(apply_dirichlet(LinearSystem{a, Eigen::Vector2d::Zero(), {{0, 1.0}, {0, 1.0}}}));
    CHECK_THROWS_AS(apply_dirichlet(LinearSystem{a, Eigen::Vector2d::Zero(), {{2, 1.0}}}), Error);
    CHECK_THROWS_AS(apply_dirichlet(LinearSystem{a, Eigen::Vector3d::Zero(), {}}), Error);
  }

  TEST_CASE("singular matrix raises a solver error with context") {
    Eigen::Matrix2d a;
    a << 1, 1, 1, 1;
    DirectSolver solver;
    try {
      solver.solve(LinearSystem{from_dense(a), Eigen::Vector2d(1, 0), {}}, "step 7");
      FAIL("expected SolverError");
    } catch (const SolverError& e) {
      CHECK(std::string(e.what()).find("step 7") != std::string::npos);
    }
    Eigen::Matrix2d b = Eigen::Matrix2d::Identity();
    b(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(solver.solve(LinearSystem{from_dense(b), Eigen::Vector2d(1, 0), {}}), SolverError);
  }

  TEST_CASE("solver reuses its analysis across values") {
    DirectSolver solver;
    Eigen::Matrix2d a;
    a << 2, 1, 1, 2;
    const SolveReport r1 = solver.solve(LinearSystem{from_dense(a), Eigen::Vector2d(1, 0), {}});
    const SolveReport r2 = solver.solve(LinearSystem{from_dense(2.0 * a), Eigen::Vector2d(1, 0), {}});
    CHECK((r2.solution - 0.5 * r1.solution).norm() <= 1e-14);
    CHECK(r2.relative_residual <= 1e-10);
  }

  TEST_CASE("Stokes lid-driven cavity is discretely divergence free") {
    const DiscretizationPtr disc = build_discretization(4, 2);
    std::vector<Constraint> bc;
    for (const BoundaryDof& b : disc->velocity->boundary_dofs()) {
      const Index node = b.dof / 2;
      const int comp = static_cast<int>(b.dof % 2);
      const Vec2& p = disc->velocity->node_point(node);
      const bool lid = (b.sides & side_top) && p.x() > 0.0 && p.x() < 1.0;
      bc.push_back({b.dof, lid && comp == 0 ? 1.0 : 0.0});
    }
    const Eigen::VectorXd v = stokes_lift(*disc, bc);
    CHECK(divergence_residual(*disc, v) <= 1e-9);
    for (const Constraint& c : bc) CHECK(v[c.dof] == c.value);
  }
}
