#include <doctest.h>

#include <cmath>
#include <random>

#include "nudge/error.hpp"
#include "nudge/models.hpp"

using namespace nudge;

TEST_SUITE("models") {
  TEST_CASE("manufactured forcing at the origin") {
    // u = u_t = (1, 0), (u.grad) u = (0, 1), -Lap u = (1, 0), grad p = (1, -1):
    // f = (3, 0) + omega R(u), R(u) = (0, 1).
    const ManufacturedSolution ms = exponential_trig_solution();
    const Vec2 f = manufactured_forcing(ms, 1.0, 1.0, true)(0.0, 0.0, 0.0);
    CHECK(f.x() == doctest::Approx(3.0));
    CHECK(f.y() == doctest::Approx(1.0));
    const Vec2 g = manufactured_forcing(ms, 1.0, 1.0, false)(0.0, 0.0, 0.0);
    CHECK(g.x() == doctest::Approx(3.0));
    CHECK(std::abs(g.y()) <= 1e-15);
  }

  TEST_CASE("Coriolis branch differs exactly by omega R(u)") {
    const ManufacturedSolution ms = exponential_trig_solution();
    const double omega = 6.5;
    const VectorFunction with = manufactured_forcing(ms, 0.3, omega, true);
    const VectorFunction without = manufactured_forcing(ms, 0.3, omega, false);
    std::mt19937 gen(11);
    std::uniform_real_distribution<double> d(0.0, 1.0);
    for (int i = 0; i < 50; ++i) {
      const double x = d(gen), y = d(gen), t = 2 * d(gen);
      const Vec2 diff = with(x, y, t) - without(x, y, t) - omega * rotate(ms.velocity(x, y, t));
      CHECK(diff.cwiseAbs().maxCoeff() <= 1e-12);
    }
  }

  TEST_CASE("manufactured velocity is divergence free") {
    const ManufacturedSolution ms = exponential_trig_solution();
    std::mt19937 gen(42);
    std::uniform_real_distribution<double> d(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
      const double x = d(gen), y = d(gen), t = 2 * d(gen);
      CHECK(std::abs(ms.velocity_gradient(x, y, t).trace()) <= 1e-15);
      // Finite-difference check of the stated gradient.
      const double h = 1e-6;
      const Eigen::Vector2d dx = (ms.velocity(x + h, y, t) - ms.velocity(x - h, y, t)) / (2 * h);
      const Eigen::Vector2d dy = (ms.velocity(x, y + h, t) - ms.velocity(x, y - h, t)) / (2 * h);
      const Eigen::Matrix2d g = ms.velocity_gradient(x, y, t);
      CHECK(std::abs(g(0, 0) - dx.x()) <= 1e-7);
      CHECK(std::abs(g(1, 0) - dx.y()) <= 1e-7);
      CHECK(std::abs(g(0, 1) - dy.x()) <= 1e-7);
      CHECK(std::abs(g(1, 1) - dy.y()) <= 1e-7);
    }
  }

  TEST_CASE("boundary data") {
    ModelSpec cavity;
    cavity.kind = ModelKind::boussinesq_dns;
    cavity.boundary = BoundaryKind::cavity;
    for (Side s : {side_left, side_right, side_bottom, side_top})
      CHECK(velocity_boundary(cavity, s)(0.3, 0.7, 1.0).norm() == 0.0);

    ModelSpec nse;
    const Vec2 b = velocity_boundary(nse, side_bottom)(0.4, 0.0, 0.0);
    CHECK(b.x() == doctest::Approx(1.0));
    CHECK(b.y() == doctest::Approx(std::sin(0.4)));

    CHECK((*temperature_boundary(cavity, side_left))(0.0, 0.5, 0.0) == 1.0);
    CHECK((*temperature_boundary(cavity, side_right))(1.0, 0.5, 0.0) == 0.0);
    CHECK_FALSE(temperature_boundary(cavity, side_top).has_value());
    CHECK_FALSE(temperature_boundary(cavity, side_bottom).has_value());
    CHECK_THROWS_AS(velocity_boundary(nse, side_none), Error);
    CHECK_THROWS_AS(temperature_boundary(nse, static_cast<Side>(16)), Error);
  }

  TEST_CASE("model kinds and validation") {
    for (ModelKind k : {ModelKind::nse_dns, ModelKind::nse_nudged, ModelKind::boussinesq_dns,
                        ModelKind::boussinesq_nudged})
      CHECK(parse_model_kind(model_kind_name(k)) == k);
    CHECK_THROWS_AS(parse_model_kind("euler"), ConfigError);

    ModelSpec s;
    s.kind = ModelKind::nse_dns;
    s.omega = 2.0;
    CHECK(s.has_coriolis());
    CHECK_FALSE(s.has_nudging());
    s.kind = ModelKind::nse_nudged;
    CHECK_FALSE(s.has_coriolis());
    CHECK(s.has_nudging());
    CHECK_NOTHROW(validate(s));

    auto fails_on = [](ModelSpec m, const std::string& key) {
      try {
        validate(m);
      } catch (const ConfigError& e) {
        return e.key() == key;
      }
      return false;
    };
    ModelSpec bad = s;
    bad.nu = 0.0;
    CHECK(fails_on(bad, "nu"));
    bad = s;
    bad.dt = -0.1;
    CHECK(fails_on(bad, "dt"));
    bad = s;
    bad.chi = -1.0;
    CHECK(fails_on(bad, "chi"));
    bad = s;
    bad.kind = ModelKind::boussinesq_dns;
    bad.pr = 0.0;
    CHECK(fails_on(bad, "pr"));
    bad.pr = 0.71;
    bad.gravity = Vec2(0, 2);
    CHECK(fails_on(bad, "gravity"));
  }
}
