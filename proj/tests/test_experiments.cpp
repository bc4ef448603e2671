#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "nudge/error.hpp"
#include "nudge/experiments.hpp"

using namespace nudge;
namespace fs = std::filesystem;

namespace {

constexpr double pi = std::numbers::pi;

const Check* find_check(const std::vector<Check>& checks, const std::string& name) {
  for (const Check& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("nudge_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_SUITE("experiments") {
  TEST_CASE("rate table and fits") {
    const RateTable t = rate_table({1.0, 0.5, 0.25}, {4.0, 1.0, 0.25});
    REQUIRE(t.rows.size() == 3);
    CHECK(std::isnan(t.rows[0].rate));
    CHECK(t.rows[1].rate == doctest::Approx(2.0));
    CHECK(t.rows[2].rate == doctest::Approx(2.0));
    std::ostringstream csv;
    t.write_csv(csv, "dt", true);
    CHECK(csv.str() == "dt,error,rate\n1,4,\n0.5,1,2\n0.25,0.25,2\n");
    CHECK_THROWS_AS(rate_table({1.0}, {1.0, 2.0}), Error);

    CHECK(loglog_slope({1, 10, 100}, {1, 0.1, 0.01}, 0, 3) == doctest::Approx(-1.0));
    CHECK(loglog_slope({1, 10, 100, 1000}, {1, 0.5, 0.25, 0.25}, 0, 3) == doctest::Approx(-std::log10(2.0)));
    CHECK(semilog_slope({0, 1, 2}, {1, std::exp(-3.0), std::exp(-6.0)}, 0, 3) == doctest::Approx(-3.0));
    CHECK_THROWS_AS(loglog_slope({1, 2}, {1, 2}, 0, 1), Error);
    CHECK_THROWS_AS(semilog_slope({1, 2}, {1, 2}, 0, 3), Error);
  }

  TEST_CASE("labels and checks") {
    CHECK(key_label(1e6) == "1000000");
    CHECK(key_label(100.0) == "100");
    CHECK(key_label(0.0625) == "0.0625");
    const std::vector<Check> checks{{"a", true, "x"}, {"b", false, "y"}};
    CHECK_FALSE(all_pass(checks));
    CHECK(all_pass({checks[0]}));
    CHECK(to_json(checks)[1]["name"] == "b");
    CHECK(to_json(checks)[1]["pass"] == false);
  }

  TEST_CASE("ledger reductions") {
    EnergyLedger l;
    StepRecord a, b;
    a.kinetic = 4.0;
    a.energy_residual = -2e-9;
    a.stability_margin = 0.5;
    a.div_residual = 1e-14;
    b.kinetic = 0.5;
    b.energy_residual = 1e-10;
    b.div_residual = 3e-14;
    l.append(a);
    l.append(b);
    CHECK(max_energy_residual(l) == doctest::Approx(5e-10));
    CHECK(min_stability_margin(l) == 0.5);
    CHECK(max_div_residual(l) == 3e-14);
    CHECK(std::isinf(min_stability_margin(EnergyLedger{})));
  }

  TEST_CASE("Nusselt numbers") {
    const DofMapPtr t = build_dofmap(build_unit_square_mesh(4), ElementKind::p2_scalar);
    const Field conduction = interpolate(t, ScalarFunction([](double x, double, double) { return 1.0 - x; }), 0);
    for (Wall w : {Wall::hot, Wall::cold}) {
      const NusseltProfile p = compute_nusselt(conduction, w);
      CHECK(p.y.size() == 12);
      CHECK(std::is_sorted(p.y.begin(), p.y.end()));
      for (double v : p.nu) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(p.average() == doctest::Approx(1.0));
    }
    const Field flat = interpolate(t, ScalarFunction([](double, double, double) { return 0.3; }), 0);
    CHECK(std::abs(compute_nusselt(flat, Wall::hot).average()) <= 1e-12);
    // T = 1 - x^2 has -dT/dx = 0 at x = 0 and 2 at x = 1.
    const Field quad = interpolate(t, ScalarFunction([](double x, double, double) { return 1.0 - x * x; }), 0);
    CHECK(std::abs(compute_nusselt(quad, Wall::hot).average()) <= 1e-12);
    CHECK(compute_nusselt(quad, Wall::cold).average() == doctest::Approx(2.0));
    CHECK(sup_difference(compute_nusselt(quad, Wall::cold), compute_nusselt(conduction, Wall::cold)) ==
          doctest::Approx(1.0));
    const DofMapPtr coarse = build_dofmap(build_unit_square_mesh(2), ElementKind::p2_scalar);
    CHECK_THROWS_AS(sup_difference(compute_nusselt(quad, Wall::hot),
                                   compute_nusselt(Field(coarse), Wall::hot)),
                    Error);
  }

  TEST_CASE("vorticity and streamfunction") {
    SUBCASE("rigid rotation has vorticity 2") {
      const DofMapPtr v = build_dofmap(build_unit_square_mesh(4), ElementKind::p2_vector);
      const VorticityStream vs =
          compute_vorticity_stream(interpolate(v, VectorFunction([](double x, double y, double) { return Vec2(-y, x); }), 0));
      CHECK((vs.vorticity.values().array() - 2.0).abs().maxCoeff() <= 1e-12);
    }
    SUBCASE("rest gives zero fields") {
      const DofMapPtr v = build_dofmap(build_unit_square_mesh(4), ElementKind::p2_vector);
      const VorticityStream vs = compute_vorticity_stream(Field(v));
      CHECK(vs.vorticity.values().cwiseAbs().maxCoeff() == 0.0);
      CHECK(vs.streamfunction.values().cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("streamfunction converges at second order") {
      // psi = sin(pi x) sin(pi y), w = (-psi_y, psi_x).
      auto w = [](double x, double y, double) {
        return Vec2(-pi * std::sin(pi * x) * std::cos(pi * y), pi * std::cos(pi * x) * std::sin(pi * y));
      };
      auto psi = [](double x, double y, double) { return std::sin(pi * x) * std::sin(pi * y); };
      double errors[2];
      for (int k = 0; k < 2; ++k) {
        const DofMapPtr v = build_dofmap(build_unit_square_mesh(8 << k), ElementKind::p2_vector);
        errors[k] = l2_error(compute_vorticity_stream(interpolate(v, VectorFunction(w), 0)).streamfunction,
                             ScalarFunction(psi), 0);
      }
      MESSAGE("streamfunction errors " << errors[0] << " " << errors[1]);
      CHECK(errors[1] < 0.01);
      CHECK(std::log2(errors[0] / errors[1]) >= 1.8);
    }
  }

  TEST_CASE("convergence without nudging or rotation is second order") {
    SimConfig c = default_config(Experiment::converge);
    c.n = 24;
    c.chi = 0.0;
    c.omega = 0.0;
    c.t_final = 1.0;
    c.dt_list = {0.25, 0.125, 0.0625};
    const ConvergenceResult r = run_convergence(c, {});
    MESSAGE("rates " << r.table.rows[1].rate << " " << r.table.rows[2].rate);
    for (const Check& chk : r.checks) CHECK_MESSAGE(chk.pass, chk.name << ": " << chk.detail);
  }

  TEST_CASE("dt must divide the final time") {
    SimConfig c = default_config(Experiment::converge);
    c.n = 4;
    c.coarse_n = 2;
    c.t_final = 1.0;
    c.dt_list = {0.3};
    try {
      run_convergence(c, {});
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(e.key() == "dt");
    }
  }

  TEST_CASE("chi sweep without rotation has nothing to fit") {
    SimConfig c = default_config(Experiment::chi_sweep);
    c.n = 8;
    c.coarse_n = 4;
    c.omega = 0.0;
    c.t_final = 0.5;
    c.dt = 0.125;
    c.chi_list = {10.0, 100.0};
    const ChiSweepResult r = run_chi_sweep(c, {});
    const Check* slope = find_check(r.checks, "chi slope");
    REQUIRE(slope != nullptr);
    CHECK_FALSE(slope->pass);
    CHECK(slope->detail.find("empty fit window") != std::string::npos);
  }

  TEST_CASE("decay with too few samples is flagged") {
    SimConfig c = default_config(Experiment::decay);
    c.n = 8;
    c.coarse_n = 4;
    c.dt = 0.01;
    c.t_final = 0.01;
    c.chi_list = {10.0, 100.0};
    const DecayResult r = run_decay(c, {});
    const Check* w = find_check(r.checks, "fit windows");
    REQUIRE(w != nullptr);
    CHECK_FALSE(w->pass);
    CHECK_FALSE(all_pass(r.checks));
  }

  TEST_CASE("cavity stopped before steady state is flagged") {
    SimConfig c = default_config(Experiment::cavity);
    c.n = 4;
    c.coarse_n = 2;
    c.max_steps = 3;
    c.refine_check = false;
    c.chi_list = {1.0, 100.0};
    const CavityResult r = run_double_pane(c, {});
    const Check* s = find_check(r.checks, "steady state");
    REQUIRE(s != nullptr);
    CHECK_FALSE(s->pass);
    CHECK(r.cases.size() == 4);
  }

  TEST_CASE("parallel sweeps are deterministic") {
    SimConfig c = default_config(Experiment::converge);
    c.n = 6;
    c.coarse_n = 3;
    c.t_final = 0.5;
    c.dt_list = {0.25, 0.125};
    c.jobs = 2;
    const fs::path a = scratch("det_a"), b = scratch("det_b");
    run_convergence(c, a);
    c.jobs = 1;
    run_convergence(c, b);
    std::size_t files = 0;
    for (const auto& entry : fs::directory_iterator(a)) {
      ++files;
      const fs::path other = b / entry.path().filename();
      REQUIRE(fs::exists(other));
      CHECK(slurp(entry.path()) == slurp(other));
    }
    CHECK(files == 3);
    fs::remove_all(a);
    fs::remove_all(b);
  }

  TEST_CASE("DNS export writes one snapshot per step") {
    SimConfig c = default_config(Experiment::dns_export);
    c.n = 4;
    c.coarse_n = 2;
    c.t_final = 0.25;
    c.dt = 0.125;
    const fs::path out = scratch("export");
    const RunRecord r = run_dns_export(c, out);
    CHECK(r.scalars["snapshots"] == 3);
    const SnapshotObservations obs = SnapshotObservations::read_csv_file((out / "observations.csv").string());
    REQUIRE(obs.size() == 3);
    CHECK(obs.times()[2] == doctest::Approx(0.25));
    CHECK(obs.snapshot(0).size() == 2 * 8);
    CHECK(fs::exists(out / "series_dns.csv"));
    fs::remove_all(out);
  }
}
