#include "nudge/experiments.hpp"

#include <cmath>
#include <exception>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "nudge/error.hpp"

namespace nudge {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

IntegratorOptions integrator_options(const SimConfig& cfg) {
  IntegratorOptions o;
  o.solver_tolerance = cfg.solver_tol;
  o.observation_time = cfg.observation_time == "average" ? ObservationTime::average : ObservationTime::midpoint;
  return o;
}

ModelSpec nse_model(const SimConfig& cfg, ModelKind kind, double chi) {
  ModelSpec m;
  m.kind = kind;
  m.nu = cfg.nu;
  m.omega = cfg.omega;
  m.chi = chi;
  m.dt = cfg.dt;
  m.t_final = cfg.t_final;
  m.boundary = cfg.boundary == "cavity" ? BoundaryKind::cavity : BoundaryKind::manufactured;
  m.forcing = ForcingKind::manufactured;
  validate(m);
  return m;
}

ModelSpec boussinesq_model(const SimConfig& cfg, ModelKind kind, double omega, double chi) {
  ModelSpec m;
  m.kind = kind;
  m.pr = cfg.pr;
  m.ra = cfg.ra;
  m.omega = omega;
  m.chi = chi;
  m.dt = cfg.dt;
  m.t_final = cfg.t_final;
  m.boundary = BoundaryKind::cavity;
  m.forcing = ForcingKind::zero;
  validate(m);
  return m;
}

Index step_count(double t_final, double dt) {
  const double ratio = t_final / dt;
  const Index steps = std::llround(ratio);
  if (steps < 1 || std::abs(ratio - static_cast<double>(steps)) > 1e-9 * ratio)
    throw ConfigError("dt", fmt::format("dt = {} does not divide t_final = {}", dt, t_final));
  return steps;
}

double l2_norm(const Discretization& d, const Eigen::VectorXd& v) { return std::sqrt(v.dot(d.mass * v)); }

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
  return out;
}

void write_ledger(const fs::path& out, const std::string& label, const EnergyLedger& ledger, bool with_error) {
  if (out.empty()) return;
  auto f = open_output(out / fmt::format("series_{}.csv", label));
  ledger.write_csv(f, with_error);
}

/// Runs body(i) for i in [0, count) on at most `jobs` threads. Members own
/// their state; the first exception is rethrown after all members finish.
template <class Body>
void for_members(std::size_t count, int jobs, Body&& body) {
  std::vector<std::exception_ptr> errors(count);
  const long long n = static_cast<long long>(count);
#pragma omp parallel for schedule(dynamic, 1) num_threads(jobs)
  for (long long i = 0; i < n; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

/// Steps `integrator` from `state` for `steps` steps.
RunRecord run_fixed(Integrator& integrator, FlowState state, Index steps, std::string label,
                    const std::function<void(const FlowState&)>& after_step = {}) {
  RunRecord rec;
  rec.label = std::move(label);
  rec.model = integrator.model();
  for (Index i = 0; i < steps; ++i) {
    rec.ledger.append(integrator.step(state));
    if (after_step) after_step(state);
  }
  rec.final_state = std::move(state);
  return rec;
}

/// DNS snapshot pipeline: coarse means of every step, as CSV text.
class SnapshotWriter {
 public:
  explicit SnapshotWriter(const ObservationOperator& op) : op_(op) { write_snapshot_header(text_); }
  void record(const FlowState& s) { write_snapshot_rows(text_, s.time, op_.apply(s.velocity)); }
  /// Writes observations.csv (when out is set) and reads it back.
  SnapshotObservations publish(const fs::path& out) const {
    if (out.empty()) {
      std::istringstream in(text_.str());
      return SnapshotObservations::read_csv(in);
    }
    const fs::path path = out / "observations.csv";
    {
      auto f = open_output(path);
      f << text_.str();
    }
    return SnapshotObservations::read_csv_file(path.string());
  }

 private:
  const ObservationOperator& op_;
  std::ostringstream text_;
};

SnapshotObservations observations_for(const SimConfig& cfg, const SnapshotWriter& writer, const fs::path& out) {
  if (!cfg.observations.empty()) return SnapshotObservations::read_csv_file(cfg.observations);
  return writer.publish(out);
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) return false;
  return true;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += fmt::format("{}{:.4g}", i ? ", " : "", v[i]);
  return s;
}

Check energy_check(double worst) {
  return {"energy identity", worst <= 1e-8, fmt::format("max residual / max(1, K) = {:.3e} (limit 1e-8)", worst)};
}

Check divergence_check(double worst) {
  return {"divergence residual", worst <= 1e-9, fmt::format("max ||B v||_inf = {:.3e} (limit 1e-9)", worst)};
}

}  // namespace

ModelSpec dns_model(const SimConfig& cfg) {
  if (cfg.model == "boussinesq-dns") return boussinesq_model(cfg, ModelKind::boussinesq_dns, cfg.omega, 0.0);
  return nse_model(cfg, ModelKind::nse_dns, 0.0);
}

// ---------------------------------------------------------------------------

json ConvergenceResult::summary() const {
  json rows = json::array();
  for (const RateRow& r : table.rows)
    rows.push_back({{"dt", r.key}, {"error", r.error}, {"rate", std::isnan(r.rate) ? json(nullptr) : json(r.rate)}});
  return {{"rows", rows}, {"max_energy_residual", max_energy_residual}, {"max_div_residual", max_div_residual}};
}

ConvergenceResult run_convergence(const SimConfig& cfg, const fs::path& out) {
  const DiscretizationPtr disc = build_discretization(cfg.n, cfg.coarse_n);
  const ManufacturedSolution exact = exponential_trig_solution();
  const AnalyticObservations data(*disc->observation, exact.velocity);
  ConvergenceResult result;
  result.runs.resize(cfg.dt_list.size());

  for_members(cfg.dt_list.size(), cfg.jobs, [&](std::size_t i) {
    SimConfig c = cfg;
    c.dt = cfg.dt_list[i];
    const ModelSpec model =
        nse_model(c, cfg.chi > 0.0 ? ModelKind::nse_nudged : ModelKind::nse_dns, cfg.chi);
    CnleIntegrator integrator(disc, model, &data, integrator_options(cfg));
    integrator.set_reference(exact.velocity);
    result.runs[i] = run_fixed(integrator, initial_flow_state(*disc, model), step_count(c.t_final, c.dt),
                               "dt_" + key_label(c.dt));
  });

  std::vector<double> errors;
  for (const RunRecord& r : result.runs) {
    errors.push_back(r.ledger.back().err_L2);
    result.max_energy_residual = std::max(result.max_energy_residual, max_energy_residual(r.ledger));
    result.max_div_residual = std::max(result.max_div_residual, max_div_residual(r.ledger));
    write_ledger(out, r.label, r.ledger, true);
  }
  result.table = rate_table(cfg.dt_list, errors);

  std::vector<double> rates;
  for (const RateRow& r : result.table.rows)
    if (!std::isnan(r.rate) && r.key <= 0.25 * (1.0 + 1e-12)) rates.push_back(r.rate);
  const bool in_band =
      !rates.empty() && std::all_of(rates.begin(), rates.end(), [](double r) { return r >= 1.7 && r <= 2.2; });
  result.checks.push_back({"temporal rates", in_band,
                           rates.empty() ? "no rates from dt = 1/4 onward"
                                         : fmt::format("rates from dt = 1/4: {} (band [1.7, 2.2])", join(rates))});
  result.checks.push_back(
      {"errors decrease", strictly_decreasing(errors), fmt::format("errors: {}", join(errors))});
  result.checks.push_back(energy_check(result.max_energy_residual));
  result.checks.push_back(divergence_check(result.max_div_residual));

  if (!out.empty()) {
    auto f = open_output(out / "convergence.csv");
    result.table.write_csv(f, "dt", true);
  }
  return result;
}

// ---------------------------------------------------------------------------

json ChiSweepResult::summary() const {
  json rows = json::array();
  for (const RateRow& r : table.rows) rows.push_back({{"chi", r.key}, {"error", r.error}});
  return {{"rows", rows},
          {"slope", std::isnan(table.slope) ? json(nullptr) : json(table.slope)},
          {"fit_window", {table.fit_begin, table.fit_end}},
          {"floor", floor},
          {"dns_norm", dns_norm}};
}

ChiSweepResult run_chi_sweep(const SimConfig& cfg, const fs::path& out) {
  const DiscretizationPtr disc = build_discretization(cfg.n, cfg.coarse_n);
  const Index steps = step_count(cfg.t_final, cfg.dt);
  const IntegratorOptions options = integrator_options(cfg);

  const ModelSpec dns = nse_model(cfg, ModelKind::nse_dns, 0.0);
  CnleIntegrator dns_integrator(disc, dns, nullptr, options);
  const FlowState initial = initial_flow_state(*disc, dns);
  SnapshotWriter writer(*disc->observation);
  writer.record(initial);
  RunRecord truth = run_fixed(dns_integrator, initial, steps, "dns", [&](const FlowState& s) { writer.record(s); });
  write_ledger(out, truth.label, truth.ledger, false);
  const SnapshotObservations data = observations_for(cfg, writer, out);

  ChiSweepResult result;
  result.runs.resize(cfg.chi_list.size());
  for_members(cfg.chi_list.size(), cfg.jobs, [&](std::size_t i) {
    const ModelSpec model = nse_model(cfg, ModelKind::nse_nudged, cfg.chi_list[i]);
    CnleIntegrator integrator(disc, model, &data, options);
    result.runs[i] = run_fixed(integrator, initial, steps, "chi_" + key_label(cfg.chi_list[i]));
  });

  std::vector<double> errors;
  double worst_energy = max_energy_residual(truth.ledger);
  for (RunRecord& r : result.runs) {
    const double e = l2_norm(*disc, r.final_state.velocity - truth.final_state.velocity);
    r.scalars["error"] = e;
    errors.push_back(e);
    worst_energy = std::max(worst_energy, max_energy_residual(r.ledger));
    write_ledger(out, r.label, r.ledger, false);
  }
  result.dns_norm = l2_norm(*disc, truth.final_state.velocity);
  result.floor = cfg.solver_tol * result.dns_norm;
  result.table = rate_table(cfg.chi_list, errors);

  // Fit window: the leading rows that stay above 10x the solver floor.
  std::size_t end = 0;
  while (end < errors.size() && errors[end] > 10.0 * result.floor) ++end;
  result.table.fit_end = end;
  if (end >= 2) {
    result.table.slope = loglog_slope(cfg.chi_list, errors, 0, end);
    std::vector<double> window(errors.begin(), errors.begin() + static_cast<long>(end));
    bool monotone = true;
    for (std::size_t i = 1; i < window.size(); ++i) monotone = monotone && window[i] <= window[i - 1];
    result.checks.push_back({"chi slope", result.table.slope >= -0.65 && result.table.slope <= -0.35,
                             fmt::format("slope {:.4f} over {} points (band [-0.65, -0.35]); E = {}",
                                         result.table.slope, end, join(errors))});
    result.checks.push_back({"E monotone in chi", monotone, fmt::format("E over the window: {}", join(window))});
  } else {
    result.checks.push_back({"chi slope", false,
                             fmt::format("empty fit window: fewer than two errors above 10x floor {:.3e}",
                                         result.floor)});
  }
  result.checks.push_back(energy_check(worst_energy));

  if (!out.empty()) {
    auto f = open_output(out / "chi_sweep.csv");
    result.table.write_csv(f, "chi", false);
  }
  return result;
}

// ---------------------------------------------------------------------------

json DecayResult::summary() const {
  json rows = json::array();
  for (const DecaySeries& s : series)
    rows.push_back({{"chi", s.chi}, {"rate", std::isnan(s.rate) ? json(nullptr) : json(s.rate)}, {"window", s.window}});
  return {{"series", rows}, {"floor", floor}, {"max_energy_residual", max_energy_residual}};
}

DecayResult run_decay(const SimConfig& cfg, const fs::path& out) {
  const DiscretizationPtr disc = build_discretization(cfg.n, cfg.coarse_n);
  const Index steps = step_count(cfg.t_final, cfg.dt);
  const IntegratorOptions options = integrator_options(cfg);

  const ModelSpec dns = nse_model(cfg, ModelKind::nse_dns, 0.0);
  CnleIntegrator dns_integrator(disc, dns, nullptr, options);
  const FlowState initial = initial_flow_state(*disc, dns);
  SnapshotWriter writer(*disc->observation);
  writer.record(initial);
  std::vector<Eigen::VectorXd> trajectory{initial.velocity};
  trajectory.reserve(static_cast<std::size_t>(steps) + 1);
  RunRecord truth = run_fixed(dns_integrator, initial, steps, "dns", [&](const FlowState& s) {
    writer.record(s);
    trajectory.push_back(s.velocity);
  });
  write_ledger(out, truth.label, truth.ledger, false);
  const SnapshotObservations data = observations_for(cfg, writer, out);

  // Rest state made compatible with the boundary data.
  FlowState start;
  start.velocity = stokes_lift(*disc, velocity_constraints(*disc, dns, 0.0));
  start.pressure = Eigen::VectorXd::Zero(disc->pressure->dof_count());

  DecayResult result;
  result.floor = cfg.solver_tol * l2_norm(*disc, initial.velocity);
  std::vector<double> chis{0.0};
  chis.insert(chis.end(), cfg.chi_list.begin(), cfg.chi_list.end());
  result.series.resize(chis.size());
  std::vector<double> energy(chis.size(), 0.0);

  for_members(chis.size(), cfg.jobs, [&](std::size_t i) {
    const ModelSpec model = nse_model(cfg, chis[i] > 0.0 ? ModelKind::nse_nudged : ModelKind::nse_dns, chis[i]);
    CnleIntegrator integrator(disc, model, &data, options);
    DecaySeries& s = result.series[i];
    s.chi = chis[i];
    s.t.push_back(0.0);
    s.error.push_back(l2_norm(*disc, start.velocity - trajectory[0]));
    const RunRecord run = run_fixed(integrator, start, steps, "", [&](const FlowState& st) {
      s.t.push_back(st.time);
      s.error.push_back(l2_norm(*disc, st.velocity - trajectory[static_cast<std::size_t>(st.step)]));
    });
    energy[i] = max_energy_residual(run.ledger);
    std::size_t end = 0;
    while (end < s.error.size() && s.error[end] > 10.0 * result.floor) ++end;
    s.window = end;
    if (end >= 3) s.rate = -semilog_slope(s.t, s.error, 0, end);
  });
  for (double e : energy) result.max_energy_residual = std::max(result.max_energy_residual, e);

  std::vector<double> rates;
  bool windows_ok = true;
  std::string short_windows;
  for (std::size_t i = 1; i < result.series.size(); ++i) {
    const DecaySeries& s = result.series[i];
    rates.push_back(s.rate);
    if (s.window < 3) {
      windows_ok = false;
      short_windows += fmt::format(" chi={}({} samples)", key_label(s.chi), s.window);
    }
  }
  result.checks.push_back({"fit windows", windows_ok,
                           windows_ok ? "every series has >= 3 samples above 10x floor"
                                      : "window too short:" + short_windows});
  bool increasing = windows_ok;
  for (std::size_t i = 1; i < rates.size(); ++i) increasing = increasing && rates[i] > rates[i - 1];
  result.checks.push_back({"decay rate increases with chi", increasing,
                           fmt::format("rates {} for chi {} (chi=0 baseline {:.4g})", join(rates),
                                       join(cfg.chi_list), result.series[0].rate)});
  if (rates.size() >= 2) {
    const double ratio = rates[1] / rates[0];
    result.checks.push_back({"small-chi rate ratio", ratio >= 1.5 && ratio <= 2.5,
                             fmt::format("r({})/r({}) = {:.4f} (band [1.5, 2.5])", key_label(cfg.chi_list[1]),
                                         key_label(cfg.chi_list[0]), ratio)});
  }
  result.checks.push_back(energy_check(result.max_energy_residual));

  if (!out.empty())
    for (const DecaySeries& s : result.series) {
      auto f = open_output(out / fmt::format("decay_{}.csv", key_label(s.chi)));
      f << "t,err\n";
      for (std::size_t k = 0; k < s.t.size(); ++k) f << fmt::format("{:.17g},{:.17g}\n", s.t[k], s.error[k]);
    }
  return result;
}

// ---------------------------------------------------------------------------

json CavityResult::summary() const {
  json rows = json::array();
  auto num = [](double v) { return std::isnan(v) ? json(nullptr) : json(v); };
  for (const CavityCase& c : cases)
    rows.push_back({{"case", c.label},
                    {"chi", num(c.chi)},
                    {"converged", c.converged},
                    {"steps", c.run.ledger.records().size()},
                    {"nusselt_hot", c.hot.average()},
                    {"nusselt_cold", c.cold.average()},
                    {"distance", num(c.distance)},
                    {"nusselt_discrepancy", num(c.nusselt_discrepancy)}});
  return {{"cases", rows}, {"refined_nusselt", num(refined_nusselt)}, {"refine_change", num(refine_change)}};
}

namespace {

struct SteadyRun {
  RunRecord run;
  bool converged = false;
};

SteadyRun run_cavity_case(const DiscretizationPtr& disc, const ModelSpec& model, const ObservationSource* data,
                          const SimConfig& cfg, std::string label,
                          const std::function<void(const FlowState&)>& after_step = {}) {
  BoussinesqIntegrator integrator(disc, model, data, integrator_options(cfg));
  SteadyOptions so;
  so.tolerance = cfg.steady_tol;
  so.max_steps = cfg.max_steps;
  if (after_step) so.observer = [&](const FlowState& s, const StepRecord&) { after_step(s); };
  SteadyResult r = run_to_steady(integrator, initial_boussinesq_state(*disc, model), so);
  SteadyRun out;
  out.converged = r.converged;
  out.run.label = std::move(label);
  out.run.model = model;
  out.run.ledger = std::move(r.ledger);
  out.run.final_state = std::move(r.state);
  return out;
}

void export_case(const fs::path& out, const Discretization& disc, const CavityCase& c) {
  if (out.empty()) return;
  write_ledger(out, c.label, c.run.ledger, false);
  auto write_profile = [&](const NusseltProfile& p, const std::string& name) {
    auto f = open_output(out / name);
    f << "y,nu\n";
    for (std::size_t i = 0; i < p.y.size(); ++i) f << fmt::format("{:.17g},{:.17g}\n", p.y[i], p.nu[i]);
  };
  write_profile(c.hot, fmt::format("nusselt_{}.csv", c.label));
  write_profile(c.cold, fmt::format("nusselt_{}_cold.csv", c.label));
  const FlowState& s = c.run.final_state;
  const Field velocity(disc.velocity, s.velocity, s.time);
  const Field pressure(disc.pressure, s.pressure, s.time);
  const Field temperature(disc.temperature, s.temperature, s.time);
  const VorticityStream vs = compute_vorticity_stream(velocity);
  auto f = open_output(out / fmt::format("fields_{}.vtk", c.label));
  write_vtk_fields(f,
                   {{"velocity", &velocity},
                    {"pressure", &pressure},
                    {"temperature", &temperature},
                    {"vorticity", &vs.vorticity},
                    {"streamfunction", &vs.streamfunction}},
                   c.label.c_str());
}

}  // namespace

CavityResult run_double_pane(const SimConfig& cfg, const fs::path& out) {
  const DiscretizationPtr disc = build_discretization(cfg.n, cfg.coarse_n);
  SnapshotWriter writer(*disc->observation);

  // Phase 1: the two DNS runs (and the refined one) are independent.
  SteadyRun plain, rotating, refined;
  DiscretizationPtr fine;
  const bool refine = cfg.refine_check;
  for_members(refine ? 3 : 2, cfg.jobs, [&](std::size_t i) {
    if (i == 0) {
      plain = run_cavity_case(disc, boussinesq_model(cfg, ModelKind::boussinesq_dns, 0.0, 0.0), nullptr, cfg,
                              "dns_nocoriolis");
    } else if (i == 1) {
      const ModelSpec model = boussinesq_model(cfg, ModelKind::boussinesq_dns, cfg.omega, 0.0);
      writer.record(initial_boussinesq_state(*disc, model));
      rotating = run_cavity_case(disc, model, nullptr, cfg, "dns_coriolis",
                                 [&](const FlowState& s) { writer.record(s); });
    } else {
      fine = build_discretization(2 * cfg.n, cfg.coarse_n);
      refined = run_cavity_case(fine, boussinesq_model(cfg, ModelKind::boussinesq_dns, 0.0, 0.0), nullptr, cfg,
                                "dns_nocoriolis_refined");
    }
  });
  const SnapshotObservations data = observations_for(cfg, writer, out);

  // Phase 2: nudged runs without Coriolis, fed only the observation CSV.
  std::vector<SteadyRun> nudged(cfg.chi_list.size());
  for_members(cfg.chi_list.size(), cfg.jobs, [&](std::size_t i) {
    const double chi = cfg.chi_list[i];
    nudged[i] = run_cavity_case(disc, boussinesq_model(cfg, ModelKind::boussinesq_nudged, cfg.omega, chi), &data,
                                cfg, "nudged_chi_" + key_label(chi));
  });

  CavityResult result;
  auto make_case = [&](SteadyRun&& r, double chi) {
    CavityCase c;
    c.label = r.run.label;
    c.chi = chi;
    c.converged = r.converged;
    c.run = std::move(r.run);
    const Field t(disc->temperature, c.run.final_state.temperature, c.run.final_state.time);
    c.hot = compute_nusselt(t, Wall::hot);
    c.cold = compute_nusselt(t, Wall::cold);
    return c;
  };
  result.cases.push_back(make_case(std::move(plain), std::numeric_limits<double>::quiet_NaN()));
  result.cases.push_back(make_case(std::move(rotating), std::numeric_limits<double>::quiet_NaN()));
  for (std::size_t i = 0; i < nudged.size(); ++i) result.cases.push_back(make_case(std::move(nudged[i]), cfg.chi_list[i]));

  const CavityCase& reference = result.cases[1];
  std::vector<double> distances, discrepancies;
  for (std::size_t i = 2; i < result.cases.size(); ++i) {
    CavityCase& c = result.cases[i];
    c.distance = l2_norm(*disc, c.run.final_state.velocity - reference.run.final_state.velocity);
    c.nusselt_discrepancy = sup_difference(c.hot, reference.hot);
    distances.push_back(c.distance);
    discrepancies.push_back(c.nusselt_discrepancy);
  }
  for (const CavityCase& c : result.cases) export_case(out, *disc, c);

  std::string unconverged;
  for (const CavityCase& c : result.cases)
    if (!c.converged) unconverged += " " + c.label;
  if (refine && !refined.converged) unconverged += " dns_nocoriolis_refined";
  result.checks.push_back({"steady state", unconverged.empty(),
                           unconverged.empty() ? fmt::format("all runs below {:.1e}", cfg.steady_tol)
                                               : "no steady state within max_steps:" + unconverged});
  result.checks.push_back({"D(chi) decreasing", strictly_decreasing(distances),
                           fmt::format("D = {} for chi = {}", join(distances), join(cfg.chi_list))});
  result.checks.push_back({"Nusselt discrepancy decreasing", strictly_decreasing(discrepancies),
                           fmt::format("sup |Nu - Nu_DNS| = {}", join(discrepancies))});
  if (refine) {
    const Field t(fine->temperature, refined.run.final_state.temperature);
    result.refined_nusselt = compute_nusselt(t, Wall::hot).average();
    const double coarse = result.cases[0].hot.average();
    result.refine_change = std::abs(result.refined_nusselt - coarse) / std::abs(result.refined_nusselt);
    result.checks.push_back({"Nusselt grid convergence", result.refine_change <= 0.02,
                             fmt::format("Nu(n={}) = {:.6f}, Nu(n={}) = {:.6f}, change {:.3f}% (limit 2%)", cfg.n,
                                         coarse, 2 * cfg.n, result.refined_nusselt, 100 * result.refine_change)});
  }
  return result;
}

// ---------------------------------------------------------------------------

RunRecord run_dns_export(const SimConfig& cfg, const fs::path& out) {
  const DiscretizationPtr disc = build_discretization(cfg.n, cfg.coarse_n);
  SnapshotWriter writer(*disc->observation);
  const ModelSpec model = dns_model(cfg);
  RunRecord rec;
  if (is_boussinesq(model.kind)) {
    writer.record(initial_boussinesq_state(*disc, model));
    SteadyRun r = run_cavity_case(disc, model, nullptr, cfg, "dns", [&](const FlowState& s) { writer.record(s); });
    rec = std::move(r.run);
    rec.scalars["converged"] = r.converged;
  } else {
    CnleIntegrator integrator(disc, model, nullptr, integrator_options(cfg));
    const FlowState initial = initial_flow_state(*disc, model);
    writer.record(initial);
    rec = run_fixed(integrator, initial, step_count(cfg.t_final, cfg.dt), "dns",
                    [&](const FlowState& s) { writer.record(s); });
  }
  rec.scalars["snapshots"] = rec.ledger.records().size() + 1;
  rec.scalars["max_energy_residual"] = max_energy_residual(rec.ledger);
  write_ledger(out, rec.label, rec.ledger, false);
  writer.publish(out);
  return rec;
}

}  // namespace nudge
