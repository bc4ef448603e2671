#include "nudge/stepping.hpp"

#include <cmath>
#include <ostream>

#include <fmt/format.h>

#include "nudge/error.hpp"

namespace nudge {

namespace {

using Triplets = std::vector<Eigen::Triplet<double, Index>>;

void add_block(Triplets& out, const SparseOperator& a, Index row0, Index col0, double scale = 1.0) {
  for (Index col = 0; col < a.outerSize(); ++col)
    for (SparseOperator::InnerIterator it(a, col); it; ++it)
      out.emplace_back(row0 + it.row(), col0 + it.col(), scale * it.value());
}

double quadratic(const SparseOperator& a, const Eigen::VectorXd& x) { return x.dot(a * x); }

bool homogeneous_boundary(const ModelSpec& model) { return model.boundary == BoundaryKind::cavity; }

VectorFunction model_forcing(const ModelSpec& model) {
  if (model.forcing == ForcingKind::zero) return {};
  // The data-generating flow carries omega R(u); the body force is the same
  // for the DNS and for the nudged model.
  return manufactured_forcing(exponential_trig_solution(), model.viscosity(), model.omega, model.omega != 0.0);
}

}  // namespace

DiscretizationPtr build_discretization(int n, int coarse_n) {
  auto d = std::make_shared<Discretization>();
  d->n = n;
  d->mesh = build_unit_square_mesh(n);
  d->velocity = build_dofmap(d->mesh, ElementKind::p2_vector);
  d->pressure = build_dofmap(d->mesh, ElementKind::p1_scalar);
  d->temperature = build_dofmap(d->mesh, ElementKind::p2_scalar);
  d->mass = assemble_mass(*d->velocity);
  d->laplacian = assemble_stiffness(*d->velocity, 1.0);
  d->divergence = assemble_divergence(*d->velocity, *d->pressure);
  d->coriolis = assemble_coriolis(*d->velocity);
  d->temperature_mass = assemble_mass(*d->temperature);
  d->temperature_laplacian = assemble_stiffness(*d->temperature, 1.0);
  const SparseOperator pmass = assemble_mass(*d->pressure);
  d->pressure_integrals = pmass * Eigen::VectorXd::Ones(d->pressure->dof_count());
  d->flux_weights = d->divergence.transpose() * Eigen::VectorXd::Ones(d->pressure->dof_count());
  d->observation = std::make_shared<const ObservationOperator>(d->velocity, coarse_n);
  return d;
}

double divergence_residual(const Discretization& disc, const Eigen::VectorXd& velocity) {
  return (disc.divergence * velocity).cwiseAbs().maxCoeff();
}

std::vector<Constraint> velocity_constraints(const Discretization& disc, const ModelSpec& model, double t) {
  const DofMap& dm = *disc.velocity;
  std::vector<Constraint> out;
  out.reserve(dm.boundary_dofs().size());
  if (homogeneous_boundary(model)) {
    for (const BoundaryDof& b : dm.boundary_dofs()) out.push_back({b.dof, 0.0});
    return out;
  }
  for (const BoundaryDof& b : dm.boundary_dofs()) {
    const Side side = static_cast<Side>(b.sides & -b.sides);  // lowest set bit
    const Index node = b.dof / 2;
    const int comp = static_cast<int>(b.dof % 2);
    const Vec2& p = dm.node_point(node);
    out.push_back({b.dof, velocity_boundary(model, side)(p.x(), p.y(), t)[comp]});
  }
  // Remove the discrete net flux along the boundary weights.
  double flux = 0.0, weight = 0.0;
  for (const Constraint& c : out) {
    const double s = disc.flux_weights[c.dof];
    flux += s * c.value;
    weight += s * s;
  }
  if (weight > 0.0)
    for (Constraint& c : out) c.value -= flux / weight * disc.flux_weights[c.dof];
  return out;
}

std::vector<Constraint> temperature_constraints(const Discretization& disc, const ModelSpec& model, double t) {
  const DofMap& dm = *disc.temperature;
  std::vector<Constraint> out;
  for (const BoundaryDof& b : dm.boundary_dofs()) {
    for (Side side : {side_left, side_right}) {
      if (!(b.sides & side)) continue;
      const auto g = temperature_boundary(model, side);
      const Vec2& p = dm.node_point(b.dof);
      out.push_back({b.dof, (*g)(p.x(), p.y(), t)});
      break;
    }
  }
  return out;
}

namespace {

Eigen::VectorXd solve_saddle(const Discretization& disc, const SparseOperator& velocity_block,
                             const Eigen::VectorXd& velocity_rhs, const std::vector<Constraint>& boundary,
                             const char* what) {
  const Index nv = disc.velocity->dof_count();
  const Index np = disc.pressure->dof_count();
  Triplets trip;
  add_block(trip, velocity_block, 0, 0);
  add_block(trip, SparseOperator(disc.divergence.transpose()), 0, nv, -1.0);
  add_block(trip, disc.divergence, nv, 0);
  LinearSystem sys;
  sys.matrix.resize(nv + np, nv + np);
  sys.matrix.setFromTriplets(trip.begin(), trip.end());
  sys.rhs = Eigen::VectorXd::Zero(nv + np);
  sys.rhs.head(nv) = velocity_rhs;
  sys.constraints = boundary;
  sys.constraints.push_back({nv, 0.0});
  DirectSolver solver;
  return solver.solve(sys, what).solution.head(nv);
}

}  // namespace

Eigen::VectorXd project_divergence_free(const Discretization& disc, const Eigen::VectorXd& velocity,
                                        const std::vector<Constraint>& boundary) {
  return solve_saddle(disc, disc.mass, disc.mass * velocity, boundary, "divergence-free projection");
}

Eigen::VectorXd stokes_lift(const Discretization& disc, const std::vector<Constraint>& boundary) {
  return solve_saddle(disc, disc.laplacian, Eigen::VectorXd::Zero(disc.velocity->dof_count()), boundary,
                      "Stokes lift");
}

FlowState initial_flow_state(const Discretization& disc, const ModelSpec& model) {
  FlowState s;
  s.pressure = Eigen::VectorXd::Zero(disc.pressure->dof_count());
  if (model.boundary == BoundaryKind::cavity) {
    s.velocity = Eigen::VectorXd::Zero(disc.velocity->dof_count());
  } else {
    const Field u0 = interpolate(disc.velocity, exponential_trig_solution().velocity, 0.0);
    s.velocity = project_divergence_free(disc, u0.values(), velocity_constraints(disc, model, 0.0));
  }
  return s;
}

FlowState initial_boussinesq_state(const Discretization& disc, const ModelSpec& model) {
  FlowState s;
  s.velocity = Eigen::VectorXd::Zero(disc.velocity->dof_count());
  s.pressure = Eigen::VectorXd::Zero(disc.pressure->dof_count());
  const double hot = model.hot_wall, cold = model.cold_wall;
  s.temperature =
      interpolate(disc.temperature, ScalarFunction([=](double x, double, double) { return hot + (cold - hot) * x; }), 0.0)
          .values();
  return s;
}

double Integrator::reference_error(const FlowState& state) const {
  if (reference_error_) return reference_error_(state);
  if (reference_) {
    const Field v(discretization().velocity, state.velocity, state.time);
    return l2_error(v, reference_, state.time);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

// ---------------------------------------------------------------------------
// Shared pieces of both integrators

namespace {

/// Assembles [A -B^T (chi P^T M_H); B 0 0; (-M_H P) 0 M_H] and solves with
/// Dirichlet constraints on the velocity and a pinned pressure dof. The
/// auxiliary coarse unknowns z = P v keep the nudging term sparse.
struct MomentumSolver {
  const Discretization* disc = nullptr;
  bool nudging = false;
  SparseOperator data_to_load;     // chi P^T M_H
  SparseOperator coarse_coupling;  // -M_H P
  SparseOperator coarse_mass;      // M_H
  DirectSolver solver;

  MomentumSolver(const Discretization& d, double chi, bool nudged, double tolerance)
      : disc(&d), nudging(nudged && chi > 0.0), solver(tolerance) {
    if (!nudging) return;
    const ObservationOperator& obs = *d.observation;
    const NudgingForm form = assemble_nudging(obs, chi);
    data_to_load = form.data_to_load;
    Eigen::VectorXd m(2 * obs.coarse_cell_count());
    for (Index c = 0; c < obs.coarse_cell_count(); ++c) m[2 * c] = m[2 * c + 1] = obs.cell_areas()[c];
    coarse_mass = SparseOperator(m.asDiagonal());
    coarse_coupling = -(m.asDiagonal() * obs.restriction());
  }

  Index coarse_size() const { return nudging ? 2 * disc->observation->coarse_cell_count() : 0; }

  /// Returns (velocity, pressure) and the solve residual.
  std::pair<Eigen::VectorXd, Eigen::VectorXd> solve(const SparseOperator& velocity_block,
                                                    Eigen::VectorXd velocity_rhs, const Eigen::VectorXd* data,
                                                    const std::vector<Constraint>& boundary,
                                                    const std::string& context, double* residual) {
    const Index nv = disc->velocity->dof_count();
    const Index np = disc->pressure->dof_count();
    const Index nz = coarse_size();
    Triplets trip;
    trip.reserve(static_cast<std::size_t>(velocity_block.nonZeros() + 2 * disc->divergence.nonZeros() +
                                          (nudging ? 2 * data_to_load.nonZeros() + nz : 0)));
    add_block(trip, velocity_block, 0, 0);
    add_block(trip, SparseOperator(disc->divergence.transpose()), 0, nv, -1.0);
    add_block(trip, disc->divergence, nv, 0);
    if (nudging) {
      add_block(trip, data_to_load, 0, nv + np);
      add_block(trip, coarse_coupling, nv + np, 0);
      add_block(trip, coarse_mass, nv + np, nv + np);
      velocity_rhs += data_to_load * (*data);
    }
    LinearSystem sys;
    sys.matrix.resize(nv + np + nz, nv + np + nz);
    sys.matrix.setFromTriplets(trip.begin(), trip.end());
    sys.rhs = Eigen::VectorXd::Zero(nv + np + nz);
    sys.rhs.head(nv) = velocity_rhs;
    sys.constraints = boundary;
    sys.constraints.push_back({nv, 0.0});
    const SolveReport rep = solver.solve(sys, context);
    if (residual) *residual = rep.relative_residual;
    Eigen::VectorXd p = rep.solution.segment(nv, np);
    p.array() -= disc->pressure_integrals.dot(p);  // |Omega| = 1
    return {rep.solution.head(nv), p};
  }
};

void check_finite(const Eigen::VectorXd& v, const char* what, Index step, double t) {
  if (!v.allFinite()) throw SolverError(fmt::format("non-finite {} at step {} (t = {})", what, step, t));
}

}  // namespace

// ---------------------------------------------------------------------------
// CNLE

struct CnleIntegrator::Impl {
  MomentumSolver momentum;
  VectorFunction forcing;
  std::optional<DirectSolver> dual_solver;  // factorization for ||f||_{-1}
  std::vector<Constraint> interior_constraints;

  Impl(const Discretization& d, const ModelSpec& m, double tol)
      : momentum(d, m.chi, m.has_nudging(), tol), forcing(model_forcing(m)) {}

  double dual_norm_squared(const Discretization& d, const Eigen::VectorXd& load) {
    if (!dual_solver) {
      dual_solver.emplace(1e-10);
      for (const BoundaryDof& b : d.velocity->boundary_dofs()) interior_constraints.push_back({b.dof, 0.0});
    }
    LinearSystem sys{d.laplacian, load, interior_constraints};
    for (const Constraint& c : interior_constraints) sys.rhs[c.dof] = 0.0;
    const Eigen::VectorXd z = dual_solver->solve(sys, "dual norm").solution;
    Eigen::VectorXd f = load;
    for (const Constraint& c : interior_constraints) f[c.dof] = 0.0;
    return f.dot(z);
  }
};

CnleIntegrator::CnleIntegrator(DiscretizationPtr disc, ModelSpec model, const ObservationSource* data,
                               IntegratorOptions options)
    : disc_(std::move(disc)), model_(std::move(model)), data_(data), options_(options) {
  validate(model_);
  if (is_boussinesq(model_.kind)) throw ConfigError("model", "CNLE integrates the NSE models only");
  if (model_.has_nudging() && model_.chi > 0.0 && !data_)
    throw ConfigError("observations", "nudged model needs an observation source");
  impl_ = std::make_unique<Impl>(*disc_, model_, options_.solver_tolerance);
}

CnleIntegrator::~CnleIntegrator() = default;

StepRecord CnleIntegrator::step(FlowState& state) {
  const Discretization& d = *disc_;
  const ObservationOperator& obs = *d.observation;
  const double dt = model_.dt;
  const double nu = model_.viscosity();
  const double chi = model_.has_nudging() ? model_.chi : 0.0;
  const double t_n = state.time;
  const double t_half = t_n + 0.5 * dt;
  const double t_next = t_n + dt;
  const Eigen::VectorXd& v_n = state.velocity;

  const Eigen::VectorXd convecting =
      state.has_previous ? Eigen::VectorXd(1.5 * v_n - 0.5 * state.previous_velocity) : v_n;
  const SparseOperator conv = assemble_convection(Field(d.velocity, convecting), *d.velocity);

  SparseOperator block = (2.0 / dt) * d.mass + conv + nu * d.laplacian;
  if (model_.has_coriolis()) block += model_.omega * d.coriolis;

  Eigen::VectorXd load = Eigen::VectorXd::Zero(d.velocity->dof_count());
  if (impl_->forcing) load = assemble_forcing(impl_->forcing, t_half, *d.velocity);
  const Eigen::VectorXd rhs = (2.0 / dt) * (d.mass * v_n) + load;

  Eigen::VectorXd data_means;
  if (chi > 0.0)
    data_means = options_.observation_time == ObservationTime::midpoint
                     ? data_->coarse_means(t_half)
                     : Eigen::VectorXd(0.5 * (data_->coarse_means(t_n) + data_->coarse_means(t_next)));

  // Midpoint boundary values; v_{n+1} = 2 m - v_n then carries g(t_{n+1}).
  std::vector<Constraint> bc = velocity_constraints(d, model_, t_next);
  for (Constraint& c : bc) c.value = 0.5 * (c.value + v_n[c.dof]);

  StepRecord rec;
  const std::string context = fmt::format("CNLE step {} (t = {})", state.step + 1, t_next);
  auto [mid, pressure] = impl_->momentum.solve(block, rhs, chi > 0.0 ? &data_means : nullptr, bc, context,
                                               &rec.solver_residual);
  check_finite(mid, "velocity", state.step + 1, t_next);

  Eigen::VectorXd v_next = 2.0 * mid - v_n;

  // Energy identity: test the momentum equation with the midpoint velocity.
  const double kin_n = quadratic(d.mass, v_n);
  const double kin_next = quadratic(d.mass, v_next);
  rec.kinetic = kin_next;
  rec.dissipation = nu * quadratic(d.laplacian, mid);
  rec.work = load.dot(mid);
  double nudge_inner = 0.0;
  Eigen::VectorXd nudge_force = Eigen::VectorXd::Zero(d.velocity->dof_count());
  if (chi > 0.0) {
    const Eigen::VectorXd ih_mid = obs.apply(mid);
    rec.nudge_energy = chi * obs.norm_squared(ih_mid);
    rec.misfit = chi * obs.norm_squared(data_means - ih_mid);
    nudge_inner = chi * obs.inner(ih_mid - data_means, ih_mid);
    nudge_force = impl_->momentum.data_to_load * (ih_mid - data_means);
  }
  // Reaction of the Dirichlet constraint, nonzero on boundary rows only.
  Eigen::VectorXd reaction = (2.0 / dt) * (d.mass * (mid - v_n)) + conv * mid + nu * (d.laplacian * mid) -
                             d.divergence.transpose() * pressure + nudge_force - load;
  if (model_.has_coriolis()) reaction += model_.omega * (d.coriolis * mid);
  double boundary_work = 0.0;
  for (const BoundaryDof& b : d.velocity->boundary_dofs()) boundary_work += mid[b.dof] * reaction[b.dof];
  rec.energy_residual =
      0.5 * (kin_next - kin_n) + dt * rec.dissipation + dt * nudge_inner - dt * rec.work - dt * boundary_work;
  rec.div_residual = divergence_residual(d, mid);

  if (homogeneous_boundary(model_)) {
    double rhs_bound = 0.0;
    if (impl_->forcing) rhs_bound += dt / nu * impl_->dual_norm_squared(d, load);
    if (chi > 0.0) rhs_bound += dt * chi * obs.norm_squared(data_means);
    const double lhs = kin_next - kin_n + dt * rec.dissipation + dt * rec.nudge_energy + dt * rec.misfit;
    rec.stability_margin = rhs_bound - lhs;
  }

  state.previous_velocity = v_n;
  state.velocity = std::move(v_next);
  state.pressure = std::move(pressure);
  state.has_previous = true;
  state.time = t_next;
  state.step += 1;

  rec.step = state.step;
  rec.t = t_next;
  rec.grad_norm = std::sqrt(quadratic(d.laplacian, state.velocity));
  rec.velocity_change = std::sqrt(quadratic(d.mass, state.velocity - state.previous_velocity)) / dt;
  rec.err_L2 = reference_error(state);
  if (kin_next > options_.energy_cap)
    throw SolverError(fmt::format("{}: kinetic energy {:.3e} exceeds the cap {:.1e}", context, kin_next,
                                  options_.energy_cap));
  return rec;
}

// ---------------------------------------------------------------------------
// BDF2 Boussinesq

struct BoussinesqIntegrator::Impl {
  MomentumSolver momentum;
  DirectSolver temperature_solver;
  VectorFunction forcing;

  Impl(const Discretization& d, const ModelSpec& m, double tol)
      : momentum(d, m.chi, m.has_nudging(), tol), temperature_solver(tol), forcing(model_forcing(m)) {}
};

BoussinesqIntegrator::BoussinesqIntegrator(DiscretizationPtr disc, ModelSpec model, const ObservationSource* data,
                                           IntegratorOptions options)
    : disc_(std::move(disc)), model_(std::move(model)), data_(data), options_(options) {
  validate(model_);
  if (!is_boussinesq(model_.kind)) throw ConfigError("model", "BDF2 integrates the Boussinesq models only");
  if (model_.has_nudging() && model_.chi > 0.0 && !data_)
    throw ConfigError("observations", "nudged model needs an observation source");
  impl_ = std::make_unique<Impl>(*disc_, model_, options_.solver_tolerance);
}

BoussinesqIntegrator::~BoussinesqIntegrator() = default;

StepRecord BoussinesqIntegrator::step(FlowState& state) {
  const Discretization& d = *disc_;
  const ObservationOperator& obs = *d.observation;
  const double dt = model_.dt;
  const double pr = model_.pr;
  const double chi = model_.has_nudging() ? model_.chi : 0.0;
  const double t_next = state.time + dt;
  const bool first = !state.has_previous;
  const std::string context = fmt::format("BDF2 step {} (t = {})", state.step + 1, t_next);

  const Eigen::VectorXd& w_n = state.velocity;
  const Eigen::VectorXd& temp_n = state.temperature;
  const Eigen::VectorXd convecting = first ? w_n : Eigen::VectorXd(2.0 * w_n - state.previous_velocity);
  const Field convecting_field(d.velocity, convecting);
  const double a0 = first ? 1.0 / dt : 1.5 / dt;

  // Temperature.
  const SparseOperator t_conv = assemble_convection(convecting_field, *d.temperature);
  LinearSystem tsys;
  tsys.matrix = a0 * d.temperature_mass + t_conv + d.temperature_laplacian;
  tsys.rhs = first ? Eigen::VectorXd(d.temperature_mass * temp_n / dt)
                   : Eigen::VectorXd(d.temperature_mass * (4.0 * temp_n - state.previous_temperature) / (2.0 * dt));
  if (model_.gamma != 0.0) {
    const double g = model_.gamma;
    tsys.rhs += assemble_forcing(ScalarFunction([g](double, double, double) { return g; }), t_next, *d.temperature);
  }
  tsys.constraints = temperature_constraints(d, model_, t_next);
  Eigen::VectorXd temp_next = impl_->temperature_solver.solve(tsys, context + " temperature").solution;
  check_finite(temp_next, "temperature", state.step + 1, t_next);

  // Momentum.
  const SparseOperator conv = assemble_convection(convecting_field, *d.velocity);
  SparseOperator block = a0 * d.mass + conv + pr * d.laplacian;
  if (model_.has_coriolis()) block += model_.omega * d.coriolis;
  Eigen::VectorXd load =
      assemble_buoyancy(Field(d.temperature, temp_next), pr, model_.ra, model_.gravity, *d.velocity);
  if (impl_->forcing) load += assemble_forcing(impl_->forcing, t_next, *d.velocity);
  const Eigen::VectorXd rhs = first ? Eigen::VectorXd(d.mass * w_n / dt)
                                    : Eigen::VectorXd(d.mass * (4.0 * w_n - state.previous_velocity) / (2.0 * dt));
  Eigen::VectorXd data_means;
  if (chi > 0.0) data_means = data_->coarse_means(t_next);
  StepRecord rec;
  auto [w_next, pressure] = impl_->momentum.solve(block, rhs + load, chi > 0.0 ? &data_means : nullptr,
                                                  velocity_constraints(d, model_, t_next), context,
                                                  &rec.solver_residual);
  check_finite(w_next, "velocity", state.step + 1, t_next);

  rec.kinetic = quadratic(d.mass, w_next);
  rec.dissipation = pr * quadratic(d.laplacian, w_next);
  rec.work = load.dot(w_next);
  if (chi > 0.0) {
    const Eigen::VectorXd ih = obs.apply(w_next);
    rec.nudge_energy = chi * obs.norm_squared(ih);
    rec.misfit = chi * obs.norm_squared(data_means - ih);
  }
  rec.div_residual = divergence_residual(d, w_next);
  rec.velocity_change = std::sqrt(quadratic(d.mass, w_next - w_n)) / dt;
  rec.temperature_change = std::sqrt(quadratic(d.temperature_mass, temp_next - temp_n)) / dt;

  state.previous_velocity = w_n;
  state.previous_temperature = temp_n;
  state.velocity = std::move(w_next);
  state.temperature = std::move(temp_next);
  state.pressure = std::move(pressure);
  state.has_previous = true;
  state.time = t_next;
  state.step += 1;

  rec.step = state.step;
  rec.t = t_next;
  rec.grad_norm = std::sqrt(quadratic(d.laplacian, state.velocity));
  rec.err_L2 = reference_error(state);
  if (rec.kinetic > options_.energy_cap)
    throw SolverError(fmt::format("{}: kinetic energy {:.3e} exceeds the cap {:.1e}", context, rec.kinetic,
                                  options_.energy_cap));
  return rec;
}

// ---------------------------------------------------------------------------

void EnergyLedger::write_csv(std::ostream& out, bool with_error) const {
  out << "step,t,kinetic,dissipation,nudge_energy,misfit,work,energy_residual,div_residual";
  if (with_error) out << ",err_L2";
  out << '\n';
  for (const StepRecord& r : records_) {
    out << fmt::format("{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}", r.step, r.t, r.kinetic,
                       r.dissipation, r.nudge_energy, r.misfit, r.work, r.energy_residual, r.div_residual);
    if (with_error) out << fmt::format(",{:.17g}", r.err_L2);
    out << '\n';
  }
}

AssumptionReport check_assumptions(const AssumptionInputs& in) {
  AssumptionReport r;
  const double g4 = std::pow(in.grad_norm, 4);
  const double nu3 = std::pow(in.nu, -3);
  const double growth = 2048.0 / 19683.0 * nu3 * g4;
  const double c1h2 = in.c1h * in.c1h;
  r.chi_residual = in.chi - in.omega * in.q0 - growth - 0.5 * in.alpha * in.chi;
  r.width_residual = in.nu - 2.0 * c1h2 * in.chi;
  const double discrete_growth = std::pow(in.c2, 4) * (9261.0 / 8.0) * nu3 * g4;
  r.discrete_chi_residual = in.chi - discrete_growth - in.alpha * in.chi;
  r.discrete_width_residual = in.nu - c1h2 * in.chi;
  r.alpha_max = in.chi > 0.0 ? std::min(1.0, 2.0 * (in.chi - in.omega * in.q0 - growth) / in.chi) : 0.0;
  r.chi_ok = r.chi_residual >= 0.0 && 0.5 * in.alpha * in.chi > 0.0;
  r.width_ok = r.width_residual > 0.0;
  r.discrete_chi_ok = r.discrete_chi_residual >= 0.0 && in.alpha * in.chi > 0.0;
  r.discrete_width_ok = r.discrete_width_residual > 0.0;
  return r;
}

SteadyResult run_to_steady(Integrator& integrator, FlowState state, const SteadyOptions& options) {
  if (!(options.tolerance > 0.0)) throw ConfigError("steady_tol", "must be positive");
  SteadyResult result;
  const bool thermal = state.temperature.size() > 0;
  while (result.steps < options.max_steps) {
    const StepRecord rec = integrator.step(state);
    result.ledger.append(rec);
    ++result.steps;
    if (options.observer) options.observer(state, rec);
    if (rec.velocity_change < options.tolerance && (!thermal || rec.temperature_change < options.tolerance)) {
      result.converged = true;
      break;
    }
  }
  result.state = std::move(state);
  return result;
}

}  // namespace nudge
