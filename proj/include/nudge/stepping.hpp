#pragma once

#include <functional>
#include <iosfwd>
#include <limits>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "nudge/assembly.hpp"
#include "nudge/linsolve.hpp"
#include "nudge/models.hpp"
#include "nudge/observation.hpp"

namespace nudge {

/// Mesh, spaces and the time-independent operators of one resolution.
/// Immutable after build; shared read-only between concurrent runs.
struct Discretization {
  MeshPtr mesh;
  DofMapPtr velocity;     // P2 vector
  DofMapPtr pressure;     // P1
  DofMapPtr temperature;  // P2 scalar
  SparseOperator mass;             // velocity mass
  SparseOperator laplacian;        // velocity stiffness, unit coefficient
  SparseOperator divergence;       // B, pressure x velocity
  SparseOperator coriolis;         // C
  SparseOperator temperature_mass;
  SparseOperator temperature_laplacian;
  Eigen::VectorXd pressure_integrals;  // (1, q_i)
  Eigen::VectorXd flux_weights;        // B^T 1: boundary flux of each velocity dof
  std::shared_ptr<const ObservationOperator> observation;

  int n = 0;
  double width() const { return 1.0 / n; }
};

using DiscretizationPtr = std::shared_ptr<const Discretization>;

DiscretizationPtr build_discretization(int n, int coarse_n);

struct FlowState {
  double time = 0.0;
  Index step = 0;
  Eigen::VectorXd velocity;
  Eigen::VectorXd pressure;
  Eigen::VectorXd temperature;           // empty for pure NSE
  Eigen::VectorXd previous_velocity;     // valid when has_previous
  Eigen::VectorXd previous_temperature;
  bool has_previous = false;
};

/// One entry of the per-step energy ledger.
struct StepRecord {
  Index step = 0;
  double t = 0.0;
  double kinetic = 0.0;         // ||v_{n+1}||^2
  double dissipation = 0.0;     // nu ||grad v_{n+1/2}||^2 (BDF2: at n+1)
  double nudge_energy = 0.0;    // chi ||I_H v||^2
  double misfit = 0.0;          // chi ||I_H(u - v)||^2
  double work = 0.0;            // (f, v) including buoyancy
  double energy_residual = std::numeric_limits<double>::quiet_NaN();
  double div_residual = 0.0;    // ||B v||_inf after the solve
  double err_L2 = std::numeric_limits<double>::quiet_NaN();
  /// RHS - LHS of the per-step stability inequality; NaN when the boundary
  /// data is inhomogeneous and the inequality does not apply.
  double stability_margin = std::numeric_limits<double>::quiet_NaN();
  double grad_norm = 0.0;       // ||grad v_{n+1}||
  double velocity_change = 0.0;     // ||v_{n+1} - v_n|| / dt
  double temperature_change = 0.0;  // ||T_{n+1} - T_n|| / dt
  double solver_residual = 0.0;
};

class EnergyLedger {
 public:
  void append(const StepRecord& r) { records_.push_back(r); }
  const std::vector<StepRecord>& records() const { return records_; }
  bool empty() const { return records_.empty(); }
  const StepRecord& back() const { return records_.back(); }
  /// CSV: step,t,kinetic,dissipation,nudge_energy,misfit,work,energy_residual,div_residual[,err_L2]
  void write_csv(std::ostream& out, bool with_error) const;

 private:
  std::vector<StepRecord> records_;
};

/// Time at which CNLE samples the observations of the half step.
enum class ObservationTime {
  midpoint,  // u(t_{n+1/2})
  average,   // (u(t_n) + u(t_{n+1})) / 2
};

struct IntegratorOptions {
  double solver_tolerance = 1e-10;
  ObservationTime observation_time = ObservationTime::midpoint;
  /// Abort when the kinetic energy exceeds this bound.
  double energy_cap = 1e12;
};

/// Time integrator interface shared by the CNLE and BDF2 schemes.
class Integrator {
 public:
  virtual ~Integrator() = default;
  /// Advances the state by one step of model().dt and returns its diagnostics.
  virtual StepRecord step(FlowState& state) = 0;
  virtual const ModelSpec& model() const = 0;
  virtual const Discretization& discretization() const = 0;

  /// Error column: L2 distance to a closed-form velocity at t_{n+1}.
  void set_reference(VectorFunction exact) { reference_ = std::move(exact); }
  /// Error column from an arbitrary callback.
  void set_reference(std::function<double(const FlowState&)> error) { reference_error_ = std::move(error); }
  bool has_reference() const { return static_cast<bool>(reference_) || static_cast<bool>(reference_error_); }

 protected:
  double reference_error(const FlowState& state) const;

  VectorFunction reference_;
  std::function<double(const FlowState&)> reference_error_;
};

/// Linearly implicit Crank-Nicolson: midpoint unknowns with the convecting
/// velocity extrapolated as (3 v_n - v_{n-1}) / 2. The first step uses v_0
/// as the convecting velocity.
class CnleIntegrator final : public Integrator {
 public:
  CnleIntegrator(DiscretizationPtr disc, ModelSpec model, const ObservationSource* data = nullptr,
                 IntegratorOptions options = {});
  ~CnleIntegrator() override;

  StepRecord step(FlowState& state) override;
  const ModelSpec& model() const override { return model_; }
  const Discretization& discretization() const override { return *disc_; }

 private:
  struct Impl;
  DiscretizationPtr disc_;
  ModelSpec model_;
  const ObservationSource* data_;
  IntegratorOptions options_;
  std::unique_ptr<Impl> impl_;
};

/// BDF2 for the Boussinesq system, solved sequentially: temperature first,
/// then momentum, both convected by w* = 2 w_n - w_{n-1}. The first step is
/// backward Euler.
class BoussinesqIntegrator final : public Integrator {
 public:
  BoussinesqIntegrator(DiscretizationPtr disc, ModelSpec model, const ObservationSource* data = nullptr,
                       IntegratorOptions options = {});
  ~BoussinesqIntegrator() override;

  StepRecord step(FlowState& state) override;
  const ModelSpec& model() const override { return model_; }
  const Discretization& discretization() const override { return *disc_; }

 private:
  struct Impl;
  DiscretizationPtr disc_;
  ModelSpec model_;
  const ObservationSource* data_;
  IntegratorOptions options_;
  std::unique_ptr<Impl> impl_;
};

// ---------------------------------------------------------------------------
// Initial and boundary data

/// Dirichlet velocity values at time t for the model's boundary spec. For
/// inhomogeneous data the nodal values are corrected so the discrete
/// boundary flux vanishes, keeping the divergence constraint solvable.
std::vector<Constraint> velocity_constraints(const Discretization& disc, const ModelSpec& model, double t);
std::vector<Constraint> temperature_constraints(const Discretization& disc, const ModelSpec& model, double t);

/// Discretely divergence-free L2 projection of `velocity` with the given
/// boundary values.
Eigen::VectorXd project_divergence_free(const Discretization& disc, const Eigen::VectorXd& velocity,
                                        const std::vector<Constraint>& boundary);
/// Discrete Stokes extension of the boundary values (zero body force).
Eigen::VectorXd stokes_lift(const Discretization& disc, const std::vector<Constraint>& boundary);

/// Initial state for an NSE run: the divergence-free projection of the
/// manufactured velocity (or rest for the cavity) at t = 0.
FlowState initial_flow_state(const Discretization& disc, const ModelSpec& model);
/// Initial Boussinesq state: rest with the conduction profile.
FlowState initial_boussinesq_state(const Discretization& disc, const ModelSpec& model);

/// ||B v||_inf.
double divergence_residual(const Discretization& disc, const Eigen::VectorXd& velocity);

// ---------------------------------------------------------------------------
// Diagnostics

struct AssumptionInputs {
  double chi = 0.0;
  double c1h = 0.0;          // estimate of C1 H
  double nu = 1.0;
  double omega = 0.0;
  double q0 = 1.0;           // Lipschitz constant of R; 1 for the rotation
  double grad_norm = 0.0;    // max ||grad v|| over the interval
  double alpha = 0.5;        // in (0, 1)
  double c2 = 1.0;           // trilinear bound constant of the discrete condition
};

struct AssumptionReport {
  double chi_residual = 0.0;            // chi - omega q0 - (2048/19683) nu^-3 |grad v|^4 - alpha chi / 2
  double width_residual = 0.0;          // nu - 2 (C1 H)^2 chi
  double discrete_chi_residual = 0.0;   // chi - C2^4 (9261/8) nu^-3 |grad v|^4 - alpha chi
  double discrete_width_residual = 0.0; // nu - (C1 H)^2 chi
  double alpha_max = 0.0;               // largest admissible alpha in (0, 1], <= 0 if none
  bool chi_ok = false;
  bool width_ok = false;
  bool discrete_chi_ok = false;
  bool discrete_width_ok = false;
};

/// Evaluates the large-chi / small-H conditions. Diagnostic only.
AssumptionReport check_assumptions(const AssumptionInputs& in);

struct SteadyOptions {
  double tolerance = 1e-6;
  Index max_steps = 100000;
  /// Called after every step.
  std::function<void(const FlowState&, const StepRecord&)> observer;
};

struct SteadyResult {
  FlowState state;
  EnergyLedger ledger;
  bool converged = false;
  Index steps = 0;
};

/// Steps until ||w_{n+1} - w_n|| / dt and ||T_{n+1} - T_n|| / dt both drop
/// below the tolerance, or max_steps is reached.
SteadyResult run_to_steady(Integrator& integrator, FlowState state, const SteadyOptions& options);

}  // namespace nudge
