#pragma once

#include <optional>
#include <string>

#include <Eigen/Core>

#include "nudge/spaces.hpp"

namespace nudge {

/// R(u) = (-u2, u1), the two-dimensional Coriolis rotation.
inline Vec2 rotate(const Vec2& u) { return {-u.y(), u.x()}; }

enum class ModelKind {
  nse_dns,              // data-generating flow, carries omega R(u)
  nse_nudged,           // assimilating flow, omits R and adds chi I_H(v - u)
  boussinesq_dns,
  boussinesq_nudged,
};

const char* model_kind_name(ModelKind kind);
ModelKind parse_model_kind(const std::string& name);
inline bool is_boussinesq(ModelKind k) { return k == ModelKind::boussinesq_dns || k == ModelKind::boussinesq_nudged; }
inline bool is_nudged(ModelKind k) { return k == ModelKind::nse_nudged || k == ModelKind::boussinesq_nudged; }

enum class BoundaryKind { manufactured, cavity };
enum class ForcingKind { manufactured, zero };

struct ModelSpec {
  ModelKind kind = ModelKind::nse_nudged;
  double nu = 1.0;           // NSE viscosity
  double pr = 0.71;          // Boussinesq: Prandtl number, plays the role of nu
  double ra = 1e4;           // Rayleigh number
  double omega = 0.0;        // strength of the Coriolis term in the data-generating flow
  double chi = 0.0;          // nudging parameter, 1/time
  Vec2 gravity{0.0, 1.0};
  BoundaryKind boundary = BoundaryKind::manufactured;
  ForcingKind forcing = ForcingKind::manufactured;
  double gamma = 0.0;        // heat source
  double hot_wall = 1.0;     // temperature at x = 0
  double cold_wall = 0.0;    // temperature at x = 1
  double t_final = 2.0;
  double dt = 0.125;

  /// Viscosity of the momentum equation (nu or Pr).
  double viscosity() const { return is_boussinesq(kind) ? pr : nu; }
  bool has_coriolis() const { return !is_nudged(kind) && omega != 0.0; }
  bool has_nudging() const { return is_nudged(kind); }
};

/// Throws ConfigError naming the offending field.
void validate(const ModelSpec& spec);

/// Closed-form flow with the derivatives needed to build a forcing.
struct ManufacturedSolution {
  VectorFunction velocity;
  ScalarFunction pressure;
  VectorFunction velocity_dt;
  VectorFunction velocity_laplacian;
  VectorFunction pressure_gradient;
  /// Row i holds grad u_i.
  std::function<Eigen::Matrix2d(double, double, double)> velocity_gradient;
};

/// u = e^t (cos y, sin x), p = (x - y)(1 + t).
ManufacturedSolution exponential_trig_solution();

/// f = u_t + u.grad u - nu Lap u + grad p (+ omega R(u) when include_coriolis).
VectorFunction manufactured_forcing(const ManufacturedSolution& ms, double nu, double omega, bool include_coriolis);

/// Dirichlet velocity on a side at time t.
VectorFunction velocity_boundary(const ModelSpec& spec, Side side);
/// Dirichlet temperature on a side; empty for adiabatic (zero-flux) sides.
std::optional<ScalarFunction> temperature_boundary(const ModelSpec& spec, Side side);

}  // namespace nudge
