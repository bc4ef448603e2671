#include "nudge/models.hpp"

#include <cmath>

#include <fmt/format.h>

#include "nudge/error.hpp"

namespace nudge {

const char* model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::nse_dns: return "nse-dns";
    case ModelKind::nse_nudged: return "nse-nudged";
    case ModelKind::boussinesq_dns: return "boussinesq-dns";
    case ModelKind::boussinesq_nudged: return "boussinesq-nudged";
  }
  return "?";
}

ModelKind parse_model_kind(const std::string& name) {
  for (ModelKind k : {ModelKind::nse_dns, ModelKind::nse_nudged, ModelKind::boussinesq_dns,
                      ModelKind::boussinesq_nudged})
    if (name == model_kind_name(k)) return k;
  throw ConfigError("model", fmt::format("unknown model kind '{}'", name));
}

void validate(const ModelSpec& s) {
  auto positive = [](const char* key, double v) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(key, fmt::format("must be positive, got {}", v));
  };
  auto nonnegative = [](const char* key, double v) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError(key, fmt::format("must be >= 0, got {}", v));
  };
  if (is_boussinesq(s.kind)) {
    positive("pr", s.pr);
    nonnegative("ra", s.ra);
    if (std::abs(s.gravity.norm() - 1.0) > 1e-12) throw ConfigError("gravity", "must be a unit vector");
  } else {
    positive("nu", s.nu);
  }
  nonnegative("omega", s.omega);
  nonnegative("chi", s.chi);
  positive("t_final", s.t_final);
  positive("dt", s.dt);
}

ManufacturedSolution exponential_trig_solution() {
  ManufacturedSolution ms;
  ms.velocity = [](double x, double y, double t) { return Vec2(std::exp(t) * std::cos(y), std::exp(t) * std::sin(x)); };
  ms.pressure = [](double x, double y, double t) { return (x - y) * (1.0 + t); };
  ms.velocity_dt = ms.velocity;
  ms.velocity_laplacian = [](double x, double y, double t) {
    return Vec2(-std::exp(t) * std::cos(y), -std::exp(t) * std::sin(x));
  };
  ms.pressure_gradient = [](double, double, double t) { return Vec2(1.0 + t, -(1.0 + t)); };
  ms.velocity_gradient = [](double x, double y, double t) {
    Eigen::Matrix2d g;
    g << 0.0, -std::exp(t) * std::sin(y), std::exp(t) * std::cos(x), 0.0;
    return g;
  };
  return ms;
}

VectorFunction manufactured_forcing(const ManufacturedSolution& ms, double nu, double omega, bool include_coriolis) {
  const double w = include_coriolis ? omega : 0.0;
  return [ms, nu, w](double x, double y, double t) {
    const Vec2 u = ms.velocity(x, y, t);
    Vec2 f = ms.velocity_dt(x, y, t) + ms.velocity_gradient(x, y, t) * u - nu * ms.velocity_laplacian(x, y, t) +
             ms.pressure_gradient(x, y, t);
    if (w != 0.0) f += w * rotate(u);
    return f;
  };
}

VectorFunction velocity_boundary(const ModelSpec& spec, Side side) {
  if (side != side_left && side != side_right && side != side_bottom && side != side_top)
    throw Error(fmt::format("unknown boundary side {}", static_cast<int>(side)));
  if (spec.boundary == BoundaryKind::cavity) return [](double, double, double) { return Vec2(0.0, 0.0); };
  return exponential_trig_solution().velocity;
}

std::optional<ScalarFunction> temperature_boundary(const ModelSpec& spec, Side side) {
  switch (side) {
    case side_left: {
      const double v = spec.hot_wall;
      return ScalarFunction([v](double, double, double) { return v; });
    }
    case side_right: {
      const double v = spec.cold_wall;
      return ScalarFunction([v](double, double, double) { return v; });
    }
    case side_bottom:
    case side_top: return std::nullopt;
    default: throw Error(fmt::format("unknown boundary side {}", static_cast<int>(side)));
  }
}

}  // namespace nudge
