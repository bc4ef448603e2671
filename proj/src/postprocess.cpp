#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include <fmt/format.h>

#include "nudge/assembly_kernels.hpp"
#include "nudge/error.hpp"
#include "nudge/experiments.hpp"

namespace nudge {

void RateTable::write_csv(std::ostream& out, const char* key_name, bool with_rate) const {
  out << key_name << ",error" << (with_rate ? ",rate" : "") << '\n';
  for (const RateRow& r : rows) {
    out << fmt::format("{:.17g},{:.17g}", r.key, r.error);
    if (with_rate) out << (std::isnan(r.rate) ? std::string(",") : fmt::format(",{:.17g}", r.rate));
    out << '\n';
  }
}

RateTable rate_table(const std::vector<double>& keys, const std::vector<double>& errors) {
  if (keys.size() != errors.size()) throw Error("rate_table: size mismatch");
  RateTable table;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    RateRow row{keys[i], errors[i]};
    if (i > 0) row.rate = std::log(errors[i - 1] / errors[i]) / std::log(keys[i - 1] / keys[i]);
    table.rows.push_back(row);
  }
  return table;
}

namespace {

double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

void check_window(std::size_t size, std::size_t begin, std::size_t end, const char* what) {
  if (end > size || begin >= end || end - begin < 2)
    throw Error(fmt::format("{}: fit window [{}, {}) needs two points", what, begin, end));
}

}  // namespace

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y, std::size_t begin, std::size_t end) {
  check_window(std::min(x.size(), y.size()), begin, end, "loglog_slope");
  std::vector<double> lx, ly;
  for (std::size_t i = begin; i < end; ++i) {
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  return ls_slope(lx, ly);
}

double semilog_slope(const std::vector<double>& t, const std::vector<double>& y, std::size_t begin, std::size_t end) {
  check_window(std::min(t.size(), y.size()), begin, end, "semilog_slope");
  std::vector<double> lt(t.begin() + begin, t.begin() + end), ly;
  for (std::size_t i = begin; i < end; ++i) ly.push_back(std::log(y[i]));
  return ls_slope(lt, ly);
}

bool all_pass(const std::vector<Check>& checks) {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

nlohmann::json to_json(const std::vector<Check>& checks) {
  nlohmann::json out = nlohmann::json::array();
  for (const Check& c : checks) out.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  return out;
}

std::string key_label(double v) {
  if (v == std::floor(v) && std::abs(v) < 1e15) return fmt::format("{}", static_cast<long long>(v));
  return fmt::format("{:g}", v);
}

double max_energy_residual(const EnergyLedger& ledger) {
  double worst = 0.0;
  for (const StepRecord& r : ledger.records())
    if (!std::isnan(r.energy_residual))
      worst = std::max(worst, std::abs(r.energy_residual) / std::max(1.0, r.kinetic));
  return worst;
}

double min_stability_margin(const EnergyLedger& ledger) {
  double worst = std::numeric_limits<double>::infinity();
  for (const StepRecord& r : ledger.records())
    if (!std::isnan(r.stability_margin)) worst = std::min(worst, r.stability_margin);
  return worst;
}

double max_div_residual(const EnergyLedger& ledger) {
  double worst = 0.0;
  for (const StepRecord& r : ledger.records()) worst = std::max(worst, r.div_residual);
  return worst;
}

// ---------------------------------------------------------------------------

double NusseltProfile::average() const {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < nu.size(); ++i) {
    num += weights[i] * nu[i];
    den += weights[i];
  }
  return den > 0.0 ? num / den : 0.0;
}

NusseltProfile compute_nusselt(const Field& temperature, Wall wall) {
  const DofMap& dm = temperature.dofmap();
  if (dm.components() != 1) throw Error("compute_nusselt: temperature must be scalar");
  const Mesh& mesh = dm.mesh();
  const Side side = wall == Wall::hot ? side_left : side_right;
  const LineRule line = gauss_legendre(3);

  std::vector<std::array<double, 3>> samples;  // y, nu, weight
  for (const Edge& e : mesh.edges()) {
    if (!e.on_boundary() || e.side != side) continue;
    const Vec2& a = mesh.vertex(e.vertices[0]);
    const Vec2& b = mesh.vertex(e.vertices[1]);
    const double length = (b - a).norm();
    for (std::size_t q = 0; q < line.points.size(); ++q) {
      const Vec2 p = a + line.points[q] * (b - a);
      const auto lambda = barycentric_coordinates(mesh, e.triangles[0], p);
      const double dtdx = temperature.gradient(e.triangles[0], lambda).x();
      samples.push_back({p.y(), -dtdx, length * line.weights[q]});
    }
  }
  std::sort(samples.begin(), samples.end(), [](const auto& l, const auto& r) { return l[0] < r[0]; });
  NusseltProfile out;
  for (const auto& s : samples) {
    out.y.push_back(s[0]);
    out.nu.push_back(s[1]);
    out.weights.push_back(s[2]);
  }
  return out;
}

double sup_difference(const NusseltProfile& a, const NusseltProfile& b) {
  if (a.y.size() != b.y.size()) throw Error("sup_difference: profiles sampled differently");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.y.size(); ++i) {
    if (std::abs(a.y[i] - b.y[i]) > 1e-12) throw Error("sup_difference: profiles sampled differently");
    worst = std::max(worst, std::abs(a.nu[i] - b.nu[i]));
  }
  return worst;
}

VorticityStream compute_vorticity_stream(const Field& velocity) {
  const DofMap& vdm = velocity.dofmap();
  if (vdm.kind() != ElementKind::p2_vector) throw Error("compute_vorticity_stream: velocity must be P2");
  const MeshPtr mesh = vdm.mesh_ptr();
  const DofMapPtr p1 = build_dofmap(mesh, ElementKind::p1_scalar);
  const DofMapPtr p2 = build_dofmap(mesh, ElementKind::p2_scalar);
  const QuadratureRule& rule = triangle_rule_degree6();

  // P1 projection of the curl.
  const detail::Tabulation tab1(ElementKind::p1_scalar, rule);
  auto curl_load = [&](Index t, const CellGeometry& g, Eigen::VectorXd& local) {
    for (std::size_t q = 0; q < rule.weights.size(); ++q) {
      const double curl = velocity.gradient(t, rule.points[q], 1).x() - velocity.gradient(t, rule.points[q], 0).y();
      const double w = 2.0 * g.area * rule.weights[q] * curl;
      for (int i = 0; i < 3; ++i) local[i] += w * tab1.at[q].values[i];
    }
  };
  const Eigen::VectorXd b1 = detail::assemble_linear(*p1, curl_load, Execution::parallel);
  LinearSystem mass_sys{assemble_mass(*p1), b1, {}};
  Field vorticity(p1, solve(mass_sys), velocity.time());

  // (grad psi, grad phi) = -(omega, phi), psi = 0 on the boundary.
  const detail::Tabulation tab2(ElementKind::p2_scalar, rule);
  auto stream_load = [&](Index t, const CellGeometry& g, Eigen::VectorXd& local) {
    for (std::size_t q = 0; q < rule.weights.size(); ++q) {
      const double w = -2.0 * g.area * rule.weights[q] * vorticity.evaluate(t, rule.points[q]);
      for (int i = 0; i < 6; ++i) local[i] += w * tab2.at[q].values[i];
    }
  };
  LinearSystem poisson{assemble_stiffness(*p2, 1.0), detail::assemble_linear(*p2, stream_load, Execution::parallel),
                       {}};
  for (const BoundaryDof& b : p2->boundary_dofs()) poisson.constraints.push_back({b.dof, 0.0});
  Field stream(p2, solve(poisson), velocity.time());
  return {std::move(vorticity), std::move(stream)};
}

}  // namespace nudge
