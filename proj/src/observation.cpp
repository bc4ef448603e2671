#include "nudge/observation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "nudge/assembly_kernels.hpp"
#include "nudge/error.hpp"

namespace nudge {

ObservationOperator::ObservationOperator(DofMapPtr fine_velocity, int coarse_n)
    : velocity_(std::move(fine_velocity)), coarse_n_(coarse_n) {
  if (velocity_->components() != 2) throw Error("observation operator needs a vector velocity space");
  if (coarse_n < 1) throw ConfigError("coarse_n", fmt::format("must be >= 1, got {}", coarse_n));
  const Mesh& fine = velocity_->mesh();
  // The structured fine mesh has width 1/n with 2n^2 cells.
  const double fine_n = std::sqrt(fine.triangle_count() / 2.0);
  if (coarse_n > fine_n + 1e-9)
    throw ConfigError("coarse_n", fmt::format("coarse mesh ({}) is finer than the fine mesh ({})", coarse_n, fine_n));
  coarse_ = build_unit_square_mesh(coarse_n);
  map_ = build_cell_map(fine, *coarse_);

  areas_ = Eigen::VectorXd::Zero(map_.coarse_count);
  for (Index t = 0; t < fine.triangle_count(); ++t) areas_[map_.coarse_of_fine[t]] += fine.signed_area(t);
  for (Index c = 0; c < map_.coarse_count; ++c)
    if (!(areas_[c] > 0.0)) throw Error(fmt::format("coarse cell {} receives no fine cells", c));

  const QuadratureRule& rule = triangle_rule_degree6();
  const detail::Tabulation tab(velocity_->kind(), rule);
  const int npc = nodes_per_cell(velocity_->kind());
  std::vector<Eigen::Triplet<double, Index>> triplets;
  triplets.reserve(static_cast<std::size_t>(fine.triangle_count()) * npc * 2);
  for (Index t = 0; t < fine.triangle_count(); ++t) {
    const Index c = map_.coarse_of_fine[t];
    const double area = fine.signed_area(t);
    for (int k = 0; k < npc; ++k) {
      double integral = 0.0;
      for (std::size_t q = 0; q < rule.weights.size(); ++q)
        integral += 2.0 * area * rule.weights[q] * tab.at[q].values[k];
      const Index node = velocity_->node(t, k);
      for (int comp = 0; comp < 2; ++comp)
        triplets.emplace_back(2 * c + comp, velocity_->dof(node, comp), integral / areas_[c]);
    }
  }
  restriction_.resize(2 * map_.coarse_count, velocity_->dof_count());
  restriction_.setFromTriplets(triplets.begin(), triplets.end());
}

Eigen::VectorXd ObservationOperator::apply(const Eigen::VectorXd& velocity) const {
  if (velocity.size() != velocity_->dof_count())
    throw Error(fmt::format("I_H expects {} velocity coefficients, got {}", velocity_->dof_count(), velocity.size()));
  return restriction_ * velocity;
}

Eigen::VectorXd ObservationOperator::apply(const VectorFunction& f, double t) const {
  const Mesh& fine = velocity_->mesh();
  const QuadratureRule& rule = triangle_rule_degree6();
  Eigen::Matrix2Xd cell_integrals(2, fine.triangle_count());
#pragma omp parallel for schedule(static)
  for (Index cell = 0; cell < fine.triangle_count(); ++cell) {
    const double area = fine.signed_area(cell);
    Vec2 acc = Vec2::Zero();
    for (std::size_t q = 0; q < rule.weights.size(); ++q) {
      const Vec2 x = map_to_physical(fine, cell, rule.points[q]);
      acc += 2.0 * area * rule.weights[q] * f(x.x(), x.y(), t);
    }
    cell_integrals.col(cell) = acc;
  }
  Eigen::VectorXd means = Eigen::VectorXd::Zero(2 * map_.coarse_count);
  for (Index cell = 0; cell < fine.triangle_count(); ++cell) {
    const Index c = map_.coarse_of_fine[cell];
    means.segment<2>(2 * c) += cell_integrals.col(cell);
  }
  for (Index c = 0; c < map_.coarse_count; ++c) means.segment<2>(2 * c) /= areas_[c];
  return means;
}

Eigen::VectorXd ObservationOperator::apply_cellwise(const Eigen::Matrix2Xd& cell_values) const {
  const Mesh& fine = velocity_->mesh();
  if (cell_values.cols() != fine.triangle_count()) throw Error("cellwise field has the wrong number of cells");
  Eigen::VectorXd means = Eigen::VectorXd::Zero(2 * map_.coarse_count);
  for (Index t = 0; t < fine.triangle_count(); ++t)
    means.segment<2>(2 * map_.coarse_of_fine[t]) += fine.signed_area(t) * cell_values.col(t);
  for (Index c = 0; c < map_.coarse_count; ++c) means.segment<2>(2 * c) /= areas_[c];
  return means;
}

Eigen::Matrix2Xd ObservationOperator::lift(const Eigen::VectorXd& coarse) const {
  const Mesh& fine = velocity_->mesh();
  Eigen::Matrix2Xd out(2, fine.triangle_count());
  for (Index t = 0; t < fine.triangle_count(); ++t) out.col(t) = coarse.segment<2>(2 * map_.coarse_of_fine[t]);
  return out;
}

double ObservationOperator::inner(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
  double s = 0.0;
  for (Index c = 0; c < map_.coarse_count; ++c)
    s += areas_[c] * (a[2 * c] * b[2 * c] + a[2 * c + 1] * b[2 * c + 1]);
  return s;
}

double ObservationOperator::norm_squared(const Eigen::VectorXd& coarse) const { return inner(coarse, coarse); }

NudgingForm assemble_nudging(const ObservationOperator& op, double chi) {
  if (!(chi >= 0.0)) throw ConfigError("chi", fmt::format("nudging parameter must be >= 0, got {}", chi));
  Eigen::VectorXd mass(2 * op.coarse_cell_count());
  for (Index c = 0; c < op.coarse_cell_count(); ++c) mass[2 * c] = mass[2 * c + 1] = chi * op.cell_areas()[c];
  NudgingForm form;
  form.data_to_load = SparseOperator(op.restriction().transpose()) * mass.asDiagonal();
  form.matrix = form.data_to_load * op.restriction();
  form.data_to_load.prune(0.0);
  form.matrix.prune(0.0);
  return form;
}

double estimate_C1H(const ObservationOperator& op) {
  const Mesh& fine = op.fine_velocity().mesh();
  const QuadratureRule& rule = triangle_rule_degree6();
  constexpr double pi = std::numbers::pi;
  double sup = 0.0;
  for (int k = 1; k <= 4; ++k) {
    for (int m = 1; m <= 4; ++m) {
      auto phi = [k, m](double x, double y, double) {
        return Vec2(std::sin(k * pi * x) * std::sin(m * pi * y), 0.0);
      };
      const Eigen::VectorXd means = op.apply(phi, 0.0);
      double err2 = 0.0;
      for (Index t = 0; t < fine.triangle_count(); ++t) {
        const double mean = means[2 * op.cell_map().coarse_of_fine[t]];
        const double area = fine.signed_area(t);
        for (std::size_t q = 0; q < rule.weights.size(); ++q) {
          const Vec2 x = map_to_physical(fine, t, rule.points[q]);
          const double d = phi(x.x(), x.y(), 0.0).x() - mean;
          err2 += 2.0 * area * rule.weights[q] * d * d;
        }
      }
      // ||grad phi||^2 = (k^2 + m^2) pi^2 / 4 on the unit square.
      const double grad = std::sqrt((k * k + m * m) * pi * pi / 4.0);
      sup = std::max(sup, std::sqrt(err2) / grad);
    }
  }
  return sup;
}

void SnapshotObservations::append(double t, Eigen::VectorXd means) {
  if (!times_.empty() && !(t > times_.back()))
    throw Error(fmt::format("snapshot times must increase ({} after {})", t, times_.back()));
  if (!values_.empty() && means.size() != values_.front().size()) throw Error("snapshot size changed");
  times_.push_back(t);
  values_.push_back(std::move(means));
}

Eigen::VectorXd SnapshotObservations::coarse_means(double t) const {
  if (times_.empty()) throw Error("no observation snapshots available");
  if (t <= times_.front()) return values_.front();
  if (t >= times_.back()) return values_.back();
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  const std::size_t hi = static_cast<std::size_t>(it - times_.begin());
  const std::size_t lo = hi - 1;
  const double s = (t - times_[lo]) / (times_[hi] - times_[lo]);
  return (1.0 - s) * values_[lo] + s * values_[hi];
}

void write_snapshot_header(std::ostream& out) { out << "t,cell_id,ubar_x,ubar_y\n"; }

void write_snapshot_rows(std::ostream& out, double t, const Eigen::VectorXd& means) {
  for (Index c = 0; c < means.size() / 2; ++c)
    out << fmt::format("{:.17g},{},{:.17g},{:.17g}\n", t, c, means[2 * c], means[2 * c + 1]);
}

void SnapshotObservations::write_csv(std::ostream& out) const {
  write_snapshot_header(out);
  for (std::size_t i = 0; i < times_.size(); ++i) write_snapshot_rows(out, times_[i], values_[i]);
}

SnapshotObservations SnapshotObservations::read_csv(std::istream& in, const std::string& origin) {
  std::string line;
  if (!std::getline(in, line)) throw Error(origin + ": empty observation file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "t,cell_id,ubar_x,ubar_y")
    throw Error(fmt::format("{}: unexpected header '{}'", origin, line));

  SnapshotObservations obs;
  std::vector<Vec2> current;
  double current_t = 0.0;
  bool have = false;
  auto flush = [&] {
    Eigen::VectorXd v(2 * static_cast<Index>(current.size()));
    for (std::size_t c = 0; c < current.size(); ++c) v.segment<2>(2 * c) = current[c];
    obs.append(current_t, std::move(v));
    current.clear();
  };
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    std::istringstream row(line);
    row.imbue(std::locale::classic());
    double t = 0.0, ux = 0.0, uy = 0.0;
    long long cell = 0;
    char c1 = 0, c2 = 0, c3 = 0;
    if (!(row >> t >> c1 >> cell >> c2 >> ux >> c3 >> uy) || c1 != ',' || c2 != ',' || c3 != ',')
      throw Error(fmt::format("{}:{}: malformed row '{}'", origin, lineno, line));
    if (have && t != current_t) {
      flush();
      have = false;
    }
    if (!have) {
      current_t = t;
      have = true;
    }
    if (cell != static_cast<long long>(current.size()))
      throw Error(fmt::format("{}:{}: expected cell {} got {}", origin, lineno, current.size(), cell));
    current.emplace_back(ux, uy);
  }
  if (have) flush();
  if (obs.size() == 0) throw Error(origin + ": no observation rows");
  return obs;
}

SnapshotObservations SnapshotObservations::read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open observation file " + path);
  return read_csv(in, path);
}

}  // namespace nudge
