#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "nudge/assembly.hpp"

namespace nudge {

/// I_H: orthogonal L2 projection of fine velocity fields onto piecewise
/// constants on a coarse structured mesh. Each fine cell belongs wholly to
/// the coarse cell containing its barycenter, so the projection is exact
/// (idempotent, self-adjoint) even when the meshes are not nested.
///
/// Coarse values are stored interleaved: entry 2*c + k is the mean of
/// component k over coarse cell c.
class ObservationOperator {
 public:
  ObservationOperator(DofMapPtr fine_velocity, int coarse_n);

  const DofMap& fine_velocity() const { return *velocity_; }
  const Mesh& coarse_mesh() const { return *coarse_; }
  const CellMap& cell_map() const { return map_; }
  Index coarse_cell_count() const { return map_.coarse_count; }
  /// Coarse width H.
  double width() const { return 1.0 / coarse_n_; }
  int coarse_n() const { return coarse_n_; }

  /// Area covered by each coarse cell (the diagonal of the coarse mass).
  const Eigen::VectorXd& cell_areas() const { return areas_; }
  /// Restriction P: fine velocity coefficients -> coarse means.
  const SparseOperator& restriction() const { return restriction_; }

  Eigen::VectorXd apply(const Eigen::VectorXd& velocity) const;
  /// Coarse means of an analytic field, integrated by quadrature.
  Eigen::VectorXd apply(const VectorFunction& f, double t) const;
  /// Coarse means of a function that is constant on each fine cell; column
  /// t of `cell_values` holds the two components on fine cell t.
  Eigen::VectorXd apply_cellwise(const Eigen::Matrix2Xd& cell_values) const;
  /// Piecewise-constant fine-cell representation of coarse values.
  Eigen::Matrix2Xd lift(const Eigen::VectorXd& coarse) const;

  /// ||I_H w||^2 for coarse values w.
  double norm_squared(const Eigen::VectorXd& coarse) const;
  /// Coarse-mass inner product sum_c |c| a_c . b_c.
  double inner(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const;

 private:
  DofMapPtr velocity_;
  int coarse_n_;
  MeshPtr coarse_;
  CellMap map_;
  Eigen::VectorXd areas_;
  SparseOperator restriction_;
};

/// Discrete nudging term chi (I_H(v - u), w): G = chi P^T M_H P acts on the
/// fine coefficients, data_to_load = chi P^T M_H maps coarse data means to
/// the load vector.
struct NudgingForm {
  SparseOperator matrix;
  SparseOperator data_to_load;
};

NudgingForm assemble_nudging(const ObservationOperator& op, double chi);

/// Empirical sup of ||phi - I_H phi|| / ||grad phi|| over the probes
/// sin(k pi x) sin(m pi y), 1 <= k, m <= 4.
double estimate_C1H(const ObservationOperator& op);

// ---------------------------------------------------------------------------
// Observation data in time

class ObservationSource {
 public:
  virtual ~ObservationSource() = default;
  /// Coarse means of the observed flow at time t (interleaved layout).
  virtual Eigen::VectorXd coarse_means(double t) const = 0;
};

/// Exact coarse means of a closed-form flow.
class AnalyticObservations final : public ObservationSource {
 public:
  AnalyticObservations(const ObservationOperator& op, VectorFunction flow)
      : op_(op), flow_(std::move(flow)) {}
  Eigen::VectorXd coarse_means(double t) const override { return op_.apply(flow_, t); }

 private:
  const ObservationOperator& op_;
  VectorFunction flow_;
};

/// Stored snapshots, linearly interpolated in time and held constant
/// outside the recorded interval.
class SnapshotObservations final : public ObservationSource {
 public:
  SnapshotObservations() = default;
  void append(double t, Eigen::VectorXd means);
  Eigen::VectorXd coarse_means(double t) const override;

  std::size_t size() const { return times_.size(); }
  const std::vector<double>& times() const { return times_; }
  const Eigen::VectorXd& snapshot(std::size_t i) const { return values_[i]; }

  /// CSV with header `t,cell_id,ubar_x,ubar_y`.
  static SnapshotObservations read_csv(std::istream& in, const std::string& origin = "observations");
  static SnapshotObservations read_csv_file(const std::string& path);
  void write_csv(std::ostream& out) const;

 private:
  std::vector<double> times_;
  std::vector<Eigen::VectorXd> values_;
};

void write_snapshot_header(std::ostream& out);
void write_snapshot_rows(std::ostream& out, double t, const Eigen::VectorXd& means);

}  // namespace nudge
