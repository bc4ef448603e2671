#pragma once

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "nudge/assembly.hpp"

namespace nudge {

struct Constraint {
  Index dof;
  double value;
};

struct LinearSystem {
  SparseOperator matrix;
  Eigen::VectorXd rhs;
  std::vector<Constraint> constraints;
};

/// Symmetric elimination: constrained rows and columns are zeroed, the
/// known column contributions move to the right-hand side, and each
/// constrained row becomes an identity row carrying its prescribed value.
/// The returned system has no remaining constraints.
LinearSystem apply_dirichlet(const LinearSystem& system);

struct SolveReport {
  Eigen::VectorXd solution;
  double relative_residual = 0.0;
  int refinement_steps = 0;
};

/// Sparse direct solver. The symbolic analysis is reused for as long as the
/// sparsity pattern stays the same, which it does across time steps.
class DirectSolver {
 public:
  explicit DirectSolver(double tolerance = 1e-10);
  ~DirectSolver();
  DirectSolver(DirectSolver&&) noexcept;
  DirectSolver& operator=(DirectSolver&&) noexcept;

  /// Throws SolverError (prefixed with `context`) when the matrix is
  /// singular or the relative residual stays above the tolerance.
  SolveReport solve(const LinearSystem& system, const std::string& context = {});

  double tolerance() const { return tolerance_; }
  static const char* backend();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  double tolerance_;
};

Eigen::VectorXd solve(const LinearSystem& system, double tolerance = 1e-10);

}  // namespace nudge
