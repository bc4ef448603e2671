#include "nudge/linsolve.hpp"

#include <cmath>
#include <algorithm>

#include <fmt/format.h>

#ifdef NUDGE_HAVE_UMFPACK
#include <Eigen/UmfPackSupport>
#else
#include <Eigen/SparseLU>
#endif

#include "nudge/error.hpp"

namespace nudge {

LinearSystem apply_dirichlet(const LinearSystem& system) {
  const Index n = system.matrix.rows();
  if (system.matrix.cols() != n) throw Error("Dirichlet elimination needs a square matrix");
  if (system.rhs.size() != n) throw Error("right-hand side length does not match the matrix");

  std::vector<char> fixed(static_cast<std::size_t>(n), 0);
  Eigen::VectorXd values = Eigen::VectorXd::Zero(n);
  for (const Constraint& c : system.constraints) {
    if (c.dof < 0 || c.dof >= n) throw Error(fmt::format("constraint on dof {} out of range [0, {})", c.dof, n));
    if (fixed[c.dof] && values[c.dof] != c.value)
      throw Error(fmt::format("conflicting constraints on dof {}: {} vs {}", c.dof, values[c.dof], c.value));
    fixed[c.dof] = 1;
    values[c.dof] = c.value;
  }

  LinearSystem out;
  out.rhs = system.rhs;
  std::vector<Eigen::Triplet<double, Index>> triplets;
  triplets.reserve(static_cast<std::size_t>(system.matrix.nonZeros()) + system.constraints.size());
  for (Index col = 0; col < system.matrix.outerSize(); ++col) {
    for (SparseOperator::InnerIterator it(system.matrix, col); it; ++it) {
      const Index row = it.row();
      if (fixed[row]) continue;
      if (fixed[col]) {
        out.rhs[row] -= it.value() * values[col];
        continue;
      }
      triplets.emplace_back(row, col, it.value());
    }
  }
  for (Index i = 0; i < n; ++i) {
    if (!fixed[i]) continue;
    triplets.emplace_back(i, i, 1.0);
    out.rhs[i] = values[i];
  }
  out.matrix.resize(n, n);
  out.matrix.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

struct DirectSolver::Impl {
#ifdef NUDGE_HAVE_UMFPACK
  Eigen::UmfPackLU<SparseOperator> lu;
#else
  Eigen::SparseLU<SparseOperator, Eigen::COLAMDOrdering<int>> lu;
#endif
  std::vector<SparseOperator::StorageIndex> outer, inner;
  bool analyzed = false;

  bool same_pattern(const SparseOperator& a) const {
    if (!analyzed || static_cast<std::size_t>(a.outerSize() + 1) != outer.size() ||
        static_cast<std::size_t>(a.nonZeros()) != inner.size())
      return false;
    return std::equal(outer.begin(), outer.end(), a.outerIndexPtr()) &&
           std::equal(inner.begin(), inner.end(), a.innerIndexPtr());
  }
};

DirectSolver::DirectSolver(double tolerance) : impl_(std::make_unique<Impl>()), tolerance_(tolerance) {}
DirectSolver::~DirectSolver() = default;
DirectSolver::DirectSolver(DirectSolver&&) noexcept = default;
DirectSolver& DirectSolver::operator=(DirectSolver&&) noexcept = default;

const char* DirectSolver::backend() {
#ifdef NUDGE_HAVE_UMFPACK
  return "umfpack";
#else
  return "eigen-sparselu";
#endif
}

SolveReport DirectSolver::solve(const LinearSystem& system, const std::string& context) {
  const LinearSystem reduced = system.constraints.empty() ? LinearSystem{} : apply_dirichlet(system);
  const LinearSystem& sys = system.constraints.empty() ? system : reduced;
  SparseOperator a = sys.matrix;
  a.makeCompressed();
  const std::string where = context.empty() ? std::string("linear solve") : context;

  for (Index k = 0; k < a.nonZeros(); ++k)
    if (!std::isfinite(a.valuePtr()[k])) throw SolverError(where + ": matrix has non-finite entries");
  if (!sys.rhs.allFinite()) throw SolverError(where + ": right-hand side has non-finite entries");

  if (!impl_->same_pattern(a)) {
    impl_->lu.analyzePattern(a);
    impl_->outer.assign(a.outerIndexPtr(), a.outerIndexPtr() + a.outerSize() + 1);
    impl_->inner.assign(a.innerIndexPtr(), a.innerIndexPtr() + a.nonZeros());
    impl_->analyzed = true;
  }
  impl_->lu.factorize(a);
  if (impl_->lu.info() != Eigen::Success) {
    impl_->analyzed = false;
    throw SolverError(where + ": sparse factorization failed (singular matrix?)");
  }

  SolveReport report;
  report.solution = impl_->lu.solve(sys.rhs);
  const double bnorm = sys.rhs.norm();
  const double scale = bnorm > 0.0 ? bnorm : 1.0;
  Eigen::VectorXd r = sys.rhs - a * report.solution;
  report.relative_residual = r.norm() / scale;
  while (report.relative_residual > tolerance_ && report.refinement_steps < 3) {
    report.solution += impl_->lu.solve(r);
    r = sys.rhs - a * report.solution;
    report.relative_residual = r.norm() / scale;
    ++report.refinement_steps;
  }
  if (!report.solution.allFinite() || report.relative_residual > tolerance_)
    throw SolverError(fmt::format("{}: relative residual {:.3e} exceeds tolerance {:.1e}", where,
                                  report.relative_residual, tolerance_));
  return report;
}

Eigen::VectorXd solve(const LinearSystem& system, double tolerance) {
  DirectSolver solver(tolerance);
  return solver.solve(system).solution;
}

}  // namespace nudge
