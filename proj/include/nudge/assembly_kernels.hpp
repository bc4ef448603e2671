#pragma once

// Generic element loops shared by every form. A kernel fills the local
// matrix (or vector) of one cell; the loop scatters it into the global
// operator. The parallel loop writes each cell's contributions into a fixed
// slot so the scatter order, and hence every floating-point sum, is the same
// as in the serial reference loop.

#include <map>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "nudge/assembly.hpp"

namespace nudge::detail {

using LocalMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <class Kernel>
SparseOperator assemble_bilinear_parallel(const DofMap& test, const DofMap& trial, Kernel&& kernel) {
  const Mesh& mesh = test.mesh();
  const Index cells = mesh.triangle_count();
  const int nr = dofs_per_cell(test.kind());
  const int nc = dofs_per_cell(trial.kind());
  const std::size_t block = static_cast<std::size_t>(nr) * nc;
  std::vector<Eigen::Triplet<double, Index>> triplets(static_cast<std::size_t>(cells) * block);

#pragma omp parallel
  {
    LocalMatrix local(nr, nc);
#pragma omp for schedule(static)
    for (Index t = 0; t < cells; ++t) {
      local.setZero();
      kernel(t, cell_geometry(mesh, t), local);
      std::size_t slot = static_cast<std::size_t>(t) * block;
      for (int i = 0; i < nr; ++i) {
        const Index row = test.cell_dof(t, i);
        for (int j = 0; j < nc; ++j) triplets[slot++] = {row, trial.cell_dof(t, j), local(i, j)};
      }
    }
  }
  SparseOperator op(test.dof_count(), trial.dof_count());
  op.setFromTriplets(triplets.begin(), triplets.end());
  return op;
}

/// Serial reference: plain accumulation into an ordered map.
template <class Kernel>
SparseOperator assemble_bilinear_serial(const DofMap& test, const DofMap& trial, Kernel&& kernel) {
  const Mesh& mesh = test.mesh();
  const int nr = dofs_per_cell(test.kind());
  const int nc = dofs_per_cell(trial.kind());
  std::map<std::pair<Index, Index>, double> entries;
  LocalMatrix local(nr, nc);
  for (Index t = 0; t < mesh.triangle_count(); ++t) {
    local.setZero();
    kernel(t, cell_geometry(mesh, t), local);
    for (int i = 0; i < nr; ++i)
      for (int j = 0; j < nc; ++j) {
        auto [it, inserted] = entries.try_emplace({test.cell_dof(t, i), trial.cell_dof(t, j)}, local(i, j));
        if (!inserted) it->second += local(i, j);
      }
  }
  std::vector<Eigen::Triplet<double, Index>> triplets;
  triplets.reserve(entries.size());
  for (const auto& [key, value] : entries) triplets.emplace_back(key.first, key.second, value);
  SparseOperator op(test.dof_count(), trial.dof_count());
  op.setFromTriplets(triplets.begin(), triplets.end());
  return op;
}

template <class Kernel>
SparseOperator assemble_bilinear(const DofMap& test, const DofMap& trial, Kernel&& kernel, Execution exec) {
  if (exec == Execution::serial) return assemble_bilinear_serial(test, trial, kernel);
  return assemble_bilinear_parallel(test, trial, kernel);
}

template <class Kernel>
Eigen::VectorXd assemble_linear(const DofMap& test, Kernel&& kernel, Execution exec) {
  const Mesh& mesh = test.mesh();
  const Index cells = mesh.triangle_count();
  const int nr = dofs_per_cell(test.kind());
  Eigen::VectorXd out = Eigen::VectorXd::Zero(test.dof_count());
  if (exec == Execution::serial) {
    Eigen::VectorXd local(nr);
    for (Index t = 0; t < cells; ++t) {
      local.setZero();
      kernel(t, cell_geometry(mesh, t), local);
      for (int i = 0; i < nr; ++i) out[test.cell_dof(t, i)] += local[i];
    }
    return out;
  }
  Eigen::MatrixXd locals(nr, cells);
#pragma omp parallel
  {
    Eigen::VectorXd local(nr);
#pragma omp for schedule(static)
    for (Index t = 0; t < cells; ++t) {
      local.setZero();
      kernel(t, cell_geometry(mesh, t), local);
      locals.col(t) = local;
    }
  }
  for (Index t = 0; t < cells; ++t)
    for (int i = 0; i < nr; ++i) out[test.cell_dof(t, i)] += locals(i, t);
  return out;
}

/// Shape function tables at the points of a rule.
struct Tabulation {
  std::vector<BasisValues> at;
  explicit Tabulation(ElementKind kind, const QuadratureRule& rule) {
    for (const auto& p : rule.points) at.push_back(eval_basis(kind, p));
  }
};

}  // namespace nudge::detail
