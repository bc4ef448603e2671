#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "nudge/spaces.hpp"

namespace nudge {

/// Compressed sparse operator; duplicate (row, col) contributions are summed
/// when the operator is built.
using SparseOperator = Eigen::SparseMatrix<double>;

/// Element loops run either OpenMP-parallel or through the serial reference
/// path. Both produce bit-identical operators.
enum class Execution { parallel, serial };

SparseOperator assemble_mass(const DofMap& space, Execution exec = Execution::parallel);

/// nu * (grad u, grad v), componentwise for vector spaces.
SparseOperator assemble_stiffness(const DofMap& space, double nu, Execution exec = Execution::parallel);

/// B[q, v] = (div v, q).
SparseOperator assemble_divergence(const DofMap& velocity, const DofMap& pressure,
                                   Execution exec = Execution::parallel);

/// N(a) with w^T N(a) v = 1/2 (a.grad v, w) - 1/2 (a.grad w, v). Works for
/// the vector velocity space and for scalar (temperature) spaces on the same
/// mesh as the advecting field.
SparseOperator assemble_convection(const Field& advecting, const DofMap& space,
                                   Execution exec = Execution::parallel);

/// C with w^T C v = (R(v), w), R(v) = (-v2, v1).
SparseOperator assemble_coriolis(const DofMap& velocity, Execution exec = Execution::parallel);

/// Load vector (f(., t), w).
Eigen::VectorXd assemble_forcing(const VectorFunction& f, double t, const DofMap& velocity,
                                 Execution exec = Execution::parallel);
Eigen::VectorXd assemble_forcing(const ScalarFunction& f, double t, const DofMap& space,
                                 Execution exec = Execution::parallel);

/// Load vector (Pr Ra T g, w) for velocity test functions w.
Eigen::VectorXd assemble_buoyancy(const Field& temperature, double pr, double ra, const Vec2& gravity,
                                  const DofMap& velocity, Execution exec = Execution::parallel);

}  // namespace nudge
