#include "nudge/assembly.hpp"

#include <fmt/format.h>

#include "nudge/assembly_kernels.hpp"
#include "nudge/error.hpp"

namespace nudge {

using detail::LocalMatrix;
using detail::Tabulation;

namespace {

void require_same_mesh(const DofMap& a, const DofMap& b, const char* what) {
  if (&a.mesh() != &b.mesh()) throw Error(fmt::format("{}: spaces live on different meshes", what));
}

}  // namespace

SparseOperator assemble_mass(const DofMap& space, Execution exec) {
  const QuadratureRule& rule = triangle_rule_degree6();
  const Tabulation tab(space.kind(), rule);
  const int npc = nodes_per_cell(space.kind());
  const int nc = space.components();
  auto kernel = [&](Index, const CellGeometry& g, LocalMatrix& local) {
    for (std::size_t q = 0; q < rule.weights.size(); ++q) {
      const double w = 2.0 * g.area * rule.weights[q];
      const auto& phi = tab.at[q].values;
      for (int i = 0; i < npc; ++i)
        for (int j = 0; j < npc; ++j)
          for (int c = 0; c < nc; ++c) local(i * nc + c, j * nc + c) += w * phi[i] * phi[j];
    }
  };
  return detail::assemble_bilinear(space, space, kernel, exec);
}

SparseOperator assemble_stiffness(const DofMap& space, double nu, Execution exec) {
  if (!(nu > 0.0)) throw Error(fmt::format("stiffness coefficient must be positive, got {}", nu));
  const QuadratureRule& rule = triangle_rule_degree6();
  const Tabulation tab(space.kind(), rule);
  const int npc = nodes_per_cell(space.kind());
  const int nc = space.components();
  auto kernel = [&](Index, const CellGeometry& g, LocalMatrix& local) {
    std::vector<Vec2> grad(npc);
    for (std::size_t q = 0; q < rule.weights.size(); ++q) {
      const double w = nu * 2.0 * g.area * rule.weights[q];
      for (int i = 0; i < npc; ++i) grad[i] = g.physical_gradient(tab.at[q].dlambda[i]);
      for (int i = 0; i < npc; ++i)
        for (int j = 0; j < npc; ++j) {
          const double v = w * grad[i].dot(grad[j]);
          for (int c = 0; c < nc; ++c) local(i * nc + c, j * nc + c) += v;
        }
    }
  };
  return detail::assemble_bilinear(space, space, kernel, exec);
}

SparseOperator assemble_divergence(const DofMap& velocity, const DofMap& pressure, Execution exec) {
  require_same_mesh(velocity, pressure, "divergence");
  if (velocity.components() != 2 || pressure.components() != 1)
    throw Error("divergence needs a vector velocity space and a scalar pressure space");
  const QuadratureRule& rule = triangle_rule_degree6();
  const Tabulation vtab(velocity.kind(), rule);
  const Tabulation ptab(pressure.kind(), rule);
  const int nv = nodes_per_cell(velocity.kind());
  const int np = nodes_per_cell(pressure.kind());
  auto kernel = [&](Index, const CellGeometry& g, LocalMatrix& local) {
    for (std::size_t q = 0; q < rule.weights.size(); ++q) {
      const double w = 2.0 * g.area * rule.weights[q];
      for (int j = 0; j < nv; ++j) {
        const Vec2 grad = g.physical_gradient(vtab.at[q].dlambda[j]);
        for (int k = 0; k < np; ++k) {
          const double psi = w * ptab.at[q].values[k];
          local(k, 2 * j) += psi * grad.x();
          local(k, 2 * j + 1) += psi * grad.y();
        }
      }
    }
  };
  return detail::assemble_bilinear(pressure, velocity, kernel, exec);
}

SparseOperator assemble_convection(const Field& advecting, const DofMap& space, Execution exec) {
  const DofMap& adm = advecting.dofmap();
  require_same_mesh(adm, space, "convection");
  if (adm.components() != 2) throw Error("advecting field must be a vector field");
  const QuadratureRule& rule = triangle_rule_degree6();
  const Tabulation atab(adm.kind(), rule);
  const Tabulation tab(space.kind(), rule);
  const int na = nodes_per_cell(adm.kind());
  const int npc = nodes_per_cell(space.kind());
  const int nc = space.components();
  const auto& coef = advecting.values();
  auto kernel = [&](Index t, const CellGeometry& g, LocalMatrix& local) {
    std::vector<double> a_dot_grad(npc);
    for (std::size_t q = 0; q < rule.weights.size(); ++q) {
      const double w = 0.5 * 2.0 * g.area * rule.weights[q];
      Vec2 a = Vec2::Zero();
      for (int k = 0; k < na; ++k) {
        const Index node = adm.node(t, k);
        a += atab.at[q].values[k] * Vec2(coef[adm.dof(node, 0)], coef[adm.dof(node, 1)]);
      }
      const auto& phi = tab.at[q].values;
      for (int i = 0; i < npc; ++i) a_dot_grad[i] = a.dot(g.physical_gradient(tab.at[q].dlambda[i]));
      for (int i = 0; i < npc; ++i)
        for (int j = 0; j < npc; ++j) {
          const double v = w * (a_dot_grad[j] * phi[i] - a_dot_grad[i] * phi[j]);
          for (int c = 0; c < nc; ++c) local(i * nc + c, j * nc + c) += v;
        }
    }
  };
  return detail::assemble_bilinear(space, space, kernel, exec);
}

SparseOperator assemble_coriolis(const DofMap& velocity, Execution exec) {
  if (velocity.components() != 2) throw Error("Coriolis operator needs a vector space");
  const QuadratureRule& rule = triangle_rule_degree6();
  const Tabulation tab(velocity.kind(), rule);
  const int npc = nodes_per_cell(velocity.kind());
  auto kernel = [&](Index, const CellGeometry& g, LocalMatrix& local) {
    for (std::size_t q = 0; q < rule.weights.size(); ++q) {
      const double w = 2.0 * g.area * rule.weights[q];
      const auto& phi = tab.at[q].values;
      for (int i = 0; i < npc; ++i)
        for (int j = 0; j < npc; ++j) {
          const double m = w * phi[i] * phi[j];
          local(2 * i, 2 * j + 1) -= m;
          local(2 * i + 1, 2 * j) += m;
        }
    }
  };
  return detail::assemble_bilinear(velocity, velocity, kernel, exec);
}

Eigen::VectorXd assemble_forcing(const VectorFunction& f, double t, const DofMap& velocity, Execution exec) {
  if (velocity.components() != 2) throw Error("vector forcing needs a vector space");
  const Mesh& mesh = velocity.mesh();
  const QuadratureRule& rule = triangle_rule_degree6();
  const Tabulation tab(velocity.kind(), rule);
  const int npc = nodes_per_cell(velocity.kind());
  auto kernel = [&](Index cell, const CellGeometry& g, Eigen::VectorXd& local) {
    for (std::size_t q = 0; q < rule.weights.size(); ++q) {
      const double w = 2.0 * g.area * rule.weights[q];
      const Vec2 x = map_to_physical(mesh, cell, rule.points[q]);
      const Vec2 fx = f(x.x(), x.y(), t);
      for (int i = 0; i < npc; ++i) {
        local[2 * i] += w * fx.x() * tab.at[q].values[i];
        local[2 * i + 1] += w * fx.y() * tab.at[q].values[i];
      }
    }
  };
  return detail::assemble_linear(velocity, kernel, exec);
}

Eigen::VectorXd assemble_forcing(const ScalarFunction& f, double t, const DofMap& space, Execution exec) {
  if (space.components() != 1) throw Error("scalar forcing needs a scalar space");
  const Mesh& mesh = space.mesh();
  const QuadratureRule& rule = triangle_rule_degree6();
  const Tabulation tab(space.kind(), rule);
  const int npc = nodes_per_cell(space.kind());
  auto kernel = [&](Index cell, const CellGeometry& g, Eigen::VectorXd& local) {
    for (std::size_t q = 0; q < rule.weights.size(); ++q) {
      const Vec2 x = map_to_physical(mesh, cell, rule.points[q]);
      const double w = 2.0 * g.area * rule.weights[q] * f(x.x(), x.y(), t);
      for (int i = 0; i < npc; ++i) local[i] += w * tab.at[q].values[i];
    }
  };
  return detail::assemble_linear(space, kernel, exec);
}

Eigen::VectorXd assemble_buoyancy(const Field& temperature, double pr, double ra, const Vec2& gravity,
                                  const DofMap& velocity, Execution exec) {
  const DofMap& tdm = temperature.dofmap();
  require_same_mesh(tdm, velocity, "buoyancy");
  if (tdm.components() != 1 || velocity.components() != 2)
    throw Error("buoyancy needs a scalar temperature and a vector velocity space");
  const QuadratureRule& rule = triangle_rule_degree6();
  const Tabulation ttab(tdm.kind(), rule);
  const Tabulation vtab(velocity.kind(), rule);
  const int nt = nodes_per_cell(tdm.kind());
  const int nv = nodes_per_cell(velocity.kind());
  const auto& coef = temperature.values();
  const double scale = pr * ra;
  auto kernel = [&](Index cell, const CellGeometry& g, Eigen::VectorXd& local) {
    for (std::size_t q = 0; q < rule.weights.size(); ++q) {
      double temp = 0.0;
      for (int k = 0; k < nt; ++k) temp += ttab.at[q].values[k] * coef[tdm.node(cell, k)];
      const double w = scale * 2.0 * g.area * rule.weights[q] * temp;
      for (int i = 0; i < nv; ++i) {
        local[2 * i] += w * gravity.x() * vtab.at[q].values[i];
        local[2 * i + 1] += w * gravity.y() * vtab.at[q].values[i];
      }
    }
  };
  return detail::assemble_linear(velocity, kernel, exec);
}

}  // namespace nudge
