#include "nudge/spaces.hpp"

#include <cmath>
#include <numbers>
#include <ostream>

#include <fmt/format.h>

#include "nudge/error.hpp"

namespace nudge {

const QuadratureRule& triangle_rule_degree6() {
  static const QuadratureRule rule = [] {
    QuadratureRule r;
    r.degree = 6;
    auto orbit3 = [&r](double a, double w) {
      const double b = 1.0 - 2.0 * a;
      r.points.push_back({b, a, a});
      r.points.push_back({a, b, a});
      r.points.push_back({a, a, b});
      for (int i = 0; i < 3; ++i) r.weights.push_back(0.5 * w);
    };
    auto orbit6 = [&r](double a, double b, double w) {
      const double c = 1.0 - a - b;
      for (const auto& p : {std::array<double, 3>{a, b, c}, {a, c, b}, {b, a, c}, {b, c, a},
                            {c, a, b}, {c, b, a}}) {
        r.points.push_back(p);
        r.weights.push_back(0.5 * w);
      }
    };
    orbit3(0.063089014491502228340331602870819, 0.050844906370206816920936809106869);
    orbit3(0.24928674517091042129163855310702, 0.11678627572637936602528961138558);
    orbit6(0.053145049844816947353249671631398, 0.31035245103378440541660773395655,
           0.082851075618373575193553456420442);
    return r;
  }();
  return rule;
}

LineRule gauss_legendre(int points) {
  if (points < 1) throw Error("Gauss-Legendre rule needs at least one point");
  LineRule rule;
  rule.points.resize(points);
  rule.weights.resize(points);
  for (int i = 0; i < points; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (points + 0.5));
    double dp = 1.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= points; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = points * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.points[i] = 0.5 * (1.0 - x);
    rule.weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

const char* element_kind_name(ElementKind kind) {
  switch (kind) {
    case ElementKind::p2_vector: return "P2-vector";
    case ElementKind::p2_scalar: return "P2-scalar";
    case ElementKind::p1_scalar: return "P1-scalar";
    case ElementKind::p0_scalar: return "P0-scalar";
  }
  return "?";
}

int nodes_per_cell(ElementKind kind) {
  switch (kind) {
    case ElementKind::p2_vector:
    case ElementKind::p2_scalar: return 6;
    case ElementKind::p1_scalar: return 3;
    case ElementKind::p0_scalar: return 1;
  }
  return 0;
}

int components(ElementKind kind) { return kind == ElementKind::p2_vector ? 2 : 1; }

BasisValues eval_basis(ElementKind kind, const std::array<double, 3>& l) {
  BasisValues b;
  switch (kind) {
    case ElementKind::p0_scalar:
      b.values = {1.0};
      b.dlambda = {{0.0, 0.0, 0.0}};
      break;
    case ElementKind::p1_scalar:
      b.values = {l[0], l[1], l[2]};
      b.dlambda = {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
      break;
    case ElementKind::p2_vector:
    case ElementKind::p2_scalar:
      b.values.resize(6);
      b.dlambda.assign(6, {0.0, 0.0, 0.0});
      for (int i = 0; i < 3; ++i) {
        b.values[i] = l[i] * (2.0 * l[i] - 1.0);
        b.dlambda[i][i] = 4.0 * l[i] - 1.0;
      }
      for (int k = 0; k < 3; ++k) {
        const int i = k, j = (k + 1) % 3;
        b.values[3 + k] = 4.0 * l[i] * l[j];
        b.dlambda[3 + k][i] = 4.0 * l[j];
        b.dlambda[3 + k][j] = 4.0 * l[i];
      }
      break;
  }
  return b;
}

CellGeometry cell_geometry(const Mesh& mesh, Index t) {
  const auto& tri = mesh.triangle(t);
  const Vec2& a = mesh.vertex(tri[0]);
  const Vec2& b = mesh.vertex(tri[1]);
  const Vec2& c = mesh.vertex(tri[2]);
  CellGeometry g;
  const double det = (b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y());
  g.area = 0.5 * det;
  // grad(lambda_i) = rot(opposite edge) / det
  g.grad_lambda[0] = Vec2(b.y() - c.y(), c.x() - b.x()) / det;
  g.grad_lambda[1] = Vec2(c.y() - a.y(), a.x() - c.x()) / det;
  g.grad_lambda[2] = Vec2(a.y() - b.y(), b.x() - a.x()) / det;
  return g;
}

Vec2 map_to_physical(const Mesh& mesh, Index t, const std::array<double, 3>& l) {
  const auto& tri = mesh.triangle(t);
  return l[0] * mesh.vertex(tri[0]) + l[1] * mesh.vertex(tri[1]) + l[2] * mesh.vertex(tri[2]);
}

DofMap::DofMap(MeshPtr mesh, ElementKind kind) : mesh_(std::move(mesh)), kind_(kind) {
  const Mesh& m = *mesh_;
  const int npc = nodes_per_cell(kind_);
  cell_nodes_.resize(static_cast<std::size_t>(m.triangle_count()) * npc);
  std::vector<std::uint8_t> node_sides;

  if (kind_ == ElementKind::p0_scalar) {
    for (Index t = 0; t < m.triangle_count(); ++t) {
      cell_nodes_[t] = t;
      node_points_.push_back(m.barycenter(t));
    }
    node_sides.assign(node_points_.size(), side_none);
  } else {
    node_points_ = m.vertices();
    for (Index v = 0; v < m.vertex_count(); ++v) node_sides.push_back(m.vertex_sides(v));
    const bool quadratic = npc == 6;
    if (quadratic) {
      for (const Edge& e : m.edges()) {
        node_points_.push_back(0.5 * (m.vertex(e.vertices[0]) + m.vertex(e.vertices[1])));
        node_sides.push_back(e.on_boundary() ? e.side : side_none);
      }
    }
    for (Index t = 0; t < m.triangle_count(); ++t) {
      for (int k = 0; k < 3; ++k) cell_nodes_[t * npc + k] = m.triangle(t)[k];
      if (quadratic)
        for (int k = 0; k < 3; ++k) cell_nodes_[t * npc + 3 + k] = m.vertex_count() + m.triangle_edge(t, k);
    }
  }

  const int nc = components();
  for (Index n = 0; n < node_count(); ++n) {
    if (node_sides[n] == side_none) continue;
    for (int c = 0; c < nc; ++c) boundary_dofs_.push_back({dof(n, c), node_sides[n]});
  }
}

DofMapPtr build_dofmap(MeshPtr mesh, ElementKind kind) {
  return std::make_shared<const DofMap>(std::move(mesh), kind);
}

Field::Field(DofMapPtr dofmap, Eigen::VectorXd values, double time)
    : dofmap_(std::move(dofmap)), values_(std::move(values)), time_(time) {
  if (values_.size() != dofmap_->dof_count())
    throw Error(fmt::format("field has {} coefficients but its {} space has {} dofs", values_.size(),
                            element_kind_name(dofmap_->kind()), dofmap_->dof_count()));
}

double Field::evaluate(Index t, const std::array<double, 3>& lambda, int c) const {
  const BasisValues b = eval_basis(dofmap_->kind(), lambda);
  double v = 0.0;
  for (std::size_t k = 0; k < b.values.size(); ++k)
    v += b.values[k] * values_[dofmap_->dof(dofmap_->node(t, static_cast<int>(k)), c)];
  return v;
}

Vec2 Field::gradient(Index t, const std::array<double, 3>& lambda, int c) const {
  const BasisValues b = eval_basis(dofmap_->kind(), lambda);
  const CellGeometry g = cell_geometry(dofmap_->mesh(), t);
  Vec2 grad = Vec2::Zero();
  for (std::size_t k = 0; k < b.values.size(); ++k)
    grad += values_[dofmap_->dof(dofmap_->node(t, static_cast<int>(k)), c)] * g.physical_gradient(b.dlambda[k]);
  return grad;
}

Field interpolate(const DofMapPtr& dofmap, const ScalarFunction& f, double t) {
  if (dofmap->components() != 1) throw Error("scalar interpolation into a vector space");
  Field out(dofmap);
  for (Index n = 0; n < dofmap->node_count(); ++n) {
    const Vec2& p = dofmap->node_point(n);
    out.values()[n] = f(p.x(), p.y(), t);
  }
  out.set_time(t);
  return out;
}

Field interpolate(const DofMapPtr& dofmap, const VectorFunction& f, double t) {
  if (dofmap->components() != 2) throw Error("vector interpolation into a scalar space");
  Field out(dofmap);
  for (Index n = 0; n < dofmap->node_count(); ++n) {
    const Vec2& p = dofmap->node_point(n);
    const Vec2 v = f(p.x(), p.y(), t);
    out.values()[dofmap->dof(n, 0)] = v.x();
    out.values()[dofmap->dof(n, 1)] = v.y();
  }
  out.set_time(t);
  return out;
}

namespace {

// Per-cell integrals evaluated in parallel, summed serially in cell order so
// the result does not depend on the thread count.
template <class CellIntegral>
double ordered_cell_sum(Index cells, CellIntegral&& integral) {
  std::vector<double> partial(static_cast<std::size_t>(cells));
#pragma omp parallel for schedule(static)
  for (Index t = 0; t < cells; ++t) partial[t] = integral(t);
  double sum = 0.0;
  for (double p : partial) sum += p;
  return sum;
}

struct TabulatedBasis {
  std::vector<BasisValues> at_point;
};

TabulatedBasis tabulate(ElementKind kind, const QuadratureRule& rule) {
  TabulatedBasis tab;
  for (const auto& p : rule.points) tab.at_point.push_back(eval_basis(kind, p));
  return tab;
}

}  // namespace

Norms norms(const Field& field) {
  const DofMap& dm = field.dofmap();
  const Mesh& mesh = dm.mesh();
  const QuadratureRule& rule = triangle_rule_degree6();
  const TabulatedBasis tab = tabulate(dm.kind(), rule);
  const int npc = nodes_per_cell(dm.kind());
  const int nc = dm.components();
  const auto& u = field.values();

  auto cell_terms = [&](Index t, bool gradient) {
    const CellGeometry g = cell_geometry(mesh, t);
    double acc = 0.0;
    for (std::size_t q = 0; q < rule.weights.size(); ++q) {
      const BasisValues& b = tab.at_point[q];
      for (int c = 0; c < nc; ++c) {
        double val = 0.0;
        Vec2 grad = Vec2::Zero();
        for (int k = 0; k < npc; ++k) {
          const double coef = u[dm.dof(dm.node(t, k), c)];
          val += coef * b.values[k];
          if (gradient) grad += coef * g.physical_gradient(b.dlambda[k]);
        }
        acc += 2.0 * g.area * rule.weights[q] * (gradient ? grad.squaredNorm() : val * val);
      }
    }
    return acc;
  };

  Norms n;
  n.l2 = std::sqrt(ordered_cell_sum(mesh.triangle_count(), [&](Index t) { return cell_terms(t, false); }));
  if (dm.kind() != ElementKind::p0_scalar)
    n.h1_semi = std::sqrt(ordered_cell_sum(mesh.triangle_count(), [&](Index t) { return cell_terms(t, true); }));
  return n;
}

namespace {

template <class Exact>
double l2_error_impl(const Field& field, Exact&& exact_at) {
  const DofMap& dm = field.dofmap();
  const Mesh& mesh = dm.mesh();
  const QuadratureRule& rule = triangle_rule_degree6();
  const TabulatedBasis tab = tabulate(dm.kind(), rule);
  const int npc = nodes_per_cell(dm.kind());
  const int nc = dm.components();
  const auto& u = field.values();
  const double sq = ordered_cell_sum(mesh.triangle_count(), [&](Index t) {
    const CellGeometry g = cell_geometry(mesh, t);
    double acc = 0.0;
    for (std::size_t q = 0; q < rule.weights.size(); ++q) {
      const Vec2 x = map_to_physical(mesh, t, rule.points[q]);
      const Vec2 ex = exact_at(x);
      for (int c = 0; c < nc; ++c) {
        double val = 0.0;
        for (int k = 0; k < npc; ++k) val += u[dm.dof(dm.node(t, k), c)] * tab.at_point[q].values[k];
        const double d = val - ex[c];
        acc += 2.0 * g.area * rule.weights[q] * d * d;
      }
    }
    return acc;
  });
  return std::sqrt(sq);
}

}  // namespace

double l2_error(const Field& field, const VectorFunction& exact, double t) {
  if (field.dofmap().components() != 2) throw Error("vector error of a scalar field");
  return l2_error_impl(field, [&](const Vec2& x) { return exact(x.x(), x.y(), t); });
}

double l2_error(const Field& field, const ScalarFunction& exact, double t) {
  if (field.dofmap().components() != 1) throw Error("scalar error of a vector field");
  return l2_error_impl(field, [&](const Vec2& x) { return Vec2(exact(x.x(), x.y(), t), 0.0); });
}

void write_vtk_fields(std::ostream& out, const std::vector<NamedField>& fields, const char* title) {
  if (fields.empty()) throw Error("write_vtk_fields: no fields");
  const Mesh& mesh = fields.front().field->dofmap().mesh();
  for (const NamedField& f : fields)
    if (&f.field->dofmap().mesh() != &mesh) throw Error(fmt::format("write_vtk_fields: '{}' lives on another mesh", f.name));
  write_vtk_mesh(out, mesh, title);

  auto write_block = [&](bool cells) {
    bool header = false;
    for (const NamedField& f : fields) {
      const DofMap& dm = f.field->dofmap();
      if ((dm.kind() == ElementKind::p0_scalar) != cells) continue;
      if (!header) {
        out << (cells ? "CELL_DATA " : "POINT_DATA ") << (cells ? mesh.triangle_count() : mesh.vertex_count())
            << '\n';
        header = true;
      }
      const Index count = cells ? mesh.triangle_count() : mesh.vertex_count();
      const Eigen::VectorXd& v = f.field->values();
      if (components(dm.kind()) == 2) {
        out << "VECTORS " << f.name << " double\n";
        for (Index i = 0; i < count; ++i)
          out << fmt::format("{:.17g} {:.17g} 0\n", v[dm.dof(i, 0)], v[dm.dof(i, 1)]);
      } else {
        out << "SCALARS " << f.name << " double 1\nLOOKUP_TABLE default\n";
        for (Index i = 0; i < count; ++i) out << fmt::format("{:.17g}\n", v[dm.dof(i, 0)]);
      }
    }
  };
  write_block(false);
  write_block(true);
}

}  // namespace nudge
