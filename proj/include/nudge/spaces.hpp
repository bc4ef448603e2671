#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "nudge/mesh.hpp"

namespace nudge {

// ---------------------------------------------------------------------------
// Quadrature

struct QuadratureRule {
  std::vector<std::array<double, 3>> points;  // barycentric
  std::vector<double> weights;                // sum to 1/2, the reference area
  int degree = 0;
};

/// 12-point symmetric rule, exact for polynomials of degree 6.
const QuadratureRule& triangle_rule_degree6();

/// Gauss-Legendre rule on [0,1].
struct LineRule {
  std::vector<double> points;
  std::vector<double> weights;
};
LineRule gauss_legendre(int points);

// ---------------------------------------------------------------------------
// Reference elements

enum class ElementKind { p2_vector, p2_scalar, p1_scalar, p0_scalar };

const char* element_kind_name(ElementKind kind);

/// Scalar shape functions per node on the reference triangle.
int nodes_per_cell(ElementKind kind);
int components(ElementKind kind);
inline int dofs_per_cell(ElementKind kind) { return nodes_per_cell(kind) * components(kind); }

/// Shape function values and derivatives with respect to the three
/// barycentric coordinates at a point.
struct BasisValues {
  std::vector<double> values;
  std::vector<std::array<double, 3>> dlambda;
};

BasisValues eval_basis(ElementKind kind, const std::array<double, 3>& lambda);

/// Per-triangle affine geometry.
struct CellGeometry {
  double area = 0.0;
  std::array<Vec2, 3> grad_lambda;

  Vec2 physical_gradient(const std::array<double, 3>& dlambda) const {
    return dlambda[0] * grad_lambda[0] + dlambda[1] * grad_lambda[1] + dlambda[2] * grad_lambda[2];
  }
};

CellGeometry cell_geometry(const Mesh& mesh, Index t);
Vec2 map_to_physical(const Mesh& mesh, Index t, const std::array<double, 3>& lambda);

// ---------------------------------------------------------------------------
// Degrees of freedom

struct BoundaryDof {
  Index dof;
  std::uint8_t sides;  // bitmask of Side
};

/// Numbering: scalar nodes are vertices first, then edge midpoints; vector
/// components are interleaved per node (dof = 2*node + component).
class DofMap {
 public:
  DofMap(MeshPtr mesh, ElementKind kind);

  ElementKind kind() const { return kind_; }
  const Mesh& mesh() const { return *mesh_; }
  const MeshPtr& mesh_ptr() const { return mesh_; }
  Index dof_count() const { return node_count() * nudge::components(kind_); }
  Index node_count() const { return static_cast<Index>(node_points_.size()); }
  int components() const { return nudge::components(kind_); }

  /// Global node of local node k on triangle t.
  Index node(Index t, int k) const { return cell_nodes_[t * nodes_per_cell(kind_) + k]; }
  Index dof(Index node, int component) const { return node * components() + component; }
  /// Global dof of local dof `local` (= k*components + c) on triangle t.
  Index cell_dof(Index t, int local) const {
    const int nc = components();
    return dof(node(t, local / nc), local % nc);
  }

  const Vec2& node_point(Index node) const { return node_points_[node]; }
  const std::vector<BoundaryDof>& boundary_dofs() const { return boundary_dofs_; }

 private:
  MeshPtr mesh_;
  ElementKind kind_;
  std::vector<Index> cell_nodes_;
  std::vector<Vec2> node_points_;
  std::vector<BoundaryDof> boundary_dofs_;
};

using DofMapPtr = std::shared_ptr<const DofMap>;

DofMapPtr build_dofmap(MeshPtr mesh, ElementKind kind);

// ---------------------------------------------------------------------------
// Fields

/// Analytic function of (x, y, t) returning up to two components.
using ScalarFunction = std::function<double(double x, double y, double t)>;
using VectorFunction = std::function<Vec2(double x, double y, double t)>;

class Field {
 public:
  Field() = default;
  explicit Field(DofMapPtr dofmap)
      : dofmap_(std::move(dofmap)), values_(Eigen::VectorXd::Zero(dofmap_->dof_count())) {}
  Field(DofMapPtr dofmap, Eigen::VectorXd values, double time = 0.0);

  const DofMap& dofmap() const { return *dofmap_; }
  const DofMapPtr& dofmap_ptr() const { return dofmap_; }
  const Eigen::VectorXd& values() const { return values_; }
  Eigen::VectorXd& values() { return values_; }
  double time() const { return time_; }
  void set_time(double t) { time_ = t; }

  /// Value of component c at barycentric point lambda of triangle t.
  double evaluate(Index t, const std::array<double, 3>& lambda, int c = 0) const;
  Vec2 gradient(Index t, const std::array<double, 3>& lambda, int c = 0) const;

 private:
  DofMapPtr dofmap_;
  Eigen::VectorXd values_;
  double time_ = 0.0;
};

Field interpolate(const DofMapPtr& dofmap, const ScalarFunction& f, double t);
Field interpolate(const DofMapPtr& dofmap, const VectorFunction& f, double t);

struct Norms {
  double l2 = 0.0;
  double h1_semi = 0.0;
};

Norms norms(const Field& field);

/// L2 distance between a discrete field and an analytic one (quadrature).
double l2_error(const Field& field, const VectorFunction& exact, double t);
double l2_error(const Field& field, const ScalarFunction& exact, double t);

/// Legacy ASCII VTK file: the mesh plus each field sampled at the vertices
/// (P1/P2, POINT_DATA) or per cell (P0, CELL_DATA). Vector fields are
/// written as 3-vectors with a zero z component. All fields must live on
/// the same mesh.
struct NamedField {
  std::string name;
  const Field* field;
};
void write_vtk_fields(std::ostream& out, const std::vector<NamedField>& fields, const char* title);

}  // namespace nudge
