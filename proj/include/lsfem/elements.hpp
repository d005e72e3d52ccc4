#pragma once

#include "lsfem/mesh.hpp"
#include "lsfem/tensor.hpp"
#include "lsfem/types.hpp"

#include <vector>

namespace lsfem {

struct QuadratureRule {
  std::vector<Vec2> points;  // reference coordinates; 1D uses x only
  std::vector<double> weights;
  int size() const { return static_cast<int>(weights.size()); }
};

// Gauss-Legendre rule on [-1, 1] with n points (1 <= n <= 5).
QuadratureRule gauss_line(int n);
// Symmetric triangle rules on the unit reference triangle (area 1/2) with
// 1, 3, 6 or 7 points, exact to degree 1, 2, 4 and 5.
QuadratureRule triangle_rule(int points);

enum class RuleLevel { Standard, Enriched, Error };

struct ReferenceElement {
  ElementKind kind;
  int dim;
  int nodes;

  explicit ReferenceElement(ElementKind k);

  // Row of shape values N(xi).
  Eigen::RowVectorXd N(const Vec2& xi) const;
  // nodes x dim, (DN)_ij = dN_i / dxi_j.
  MatrixXd DN(const Vec2& xi) const;
  // (DDN)_ijk = d2 N_i / dxi_j dxi_k.
  tensor::Array3 DDN(const Vec2& xi) const;
  bool has_second_derivatives() const { return kind == ElementKind::Q4; }

  // Reference vertex coordinates, used to parametrize element edges.
  std::vector<Vec2> vertices() const;
  // Standard: 2-point Gauss (L2), 3-point (T3), 2x2 Gauss (Q4).
  // Enriched: 3-point, 6-point, 3x3. Error: 4-point, 7-point, 4x4.
  QuadratureRule rule(RuleLevel level) const;
  // Gauss points on an edge parametrized by t in [0, 1].
  static QuadratureRule edge_rule(RuleLevel level);
};

// Geometry of an element at one reference point.
struct ElementContext {
  int dim = 2;
  MatrixXd xhat;  // nodes x dim physical coordinates
  Eigen::RowVectorXd N;
  MatrixXd DN;
  tensor::Array3 DDN;
  MatrixXd J;     // dim x dim, J_ij = dx_i / dxi_j
  MatrixXd Jinv;
  double detJ = 0.0;
  MatrixXd B;     // nodes x dim, B = DN J^-1
  Vec2 x = Vec2::Zero();
  bool second = false;

  ElementContext(const ReferenceElement& ref, const MatrixXd& xhat, const Vec2& xi);
};

MatrixXd element_coordinates(const StructuredMesh& mesh, int e);

// Row r with r . chat = div grad c, via the curvature-corrected Kronecker
// formula. Zero for L2 and T3.
Eigen::RowVectorXd laplacian_row(const ElementContext& ctx);

// dim^2 x nodes matrix H with H chat = vec(grad grad c).
MatrixXd hessian_rows(const ElementContext& ctx);

// grad D = Dhat^T DN J^-1 for nodal scalar values.
VectorXd grad_of_scalar_field(const VectorXd& nodal, const ElementContext& ctx);

// div D for nodal tensor values; nodal[a] is the dim x dim tensor at node a.
VectorXd div_of_tensor_field(const std::vector<MatrixXd>& nodal, const ElementContext& ctx);

}  // namespace lsfem
