#include "lsfem/elements.hpp"

#include <cmath>

namespace lsfem {

QuadratureRule gauss_line(int n) {
  QuadratureRule r;
  auto add = [&](double x, double w) {
    r.points.emplace_back(x, 0.0);
    r.weights.push_back(w);
  };
  switch (n) {
    case 1: add(0.0, 2.0); break;
    case 2: {
      const double a = 1.0 / std::sqrt(3.0);
      add(-a, 1.0);
      add(a, 1.0);
      break;
    }
    case 3: {
      const double a = std::sqrt(0.6);
      add(-a, 5.0 / 9.0);
      add(0.0, 8.0 / 9.0);
      add(a, 5.0 / 9.0);
      break;
    }
    case 4: {
      const double a = 0.3399810435848563, wa = 0.6521451548625461;
      const double b = 0.8611363115940526, wb = 0.3478548451374538;
      add(-b, wb);
      add(-a, wa);
      add(a, wa);
      add(b, wb);
      break;
    }
    case 5: {
      const double a = 0.5384693101056831, wa = 0.4786286704993665;
      const double b = 0.9061798459386640, wb = 0.2369268850561891;
      add(-b, wb);
      add(-a, wa);
      add(0.0, 0.5688888888888889);
      add(a, wa);
      add(b, wb);
      break;
    }
    default: throw InvalidArgument("gauss_line supports 1..5 points");
  }
  return r;
}

QuadratureRule triangle_rule(int points) {
  QuadratureRule r;
  auto add = [&](double a, double b, double w) {
    r.points.emplace_back(a, b);
    r.weights.push_back(0.5 * w);
  };
  auto orbit3 = [&](double a, double b, double w) {
    add(a, a, w);
    add(b, a, w);
    add(a, b, w);
  };
  switch (points) {
    case 1: add(1.0 / 3.0, 1.0 / 3.0, 1.0); break;
    case 3: orbit3(1.0 / 6.0, 2.0 / 3.0, 1.0 / 3.0); break;
    case 6:
      orbit3(0.445948490915965, 1.0 - 2.0 * 0.445948490915965, 0.223381589678011);
      orbit3(0.091576213509771, 1.0 - 2.0 * 0.091576213509771, 0.109951743655322);
      break;
    case 7:
      add(1.0 / 3.0, 1.0 / 3.0, 0.225);
      orbit3(0.470142064105115, 1.0 - 2.0 * 0.470142064105115, 0.132394152788506);
      orbit3(0.101286507323456, 1.0 - 2.0 * 0.101286507323456, 0.125939180544827);
      break;
    default: throw InvalidArgument("triangle_rule supports 1, 3, 6 or 7 points");
  }
  return r;
}

namespace {

QuadratureRule tensor_rule(int n) {
  const QuadratureRule g = gauss_line(n);
  QuadratureRule r;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      r.points.emplace_back(g.points[i].x(), g.points[j].x());
      r.weights.push_back(g.weights[i] * g.weights[j]);
    }
  return r;
}

int level_index(RuleLevel level) {
  switch (level) {
    case RuleLevel::Standard: return 0;
    case RuleLevel::Enriched: return 1;
    case RuleLevel::Error: return 2;
  }
  return 0;
}

}  // namespace

ReferenceElement::ReferenceElement(ElementKind k)
    : kind(k), dim(k == ElementKind::L2 ? 1 : 2), nodes(nodes_per_element(k)) {}

std::vector<Vec2> ReferenceElement::vertices() const {
  switch (kind) {
    case ElementKind::L2: return {Vec2(-1, 0), Vec2(1, 0)};
    case ElementKind::T3: return {Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)};
    case ElementKind::Q4: return {Vec2(-1, -1), Vec2(1, -1), Vec2(1, 1), Vec2(-1, 1)};
  }
  return {};
}

Eigen::RowVectorXd ReferenceElement::N(const Vec2& xi) const {
  Eigen::RowVectorXd n(nodes);
  switch (kind) {
    case ElementKind::L2:
      n << 0.5 * (1.0 - xi.x()), 0.5 * (1.0 + xi.x());
      break;
    case ElementKind::T3:
      n << 1.0 - xi.x() - xi.y(), xi.x(), xi.y();
      break;
    case ElementKind::Q4: {
      const auto v = vertices();
      for (int a = 0; a < 4; ++a) n(a) = 0.25 * (1.0 + xi.x() * v[a].x()) * (1.0 + xi.y() * v[a].y());
      break;
    }
  }
  return n;
}

MatrixXd ReferenceElement::DN(const Vec2& xi) const {
  MatrixXd d(nodes, dim);
  switch (kind) {
    case ElementKind::L2:
      d << -0.5, 0.5;
      break;
    case ElementKind::T3:
      d << -1.0, -1.0, 1.0, 0.0, 0.0, 1.0;
      break;
    case ElementKind::Q4: {
      const auto v = vertices();
      for (int a = 0; a < 4; ++a) {
        d(a, 0) = 0.25 * v[a].x() * (1.0 + xi.y() * v[a].y());
        d(a, 1) = 0.25 * v[a].y() * (1.0 + xi.x() * v[a].x());
      }
      break;
    }
  }
  return d;
}

tensor::Array3 ReferenceElement::DDN(const Vec2&) const {
  tensor::Array3 h(nodes, dim, dim);
  if (kind == ElementKind::Q4) {
    const auto v = vertices();
    for (int a = 0; a < 4; ++a) {
      h(a, 0, 1) = 0.25 * v[a].x() * v[a].y();
      h(a, 1, 0) = h(a, 0, 1);
    }
  }
  return h;
}

QuadratureRule ReferenceElement::rule(RuleLevel level) const {
  const int i = level_index(level);
  switch (kind) {
    case ElementKind::L2: return gauss_line(std::array<int, 3>{2, 3, 4}[i]);
    case ElementKind::T3: return triangle_rule(std::array<int, 3>{3, 6, 7}[i]);
    case ElementKind::Q4: return tensor_rule(std::array<int, 3>{2, 3, 4}[i]);
  }
  return {};
}

QuadratureRule ReferenceElement::edge_rule(RuleLevel level) {
  QuadratureRule g = gauss_line(std::array<int, 3>{2, 3, 4}[level_index(level)]);
  for (std::size_t k = 0; k < g.points.size(); ++k) {
    g.points[k] = Vec2(0.5 * (g.points[k].x() + 1.0), 0.0);
    g.weights[k] *= 0.5;
  }
  return g;
}

MatrixXd element_coordinates(const StructuredMesh& mesh, int e) {
  const int n = mesh.nodes_per_element();
  MatrixXd x(n, mesh.dim);
  for (int a = 0; a < n; ++a)
    for (int j = 0; j < mesh.dim; ++j) x(a, j) = mesh.nodes[mesh.elements[e][a]](j);
  return x;
}

ElementContext::ElementContext(const ReferenceElement& ref, const MatrixXd& xh, const Vec2& xi)
    : dim(ref.dim), xhat(xh), N(ref.N(xi)), DN(ref.DN(xi)), DDN(ref.DDN(xi)), second(ref.has_second_derivatives()) {
  J = xhat.transpose() * DN;
  detJ = J.determinant();
  if (!(detJ > 0.0)) throw AssemblyError("non-positive Jacobian determinant");
  Jinv = J.inverse();
  B = DN * Jinv;
  const VectorXd xp = xhat.transpose() * N.transpose();
  for (int j = 0; j < dim; ++j) x(j) = xp(j);
}

Eigen::RowVectorXd laplacian_row(const ElementContext& ctx) {
  const int n = static_cast<int>(ctx.N.size());
  if (!ctx.second) return Eigen::RowVectorXd::Zero(n);
  const MatrixXd I = MatrixXd::Identity(n, n);
  const MatrixXd G = ctx.Jinv * ctx.Jinv.transpose();
  const VectorXd col = (I - ctx.B * ctx.xhat.transpose()) * tensor::mat1(ctx.DDN) * tensor::vec(G);
  return col.transpose();
}

MatrixXd hessian_rows(const ElementContext& ctx) {
  const int n = static_cast<int>(ctx.N.size());
  const int d = ctx.dim;
  if (!ctx.second) return MatrixXd::Zero(d * d, n);
  const MatrixXd I = MatrixXd::Identity(n, n);
  const MatrixXd JinvT = ctx.Jinv.transpose();
  return tensor::kron(JinvT, JinvT) * tensor::mat2(ctx.DDN) * (I - ctx.xhat * ctx.B.transpose());
}

VectorXd grad_of_scalar_field(const VectorXd& nodal, const ElementContext& ctx) {
  return (nodal.transpose() * ctx.B).transpose();
}

VectorXd div_of_tensor_field(const std::vector<MatrixXd>& nodal, const ElementContext& ctx) {
  const int d = ctx.dim;
  const int n = static_cast<int>(nodal.size());
  tensor::Array3 Dhat(d, d, n);
  for (int a = 0; a < n; ++a)
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) Dhat(i, j, a) = nodal[a](i, j);
  // The transposer applied to B yields B^T; its column-stacked vec pairs each
  // (j, a) column of mat_1 with dN_a/dx_j.
  const MatrixXd Bt = ctx.B.transpose();
  return tensor::mat1(Dhat) * tensor::vec(Bt);
}

}  // namespace lsfem
