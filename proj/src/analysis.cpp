#include "lsfem/analysis.hpp"

#include <Eigen/SVD>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <sstream>

namespace lsfem {

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<int> element_nodes(const StructuredMesh& mesh, int e) {
  std::vector<int> c(mesh.nodes_per_element());
  for (int a = 0; a < mesh.nodes_per_element(); ++a) c[a] = mesh.elements[e][a];
  return c;
}

}  // namespace

ErrorNorms error_norms(const Field& field, const ExactSolution& exact) {
  const StructuredMesh& mesh = *field.mesh;
  const int d = mesh.dim;
  const ReferenceElement ref(mesh.kind);
  const QuadratureRule rule = ref.rule(RuleLevel::Error);
  ErrorNorms out;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto conn = element_nodes(mesh, e);
    const MatrixXd xhat = element_coordinates(mesh, e);
    VectorXd ce(ref.nodes);
    MatrixXd qe(ref.nodes, d);
    for (int a = 0; a < ref.nodes; ++a) {
      ce(a) = field.c(conn[a]);
      for (int j = 0; j < d; ++j) qe(a, j) = field.q(conn[a] * d + j);
    }
    for (int g = 0; g < rule.size(); ++g) {
      const ElementContext ctx(ref, xhat, rule.points[g]);
      const double w = rule.weights[g] * ctx.detJ;
      const Vec2 x = ctx.x;
      const double ch = ctx.N.dot(ce);
      const VectorXd gch = ctx.B.transpose() * ce;  // d
      const VectorXd qh = qe.transpose() * ctx.N.transpose();
      const MatrixXd gqh = qe.transpose() * ctx.B;  // (i, j) = d q_i / d x_j
      const Vec2 gc = exact.grad_c(x);
      const Vec2 q = exact.q(x);
      const Mat2 gq = exact.grad_q(x);
      out.l2_c += w * std::pow(ch - exact.c(x), 2);
      for (int i = 0; i < d; ++i) {
        out.h1_c += w * std::pow(gch(i) - gc(i), 2);
        out.l2_q += w * std::pow(qh(i) - q(i), 2);
        for (int j = 0; j < d; ++j) out.h1_q += w * std::pow(gqh(i, j) - gq(i, j), 2);
      }
    }
  }
  out.l2_c = std::sqrt(out.l2_c);
  out.h1_c = std::sqrt(out.h1_c);
  out.l2_q = std::sqrt(out.l2_q);
  out.h1_q = std::sqrt(out.h1_q);
  return out;
}

std::vector<double> convergence_rates(const std::vector<double>& h, const std::vector<double>& e) {
  if (h.size() != e.size()) throw InvalidArgument("mesh sizes and errors differ in length");
  std::vector<double> r;
  for (std::size_t i = 0; i + 1 < h.size(); ++i) r.push_back(std::log(e[i] / e[i + 1]) / std::log(h[i] / h[i + 1]));
  return r;
}

// Written in the form divided by E so that no exponential overflows.
double ManufacturedSolution::g(double y) const {
  return (std::exp(m1 * y) - std::exp(m1 + m2 * (y - 1.0))) / (1.0 - std::exp(m1 - m2));
}

double ManufacturedSolution::dg(double y) const {
  return (m1 * std::exp(m1 * y) - m2 * std::exp(m1 + m2 * (y - 1.0))) / (1.0 - std::exp(m1 - m2));
}

double ManufacturedSolution::d2g(double y) const {
  return (m1 * m1 * std::exp(m1 * y) - m2 * m2 * std::exp(m1 + m2 * (y - 1.0))) / (1.0 - std::exp(m1 - m2));
}

ExactSolution ManufacturedSolution::exact() const {
  const ManufacturedSolution s = *this;
  ExactSolution ex;
  ex.c = [s](const Vec2& x) { return std::sin(kPi * x.x()) * s.g(x.y()); };
  ex.grad_c = [s](const Vec2& x) {
    return Vec2(kPi * std::cos(kPi * x.x()) * s.g(x.y()), std::sin(kPi * x.x()) * s.dg(x.y()));
  };
  // q = c e_y - D grad c
  ex.q = [s](const Vec2& x) {
    const double sx = std::sin(kPi * x.x()), cx = std::cos(kPi * x.x());
    return Vec2(-s.D * kPi * cx * s.g(x.y()), sx * (s.g(x.y()) - s.D * s.dg(x.y())));
  };
  ex.grad_q = [s](const Vec2& x) {
    const double sx = std::sin(kPi * x.x()), cx = std::cos(kPi * x.x());
    const double g = s.g(x.y()), dg = s.dg(x.y()), d2g = s.d2g(x.y());
    Mat2 G;
    G << s.D * kPi * kPi * sx * g, -s.D * kPi * cx * dg, kPi * cx * (g - s.D * dg), sx * (dg - s.D * d2g);
    return G;
  };
  return ex;
}

double ManufacturedSolution::source(const Vec2& x) const {
  // c_y - D (c_xx + c_yy)
  const double sx = std::sin(kPi * x.x());
  const double y = x.y();
  return sx * (dg(y) + D * kPi * kPi * g(y) - D * d2g(y));
}

ManufacturedProblem manufactured_problem(double D) {
  if (!(D > 0.0)) throw InvalidArgument("diffusivity must be positive");
  ManufacturedProblem mp;
  auto& s = mp.solution;
  s.D = D;
  const double root = std::sqrt(1.0 + 4.0 * kPi * kPi * D * D);
  s.m1 = (1.0 - root) / (2.0 * D);
  s.m2 = (1.0 + root) / (2.0 * D);
  auto& p = mp.problem;
  p.dim = 2;
  p.velocity = std::make_shared<ConstantVelocity>(Vec2(0.0, 1.0));
  p.diffusivity = std::make_shared<ScalarDiffusivity>(D);
  p.alpha = ScalarField::constant(0.0);
  p.source = ScalarField::constant(0.0);
  p.dirichlet_region = [](const BoundaryEdge&) { return true; };
  p.dirichlet_value = [](const Vec2& x, double) {
    if (x.x() <= 0.0 || x.x() >= 1.0 || x.y() >= 1.0) return 0.0;
    return x.y() <= 0.0 ? std::sin(kPi * x.x()) : 0.0;
  };
  return mp;
}

std::function<double(double)> analytical_adr_1d(double v, double D, double c0, double q0, double L, FluxBC kind) {
  if (!(D > 0.0)) throw InvalidArgument("diffusivity must be positive");
  if (kind == FluxBC::SignAware) {
    // (q - s+ c v) n = q0 at x = L with n = +1.
    if (v > 0.0) kind = FluxBC::Diffusive;
    else if (v < 0.0) kind = FluxBC::Total;
    else return [=](double x) { return c0 - q0 * x / D; };
  }
  if (v == 0.0) return [=](double x) { return c0 - q0 * x / D; };
  if (kind == FluxBC::Total) return [=](double x) { return (q0 + (v * c0 - q0) * std::exp(v * x / D)) / v; };
  return [=](double x) { return (v * c0 + q0 * std::exp(-v * L / D) - q0 * std::exp(v * (x - L) / D)) / v; };
}

Galerkin1D galerkin_1d_system(int nelem, double v, double D, double alpha, double f) {
  if (nelem < 2) throw InvalidArgument("need at least two elements");
  if (!(D > 0.0)) throw InvalidArgument("diffusivity must be positive");
  Galerkin1D s;
  s.h = 1.0 / nelem;
  const int m = nelem - 1;
  const double lo = alpha * s.h / 6.0 - v / 2.0 - D / s.h;
  const double di = 4.0 * alpha * s.h / 6.0 + 2.0 * D / s.h;
  const double up = alpha * s.h / 6.0 + v / 2.0 - D / s.h;
  s.K = MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    s.K(i, i) = di;
    if (i > 0) s.K(i, i - 1) = lo;
    if (i + 1 < m) s.K(i, i + 1) = up;
  }
  s.f = VectorXd::Constant(m, f * s.h);
  return s;
}

double condition_number(const MatrixXd& M) {
  Eigen::JacobiSVD<MatrixXd> svd(M);
  const VectorXd& sv = svd.singularValues();
  return sv(0) / sv(sv.size() - 1);
}

int oscillation_count(const VectorXd& v, double floor) {
  int count = 0, last = 0;
  for (Eigen::Index i = 0; i + 1 < v.size(); ++i) {
    const double d = v(i + 1) - v(i);
    if (std::abs(d) <= floor) continue;
    const int s = d > 0.0 ? 1 : -1;
    if (last != 0 && s != last) ++count;
    last = s;
  }
  return count;
}

NormalEquationsDemo normal_equations_demo(int nelem, double v, double D, double f) {
  const Galerkin1D g = galerkin_1d_system(nelem, v, D, 0.0, f);
  NormalEquationsDemo d;
  d.peclet = std::abs(v) * g.h / (2.0 * D);
  const MatrixXd KtK = g.K.transpose() * g.K;
  d.cond_K = condition_number(g.K);
  d.cond_KtK = condition_number(KtK);
  // Boundary zeros bracket the interior values for the oscillation count.
  auto with_ends = [](const VectorXd& c) {
    VectorXd full = VectorXd::Zero(c.size() + 2);
    full.segment(1, c.size()) = c;
    return full;
  };
  d.galerkin = g.K.partialPivLu().solve(g.f);
  d.normal = KtK.llt().solve(g.K.transpose() * g.f);
  QPProblem qp;
  qp.H = KtK.sparseView();
  qp.g = -(g.K.transpose() * g.f);
  qp.lower = VectorXd::Zero(g.f.size());
  const QPSolution sol = solve_qp(qp);
  d.normal_nn = sol.x;
  d.nn_status = sol.status;
  d.osc_galerkin = oscillation_count(with_ends(d.galerkin));
  d.osc_normal = oscillation_count(with_ends(d.normal));
  d.osc_normal_nn = oscillation_count(with_ends(d.normal_nn));
  return d;
}

double zmatrix_threshold_1d(double v, double D, double alpha) {
  if (!(D > 0.0)) throw InvalidArgument("diffusivity must be positive");
  if (alpha < 0.0) throw InvalidArgument("alpha must be nonnegative");
  const double den = 3.0 * std::abs(v) + std::sqrt(9.0 * v * v + 24.0 * alpha * D);
  return den > 0.0 ? 12.0 * D / den : kInf;
}

MatrixClass classify_matrix(const MatrixXd& M, double tol) {
  if (M.rows() != M.cols()) throw InvalidArgument("matrix must be square");
  MatrixClass c;
  c.is_Z = true;
  for (Eigen::Index i = 0; i < M.rows() && c.is_Z; ++i)
    for (Eigen::Index j = 0; j < M.cols(); ++j)
      if (i != j && M(i, j) > tol) {
        c.is_Z = false;
        break;
      }
  const MatrixXd S = 0.5 * (M + M.transpose());
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(S, Eigen::EigenvaluesOnly);
  c.is_P = M.rows() == 0 || es.eigenvalues().minCoeff() > 0.0;
  c.is_M = c.is_Z && c.is_P;
  return c;
}

MeshMetrics mesh_metrics(const StructuredMesh& mesh, const ProblemSpec& p) {
  // Nodes are included so extrema on the boundary are not missed.
  std::vector<Vec2> pts = quadrature_points(mesh, RuleLevel::Standard);
  pts.insert(pts.end(), mesh.nodes.begin(), mesh.nodes.end());
  const EigenBounds eb = diffusivity_bounds(*p.diffusivity, pts, mesh.dim);
  if (!(eb.lambda_min > 0.0)) throw EllipticityError("diffusivity is not positive definite");
  double vmax = 0.0, amax = 0.0;
  for (const Vec2& x : pts) {
    Vec2 v = p.velocity->value(x, p.time);
    if (mesh.dim == 1) v(1) = 0.0;
    vmax = std::max(vmax, v.norm());
    amax = std::max(amax, std::abs(p.alpha.value(x, p.time)));
  }
  MeshMetrics m;
  m.h = mesh.h;
  m.h_edge = mesh.max_edge_length();
  m.lambda_min = eb.lambda_min;
  m.lambda_max = eb.lambda_max;
  m.peclet = vmax * m.h / (2.0 * eb.lambda_min);
  m.peclet_edge = vmax * m.h_edge / (2.0 * eb.lambda_min);
  m.damkohler = amax * m.h * m.h / eb.lambda_min;
  return m;
}

MatrixClass classify_matrix(const SpMat& M, double tol) {
  if (M.rows() != M.cols()) throw InvalidArgument("matrix must be square");
  MatrixClass c;
  c.is_Z = true;
  for (int k = 0; k < M.outerSize() && c.is_Z; ++k)
    for (SpMat::InnerIterator it(M, k); it; ++it)
      if (it.row() != it.col() && it.value() > tol) {
        c.is_Z = false;
        break;
      }
  // Positive definiteness of the symmetric part from the LDL^T pivots (inertia).
  const SpMat S = 0.5 * (M + SpMat(M.transpose()));
  if (S.rows() == 0) {
    c.is_P = true;
  } else {
    Eigen::SimplicialLDLT<SpMat> ldlt(S);
    c.is_P = ldlt.info() == Eigen::Success && ldlt.vectorD().minCoeff() > 0.0;
  }
  c.is_M = c.is_Z && c.is_P;
  return c;
}

SpMat galerkin_stiffness(const StructuredMesh& mesh, const ProblemSpec& p) {
  const int d = mesh.dim;
  const int nn = mesh.num_nodes();
  const ReferenceElement ref(mesh.kind);
  const QuadratureRule rule = ref.rule(RuleLevel::Standard);
  const double t = p.time;
  std::vector<Eigen::Triplet<double>> trip;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto conn = element_nodes(mesh, e);
    const MatrixXd xhat = element_coordinates(mesh, e);
    MatrixXd Ke = MatrixXd::Zero(ref.nodes, ref.nodes);
    for (int g = 0; g < rule.size(); ++g) {
      const ElementContext ctx(ref, xhat, rule.points[g]);
      const double w = rule.weights[g] * ctx.detJ;
      const Vec2 x = ctx.x;
      const VectorXd v = p.velocity->value(x, t).head(d);
      const MatrixXd D = p.diffusivity->value(x).topLeftCorner(d, d);
      const double a = p.alpha.value(x, t) + p.velocity->divergence(x, t);
      Ke += w * (a * ctx.N.transpose() * ctx.N + ctx.N.transpose() * (ctx.B * v).transpose() +
                 ctx.B * D * ctx.B.transpose());
    }
    for (int i = 0; i < ref.nodes; ++i)
      for (int j = 0; j < ref.nodes; ++j) trip.emplace_back(conn[i], conn[j], Ke(i, j));
  }
  // -((1 - Sign[v.n]) / 2) (v.n) c on Neumann facets, nonzero on inflow only.
  const QuadratureRule er = ReferenceElement::edge_rule(RuleLevel::Standard);
  for (const BoundaryEdge& be : mesh.boundary) {
    if (be.tag == BoundaryTag::Dirichlet) continue;
    if (d == 1) {
      const double vn = p.velocity->value(be.midpoint, t).x() * be.normal.x();
      trip.emplace_back(be.nodes[0], be.nodes[0], -0.5 * (1.0 - sign(vn)) * vn);
      continue;
    }
    const Vec2 x0 = mesh.nodes[be.nodes[0]], x1 = mesh.nodes[be.nodes[1]];
    for (int g = 0; g < er.size(); ++g) {
      const double s = er.points[g].x();
      const Vec2 x = (1.0 - s) * x0 + s * x1;
      const double vn = p.velocity->value(x, t).dot(be.normal);
      const double c = -0.5 * (1.0 - sign(vn)) * vn * er.weights[g] * be.length;
      const double N[2] = {1.0 - s, s};
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) trip.emplace_back(be.nodes[i], be.nodes[j], c * N[i] * N[j]);
    }
  }
  SpMat K(nn, nn);
  K.setFromTriplets(trip.begin(), trip.end());

  std::vector<bool> fixed(nn, false);
  for (int n : dirichlet_nodes(mesh)) fixed[n] = true;
  std::vector<int> map(nn, -1);
  int nf = 0;
  for (int i = 0; i < nn; ++i)
    if (!fixed[i]) map[i] = nf++;
  std::vector<Eigen::Triplet<double>> red;
  for (int k = 0; k < K.outerSize(); ++k)
    for (SpMat::InnerIterator it(K, k); it; ++it)
      if (map[it.row()] >= 0 && map[it.col()] >= 0) red.emplace_back(map[it.row()], map[it.col()], it.value());
  SpMat Kr(nf, nf);
  Kr.setFromTriplets(red.begin(), red.end());
  return Kr;
}

CoarseMeshVerdict coarse_mesh_verdict(const StructuredMesh& mesh, const ProblemSpec& problem) {
  CoarseMeshVerdict v;
  v.metrics = mesh_metrics(mesh, problem);
  const SpMat K = galerkin_stiffness(mesh, problem);
  // Off-diagonal round-off of exactly cancelling terms is not a sign violation.
  const double scale = K.nonZeros() ? K.coeffs().cwiseAbs().maxCoeff() : 0.0;
  v.galerkin = classify_matrix(K, 1e-12 * scale);
  v.oscillations = v.metrics.peclet > 1.0;
  v.reaction = v.oscillations && v.metrics.damkohler > 1.0;
  v.maximum_principle = !v.galerkin.is_M;
  return v;
}

double gsb_direct(const Field& field, const ProblemSpec& p, RuleLevel level) {
  const StructuredMesh& mesh = *field.mesh;
  const int d = mesh.dim;
  const ReferenceElement ref(mesh.kind);
  const QuadratureRule rule = ref.rule(level);
  double s = 0.0;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const MatrixXd xhat = element_coordinates(mesh, e);
    for (int g = 0; g < rule.size(); ++g) {
      const ElementContext ctx(ref, xhat, rule.points[g]);
      double c = 0.0;
      for (int a = 0; a < ref.nodes; ++a) c += ctx.N(a) * field.c(mesh.elements[e][a]);
      s += rule.weights[g] * ctx.detJ * (p.alpha.value(ctx.x, p.time) * c - p.source.value(ctx.x, p.time));
    }
  }
  // q.n along each boundary facet, linear between its end nodes.
  const QuadratureRule er = ReferenceElement::edge_rule(level);
  for (const BoundaryEdge& be : mesh.boundary) {
    auto qn = [&](int node) {
      double v = 0.0;
      for (int j = 0; j < d; ++j) v += field.q(node * d + j) * be.normal(j);
      return v;
    };
    if (d == 1) {
      s += qn(be.nodes[0]);
      continue;
    }
    const double q0 = qn(be.nodes[0]), q1 = qn(be.nodes[1]);
    for (int g = 0; g < er.size(); ++g) {
      const double t = er.points[g].x();
      s += er.weights[g] * be.length * ((1.0 - t) * q0 + t * q1);
    }
  }
  return s;
}

std::string convergence_csv(const std::vector<double>& h, const std::vector<int>& dofs,
                            const std::vector<ErrorNorms>& errors) {
  auto column = [&](double ErrorNorms::*m) {
    std::vector<double> v;
    for (const auto& e : errors) v.push_back(e.*m);
    return convergence_rates(h, v);
  };
  const auto r1 = column(&ErrorNorms::l2_c), r2 = column(&ErrorNorms::h1_c);
  const auto r3 = column(&ErrorNorms::l2_q), r4 = column(&ErrorNorms::h1_q);
  std::ostringstream os;
  os << std::setprecision(10);
  os << "h,dofs,L2c,H1c,L2q,H1q,rate_L2c,rate_H1c,rate_L2q,rate_H1q\n";
  for (std::size_t i = 0; i < errors.size(); ++i) {
    const auto& e = errors[i];
    os << h[i] << ',' << dofs[i] << ',' << e.l2_c << ',' << e.h1_c << ',' << e.l2_q << ',' << e.h1_q;
    if (i == 0) {
      os << ",,,,\n";
      continue;
    }
    os << ',' << r1[i - 1] << ',' << r2[i - 1] << ',' << r3[i - 1] << ',' << r4[i - 1] << '\n';
  }
  return os.str();
}

}  // namespace lsfem
