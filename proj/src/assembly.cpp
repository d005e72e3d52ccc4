#include "lsfem/assembly.hpp"

#include <unsupported/Eigen/SparseExtra>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <thread>

namespace lsfem {

namespace {

// Coefficients at one physical point, sized to the mesh dimension.
struct PointData {
  VectorXd v;
  double divv = 0.0;
  MatrixXd D;
  VectorXd divD;
  double alpha = 0.0;
  VectorXd grad_alpha;
  double f = 0.0;
  VectorXd grad_f;
};

PointData evaluate_point(const ProblemSpec& p, const ElementContext& ctx, const VectorXd* nodal_src,
                         const std::vector<int>& conn) {
  const int d = ctx.dim;
  const Vec2 x = ctx.x;
  const double t = p.time;
  PointData pd;
  pd.v = p.velocity->value(x, t).head(d);
  pd.divv = p.velocity->divergence(x, t);
  if (d == 1) pd.divv = p.velocity->jacobian(x, t)(0, 0);
  pd.D = p.diffusivity->value(x).topLeftCorner(d, d);
  pd.divD = p.diffusivity->divergence(x).head(d);
  pd.alpha = p.alpha.value(x, t);
  pd.grad_alpha = p.alpha.gradient(x, t).head(d);
  pd.f = p.source.value(x, t);
  pd.grad_f = p.source.gradient(x, t).head(d);
  if (nodal_src && nodal_src->size() > 0) {
    VectorXd s(conn.size());
    for (std::size_t a = 0; a < conn.size(); ++a) s(a) = (*nodal_src)(conn[a]);
    pd.f += ctx.N.dot(s);
    pd.grad_f += grad_of_scalar_field(s, ctx);
  }
  return pd;
}

std::vector<int> connectivity(const StructuredMesh& mesh, int e) {
  std::vector<int> c(mesh.nodes_per_element());
  for (int a = 0; a < mesh.nodes_per_element(); ++a) c[a] = mesh.elements[e][a];
  return c;
}

// Reference point on local edge le at parameter t in [0, 1].
Vec2 edge_point(const ReferenceElement& ref, const std::array<int, 2>& le, double t) {
  const auto v = ref.vertices();
  return (1.0 - t) * v[le[0]] + t * v[le[1]];
}

struct EdgeGeometry {
  VectorXd normal;
  double length;
};

EdgeGeometry edge_geometry(const StructuredMesh& mesh, int e, int local) {
  const auto le = mesh.local_edges()[local];
  if (mesh.dim == 1) {
    VectorXd n(1);
    n(0) = local == 0 ? -1.0 : 1.0;
    return {n, 1.0};
  }
  const Vec2 a = mesh.nodes[mesh.elements[e][le[0]]];
  const Vec2 b = mesh.nodes[mesh.elements[e][le[1]]];
  const double len = (b - a).norm();
  VectorXd n(2);
  n << (b - a).y() / len, -(b - a).x() / len;
  return {n, len};
}

// Quadrature on one element edge: reference points and physical weights.
void edge_quadrature(const StructuredMesh& mesh, const ReferenceElement& ref, int e, int local, RuleLevel level,
                     std::vector<Vec2>& xi, std::vector<double>& w) {
  xi.clear();
  w.clear();
  const auto le = mesh.local_edges()[local];
  if (mesh.dim == 1) {
    xi.push_back(ref.vertices()[le[0]]);
    w.push_back(1.0);
    return;
  }
  const double len = edge_geometry(mesh, e, local).length;
  const QuadratureRule r = ReferenceElement::edge_rule(level);
  for (int k = 0; k < r.size(); ++k) {
    xi.push_back(edge_point(ref, le, r.points[k].x()));
    w.push_back(r.weights[k] * len);
  }
}

Eigen::RowVectorXd operator_row(const ElementContext& ctx, const PointData& pd, bool second) {
  // div(c v - D grad c) as a row over element nodes.
  Eigen::RowVectorXd L = pd.divv * ctx.N + (pd.v - pd.divD).transpose() * ctx.B.transpose();
  if (second) {
    const MatrixXd H = hessian_rows(ctx);
    const VectorXd vecD = tensor::vec(pd.D);
    L -= vecD.transpose() * H;
  }
  return L;
}

struct ElementOutput {
  std::vector<Triplet> K;
  std::vector<std::pair<int, double>> r;
  double energy0 = 0.0;
};

// Residual-operator assembly. Each residual at a point has the form
// R u - g; the element contributes w s R^T R to K and w s R^T g to r.
class ResidualAssembler {
 public:
  ResidualAssembler(const StructuredMesh& mesh, const ProblemSpec& problem, const StabilizationParams& stab,
                    const AssemblyOptions& opt)
      : mesh_(mesh), p_(problem), stab_(stab), opt_(opt), ref_(mesh.kind) {
    facets_.resize(mesh.num_elements());
    for (std::size_t k = 0; k < mesh.boundary.size(); ++k) {
      const auto& be = mesh.boundary[k];
      if (be.tag == BoundaryTag::Dirichlet) continue;
      if (p_.flux_wall_region && p_.flux_wall_region(be)) continue;
      facets_[be.element].push_back(static_cast<int>(k));
    }
  }

  // With x set, only accumulates sum w s |R u - g|^2 into out.energy0.
  void element(int e, ElementOutput& out, const VectorXd* x = nullptr) const {
    const int d = mesh_.dim;
    const int n = mesh_.nodes_per_element();
    const int ndof = n + d * n;
    const auto conn = connectivity(mesh_, e);
    const MatrixXd xhat = element_coordinates(mesh_, e);
    const double delta = stab_.delta[e];
    const double tau = stab_.tau[e];
    const VectorXd* src = opt_.nodal_source.size() > 0 ? &opt_.nodal_source : nullptr;

    std::vector<int> gdof(ndof);
    for (int a = 0; a < n; ++a) {
      gdof[a] = conn[a];
      for (int i = 0; i < d; ++i) gdof[n + a * d + i] = mesh_.num_nodes() + conn[a] * d + i;
    }
    VectorXd ue;
    if (x) {
      ue.resize(ndof);
      for (int i = 0; i < ndof; ++i) ue(i) = (*x)(gdof[i]);
    }

    MatrixXd Ke = MatrixXd::Zero(ndof, ndof);
    VectorXd re = VectorXd::Zero(ndof);
    double en = 0.0;

    auto add = [&](const MatrixXd& R, const VectorXd& g, double s) {
      if (x) {
        en += s * (R * ue - g).squaredNorm();
        return;
      }
      Ke.noalias() += s * R.transpose() * R;
      re.noalias() += s * R.transpose() * g;
      en += s * g.squaredNorm();
    };

    const QuadratureRule rule = ref_.rule(opt_.level);
    for (int g = 0; g < rule.size(); ++g) {
      const ElementContext ctx(ref_, xhat, rule.points[g]);
      const double w = rule.weights[g] * ctx.detJ;
      const PointData pd = evaluate_point(p_, ctx, src, conn);
      const Eigen::RowVectorXd L = operator_row(ctx, pd, opt_.second_derivatives);
      const Weights wt = evaluate_weights(p_.weights, pd.D.size() == 1 ? Mat2(pd.D(0, 0) * Mat2::Identity())
                                                                          : Mat2(pd.D), pd.alpha, d);
      const MatrixXd A = wt.A.topLeftCorner(d, d);

      // Flux residual q - c v + D grad c - delta v div(c v - D grad c).
      MatrixXd R1 = MatrixXd::Zero(d, ndof);
      R1.leftCols(n) = -pd.v * ctx.N + pd.D * ctx.B.transpose() - delta * pd.v * L;
      for (int a = 0; a < n; ++a)
        for (int i = 0; i < d; ++i) R1(i, n + a * d + i) = ctx.N(a);
      add(A * R1, VectorXd::Zero(d), w);

      // Balance residual alpha c + div q - f - f_delta.
      MatrixXd R2 = MatrixXd::Zero(1, ndof);
      R2.leftCols(n) = pd.alpha * ctx.N +
                       delta * ((pd.grad_alpha.dot(pd.v) + pd.alpha * pd.divv) * ctx.N +
                                pd.alpha * pd.v.transpose() * ctx.B.transpose());
      for (int a = 0; a < n; ++a)
        for (int j = 0; j < d; ++j) R2(0, n + a * d + j) = ctx.B(a, j);
      VectorXd g2(1);
      g2(0) = pd.f + delta * (pd.grad_f.dot(pd.v) + pd.f * pd.divv);
      add(R2, g2, w * wt.beta * wt.beta);

      // Negative Galerkin least-squares term.
      if (tau != 0.0) {
        MatrixXd R4 = MatrixXd::Zero(1, ndof);
        R4.leftCols(n) = L + pd.alpha * ctx.N;
        VectorXd g4(1);
        g4(0) = pd.f;
        add(R4, g4, w * tau);
      }
    }

    std::vector<Vec2> exi;
    std::vector<double> ew;
    for (int k : facets_[e]) {
      const auto& be = mesh_.boundary[k];
      const EdgeGeometry geo = edge_geometry(mesh_, e, be.local);
      edge_quadrature(mesh_, ref_, e, be.local, opt_.level, exi, ew);
      for (std::size_t g = 0; g < exi.size(); ++g) {
        ElementContext ctx(ref_, xhat, exi[g]);
        const PointData pd = evaluate_point(p_, ctx, src, conn);
        const double vn = pd.v.dot(geo.normal);
        const double splus = 0.5 * (1.0 + sign(vn));
        MatrixXd R3 = MatrixXd::Zero(1, ndof);
        R3.leftCols(n) = (-splus * vn + delta * pd.alpha * vn) * ctx.N;
        for (int a = 0; a < n; ++a)
          for (int j = 0; j < d; ++j) R3(0, n + a * d + j) = geo.normal(j) * ctx.N(a);
        VectorXd g3(1);
        g3(0) = p_.neumann_value(ctx.x, p_.time) + delta * pd.f * vn;
        add(R3, g3, ew[g]);
      }
    }

    out.energy0 += en;
    if (x) return;
    for (int i = 0; i < ndof; ++i) {
      for (int j = 0; j < ndof; ++j)
        if (Ke(i, j) != 0.0) out.K.emplace_back(gdof[i], gdof[j], Ke(i, j));
      out.r.emplace_back(gdof[i], re(i));
    }
  }

 private:
  const StructuredMesh& mesh_;
  const ProblemSpec& p_;
  const StabilizationParams& stab_;
  const AssemblyOptions& opt_;
  ReferenceElement ref_;
  std::vector<std::vector<int>> facets_;
};

// Runs fn(e, out) over contiguous element chunks and concatenates the
// outputs in element order, so the result does not depend on the thread count.
template <class Fn>
std::vector<ElementOutput> chunked(int num_elements, int threads, Fn fn) {
  threads = std::max(1, std::min(threads, num_elements));
  std::vector<ElementOutput> parts(threads);
  auto work = [&](int t) {
    const int lo = static_cast<int>(static_cast<long long>(num_elements) * t / threads);
    const int hi = static_cast<int>(static_cast<long long>(num_elements) * (t + 1) / threads);
    for (int e = lo; e < hi; ++e) fn(e, parts[t]);
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(work, t);
    for (auto& th : pool) th.join();
  }
  return parts;
}

GlobalSystem build(const StructuredMesh& mesh, const ProblemSpec& problem, const StabilizationParams& stab,
                   const AssemblyOptions& opt) {
  if (mesh.dim != problem.dim) throw InvalidArgument("mesh and problem dimensions differ");
  if (static_cast<int>(stab.delta.size()) != mesh.num_elements() ||
      static_cast<int>(stab.tau.size()) != mesh.num_elements())
    throw InvalidArgument("stabilization parameters do not match the mesh");
  if (opt.nodal_source.size() != 0 && opt.nodal_source.size() != mesh.num_nodes())
    throw InvalidArgument("nodal source size does not match the mesh");

  ResidualAssembler ra(mesh, problem, stab, opt);
  auto parts = chunked(mesh.num_elements(), opt.threads, [&](int e, ElementOutput& out) { ra.element(e, out); });

  GlobalSystem s;
  s.nnodes = mesh.num_nodes();
  s.dim = mesh.dim;
  const int N = s.size();
  std::vector<Triplet> trip;
  s.r = VectorXd::Zero(N);
  for (auto& p : parts) {
    trip.insert(trip.end(), p.K.begin(), p.K.end());
    for (const auto& [i, v] : p.r) s.r(i) += v;
    s.energy0 += p.energy0;
  }
  s.K.resize(N, N);
  s.K.setFromTriplets(trip.begin(), trip.end());
  // Exact symmetry: element matrices are symmetric up to rounding in R^T R.
  SpMat Kt = s.K.transpose();
  s.K = 0.5 * (s.K + Kt);
  s.K.prune(0.0);
  assemble_lsb_constraints(mesh, problem, s.A, s.b, opt);
  s.lower = VectorXd::Constant(s.nnodes, -kInf);
  s.upper = VectorXd::Constant(s.nnodes, kInf);
  return s;
}

}  // namespace

StabilizationParams StabilizationParams::zero(int num_elements) {
  StabilizationParams p;
  p.delta.assign(num_elements, 0.0);
  p.tau.assign(num_elements, 0.0);
  return p;
}

std::vector<Vec2> quadrature_points(const StructuredMesh& mesh, RuleLevel level) {
  const ReferenceElement ref(mesh.kind);
  const QuadratureRule rule = ref.rule(level);
  std::vector<Vec2> pts;
  pts.reserve(static_cast<std::size_t>(mesh.num_elements()) * rule.size());
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const MatrixXd xhat = element_coordinates(mesh, e);
    for (int g = 0; g < rule.size(); ++g) pts.push_back(ElementContext(ref, xhat, rule.points[g]).x);
  }
  return pts;
}

StabilizationParams compute_stabilization(const StructuredMesh& mesh, const ProblemSpec& problem,
                                          const StabilizationConstants& c, RuleLevel level) {
  const auto pts = quadrature_points(mesh, level);
  const EigenBounds eb = diffusivity_bounds(*problem.diffusivity, pts, mesh.dim);
  if (!(eb.lambda_min > 0.0)) throw EllipticityError("diffusivity is not uniformly elliptic");
  StabilizationParams s;
  s.constants = c;
  s.lambda_min = eb.lambda_min;
  s.lambda_max = eb.lambda_max;
  for (const auto& x : pts) {
    const double ad = problem.alpha.value(x, problem.time) + problem.velocity->divergence(x, problem.time);
    s.max_alpha_divv_sq = std::max(s.max_alpha_divv_sq, ad * ad);
    const Vec2 dD = problem.diffusivity->divergence(x);
    const double n2 = mesh.dim == 1 ? dD(0) * dD(0) : dD.squaredNorm();
    s.max_divD_sq = std::max(s.max_divD_sq, n2);
  }
  const double h2 = mesh.h * mesh.h;
  const double lmax2 = s.lambda_max * s.lambda_max;
  const double den_d = lmax2 + c.delta1 * s.max_alpha_divv_sq * h2 + c.delta2 * s.max_divD_sq * h2;
  const double den_t = lmax2 + c.tau1 * s.max_alpha_divv_sq * h2 + c.tau2 * s.max_divD_sq * h2;
  s.delta.resize(mesh.num_elements());
  s.tau.resize(mesh.num_elements());
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const double he2 = mesh.h_e[e] * mesh.h_e[e];
    s.delta[e] = -c.delta0 * s.lambda_min * he2 / den_d;
    s.tau[e] = -c.tau0 * s.lambda_min * s.lambda_min * he2 / den_t;
  }
  return s;
}

SpMat GlobalSystem::K_cc() const { return K.topLeftCorner(nc(), nc()); }
SpMat GlobalSystem::K_cq() const { return K.topRightCorner(nc(), nq()); }
SpMat GlobalSystem::K_qq() const { return K.bottomRightCorner(nq(), nq()); }
SpMat GlobalSystem::A_c() const { return A.leftCols(nc()); }
SpMat GlobalSystem::A_q() const { return A.rightCols(nq()); }

double GlobalSystem::functional(const VectorXd& x) const {
  return 0.5 * x.dot(K * x) - r.dot(x) + 0.5 * energy0;
}

GlobalSystem assemble_primitive(const StructuredMesh& mesh, const ProblemSpec& problem,
                                const AssemblyOptions& options) {
  return build(mesh, problem, StabilizationParams::zero(mesh.num_elements()), options);
}

GlobalSystem assemble_nssd(const StructuredMesh& mesh, const ProblemSpec& problem, const StabilizationParams& stab,
                           AssemblyOptions options) {
  return build(mesh, problem, stab, options);
}

double evaluate_functional(const StructuredMesh& mesh, const ProblemSpec& problem, const StabilizationParams& stab,
                           const VectorXd& x, const AssemblyOptions& opt) {
  if (x.size() != static_cast<Eigen::Index>(mesh.num_nodes()) * (1 + mesh.dim))
    throw InvalidArgument("state vector size does not match the mesh");
  ResidualAssembler ra(mesh, problem, stab, opt);
  auto parts = chunked(mesh.num_elements(), opt.threads, [&](int e, ElementOutput& out) { ra.element(e, out, &x); });
  double s = 0.0;
  for (const auto& p : parts) s += p.energy0;
  return 0.5 * s;
}

void assemble_lsb_constraints(const StructuredMesh& mesh, const ProblemSpec& problem, SpMat& A, VectorXd& b,
                              const AssemblyOptions& opt) {
  const int d = mesh.dim;
  const int n = mesh.nodes_per_element();
  const int nn = mesh.num_nodes();
  const ReferenceElement ref(mesh.kind);
  const QuadratureRule rule = ref.rule(opt.level);
  const int nedges = static_cast<int>(mesh.local_edges().size());
  const VectorXd* src = opt.nodal_source.size() > 0 ? &opt.nodal_source : nullptr;

  std::vector<Triplet> trip;
  b = VectorXd::Zero(mesh.num_elements());
  std::vector<Vec2> exi;
  std::vector<double> ew;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto conn = connectivity(mesh, e);
    const MatrixXd xhat = element_coordinates(mesh, e);
    VectorXd rc = VectorXd::Zero(n);
    VectorXd rq = VectorXd::Zero(n * d);
    for (int g = 0; g < rule.size(); ++g) {
      const ElementContext ctx(ref, xhat, rule.points[g]);
      const double w = rule.weights[g] * ctx.detJ;
      const PointData pd = evaluate_point(problem, ctx, src, conn);
      rc += w * pd.alpha * ctx.N.transpose();
      b(e) += w * pd.f;
    }
    for (int k = 0; k < nedges; ++k) {
      const EdgeGeometry geo = edge_geometry(mesh, e, k);
      edge_quadrature(mesh, ref, e, k, opt.level, exi, ew);
      for (std::size_t g = 0; g < exi.size(); ++g) {
        const Eigen::RowVectorXd N = ref.N(exi[g]);
        for (int a = 0; a < n; ++a)
          for (int j = 0; j < d; ++j) rq(a * d + j) += ew[g] * geo.normal(j) * N(a);
      }
    }
    for (int a = 0; a < n; ++a) {
      if (rc(a) != 0.0) trip.emplace_back(e, conn[a], rc(a));
      for (int j = 0; j < d; ++j)
        if (rq(a * d + j) != 0.0) trip.emplace_back(e, nn + conn[a] * d + j, rq(a * d + j));
    }
  }
  A.resize(mesh.num_elements(), nn + nn * d);
  A.setFromTriplets(trip.begin(), trip.end());
}

FixedDofs collect_fixed_dofs(const StructuredMesh& mesh, const ProblemSpec& problem) {
  std::map<int, double> fixed;
  const int nn = mesh.num_nodes();
  const int d = mesh.dim;
  for (const auto& be : mesh.boundary) {
    if (be.tag == BoundaryTag::Dirichlet) {
      for (int node : be.nodes) fixed[node] = problem.dirichlet_value(mesh.nodes[node], problem.time);
      continue;
    }
    if (!(problem.flux_wall_region && problem.flux_wall_region(be))) continue;
    // Axis-aligned wall: q.n = q^p fixes the normal component.
    int comp = 0;
    if (d == 2 && std::abs(be.normal.y()) > std::abs(be.normal.x())) comp = 1;
    const double nsign = be.normal(comp) > 0 ? 1.0 : -1.0;
    for (int node : be.nodes) {
      const double qp = problem.neumann_value(mesh.nodes[node], problem.time);
      fixed[nn + node * d + comp] = nsign * qp;
    }
  }
  FixedDofs f;
  for (const auto& [i, v] : fixed) {
    f.index.push_back(i);
    f.value.push_back(v);
  }
  return f;
}

ReducedSystem apply_dirichlet(const GlobalSystem& s, const FixedDofs& fixed) {
  const int N = s.size();
  ReducedSystem red;
  red.fixed_full = VectorXd::Zero(N);
  std::vector<char> is_fixed(N, 0);
  for (std::size_t k = 0; k < fixed.index.size(); ++k) {
    is_fixed[fixed.index[k]] = 1;
    red.fixed_full(fixed.index[k]) = fixed.value[k];
  }
  std::vector<int> map(N, -1);
  for (int i = 0; i < N; ++i)
    if (!is_fixed[i]) {
      map[i] = static_cast<int>(red.free.size());
      red.free.push_back(i);
      if (i < s.nc()) ++red.num_free_c;
    }
  const int nf = static_cast<int>(red.free.size());

  // Shift loads: r_f - K_fd x_d; b - A_d x_d.
  const VectorXd Kx = s.K * red.fixed_full;
  const VectorXd Ax = s.A * red.fixed_full;
  red.energy0 = s.energy0 - 2.0 * s.r.dot(red.fixed_full) + red.fixed_full.dot(Kx);
  red.r.resize(nf);
  for (int k = 0; k < nf; ++k) red.r(k) = s.r(red.free[k]) - Kx(red.free[k]);
  red.b = s.b - Ax;

  std::vector<Triplet> tk, ta;
  for (int col = 0; col < s.K.outerSize(); ++col)
    for (SpMat::InnerIterator it(s.K, col); it; ++it)
      if (map[it.row()] >= 0 && map[it.col()] >= 0) tk.emplace_back(map[it.row()], map[it.col()], it.value());
  for (int col = 0; col < s.A.outerSize(); ++col)
    for (SpMat::InnerIterator it(s.A, col); it; ++it)
      if (map[it.col()] >= 0) ta.emplace_back(it.row(), map[it.col()], it.value());
  red.K.resize(nf, nf);
  red.K.setFromTriplets(tk.begin(), tk.end());
  red.A.resize(s.A.rows(), nf);
  red.A.setFromTriplets(ta.begin(), ta.end());

  red.lower = VectorXd::Constant(nf, -kInf);
  red.upper = VectorXd::Constant(nf, kInf);
  for (int k = 0; k < red.num_free_c; ++k) {
    red.lower(k) = s.lower(red.free[k]);
    red.upper(k) = s.upper(red.free[k]);
  }
  return red;
}

VectorXd ReducedSystem::expand(const VectorXd& y) const {
  VectorXd x = fixed_full;
  for (std::size_t k = 0; k < free.size(); ++k) x(free[k]) = y(static_cast<Eigen::Index>(k));
  return x;
}

VectorXd ReducedSystem::restrict_(const VectorXd& x) const {
  VectorXd y(free.size());
  for (std::size_t k = 0; k < free.size(); ++k) y(static_cast<Eigen::Index>(k)) = x(free[k]);
  return y;
}

void dump_matrix_market(const GlobalSystem& s, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path p(dir);
  Eigen::saveMarket(s.K, (p / "K.mtx").string(), Eigen::Symmetric);
  Eigen::saveMarket(s.A, (p / "A.mtx").string());
  Eigen::saveMarketVector(s.r, (p / "r.mtx").string());
  Eigen::saveMarketVector(s.b, (p / "b.mtx").string());
}

}  // namespace lsfem
