#include "lsfem/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lsfem {

const char* to_string(Formulation f) { return f == Formulation::Primitive ? "primitive" : "nssd"; }

const char* to_string(ConstraintMode c) {
  switch (c) {
    case ConstraintMode::None: return "none";
    case ConstraintMode::NN: return "nn";
    case ConstraintMode::DMP: return "dmp";
    case ConstraintMode::LSB: return "lsb";
    case ConstraintMode::LSB_NN: return "lsb+nn";
    case ConstraintMode::LSB_DMP: return "lsb+dmp";
  }
  return "?";
}

Formulation parse_formulation(const std::string& s) {
  if (s == "primitive") return Formulation::Primitive;
  if (s == "nssd") return Formulation::NSSD;
  throw ConfigError("unknown formulation '" + s + "' (expected primitive or nssd)");
}

ConstraintMode parse_constraints(const std::string& s) {
  for (ConstraintMode c : {ConstraintMode::None, ConstraintMode::NN, ConstraintMode::DMP, ConstraintMode::LSB,
                           ConstraintMode::LSB_NN, ConstraintMode::LSB_DMP})
    if (s == to_string(c)) return c;
  throw ConfigError("unknown constraint mode '" + s + "' (expected none, nn, dmp, lsb, lsb+nn or lsb+dmp)");
}

bool has_lsb(ConstraintMode c) {
  return c == ConstraintMode::LSB || c == ConstraintMode::LSB_NN || c == ConstraintMode::LSB_DMP;
}

bool has_bounds(ConstraintMode c) { return c != ConstraintMode::None && c != ConstraintMode::LSB; }

VectorXd Field::packed() const {
  VectorXd x(c.size() + q.size());
  x << c, q;
  return x;
}

double Field::value(int e, const Vec2& xi) const {
  const ReferenceElement ref(mesh->kind);
  const Eigen::RowVectorXd N = ref.N(xi);
  double s = 0.0;
  for (int a = 0; a < ref.nodes; ++a) s += N(a) * c(mesh->elements[e][a]);
  return s;
}

double Field::integral(RuleLevel level) const {
  const ReferenceElement ref(mesh->kind);
  const QuadratureRule rule = ref.rule(level);
  double s = 0.0;
  for (int e = 0; e < mesh->num_elements(); ++e) {
    const MatrixXd xhat = element_coordinates(*mesh, e);
    for (int g = 0; g < rule.size(); ++g) {
      const ElementContext ctx(ref, xhat, rule.points[g]);
      s += rule.weights[g] * ctx.detJ * value(e, rule.points[g]);
    }
  }
  return s;
}

Field make_field(const StructuredMesh& mesh, const VectorXd& x, double time) {
  Field f;
  f.mesh = &mesh;
  f.c = x.head(mesh.num_nodes());
  f.q = x.tail(static_cast<Eigen::Index>(mesh.num_nodes()) * mesh.dim);
  f.time = time;
  return f;
}

Field interpolate(const StructuredMesh& mesh, const std::function<double(const Vec2&)>& c,
                  const std::function<Vec2(const Vec2&)>& q, double time) {
  Field f;
  f.mesh = &mesh;
  f.time = time;
  f.c.resize(mesh.num_nodes());
  f.q = VectorXd::Zero(static_cast<Eigen::Index>(mesh.num_nodes()) * mesh.dim);
  for (int i = 0; i < mesh.num_nodes(); ++i) {
    f.c(i) = c(mesh.nodes[i]);
    if (q) {
      const Vec2 v = q(mesh.nodes[i]);
      for (int j = 0; j < mesh.dim; ++j) f.q(i * mesh.dim + j) = v(j);
    }
  }
  return f;
}

RuleLevel effective_level(const SolveOptions& o) {
  if (o.level) return *o.level;
  return o.formulation == Formulation::Primitive ? RuleLevel::Standard : RuleLevel::Enriched;
}

std::pair<double, double> constraint_bounds(const StructuredMesh& mesh, const ProblemSpec& problem,
                                            const SolveOptions& o) {
  switch (o.constraints) {
    case ConstraintMode::None:
    case ConstraintMode::LSB: return {-kInf, kInf};
    case ConstraintMode::NN:
    case ConstraintMode::LSB_NN: return {0.0, kInf};
    default: break;
  }
  double lo = 0.0, hi = -kInf;
  for (int node : dirichlet_nodes(mesh)) {
    const double v = problem.dirichlet_value(mesh.nodes[node], problem.time);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (o.data_min) lo = std::min(lo, *o.data_min);
  if (o.data_max) hi = std::max(hi, *o.data_max);
  if (hi == -kInf) hi = kInf;
  if (problem.c_min) lo = *problem.c_min;
  if (problem.c_max) hi = *problem.c_max;
  if (o.c_min) lo = *o.c_min;
  if (o.c_max) hi = *o.c_max;
  return {lo, hi};
}

BalanceReport lsb_errors(const Field& field, const ProblemSpec& problem, const AssemblyOptions& options) {
  SpMat A;
  VectorXd b;
  assemble_lsb_constraints(*field.mesh, problem, A, b, options);
  BalanceReport r;
  r.lsb = A * field.packed() - b;
  r.gsb = r.lsb.sum();
  r.max_abs_lsb = r.lsb.size() ? r.lsb.cwiseAbs().maxCoeff() : 0.0;
  r.abs_gsb = std::abs(r.gsb);
  return r;
}

PreparedSystem prepare_system(const StructuredMesh& mesh, const ProblemSpec& problem, const SolveOptions& o,
                              const VectorXd& nodal_source) {
  PreparedSystem ps;
  ps.assembly.level = effective_level(o);
  ps.assembly.second_derivatives = o.second_derivatives;
  ps.assembly.threads = o.threads;
  ps.assembly.nodal_source = nodal_source;
  if (o.formulation == Formulation::NSSD) {
    ps.stab = compute_stabilization(mesh, problem, o.stabilization, ps.assembly.level);
    ps.global = assemble_nssd(mesh, problem, ps.stab, ps.assembly);
  } else {
    ps.stab = StabilizationParams::zero(mesh.num_elements());
    ps.global = assemble_primitive(mesh, problem, ps.assembly);
  }
  const auto [lo, hi] = constraint_bounds(mesh, problem, o);
  ps.global.lower.setConstant(lo);
  ps.global.upper.setConstant(hi);
  ps.reduced = apply_dirichlet(ps.global, collect_fixed_dofs(mesh, problem));
  return ps;
}

SteadyResult solve_steady(const StructuredMesh& mesh, const ProblemSpec& problem, const SolveOptions& o,
                          const VectorXd& nodal_source) {
  SteadyResult res;
  res.assumptions = check_assumptions(problem, quadrature_points(mesh, RuleLevel::Standard));
  PreparedSystem ps = prepare_system(mesh, problem, o, nodal_source);
  res.stab = ps.stab;
  std::tie(res.lower, res.upper) = constraint_bounds(mesh, problem, o);

  const ReducedSystem& red = ps.reduced;
  // Dirichlet data outside the bounds makes the problem infeasible.
  if (has_bounds(o.constraints)) {
    for (int node : dirichlet_nodes(mesh)) {
      const double v = red.fixed_full(node);
      if (v < res.lower - 1e-12 || v > res.upper + 1e-12) {
        std::ostringstream os;
        os << "Dirichlet value " << v << " at node " << node << " violates bounds [" << res.lower << ", "
           << res.upper << "]";
        throw InfeasibleError(os.str());
      }
    }
  }

  QPProblem qp;
  qp.H = red.K;
  qp.g = -red.r;
  if (has_lsb(o.constraints)) {
    qp.A = red.A;
    qp.b = red.b;
  }
  qp.lower = red.lower;
  qp.upper = red.upper;
  res.qp = solve_qp(qp, o.qp);
  if (res.qp.status == QPStatus::Infeasible) {
    std::ostringstream os;
    os << "QP infeasible: " << res.qp.message;
    if (qp.A.rows() > 0) {
      const VectorXd rr = qp.A * res.qp.x - qp.b;
      std::vector<int> idx(rr.size());
      for (int i = 0; i < static_cast<int>(idx.size()); ++i) idx[i] = i;
      std::sort(idx.begin(), idx.end(), [&](int a, int b) { return std::abs(rr(a)) > std::abs(rr(b)); });
      os << "; largest row residuals:";
      for (int k = 0; k < std::min<int>(5, static_cast<int>(idx.size())); ++k)
        os << " row " << idx[k] << " (" << rr(idx[k]) << ")";
    }
    throw InfeasibleError(os.str());
  }
  const VectorXd x = red.expand(res.qp.x);
  res.field = make_field(mesh, x, problem.time);
  res.objective = evaluate_functional(mesh, problem, ps.stab, x, ps.assembly);
  res.balance = lsb_errors(res.field, problem, ps.assembly);
  return res;
}

TransientResult solve_transient(const StructuredMesh& mesh, const ProblemSpec& problem, const SolveOptions& o,
                                const TransientConfig& cfg) {
  if (!(cfg.dt > 0.0)) throw InvalidArgument("time step must be positive");
  if (!cfg.initial) throw InvalidArgument("initial condition missing");
  TransientResult out;
  Field prev = interpolate(mesh, cfg.initial, {}, problem.time);
  out.fields.push_back(prev);

  SolveOptions so = o;
  const double cmin0 = prev.c.minCoeff(), cmax0 = prev.c.maxCoeff();
  so.data_min = so.data_min ? std::min(*so.data_min, cmin0) : cmin0;
  so.data_max = so.data_max ? std::max(*so.data_max, cmax0) : cmax0;

  const int steps = static_cast<int>(std::llround((cfg.t_final - problem.time) / cfg.dt));
  const double inv_dt = 1.0 / cfg.dt;
  for (int k = 1; k <= steps; ++k) {
    ProblemSpec p = problem;
    p.time = problem.time + k * cfg.dt;
    const ScalarField a0 = problem.alpha;
    p.alpha = ScalarField{[a0, inv_dt](const Vec2& x, double t) { return a0.value(x, t) + inv_dt; }, a0.gradient};
    const VectorXd src = prev.c * inv_dt;
    SteadyResult r = solve_steady(mesh, p, so, src);
    out.certificates.push_back(r.qp.kkt);
    out.status.push_back(r.qp.status);
    prev = r.field;
    out.fields.push_back(prev);
    if (cfg.on_step && !cfg.on_step(k, r)) break;
  }
  return out;
}

}  // namespace lsfem
