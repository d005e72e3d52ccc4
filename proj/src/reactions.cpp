#include "lsfem/reactions.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <iomanip>
#include <sstream>

namespace lsfem {

namespace {

using PointFn = std::function<double(const Vec2&, double)>;

PointFn combine(const PointFn& a, const PointFn& c, double k) {
  return [a, c, k](const Vec2& x, double t) { return a(x, t) + k * c(x, t); };
}

ScalarField combine(const ScalarField& a, const ScalarField& c, double k) {
  ScalarField s;
  s.value = combine(a.value, c.value, k);
  auto ga = a.gradient, gc = c.gradient;
  s.gradient = [ga, gc, k](const Vec2& x, double t) -> Vec2 { return ga(x, t) + k * gc(x, t); };
  return s;
}

InitialFn combine(const InitialFn& a, const InitialFn& c, double k) {
  if (!a && !c) return {};
  auto za = a ? a : InitialFn([](const Vec2&) { return 0.0; });
  auto zc = c ? c : InitialFn([](const Vec2&) { return 0.0; });
  return [za, zc, k](const Vec2& x) { return za(x) + k * zc(x); };
}

ProblemSpec invariant(const ProblemSpec& s, const ProblemSpec& c, double k) {
  ProblemSpec p = s;
  p.source = combine(s.source, c.source, k);
  p.dirichlet_value = combine(s.dirichlet_value, c.dirichlet_value, k);
  p.neumann_value = combine(s.neumann_value, c.neumann_value, k);
  p.c_min.reset();
  p.c_max.reset();
  return p;
}

// (1 - exp(v x / D)) / (1 - exp(v / D)) without overflow.
double exp_ratio(double v, double D, double x) {
  if (v == 0.0) return x;
  const double a = v / D;
  if (a > 0.0) return (std::exp(a * (x - 1.0)) - std::exp(-a)) / (1.0 - std::exp(-a));
  return std::expm1(a * x) / std::expm1(a);
}

double integrate(const StructuredMesh& mesh, const VectorXd& c, RuleLevel level) {
  Field f;
  f.mesh = &mesh;
  f.c = c;
  return f.integral(level);
}

double domain_measure(const StructuredMesh& mesh) {
  double s = 0.0;
  for (int e = 0; e < mesh.num_elements(); ++e) s += mesh.element_area(e);
  return s;
}

}  // namespace

InvariantProblems transform_to_invariants(const ReactionSystem& sys) {
  const auto& n = sys.n;
  if (!(n.nA > 0.0 && n.nB > 0.0 && n.nC > 0.0))
    throw InvalidArgument("stoichiometric coefficients must be positive");
  const auto& A = sys.species[kA];
  for (const auto& s : sys.species) {
    if (s.velocity != A.velocity || s.diffusivity != A.diffusivity)
      throw InvalidArgument("species must share one velocity and one diffusivity");
    if (s.dim != A.dim) throw InvalidArgument("species dimensions differ");
  }
  InvariantProblems out;
  out.F = invariant(A, sys.species[kC], n.nA / n.nC);
  out.G = invariant(A, sys.species[kC], n.nB / n.nC);
  // G takes its own data from species B on top of A's transport data.
  const auto& B = sys.species[kB];
  const auto& C = sys.species[kC];
  out.G.source = combine(B.source, C.source, n.nB / n.nC);
  out.G.dirichlet_value = combine(B.dirichlet_value, C.dirichlet_value, n.nB / n.nC);
  out.G.neumann_value = combine(B.neumann_value, C.neumann_value, n.nB / n.nC);
  out.initial_F = combine(sys.initial[kA], sys.initial[kC], n.nA / n.nC);
  out.initial_G = combine(sys.initial[kB], sys.initial[kC], n.nB / n.nC);
  return out;
}

SpeciesFields recover_species(const VectorXd& cF, const VectorXd& cG, const Stoichiometry& n) {
  if (cF.size() != cG.size()) throw InvalidArgument("invariant fields differ in size");
  SpeciesFields s;
  s.cA = (cF - (n.nA / n.nB) * cG).cwiseMax(0.0);
  s.cB = (cG - (n.nB / n.nA) * cF).cwiseMax(0.0);
  s.cC = (n.nC / n.nA) * (cF - s.cA);
  return s;
}

SecondMoment second_moment(const StructuredMesh& mesh, const VectorXd& cC, double y0) {
  const ReferenceElement ref(mesh.kind);
  const QuadratureRule rule = ref.rule(RuleLevel::Error);
  SecondMoment m;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const MatrixXd xhat = element_coordinates(mesh, e);
    for (int g = 0; g < rule.size(); ++g) {
      const ElementContext ctx(ref, xhat, rule.points[g]);
      double c = 0.0;
      for (int a = 0; a < ref.nodes; ++a) c += ctx.N(a) * cC(mesh.elements[e][a]);
      const double w = rule.weights[g] * ctx.detJ;
      const double dy = (mesh.dim == 2 ? ctx.x.y() : 0.0) - y0;
      m.numerator += w * dy * dy * c;
      m.denominator += w * c;
    }
  }
  if (m.denominator != 0.0) {
    m.theta2 = m.numerator / m.denominator;
    m.negative = *m.theta2 < 0.0;
  }
  return m;
}

std::optional<double> product_onset_y(const StructuredMesh& mesh, const VectorXd& cC) {
  const double mx = cC.size() ? cC.maxCoeff() : 0.0;
  if (!(mx > 0.0)) return std::nullopt;
  double y = kInf;
  for (int i = 0; i < mesh.num_nodes(); ++i)
    if (cC(i) > 1e-6 * mx) y = std::min(y, mesh.dim == 2 ? mesh.nodes[i].y() : 0.0);
  return y;
}

std::pair<double, double> analytical_invariants_1d(int which, double v, double D, double fG, double x) {
  if (which != 1 && which != 2) throw InvalidArgument("case must be 1 or 2");
  if (!(D > 0.0)) throw InvalidArgument("diffusivity must be positive");
  const double r = exp_ratio(v, D, x);
  const double cF = 1.0 - r;
  if (which == 2) return {cF, r};
  if (v == 0.0) return {cF, fG * x * (1.0 - x) / (2.0 * D)};
  return {cF, fG / v * (x - r)};
}

double analytical_product_1d(int which, double v, double D, double fG, const Stoichiometry& n, double x) {
  const auto [cF, cG] = analytical_invariants_1d(which, v, D, fG, x);
  VectorXd F(1), G(1);
  F << cF;
  G << cG;
  return recover_species(F, G, n).cC(0);
}

namespace {

MixingDiagnostics diagnose(const StructuredMesh& mesh, const BimolecularSnapshot& s, double y0, double measure) {
  MixingDiagnostics d;
  d.time = s.time;
  const std::array<const VectorXd*, 3> f{&s.species.cA, &s.species.cB, &s.species.cC};
  for (int i = 0; i < 3; ++i) {
    d.mean[i] = integrate(mesh, *f[i], RuleLevel::Error) / measure;
    d.min[i] = f[i]->minCoeff();
    d.max[i] = f[i]->maxCoeff();
  }
  d.integral_F = integrate(mesh, s.cF, RuleLevel::Error);
  d.integral_G = integrate(mesh, s.cG, RuleLevel::Error);
  d.y0 = y0;
  d.moment = second_moment(mesh, s.species.cC, y0);
  return d;
}

}  // namespace

BimolecularResult run_bimolecular(const StructuredMesh& mesh, const ReactionSystem& system,
                                  const BimolecularConfig& cfg) {
  const InvariantProblems inv = transform_to_invariants(system);
  BimolecularResult res;
  std::vector<VectorXd> F, G;
  std::vector<double> times;

  if (cfg.dt > 0.0) {
    if (!inv.initial_F || !inv.initial_G) throw InvalidArgument("transient run needs initial conditions");
    auto run = [&](const ProblemSpec& p, const InitialFn& ic) {
      TransientConfig tc;
      tc.dt = cfg.dt;
      tc.t_final = cfg.t_final;
      tc.initial = ic;
      return solve_transient(mesh, p, cfg.solve, tc);
    };
    auto fut = std::async(std::launch::async, run, std::cref(inv.F), std::cref(inv.initial_F));
    TransientResult rG = run(inv.G, inv.initial_G);
    TransientResult rF = fut.get();
    const std::size_t steps = std::min(rF.fields.size(), rG.fields.size());
    for (std::size_t k = 0; k < steps; ++k) {
      F.push_back(rF.fields[k].c);
      G.push_back(rG.fields[k].c);
      times.push_back(rF.fields[k].time);
      if (k > 0) {
        res.certificates.push_back(rF.certificates[k - 1]);
        res.certificates.push_back(rG.certificates[k - 1]);
        res.status.push_back(rF.status[k - 1]);
        res.status.push_back(rG.status[k - 1]);
      }
    }
  } else {
    auto fut = std::async(std::launch::async, [&] { return solve_steady(mesh, inv.F, cfg.solve); });
    SteadyResult rG = solve_steady(mesh, inv.G, cfg.solve);
    SteadyResult rF = fut.get();
    F.push_back(rF.field.c);
    G.push_back(rG.field.c);
    times.push_back(inv.F.time);
    res.certificates = {rF.qp.kkt, rG.qp.kkt};
    res.status = {rF.qp.status, rG.qp.status};
  }

  const double measure = domain_measure(mesh);
  std::optional<double> y0 = cfg.y0;
  for (std::size_t k = 0; k < F.size(); ++k) {
    BimolecularSnapshot s;
    s.time = times[k];
    s.cF = F[k];
    s.cG = G[k];
    s.species = recover_species(s.cF, s.cG, system.n);
    // Frozen at the first snapshot that carries product.
    if (!y0) y0 = product_onset_y(mesh, s.species.cC);
    s.diag = diagnose(mesh, s, y0.value_or(0.0), measure);
    res.snapshots.push_back(std::move(s));
  }
  return res;
}

std::string diagnostics_csv(const BimolecularResult& r) {
  std::ostringstream os;
  os << std::setprecision(12);
  os << "t,mean_A,mean_B,mean_C,theta2,y0,min_A,max_A,min_B,max_B,min_C,max_C\n";
  for (const auto& s : r.snapshots) {
    const auto& d = s.diag;
    os << d.time << ',' << d.mean[0] << ',' << d.mean[1] << ',' << d.mean[2] << ',';
    if (d.moment.theta2) os << *d.moment.theta2;
    os << ',' << d.y0;
    for (int i = 0; i < 3; ++i) os << ',' << d.min[i] << ',' << d.max[i];
    os << '\n';
  }
  return os.str();
}

}  // namespace lsfem
