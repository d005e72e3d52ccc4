#include "lsfem/assembly.hpp"

#include "support.hpp"

#include <Eigen/SparseCholesky>

#include <cmath>

using namespace lsfem;
using namespace lsfem::test;

namespace {

ProblemSpec sample_problem(bool neumann) {
  ProblemSpec p;
  p.velocity = std::make_shared<ShearVelocity>(1.5);
  p.diffusivity = std::make_shared<ScalarDiffusivity>(0.3);
  p.alpha = ScalarField::constant(0.7);
  p.source = ScalarField::constant(1.2);
  if (neumann)
    p.dirichlet_region = [](const BoundaryEdge& b) { return b.side == Side::Left || b.side == Side::Bottom; };
  else
    p.dirichlet_region = [](const BoundaryEdge&) { return true; };
  p.neumann_value = [](const Vec2& x, double) { return 0.4 + x.y(); };
  return p;
}

StructuredMesh sample_mesh(const ProblemSpec& p, ElementKind k) {
  StructuredMesh m = generate_structured_mesh(Domain{0, 1, 0, 0.8}, 4, 5, k);
  classify_boundary(m, [&](const Vec2& x) { return p.velocity->value(x, 0.0); }, p.dirichlet_region, true);
  return m;
}

VectorXd random_state(int n) { return random_matrix(n, 1); }

// Primitive functional (Type-1 weights) summed from pointwise residuals.
double brute_force_functional(const StructuredMesh& m, const ProblemSpec& p, const VectorXd& x, RuleLevel level) {
  const int d = m.dim, nn = m.num_nodes();
  const ReferenceElement ref(m.kind);
  const QuadratureRule rule = ref.rule(level);
  double J = 0.0;
  for (int e = 0; e < m.num_elements(); ++e) {
    const MatrixXd xhat = element_coordinates(m, e);
    for (int g = 0; g < rule.size(); ++g) {
      const ElementContext ctx(ref, xhat, rule.points[g]);
      double c = 0.0, divq = 0.0;
      Vec2 gc = Vec2::Zero(), q = Vec2::Zero();
      for (int a = 0; a < ref.nodes; ++a) {
        const int node = m.elements[e][a];
        c += ctx.N(a) * x(node);
        for (int j = 0; j < d; ++j) {
          gc(j) += ctx.B(a, j) * x(node);
          q(j) += ctx.N(a) * x(nn + node * d + j);
          divq += ctx.B(a, j) * x(nn + node * d + j);
        }
      }
      const Vec2 v = p.velocity->value(ctx.x, 0.0);
      const double D = p.diffusivity->value(ctx.x)(0, 0);
      const double w = rule.weights[g] * ctx.detJ;
      J += w * (q - c * v + D * gc).squaredNorm();
      const double r2 = p.alpha.value(ctx.x, 0.0) * c + divq - p.source.value(ctx.x, 0.0);
      J += w * r2 * r2;
    }
  }
  // Neumann facets: q.n - s+ (v.n) c = q^p, traces linear along the facet.
  const QuadratureRule er = ReferenceElement::edge_rule(level);
  for (const auto& be : m.boundary) {
    if (be.tag == BoundaryTag::Dirichlet) continue;
    const Vec2 x0 = m.nodes[be.nodes[0]], x1 = m.nodes[be.nodes[1]];
    for (int g = 0; g < er.size(); ++g) {
      const double s = er.points[g].x();
      const Vec2 xp = (1 - s) * x0 + s * x1;
      const double c = (1 - s) * x(be.nodes[0]) + s * x(be.nodes[1]);
      Vec2 q;
      for (int j = 0; j < 2; ++j) q(j) = (1 - s) * x(nn + 2 * be.nodes[0] + j) + s * x(nn + 2 * be.nodes[1] + j);
      const double vn = p.velocity->value(xp, 0.0).dot(be.normal);
      const double splus = 0.5 * (1.0 + sign(vn));
      const double r3 = q.dot(be.normal) - splus * vn * c - p.neumann_value(xp, 0.0);
      J += er.weights[g] * be.length * r3 * r3;
    }
  }
  return 0.5 * J;
}

}  // namespace

TEST_SUITE("assembly") {
  TEST_CASE("primitive functional matches a brute-force residual oracle") {
    for (bool neumann : {false, true})
      for (ElementKind k : {ElementKind::Q4, ElementKind::T3}) {
        const ProblemSpec p = sample_problem(neumann);
        const StructuredMesh m = sample_mesh(p, k);
        AssemblyOptions o;
        o.level = RuleLevel::Enriched;
        const GlobalSystem s = assemble_primitive(m, p, o);
        for (int trial = 0; trial < 5; ++trial) {
          const VectorXd x = random_state(s.size());
          const double oracle = brute_force_functional(m, p, x, o.level);
          CHECK(s.functional(x) == doctest::Approx(oracle).epsilon(1e-10));
          const double direct = evaluate_functional(m, p, StabilizationParams::zero(m.num_elements()), x, o);
          CHECK(direct == doctest::Approx(oracle).epsilon(1e-12));
        }
      }
  }

  TEST_CASE("Hessian is symmetric positive semidefinite and thread independent") {
    const ProblemSpec p = sample_problem(true);
    const StructuredMesh m = sample_mesh(p, ElementKind::Q4);
    const StabilizationParams st = compute_stabilization(m, p, {0.01, 0, 0, 0.01, 0, 0});
    AssemblyOptions o;
    o.level = RuleLevel::Enriched;
    const GlobalSystem a = assemble_nssd(m, p, st, o);
    o.threads = 3;
    const GlobalSystem b = assemble_nssd(m, p, st, o);
    const MatrixXd K(a.K);
    CHECK(max_abs(K - K.transpose()) < 1e-13);
    CHECK(max_abs(K - MatrixXd(b.K)) == 0.0);
    CHECK(max_abs(a.r - b.r) == 0.0);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(K);
    CHECK(es.eigenvalues().minCoeff() > -1e-10 * es.eigenvalues().maxCoeff());
  }

  TEST_CASE("zero stabilization reduces NSSD to the primitive system") {
    const ProblemSpec p = sample_problem(true);
    const StructuredMesh m = sample_mesh(p, ElementKind::Q4);
    AssemblyOptions o;
    o.level = RuleLevel::Enriched;
    const GlobalSystem a = assemble_primitive(m, p, o);
    const GlobalSystem b = assemble_nssd(m, p, StabilizationParams::zero(m.num_elements()), o);
    CHECK(max_abs(MatrixXd(a.K) - MatrixXd(b.K)) < 1e-14);
    CHECK(max_abs(a.r - b.r) < 1e-14);
  }

  TEST_CASE("NSSD functional agrees with its residual form") {
    const ProblemSpec p = sample_problem(true);
    const StructuredMesh m = sample_mesh(p, ElementKind::Q4);
    const StabilizationParams st = compute_stabilization(m, p, {0.05, 0.01, 0, 0.02, 0.01, 0});
    AssemblyOptions o;
    o.level = RuleLevel::Enriched;
    const GlobalSystem s = assemble_nssd(m, p, st, o);
    for (int trial = 0; trial < 5; ++trial) {
      const VectorXd x = random_state(s.size());
      CHECK(s.functional(x) == doctest::Approx(evaluate_functional(m, p, st, x, o)).epsilon(1e-10));
    }
  }

  TEST_CASE("stabilization parameters") {
    ProblemSpec p = sample_problem(false);
    const StructuredMesh m = sample_mesh(p, ElementKind::Q4);
    const StabilizationParams s = compute_stabilization(m, p, {0.1, 0, 0, 0.2, 0, 0});
    // Scalar D: lambda_min = lambda_max = 0.3, so delta_e = -0.1 h_e^2 / 0.3.
    for (int e = 0; e < m.num_elements(); ++e) {
      CHECK(s.delta[e] == doctest::Approx(-0.1 * m.h_e[e] * m.h_e[e] / 0.3));
      CHECK(s.tau[e] == doctest::Approx(-0.2 * m.h_e[e] * m.h_e[e]));
    }
    const StabilizationParams r = compute_stabilization(m, p, {0.1, 1.0, 0, 0.2, 1.0, 0});
    for (int e = 0; e < m.num_elements(); ++e) {
      CHECK(r.delta[e] <= 0.0);
      CHECK(std::abs(r.delta[e]) < std::abs(s.delta[e]));
    }
  }

  TEST_CASE("LSB rows are satisfied by an exact linear state") {
    ProblemSpec p;
    p.velocity = std::make_shared<ConstantVelocity>(Vec2(1.0, 0.5));
    p.diffusivity = std::make_shared<ScalarDiffusivity>(0.2);
    p.alpha = ScalarField::constant(0.0);
    // c = x: q = v c - D grad c = (x - 0.2, 0.5 x), div q = 1 = f.
    p.source = ScalarField::constant(1.0);
    p.dirichlet_region = [](const BoundaryEdge&) { return true; };
    StructuredMesh m = generate_structured_mesh(Domain{0, 1, 0, 1}, 5, 4, ElementKind::Q4);
    classify_boundary(m, {}, p.dirichlet_region, true);
    SpMat A;
    VectorXd b;
    assemble_lsb_constraints(m, p, A, b);
    CHECK(A.rows() == m.num_elements());
    const int nn = m.num_nodes();
    VectorXd x(3 * nn);
    for (int i = 0; i < nn; ++i) {
      const double xi = m.nodes[i].x();
      x(i) = xi;
      x(nn + 2 * i) = xi - 0.2;
      x(nn + 2 * i + 1) = 0.5 * xi;
    }
    CHECK(max_abs(A * x - b) < 1e-13);
  }

  TEST_CASE("strong elimination agrees with a penalty oracle") {
    const ProblemSpec p = sample_problem(true);
    const StructuredMesh m = sample_mesh(p, ElementKind::Q4);
    const GlobalSystem s = assemble_primitive(m, p);
    ProblemSpec pd = p;
    pd.dirichlet_value = [](const Vec2& x, double) { return 1.0 + x.x() * x.y(); };
    const FixedDofs fixed = collect_fixed_dofs(m, pd);
    REQUIRE_FALSE(fixed.index.empty());
    const ReducedSystem red = apply_dirichlet(s, fixed);
    Eigen::SimplicialLDLT<SpMat> ldlt(red.K);
    const VectorXd x_elim = red.expand(ldlt.solve(red.r));
    for (std::size_t k = 0; k < fixed.index.size(); ++k) CHECK(x_elim(fixed.index[k]) == fixed.value[k]);

    MatrixXd Kp(s.K);
    VectorXd rp = s.r;
    const double P = 1e8 * max_abs(Kp);
    for (std::size_t k = 0; k < fixed.index.size(); ++k) {
      Kp(fixed.index[k], fixed.index[k]) += P;
      rp(fixed.index[k]) += P * fixed.value[k];
    }
    const VectorXd x_pen = Kp.ldlt().solve(rp);
    CHECK(max_abs(x_pen - x_elim) < 1e-6);
    CHECK(max_abs(red.restrict_(x_elim) - ldlt.solve(red.r)) == 0.0);
  }

  TEST_CASE("flux walls fix the normal flux component") {
    ProblemSpec p = sample_problem(false);
    p.dirichlet_region = [](const BoundaryEdge& b) { return b.side == Side::Left; };
    p.flux_wall_region = [](const BoundaryEdge& b) { return b.side == Side::Top; };
    StructuredMesh m = generate_structured_mesh(Domain{0, 1, 0, 1}, 4, 4, ElementKind::Q4);
    classify_boundary(m, {}, p.dirichlet_region, true);
    const FixedDofs f = collect_fixed_dofs(m, p);
    const int nn = m.num_nodes();
    int flux = 0;
    for (int idx : f.index)
      if (idx >= nn) {
        ++flux;
        CHECK((idx - nn) % 2 == 1);  // q_y on the top side
      }
    CHECK(flux >= 3);
    CHECK(std::is_sorted(f.index.begin(), f.index.end()));
  }
}
