#include "lsfem/analysis.hpp"
#include "lsfem/presets.hpp"

#include "support.hpp"

#include <cmath>

using namespace lsfem;
using namespace lsfem::test;

TEST_SUITE("analysis") {
  TEST_CASE("condition number") {
    MatrixXd M = MatrixXd::Zero(2, 2);
    M(0, 0) = 1.0;
    M(1, 1) = 10.0;
    CHECK(condition_number(M) == doctest::Approx(10.0));
    const MatrixXd Q = Eigen::HouseholderQR<MatrixXd>(random_matrix(3, 3)).householderQ();
    CHECK(condition_number(Q) == doctest::Approx(1.0));
  }

  TEST_CASE("oscillation count and convergence rates") {
    VectorXd v(5);
    v << 0, 1, 0, 1, 0;
    CHECK(oscillation_count(v) == 3);
    v << 0, 1, 2, 3, 4;
    CHECK(oscillation_count(v) == 0);
    v << 0, 1, 1 + 1e-12, 2, 3;
    CHECK(oscillation_count(v) == 0);
    const std::vector<double> h{0.1, 0.05, 0.025};
    const auto r = convergence_rates(h, {3e-2, 7.5e-3, 1.875e-3});
    REQUIRE(r.size() == 2u);
    CHECK(r[0] == doctest::Approx(2.0));
    CHECK(r[1] == doctest::Approx(2.0));
    CHECK_THROWS_AS(convergence_rates(h, {1.0}), InvalidArgument);
  }

  TEST_CASE("manufactured solution derivatives match finite differences") {
    const ManufacturedProblem mp = manufactured_problem(0.05);
    const ManufacturedSolution& s = mp.solution;
    const ExactSolution ex = s.exact();
    const double h = 1e-5;
    CHECK(s.g(0.0) == doctest::Approx(1.0));
    CHECK(std::abs(s.g(1.0)) < 1e-12);
    for (double y : {0.1, 0.5, 0.9}) {
      CHECK(s.dg(y) == doctest::Approx((s.g(y + h) - s.g(y - h)) / (2 * h)).epsilon(1e-6));
      CHECK(s.d2g(y) == doctest::Approx((s.dg(y + h) - s.dg(y - h)) / (2 * h)).epsilon(1e-6));
    }
    for (const Vec2 x : {Vec2(0.3, 0.2), Vec2(0.7, 0.8), Vec2(0.5, 0.95)}) {
      const Vec2 ex_ = Vec2(h, 0), ey = Vec2(0, h);
      const Vec2 gc((ex.c(x + ex_) - ex.c(x - ex_)) / (2 * h), (ex.c(x + ey) - ex.c(x - ey)) / (2 * h));
      CHECK((gc - ex.grad_c(x)).norm() < 1e-6 * (1 + gc.norm()));
      CHECK((ex.q(x) - (Vec2(0, 1) * ex.c(x) - 0.05 * ex.grad_c(x))).norm() < 1e-12);
      Mat2 G;
      G.col(0) = (ex.q(x + ex_) - ex.q(x - ex_)) / (2 * h);
      G.col(1) = (ex.q(x + ey) - ex.q(x - ey)) / (2 * h);
      CHECK((G - ex.grad_q(x)).norm() < 1e-5 * (1 + G.norm()));
      // div q = f, with the steady equation written for the exact pair
      CHECK(G.trace() == doctest::Approx(s.source(x)).epsilon(1e-6).scale(1.0));
      CHECK(std::abs(s.source(x)) < 1e-8);
    }
  }

  TEST_CASE("interpolation errors converge at the nodal rates") {
    const ExactSolution ex = manufactured_problem(0.1).solution.exact();
    std::vector<double> h, l2, h1;
    for (int seed : {11, 21, 41}) {
      const StructuredMesh m = generate_structured_mesh(Domain{0, 1, 0, 1}, seed, seed, ElementKind::Q4);
      const ErrorNorms e = error_norms(interpolate(m, ex.c, ex.q), ex);
      h.push_back(m.h);
      l2.push_back(e.l2_c);
      h1.push_back(e.h1_c);
    }
    const auto r2 = convergence_rates(h, l2), r1 = convergence_rates(h, h1);
    CHECK(r2.back() == doctest::Approx(2.0).epsilon(0.05));
    CHECK(r1.back() == doctest::Approx(1.0).epsilon(0.05));
  }

  TEST_CASE("1D closed forms satisfy the flux conditions") {
    const double v = 2.0, D = 0.5, c0 = 1.5, q0 = 0.4, L = 1.0, h = 1e-5;
    for (FluxBC kind : {FluxBC::Total, FluxBC::Diffusive}) {
      const auto c = analytical_adr_1d(v, D, c0, q0, L, kind);
      auto d1 = [&](double x) { return (c(x + h) - c(x - h)) / (2 * h); };
      auto d2 = [&](double x) { return (c(x + h) - 2 * c(x) + c(x - h)) / (h * h); };
      CHECK(c(0.0) == doctest::Approx(c0));
      for (double x : {0.25, 0.5, 0.75}) CHECK(std::abs(v * d1(x) - D * d2(x)) < 1e-4);
      const double flux = (kind == FluxBC::Total ? v * c(L) : 0.0) - D * d1(L);
      CHECK(flux == doctest::Approx(q0).epsilon(1e-6));
    }
    // Outflow: the sign-aware condition drops the advective part.
    const auto a = analytical_adr_1d(v, D, c0, q0, L, FluxBC::SignAware);
    const auto b = analytical_adr_1d(v, D, c0, q0, L, FluxBC::Diffusive);
    CHECK(a(0.7) == b(0.7));
  }

  TEST_CASE("Z-pattern threshold of the 1D Galerkin rows") {
    const double v = 1.0, D = 0.01;
    for (double alpha : {0.0, 5.0}) {
      const double hz = zmatrix_threshold_1d(v, D, alpha);
      const int fine = static_cast<int>(std::ceil(1.0 / hz)) + 1;
      const int coarse = static_cast<int>(std::floor(1.0 / hz)) - 1;
      CHECK(classify_matrix(galerkin_1d_system(fine, v, D, alpha, 1.0).K).is_Z);
      CHECK_FALSE(classify_matrix(galerkin_1d_system(coarse, v, D, alpha, 1.0).K).is_Z);
    }
    CHECK(zmatrix_threshold_1d(1.0, 0.01, 0.0) == doctest::Approx(0.02));
    CHECK(std::isinf(zmatrix_threshold_1d(0.0, 0.01, 0.0)));
  }

  TEST_CASE("matrix classification") {
    MatrixXd M(2, 2);
    M << 2, -1, -1, 2;
    CHECK(classify_matrix(M).is_M);
    CHECK(classify_matrix(SpMat(M.sparseView())).is_M);
    M << 2, 1, 1, 2;
    CHECK_FALSE(classify_matrix(M).is_Z);
    CHECK(classify_matrix(M).is_P);
    M << 1, -2, -2, 1;
    CHECK(classify_matrix(M).is_Z);
    CHECK_FALSE(classify_matrix(M).is_P);
    CHECK_FALSE(classify_matrix(SpMat(M.sparseView())).is_P);
  }

  TEST_CASE("Galerkin stiffness agrees with the 1D closed-form rows") {
    const double v = 3.0, D = 0.02, alpha = 1.5;
    for (int nelem : {4, 10, 40}) {
      ProblemSpec p;
      p.dim = 1;
      p.velocity = std::make_shared<ConstantVelocity>(Vec2(v, 0.0));
      p.diffusivity = std::make_shared<ScalarDiffusivity>(D);
      p.alpha = ScalarField::constant(alpha);
      p.dirichlet_region = [](const BoundaryEdge&) { return true; };
      StructuredMesh m = generate_interval_mesh(0.0, 1.0, nelem + 1);
      classify_boundary(m, [&](const Vec2&) { return Vec2(v, 0.0); }, p.dirichlet_region, true);
      const MatrixXd K = MatrixXd(galerkin_stiffness(m, p));
      const MatrixXd ref = galerkin_1d_system(nelem, v, D, alpha, 0.0).K;
      REQUIRE(K.rows() == ref.rows());
      CHECK(max_abs(K - ref) < 1e-12 * max_abs(ref));
    }
  }

  TEST_CASE("Galerkin stiffness of pure diffusion on Q4") {
    ProblemSpec p;
    p.dirichlet_region = [](const BoundaryEdge& b) { return b.side == Side::Left; };
    StructuredMesh m = generate_structured_mesh(Domain{0, 1, 0, 1}, 6, 6, ElementKind::Q4);
    classify_boundary(m, [](const Vec2&) { return Vec2(0, 0); }, p.dirichlet_region, true);
    const MatrixXd K = MatrixXd(galerkin_stiffness(m, p));
    CHECK(K.rows() == m.num_nodes() - 6);
    CHECK(max_abs(K - K.transpose()) < 1e-14);
    // Constant functions are in the kernel away from the Dirichlet side.
    const VectorXd rs = K.rowwise().sum();
    int zero_rows = 0;
    for (int i = 0; i < rs.size(); ++i) zero_rows += std::abs(rs(i)) < 1e-13;
    CHECK(zero_rows == static_cast<int>(rs.size()) - 6);
    const CoarseMeshVerdict cv = coarse_mesh_verdict(m, p);
    CHECK(cv.galerkin.is_M);
    CHECK_FALSE(cv.maximum_principle);
    CHECK_FALSE(cv.oscillations);
  }

  TEST_CASE("coarse-mesh verdict on the thermal boundary layer") {
    const Preset pr = find_preset("thermal-layer");
    const StructuredMesh m = make_mesh(pr, pr.xseed, pr.yseed);
    const CoarseMeshVerdict cv = coarse_mesh_verdict(m, make_problem(pr));
    CHECK(cv.metrics.peclet > 1.0);
    CHECK(cv.oscillations);
    CHECK_FALSE(cv.reaction);
    CHECK_FALSE(cv.galerkin.is_Z);
    CHECK(cv.maximum_principle);
  }

  TEST_CASE("direct global balance matches the assembled balance rows") {
    const Preset pr = find_preset("thermal-layer");
    const StructuredMesh m = make_mesh(pr, 11, 6);
    const ProblemSpec p = make_problem(pr);
    SolveOptions o = make_solve_options(pr);
    o.constraints = ConstraintMode::None;
    const SteadyResult r = solve_steady(m, p, o);
    const double direct = gsb_direct(r.field, p);
    CHECK(direct == doctest::Approx(r.balance.gsb).epsilon(1e-10).scale(1e-12));
    o.constraints = ConstraintMode::LSB;
    const SteadyResult rc = solve_steady(m, p, o);
    CHECK(std::abs(gsb_direct(rc.field, p)) < 1e-10);
  }

  TEST_CASE("convergence CSV layout") {
    ErrorNorms e{1, 2, 3, 4};
    const std::string csv = convergence_csv({0.5, 0.25}, {10, 30}, {e, e});
    CHECK(csv.rfind("h,dofs,L2c,H1c,L2q,H1q,rate_L2c,rate_H1c,rate_L2q,rate_H1q\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  }
}
