#include "lsfem/presets.hpp"
#include "lsfem/reactions.hpp"

#include "support.hpp"

#include <cmath>

using namespace lsfem;
using namespace lsfem::test;

TEST_SUITE("reactions") {
  TEST_CASE("recovery inverts the invariant map when species do not coexist") {
    const Stoichiometry n{2.0, 1.0, 3.0};
    const int m = 200;
    VectorXd cA(m), cB(m), cC(m), cF(m), cG(m);
    for (int i = 0; i < m; ++i) {
      const bool a_side = i % 2 == 0;
      cA(i) = a_side ? uniform(0.0, 1.0) : 0.0;
      cB(i) = a_side ? 0.0 : uniform(0.0, 1.0);
      cC(i) = i % 5 == 0 ? 0.0 : uniform(0.0, 1.0);
      cF(i) = cA(i) + n.nA / n.nC * cC(i);
      cG(i) = cB(i) + n.nB / n.nC * cC(i);
    }
    const SpeciesFields s = recover_species(cF, cG, n);
    CHECK(max_abs(s.cA - cA) < 1e-14);
    CHECK(max_abs(s.cB - cB) < 1e-14);
    CHECK(max_abs(s.cC - cC) < 1e-14);
    CHECK_THROWS_AS(recover_species(cF, cG.head(3), n), InvalidArgument);
  }

  TEST_CASE("recovered species are nonnegative and consistent with both invariants") {
    const Stoichiometry n{1.0, 2.0, 1.0};
    VectorXd cF(50), cG(50);
    for (int i = 0; i < 50; ++i) {
      cF(i) = uniform(0.0, 1.0);
      cG(i) = uniform(0.0, 1.0);
    }
    const SpeciesFields s = recover_species(cF, cG, n);
    CHECK(s.cA.minCoeff() >= 0.0);
    CHECK(s.cB.minCoeff() >= 0.0);
    CHECK(s.cC.minCoeff() >= -1e-15);
    CHECK(max_abs(s.cA + n.nA / n.nC * s.cC - cF) < 1e-14);
    CHECK(max_abs(s.cB + n.nB / n.nC * s.cC - cG) < 1e-14);
    CHECK(s.cA.cwiseProduct(s.cB).cwiseAbs().maxCoeff() == 0.0);
  }

  TEST_CASE("invariant problems combine species data linearly") {
    const Preset pr = find_preset("bimolecular-1d-case1");
    const ReactionSystem sys = make_reaction_system(pr);
    const InvariantProblems inv = transform_to_invariants(sys);
    const double r = sys.n.nA / sys.n.nC, s = sys.n.nB / sys.n.nC;
    for (double x : {0.0, 0.3, 1.0}) {
      const Vec2 p(x, 0.0);
      auto src = [&](int k) { return sys.species[k].source.value(p, 0.0); };
      auto dir = [&](int k) { return sys.species[k].dirichlet_value(p, 0.0); };
      CHECK(inv.F.source.value(p, 0.0) == doctest::Approx(src(kA) + r * src(kC)));
      CHECK(inv.G.source.value(p, 0.0) == doctest::Approx(src(kB) + s * src(kC)));
      CHECK(inv.F.dirichlet_value(p, 0.0) == doctest::Approx(dir(kA) + r * dir(kC)));
      CHECK(inv.G.dirichlet_value(p, 0.0) == doctest::Approx(dir(kB) + s * dir(kC)));
    }
  }

  TEST_CASE("closed-form 1D invariants satisfy the boundary value problems") {
    const double D = 2.5e-3, fG = 1.0, h = 1e-4;
    for (double v : {0.25, 1.0, -0.5, 0.0})
      for (int which : {1, 2}) {
        CAPTURE(v);
        CAPTURE(which);
        auto F = [&](double x) { return analytical_invariants_1d(which, v, 0.05, fG, x).first; };
        auto G = [&](double x) { return analytical_invariants_1d(which, v, 0.05, fG, x).second; };
        CHECK(F(0.0) == doctest::Approx(1.0));
        CHECK(std::abs(F(1.0)) < 1e-12);
        CHECK(std::abs(G(0.0)) < 1e-12);
        CHECK(G(1.0) == doctest::Approx(which == 2 ? 1.0 : 0.0).epsilon(1e-9));
        for (double x : {0.2, 0.5, 0.8}) {
          auto residual = [&](auto&& c) {
            const double d1 = (c(x + h) - c(x - h)) / (2 * h);
            const double d2 = (c(x + h) - 2 * c(x) + c(x - h)) / (h * h);
            return v * d1 - 0.05 * d2;
          };
          CHECK(residual(F) == doctest::Approx(0.0).scale(1.0).epsilon(1e-5));
          CHECK(residual(G) == doctest::Approx(which == 1 ? fG : 0.0).scale(1.0).epsilon(1e-5));
        }
      }
    CHECK(std::isfinite(analytical_invariants_1d(1, 1.0, D, fG, 0.99).first));
    CHECK_THROWS_AS(analytical_invariants_1d(3, 1.0, D, fG, 0.5), InvalidArgument);
  }

  TEST_CASE("product onset and second moment") {
    const StructuredMesh m = generate_structured_mesh(Domain{0, 1, 0, 1}, 11, 11, ElementKind::Q4);
    VectorXd c = VectorXd::Zero(m.num_nodes());
    CHECK_FALSE(product_onset_y(m, c).has_value());
    CHECK_FALSE(second_moment(m, c, 0.0).theta2.has_value());
    for (int i = 0; i < m.num_nodes(); ++i) c(i) = m.nodes[i].y() >= 0.3 - 1e-12 ? 1.0 : 1e-9;
    CHECK(*product_onset_y(m, c) == doctest::Approx(0.3));

    // Uniform field: int (y - y0)^2 dy over (0, 1) = 1/3 - y0 + y0^2, exact with
    // the Error rule.
    c.setConstant(2.0);
    for (double y0 : {0.0, 0.5, 0.2}) {
      const SecondMoment s = second_moment(m, c, y0);
      REQUIRE(s.theta2.has_value());
      CHECK(*s.theta2 == doctest::Approx(1.0 / 3.0 - y0 + y0 * y0).epsilon(1e-13));
      CHECK_FALSE(s.negative);
    }
    // Mixed sign with a negative total.
    for (int i = 0; i < m.num_nodes(); ++i) c(i) = m.nodes[i].y() > 0.8 ? 1.0 : -0.2;
    const SecondMoment s = second_moment(m, c, 0.0);
    CHECK(s.denominator < 0.0);
    CHECK(s.negative);
  }

  TEST_CASE("steady 1D run recovers the closed-form product") {
    Preset pr = find_preset("bimolecular-1d-case2");
    const StructuredMesh m = make_mesh(pr, 201, 1);
    BimolecularConfig cfg;
    cfg.solve = make_solve_options(pr);
    cfg.solve.constraints = ConstraintMode::LSB_NN;
    const ReactionSystem sys = make_reaction_system(pr);
    const BimolecularResult r = run_bimolecular(m, sys, cfg);
    REQUIRE(r.snapshots.size() == 1u);
    for (auto s : r.status) CHECK(s == QPStatus::Optimal);
    double err = 0.0;
    for (int i = 0; i < m.num_nodes(); ++i)
      err = std::max(err, std::abs(r.snapshots[0].species.cC(i) -
                                   analytical_product_1d(2, pr.speed, pr.diffusivity, 0.0, sys.n, m.nodes[i].x())));
    CHECK(err < 1e-2);
    CHECK(r.snapshots[0].species.cA.minCoeff() >= 0.0);
  }
}
