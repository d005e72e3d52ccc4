#include "lsfem/qp.hpp"

#include "qp_oracle.hpp"
#include "support.hpp"

using namespace lsfem;
using namespace lsfem::test;

TEST_SUITE("qp") {
  TEST_CASE("random problems agree with active-set enumeration") {
    std::mt19937 g(7);
    for (int trial = 0; trial < 40; ++trial) {
      const int n = 1 + trial % 7;
      const int m = trial % 3 == 0 ? 0 : std::min(n - 1, 1 + trial % 2);
      const QPProblem p = random_qp(g, n, m);
      const auto oracle = enumerate_qp(p);
      REQUIRE(oracle.has_value());
      const QPSolution s = solve_qp(p);
      CHECK(s.status == QPStatus::Optimal);
      CHECK(max_abs(s.x - oracle->x) < 1e-8);
      CHECK(s.kkt.max() < 1e-10);
    }
  }

  TEST_CASE("unconstrained problem is a linear solve") {
    MatrixXd H(2, 2);
    H << 4, 1, 1, 3;
    QPProblem p;
    p.H = H.sparseView();
    p.g = VectorXd::Ones(2);
    const QPSolution s = solve_qp(p);
    CHECK(max_abs(H * s.x + p.g) < 1e-14);
    CHECK(s.status == QPStatus::Optimal);
  }

  TEST_CASE("bound-only problem with a hand solution") {
    // min 0.5 |x|^2 - (2, -1).x  s.t. 0 <= x <= 1  ->  x = (1, 0), mu_max = (1, 0), mu_min = (0, 1).
    QPProblem p;
    p.H = MatrixXd::Identity(2, 2).sparseView();
    p.g = VectorXd(2);
    p.g << -2, 1;
    p.lower = VectorXd::Zero(2);
    p.upper = VectorXd::Ones(2);
    const QPSolution s = solve_qp(p);
    CHECK(s.x(0) == doctest::Approx(1.0));
    CHECK(std::abs(s.x(1)) < 1e-12);
    CHECK(s.mu_max(0) == doctest::Approx(1.0));
    CHECK(s.mu_min(1) == doctest::Approx(1.0));
    CHECK(s.active_lower == 1);
    CHECK(s.active_upper == 1);
  }

  TEST_CASE("dependent equality rows are removed and restored") {
    QPProblem p;
    p.H = MatrixXd::Identity(3, 3).sparseView();
    p.g = VectorXd::Zero(3);
    MatrixXd A(3, 3);
    A << 1, 1, 0, 0, 1, 1, 1, 2, 1;  // row 3 = row 1 + row 2
    p.A = A.sparseView();
    p.b = VectorXd(3);
    p.b << 1, 1, 2;
    const Presolved pre = presolve(p);
    CHECK(pre.map.dropped_rows.size() == 1u);
    const QPSolution s = solve_qp(p);
    CHECK(s.status == QPStatus::Optimal);
    CHECK(max_abs(A * s.x - p.b) < 1e-12);
    CHECK(s.lambda.size() == 3);
  }

  TEST_CASE("fixed variables are eliminated") {
    QPProblem p;
    p.H = MatrixXd::Identity(2, 2).sparseView();
    p.g = VectorXd::Zero(2);
    p.lower = VectorXd::Constant(2, -kInf);
    p.upper = VectorXd::Constant(2, kInf);
    p.lower(1) = p.upper(1) = 0.25;
    MatrixXd A(1, 2);
    A << 1, 1;
    p.A = A.sparseView();
    p.b = VectorXd::Constant(1, 1.0);
    const QPSolution s = solve_qp(p);
    CHECK(s.x(0) == doctest::Approx(0.75));
    CHECK(s.x(1) == 0.25);
    CHECK(s.status == QPStatus::Optimal);
  }

  TEST_CASE("infeasible equalities are reported") {
    QPProblem p;
    p.H = MatrixXd::Identity(1, 1).sparseView();
    p.g = VectorXd::Zero(1);
    p.lower = VectorXd::Zero(1);
    p.upper = VectorXd::Ones(1);
    MatrixXd A(1, 1);
    A << 1;
    p.A = A.sparseView();
    p.b = VectorXd::Constant(1, 3.0);
    const QPSolution s = solve_qp(p);
    CHECK(s.status == QPStatus::Infeasible);
  }

  TEST_CASE("crossing bounds throw") {
    QPProblem p;
    p.H = MatrixXd::Identity(1, 1).sparseView();
    p.g = VectorXd::Zero(1);
    p.lower = VectorXd::Ones(1);
    p.upper = VectorXd::Zero(1);
    CHECK_THROWS_AS(solve_qp(p), InfeasibleError);
  }

  TEST_CASE("KKT report of a perturbed solution") {
    std::mt19937 g(11);
    const QPProblem p = random_qp(g, 5, 2);
    QPSolution s = solve_qp(p);
    CHECK(check_kkt(p, s).max() < 1e-10);
    s.x(0) += 1e-3;
    CHECK(check_kkt(p, s).max() > 1e-6);
  }
}
