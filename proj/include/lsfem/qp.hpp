#pragma once

#include "lsfem/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace lsfem {

// min 0.5 x^T H x + g^T x  s.t.  A x = b,  l <= x <= u.
// Infinite bounds are absent bounds.
struct QPProblem {
  SpMat H;
  VectorXd g;
  SpMat A;
  VectorXd b;
  VectorXd lower, upper;
  double tol = 100.0 * kEps;

  int n() const { return static_cast<int>(g.size()); }
  int m() const { return static_cast<int>(b.size()); }
  // Fills empty A/b/bounds with the trivial defaults for size n.
  void normalize();
};

enum class QPStatus { Optimal, BestFeasible, Infeasible };

const char* to_string(QPStatus s);

// Residuals of H x + g + A^T lambda - mu_min + mu_max = 0, A x = b,
// l <= x <= u, mu >= 0 and mu (x - bound) = 0.
struct KKTReport {
  double stationarity = 0.0;  // scaled by 1 + |g|_inf
  double primal_equality = 0.0;  // scaled by 1 + |b|_inf
  double primal_bounds = 0.0;
  double dual_feasibility = 0.0;
  double complementarity = 0.0;
  double max() const;
  bool pass(double tol) const { return max() <= tol; }
};

struct QPSolution {
  VectorXd x;
  VectorXd lambda;  // one per equality row
  VectorXd mu_min, mu_max;
  KKTReport kkt;
  int iterations = 0;
  int polish_iterations = 0;
  int active_lower = 0, active_upper = 0;
  QPStatus status = QPStatus::BestFeasible;
  std::string message;
};

struct QPOptions {
  int max_iterations = 200;
  double fraction_to_boundary = 0.995;
  bool polish = true;
  int max_polish_iterations = 20;
  // Problems up to this size take the dense active-set polish path.
  int dense_limit = 200;
  // Certificate acceptance threshold for QPStatus::Optimal.
  double certificate_tol = 1e-8;
  std::optional<VectorXd> start;
};

KKTReport check_kkt(const QPProblem& p, const QPSolution& s);

// Removal of dependent equality rows and of variables with l == u.
struct PresolveMap {
  std::vector<int> kept_rows, dropped_rows;
  std::vector<int> free_vars, fixed_vars;
  VectorXd fixed_values;  // aligned with fixed_vars
};

struct Presolved {
  QPProblem problem;
  PresolveMap map;
};

// Throws InfeasibleError when dropped rows are inconsistent or l > u.
Presolved presolve(const QPProblem& p);

// Reconstructs a solution of the original problem.
QPSolution postsolve(const QPProblem& original, const PresolveMap& map, const QPSolution& reduced);

QPSolution solve_qp(QPProblem p, const QPOptions& options = {});

// Serializes the certificate (residuals, iterations, active-set sizes).
std::string certificate_json(const QPSolution& s);

}  // namespace lsfem
