#pragma once

#include "lsfem/qp.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <random>
#include <vector>

namespace lsfem::test {

// Strictly convex QP with a known feasible point. Bound patterns are drawn so
// that the enumeration oracle visits at most max_sets active sets.
inline QPProblem random_qp(std::mt19937& g, int n, int m, long max_sets = 1L << 13) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> kind(0, 3);
  MatrixXd M(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) M(i, j) = u(g);
  const MatrixXd H = M * M.transpose() + 0.1 * MatrixXd::Identity(n, n);
  QPProblem p;
  p.H = H.sparseView();
  p.g = VectorXd(n);
  for (int i = 0; i < n; ++i) p.g(i) = 2.0 * u(g);
  p.lower = VectorXd::Constant(n, -kInf);
  p.upper = VectorXd::Constant(n, kInf);
  VectorXd x0(n);
  long sets = 1;
  for (int i = 0; i < n; ++i) {
    x0(i) = 0.5 * u(g);
    int k = kind(g);
    const int remaining = n - i - 1;
    auto fits = [&](long f) { return sets * f * (1L << remaining) <= max_sets; };
    if (k == 2 && !fits(3)) k = 0;
    if (k != 3 && !fits(2)) k = 3;
    sets *= k == 2 ? 3 : k == 3 ? 1 : 2;
    switch (k) {
      case 0: p.lower(i) = x0(i) - 0.3 * std::abs(u(g)); break;
      case 1: p.upper(i) = x0(i) + 0.3 * std::abs(u(g)); break;
      case 2:
        p.lower(i) = x0(i) - 0.3 * std::abs(u(g));
        p.upper(i) = x0(i) + 0.3 * std::abs(u(g));
        break;
      default: break;
    }
  }
  MatrixXd A(m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = u(g);
  p.A = A.sparseView();
  p.b = A * x0;
  return p;
}

struct OracleSolution {
  VectorXd x;
  double objective = 0.0;
};

// Exhaustive active-set enumeration: every variable is free or held at one of
// its finite bounds; the KKT point with valid signs and feasibility wins.
inline std::optional<OracleSolution> enumerate_qp(const QPProblem& p, double tol = 1e-9) {
  const int n = p.n(), m = p.m();
  const MatrixXd H(p.H), A(p.A);
  std::vector<std::vector<int>> options(n);  // 0 free, 1 lower, 2 upper
  for (int i = 0; i < n; ++i) {
    options[i].push_back(0);
    if (std::isfinite(p.lower(i))) options[i].push_back(1);
    if (std::isfinite(p.upper(i))) options[i].push_back(2);
  }
  std::vector<int> pick(n, 0);
  std::optional<OracleSolution> best;
  while (true) {
    std::vector<int> F;
    VectorXd xfix = VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
      const int o = options[i][pick[i]];
      if (o == 0) F.push_back(i);
      else xfix(i) = o == 1 ? p.lower(i) : p.upper(i);
    }
    const int nf = static_cast<int>(F.size());
    MatrixXd K = MatrixXd::Zero(nf + m, nf + m);
    VectorXd rhs(nf + m);
    const VectorXd Hx = H * xfix;
    for (int a = 0; a < nf; ++a) {
      for (int b = 0; b < nf; ++b) K(a, b) = H(F[a], F[b]);
      for (int r = 0; r < m; ++r) K(a, nf + r) = K(nf + r, a) = A(r, F[a]);
      rhs(a) = -p.g(F[a]) - Hx(F[a]);
    }
    if (m > 0) rhs.tail(m) = p.b - A * xfix;
    Eigen::FullPivLU<MatrixXd> lu(K);
    if (lu.rank() == nf + m) {
      const VectorXd sol = lu.solve(rhs);
      VectorXd x = xfix;
      for (int a = 0; a < nf; ++a) x(F[a]) = sol(a);
      const VectorXd lambda = sol.tail(m);
      VectorXd y = H * x + p.g;
      if (m > 0) y += A.transpose() * lambda;
      bool ok = true;
      for (int i = 0; i < n && ok; ++i) {
        const int o = options[i][pick[i]];
        if (o == 0) {
          if (std::isfinite(p.lower(i)) && x(i) < p.lower(i) - tol) ok = false;
          if (std::isfinite(p.upper(i)) && x(i) > p.upper(i) + tol) ok = false;
        } else if (o == 1 && y(i) < -tol) {
          ok = false;  // mu_min = y must be >= 0
        } else if (o == 2 && y(i) > tol) {
          ok = false;  // mu_max = -y must be >= 0
        }
      }
      if (ok) {
        const double obj = 0.5 * x.dot(H * x) + p.g.dot(x);
        if (!best || obj < best->objective) best = OracleSolution{x, obj};
      }
    }
    int k = 0;
    while (k < n && ++pick[k] == static_cast<int>(options[k].size())) pick[k++] = 0;
    if (k == n) break;
  }
  return best;
}

}  // namespace lsfem::test
