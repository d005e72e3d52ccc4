#include "lsfem/qp.hpp"

#include <json.hpp>

#include <Eigen/OrderingMethods>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <Eigen/SparseQR>

#include <algorithm>
#include <cmath>
#include <memory>
#include <set>

namespace lsfem {

namespace {

double inf_norm(const VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

bool finite(double v) { return std::isfinite(v); }

VectorXd stationarity_vector(const QPProblem& p, const VectorXd& x, const VectorXd& lambda, const VectorXd& mu_min,
                             const VectorXd& mu_max) {
  VectorXd r = p.H * x + p.g - mu_min + mu_max;
  if (p.m() > 0) r += p.A.transpose() * lambda;
  return r;
}

// Saddle-point solver for [[H + diag(sig), A^T], [A, 0]].
class KKTSystem {
 public:
  KKTSystem(const QPProblem& p, int dense_limit) : p_(p), n_(p.n()), m_(p.m()) {
    dense_ = n_ + m_ <= dense_limit;
  }

  bool factor(const VectorXd& sig) {
    sig_ = sig;
    if (dense_) {
      MatrixXd K = MatrixXd::Zero(n_ + m_, n_ + m_);
      K.topLeftCorner(n_, n_) = MatrixXd(p_.H);
      K.topLeftCorner(n_, n_).diagonal() += sig;
      if (m_ > 0) {
        const MatrixXd Ad(p_.A);
        K.bottomLeftCorner(m_, n_) = Ad;
        K.topRightCorner(n_, m_) = Ad.transpose();
      }
      dlu_ = std::make_unique<Eigen::PartialPivLU<MatrixXd>>(K);
      return true;
    }
    exact_ = build(sig, 0.0);
    if (!use_lu_) {
      const SpMat Kreg = build(sig, reg_);
      if (!ldlt_) {
        ldlt_ = std::make_unique<Eigen::SimplicialLDLT<SpMat, Eigen::Lower, Eigen::AMDOrdering<int>>>();
        ldlt_->analyzePattern(Kreg);
      }
      ldlt_->factorize(Kreg);
      if (ldlt_->info() == Eigen::Success) return true;
      use_lu_ = true;
    }
    return factor_lu();
  }

  VectorXd solve(const VectorXd& rhs) {
    if (dense_) {
      VectorXd d = dlu_->solve(rhs);
      return d;
    }
    if (use_lu_) return lu_->solve(rhs);
    // Iterative refinement against the unregularized matrix.
    VectorXd d = ldlt_->solve(rhs);
    const double scale = 1.0 + inf_norm(rhs);
    for (int it = 0; it < 10; ++it) {
      const VectorXd res = rhs - exact_ * d;
      if (inf_norm(res) <= 1e-14 * scale) return d;
      d += ldlt_->solve(res);
    }
    const VectorXd res = rhs - exact_ * d;
    if (inf_norm(res) <= 1e-9 * scale) return d;
    use_lu_ = true;
    if (!factor_lu()) return d;
    return lu_->solve(rhs);
  }

 private:
  SpMat build(const VectorXd& sig, double eps) const {
    std::vector<Triplet> t;
    t.reserve(p_.H.nonZeros() + 2 * p_.A.nonZeros() + n_ + m_);
    for (int c = 0; c < p_.H.outerSize(); ++c)
      for (SpMat::InnerIterator it(p_.H, c); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
    for (int i = 0; i < n_; ++i) t.emplace_back(i, i, sig(i));
    for (int c = 0; c < p_.A.outerSize(); ++c)
      for (SpMat::InnerIterator it(p_.A, c); it; ++it) {
        t.emplace_back(n_ + it.row(), it.col(), it.value());
        t.emplace_back(it.col(), n_ + it.row(), it.value());
      }
    for (int i = 0; i < m_; ++i) t.emplace_back(n_ + i, n_ + i, -eps);
    SpMat K(n_ + m_, n_ + m_);
    K.setFromTriplets(t.begin(), t.end());
    return K;
  }

  bool factor_lu() {
    lu_ = std::make_unique<Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>>>();
    SpMat K = exact_;
    K.makeCompressed();
    lu_->compute(K);
    return lu_->info() == Eigen::Success;
  }

  const QPProblem& p_;
  int n_, m_;
  bool dense_ = false;
  bool use_lu_ = false;
  double reg_ = 1e-10;
  VectorXd sig_;
  SpMat exact_;
  std::unique_ptr<Eigen::PartialPivLU<MatrixXd>> dlu_;
  std::unique_ptr<Eigen::SimplicialLDLT<SpMat, Eigen::Lower, Eigen::AMDOrdering<int>>> ldlt_;
  std::unique_ptr<Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>>> lu_;
};

void count_active(const QPProblem& p, QPSolution& s) {
  s.active_lower = s.active_upper = 0;
  for (int i = 0; i < p.n(); ++i) {
    if (finite(p.lower(i)) && s.x(i) - p.lower(i) <= 1e-10 * (1.0 + std::abs(p.lower(i)))) ++s.active_lower;
    if (finite(p.upper(i)) && p.upper(i) - s.x(i) <= 1e-10 * (1.0 + std::abs(p.upper(i)))) ++s.active_upper;
  }
}

// Equality-constrained subproblem with the variables in `at_bound` fixed to
// the given values. Returns false when the linear system cannot be solved.
bool solve_fixed(const QPProblem& p, const std::vector<char>& at_bound, const VectorXd& xb, bool dense, VectorXd& x,
                 VectorXd& lambda) {
  const int n = p.n(), m = p.m();
  std::vector<int> F, map(n, -1);
  for (int i = 0; i < n; ++i)
    if (!at_bound[i]) {
      map[i] = static_cast<int>(F.size());
      F.push_back(i);
    }
  const int nf = static_cast<int>(F.size());
  VectorXd xfix = VectorXd::Zero(n);
  for (int i = 0; i < n; ++i)
    if (at_bound[i]) xfix(i) = xb(i);
  const VectorXd Hx = p.H * xfix;
  VectorXd rhs(nf + m);
  for (int k = 0; k < nf; ++k) rhs(k) = -p.g(F[k]) - Hx(F[k]);
  if (m > 0) rhs.tail(m) = p.b - p.A * xfix;

  std::vector<Triplet> t;
  for (int c = 0; c < p.H.outerSize(); ++c)
    for (SpMat::InnerIterator it(p.H, c); it; ++it)
      if (map[it.row()] >= 0 && map[it.col()] >= 0) t.emplace_back(map[it.row()], map[it.col()], it.value());
  for (int c = 0; c < p.A.outerSize(); ++c)
    for (SpMat::InnerIterator it(p.A, c); it; ++it)
      if (map[it.col()] >= 0) {
        t.emplace_back(nf + it.row(), map[it.col()], it.value());
        t.emplace_back(map[it.col()], nf + it.row(), it.value());
      }
  for (int i = 0; i < nf + m; ++i) t.emplace_back(i, i, 0.0);
  SpMat K(nf + m, nf + m);
  K.setFromTriplets(t.begin(), t.end());

  VectorXd sol;
  if (dense) {
    const MatrixXd Kd(K);
    Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(Kd);
    sol = cod.solve(rhs);
  } else {
    K.makeCompressed();
    Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(K);
    if (lu.info() != Eigen::Success) return false;
    sol = lu.solve(rhs);
    if (lu.info() != Eigen::Success) return false;
  }
  if (!sol.allFinite()) return false;
  x = xfix;
  for (int k = 0; k < nf; ++k) x(F[k]) = sol(k);
  lambda = m > 0 ? VectorXd(sol.tail(m)) : VectorXd();
  return true;
}

// Primal-dual active-set iteration seeded from the interior-point estimate.
bool polish(const QPProblem& p, const QPOptions& opt, const QPSolution& seed, QPSolution& out) {
  const int n = p.n();
  const bool dense = n + p.m() <= opt.dense_limit;
  std::vector<char> al(n, 0), au(n, 0);
  for (int i = 0; i < n; ++i) {
    if (finite(p.lower(i)) && seed.x(i) - p.lower(i) < seed.mu_min(i)) al[i] = 1;
    if (finite(p.upper(i)) && p.upper(i) - seed.x(i) < seed.mu_max(i)) au[i] = 1;
  }
  std::set<std::vector<char>> seen;
  for (int it = 1; it <= opt.max_polish_iterations; ++it) {
    std::vector<char> key(al);
    key.insert(key.end(), au.begin(), au.end());
    if (!seen.insert(key).second) return false;

    std::vector<char> fixed(n, 0);
    VectorXd xb = VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
      if (al[i]) {
        fixed[i] = 1;
        xb(i) = p.lower(i);
      } else if (au[i]) {
        fixed[i] = 1;
        xb(i) = p.upper(i);
      }
    }
    VectorXd x, lambda;
    if (!solve_fixed(p, fixed, xb, dense, x, lambda)) return false;
    VectorXd y = p.H * x + p.g;
    if (p.m() > 0) y += p.A.transpose() * lambda;

    QPSolution s;
    s.x = x;
    s.lambda = lambda;
    s.mu_min = VectorXd::Zero(n);
    s.mu_max = VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
      if (al[i]) s.mu_min(i) = y(i);
      if (au[i]) s.mu_max(i) = -y(i);
    }
    s.polish_iterations = it;

    const double scale = 1.0 + inf_norm(p.g) + inf_norm(x);
    const double ptol = 1e-12 * scale;
    bool ok = true;
    std::vector<char> nl(n, 0), nu(n, 0);
    for (int i = 0; i < n; ++i) {
      const double yi = fixed[i] ? y(i) : 0.0;
      if (finite(p.lower(i)) && yi + (p.lower(i) - x(i)) > 0.0) nl[i] = 1;
      if (finite(p.upper(i)) && -yi + (x(i) - p.upper(i)) > 0.0 && !nl[i]) nu[i] = 1;
      if (!fixed[i] && ((finite(p.lower(i)) && x(i) < p.lower(i) - ptol) ||
                        (finite(p.upper(i)) && x(i) > p.upper(i) + ptol)))
        ok = false;
      if (s.mu_min(i) < -ptol || s.mu_max(i) < -ptol) ok = false;
    }
    if (ok) {
      // Clean up rounding-level sign noise on the multipliers.
      s.mu_min = s.mu_min.cwiseMax(0.0);
      s.mu_max = s.mu_max.cwiseMax(0.0);
      for (int i = 0; i < n; ++i) {
        if (finite(p.lower(i))) s.x(i) = std::max(s.x(i), p.lower(i));
        if (finite(p.upper(i))) s.x(i) = std::min(s.x(i), p.upper(i));
      }
      out = s;
      return true;
    }
    al = nl;
    au = nu;
  }
  return false;
}

QPSolution interior_point(const QPProblem& p, const QPOptions& opt) {
  const int n = p.n(), m = p.m();
  std::vector<int> L, U;
  for (int i = 0; i < n; ++i) {
    if (finite(p.lower(i))) L.push_back(i);
    if (finite(p.upper(i))) U.push_back(i);
  }
  const int nb = static_cast<int>(L.size() + U.size());
  KKTSystem kkt(p, opt.dense_limit);
  QPSolution s;
  s.lambda = VectorXd::Zero(m);
  s.mu_min = VectorXd::Zero(n);
  s.mu_max = VectorXd::Zero(n);

  if (nb == 0) {
    if (!kkt.factor(VectorXd::Zero(n))) throw AssemblyError("KKT matrix is singular");
    VectorXd rhs(n + m);
    rhs.head(n) = -p.g;
    if (m > 0) rhs.tail(m) = p.b;
    const VectorXd sol = kkt.solve(rhs);
    s.x = sol.head(n);
    if (m > 0) s.lambda = sol.tail(m);
    s.iterations = 1;
    return s;
  }

  VectorXd x(n);
  for (int i = 0; i < n; ++i) {
    const bool fl = finite(p.lower(i)), fu = finite(p.upper(i));
    if (fl && fu)
      x(i) = 0.5 * (p.lower(i) + p.upper(i));
    else if (fl)
      x(i) = p.lower(i) + 1.0;
    else if (fu)
      x(i) = p.upper(i) - 1.0;
    else
      x(i) = 1.0;
  }
  if (opt.start) {
    for (int i = 0; i < n; ++i) {
      double xi = (*opt.start)(i);
      const bool fl = finite(p.lower(i)), fu = finite(p.upper(i));
      const double w = (fl && fu) ? 0.01 * (p.upper(i) - p.lower(i)) : 0.01;
      if (fl) xi = std::max(xi, p.lower(i) + w);
      if (fu) xi = std::min(xi, p.upper(i) - w);
      x(i) = xi;
    }
  }
  VectorXd lambda = VectorXd::Zero(m);
  VectorXd zl = VectorXd::Zero(n), zu = VectorXd::Zero(n);
  for (int i : L) zl(i) = 1.0;
  for (int i : U) zu(i) = 1.0;

  const double gs = 1.0 + inf_norm(p.g), bs = 1.0 + inf_norm(p.b);
  double best = kInf;
  int since_best = 0;
  QPSolution best_sol;

  auto slack_l = [&](const VectorXd& xx) {
    VectorXd sl = VectorXd::Zero(n);
    for (int i : L) sl(i) = xx(i) - p.lower(i);
    return sl;
  };
  auto slack_u = [&](const VectorXd& xx) {
    VectorXd su = VectorXd::Zero(n);
    for (int i : U) su(i) = p.upper(i) - xx(i);
    return su;
  };

  for (int k = 0; k < opt.max_iterations; ++k) {
    const VectorXd sl = slack_l(x), su = slack_u(x);
    VectorXd rd = p.H * x + p.g - zl + zu;
    if (m > 0) rd += p.A.transpose() * lambda;
    const VectorXd rp = m > 0 ? VectorXd(p.A * x - p.b) : VectorXd();
    double comp = 0.0, mu = 0.0;
    for (int i : L) {
      comp = std::max(comp, sl(i) * zl(i));
      mu += sl(i) * zl(i);
    }
    for (int i : U) {
      comp = std::max(comp, su(i) * zu(i));
      mu += su(i) * zu(i);
    }
    mu /= nb;
    const double merit = std::max({inf_norm(rd) / gs, m > 0 ? inf_norm(rp) / bs : 0.0, comp});
    s.iterations = k;
    if (merit < 0.5 * best) {
      best = merit;
      since_best = 0;
    } else if (++since_best > 8) {
      break;
    }
    if (merit <= best) {
      best_sol.x = x;
      best_sol.lambda = lambda;
      best_sol.mu_min = zl;
      best_sol.mu_max = zu;
      best_sol.iterations = k;
    }
    if (merit <= p.tol) break;

    VectorXd sig = VectorXd::Zero(n);
    for (int i : L) sig(i) += zl(i) / sl(i);
    for (int i : U) sig(i) += zu(i) / su(i);
    if (!kkt.factor(sig)) break;

    auto direction = [&](const VectorXd& rcl, const VectorXd& rcu, VectorXd& dx, VectorXd& dl, VectorXd& dzl,
                         VectorXd& dzu) {
      VectorXd rhs(n + m);
      VectorXd top = -rd;
      for (int i : L) top(i) -= rcl(i) / sl(i);
      for (int i : U) top(i) += rcu(i) / su(i);
      rhs.head(n) = top;
      if (m > 0) rhs.tail(m) = -rp;
      const VectorXd sol = kkt.solve(rhs);
      dx = sol.head(n);
      dl = m > 0 ? VectorXd(sol.tail(m)) : VectorXd();
      dzl = VectorXd::Zero(n);
      dzu = VectorXd::Zero(n);
      for (int i : L) dzl(i) = (-rcl(i) - zl(i) * dx(i)) / sl(i);
      for (int i : U) dzu(i) = (-rcu(i) + zu(i) * dx(i)) / su(i);
    };
    auto max_steps = [&](const VectorXd& dx, const VectorXd& dzl, const VectorXd& dzu, double& ap, double& ad) {
      ap = 1.0;
      ad = 1.0;
      for (int i : L) {
        if (dx(i) < 0) ap = std::min(ap, -sl(i) / dx(i));
        if (dzl(i) < 0) ad = std::min(ad, -zl(i) / dzl(i));
      }
      for (int i : U) {
        if (dx(i) > 0) ap = std::min(ap, su(i) / dx(i));
        if (dzu(i) < 0) ad = std::min(ad, -zu(i) / dzu(i));
      }
    };

    VectorXd rcl = VectorXd::Zero(n), rcu = VectorXd::Zero(n);
    for (int i : L) rcl(i) = sl(i) * zl(i);
    for (int i : U) rcu(i) = su(i) * zu(i);
    VectorXd dxa, dla, dzla, dzua;
    direction(rcl, rcu, dxa, dla, dzla, dzua);
    double apa, ada;
    max_steps(dxa, dzla, dzua, apa, ada);
    double mu_aff = 0.0;
    for (int i : L) mu_aff += (sl(i) + apa * dxa(i)) * (zl(i) + ada * dzla(i));
    for (int i : U) mu_aff += (su(i) - apa * dxa(i)) * (zu(i) + ada * dzua(i));
    mu_aff /= nb;
    const double sigma = std::pow(std::max(0.0, mu_aff) / mu, 3);

    for (int i : L) rcl(i) = sl(i) * zl(i) - sigma * mu + dxa(i) * dzla(i);
    for (int i : U) rcu(i) = su(i) * zu(i) - sigma * mu - dxa(i) * dzua(i);
    VectorXd dx, dl, dzl, dzu;
    direction(rcl, rcu, dx, dl, dzl, dzu);
    double ap, ad;
    max_steps(dx, dzl, dzu, ap, ad);
    const double alpha = std::min(1.0, opt.fraction_to_boundary * std::min(ap, ad));
    if (!(alpha > 0.0) || !dx.allFinite()) break;
    x += alpha * dx;
    if (m > 0) lambda += alpha * dl;
    zl += alpha * dzl;
    zu += alpha * dzu;
  }
  if (best_sol.x.size() == 0) {
    best_sol.x = x;
    best_sol.lambda = lambda;
    best_sol.mu_min = zl;
    best_sol.mu_max = zu;
  }
  best_sol.iterations = s.iterations;
  return best_sol;
}

}  // namespace

void QPProblem::normalize() {
  const int nn = n();
  if (A.cols() != nn) A.resize(0, nn);
  if (b.size() != A.rows()) {
    if (A.rows() != 0) throw InvalidArgument("equality right-hand side size mismatch");
    b.resize(0);
  }
  if (lower.size() == 0) lower = VectorXd::Constant(nn, -kInf);
  if (upper.size() == 0) upper = VectorXd::Constant(nn, kInf);
  if (H.rows() != nn || H.cols() != nn || lower.size() != nn || upper.size() != nn)
    throw InvalidArgument("QP dimension mismatch");
}

const char* to_string(QPStatus s) {
  switch (s) {
    case QPStatus::Optimal: return "optimal";
    case QPStatus::BestFeasible: return "best-feasible";
    case QPStatus::Infeasible: return "infeasible";
  }
  return "?";
}

double KKTReport::max() const {
  return std::max({stationarity, primal_equality, primal_bounds, dual_feasibility, complementarity});
}

KKTReport check_kkt(const QPProblem& p, const QPSolution& s) {
  KKTReport r;
  const int n = p.n();
  VectorXd mu_min = s.mu_min.size() == n ? s.mu_min : VectorXd::Zero(n);
  VectorXd mu_max = s.mu_max.size() == n ? s.mu_max : VectorXd::Zero(n);
  VectorXd lambda = s.lambda.size() == p.m() ? s.lambda : VectorXd::Zero(p.m());
  r.stationarity = inf_norm(stationarity_vector(p, s.x, lambda, mu_min, mu_max)) / (1.0 + inf_norm(p.g));
  if (p.m() > 0) r.primal_equality = inf_norm(p.A * s.x - p.b) / (1.0 + inf_norm(p.b));
  for (int i = 0; i < n; ++i) {
    const bool fl = finite(p.lower(i)), fu = finite(p.upper(i));
    if (fl) r.primal_bounds = std::max(r.primal_bounds, p.lower(i) - s.x(i));
    if (fu) r.primal_bounds = std::max(r.primal_bounds, s.x(i) - p.upper(i));
    r.dual_feasibility = std::max({r.dual_feasibility, -mu_min(i), -mu_max(i)});
    if (!fl) r.dual_feasibility = std::max(r.dual_feasibility, std::abs(mu_min(i)));
    if (!fu) r.dual_feasibility = std::max(r.dual_feasibility, std::abs(mu_max(i)));
    if (fl) r.complementarity = std::max(r.complementarity, std::abs((s.x(i) - p.lower(i)) * mu_min(i)));
    if (fu) r.complementarity = std::max(r.complementarity, std::abs((p.upper(i) - s.x(i)) * mu_max(i)));
  }
  return r;
}

Presolved presolve(const QPProblem& p0) {
  QPProblem p = p0;
  p.normalize();
  const int n = p.n(), m = p.m();
  Presolved out;
  std::vector<int> map(n, -1);
  for (int i = 0; i < n; ++i) {
    if (p.lower(i) > p.upper(i)) throw InfeasibleError("lower bound exceeds upper bound at variable " + std::to_string(i));
    if (finite(p.lower(i)) && p.lower(i) == p.upper(i)) {
      out.map.fixed_vars.push_back(i);
    } else {
      map[i] = static_cast<int>(out.map.free_vars.size());
      out.map.free_vars.push_back(i);
    }
  }
  out.map.fixed_values.resize(out.map.fixed_vars.size());
  VectorXd xfix = VectorXd::Zero(n);
  for (std::size_t k = 0; k < out.map.fixed_vars.size(); ++k) {
    out.map.fixed_values(k) = p.lower(out.map.fixed_vars[k]);
    xfix(out.map.fixed_vars[k]) = out.map.fixed_values(k);
  }
  const int nf = static_cast<int>(out.map.free_vars.size());

  std::vector<Triplet> th, ta;
  for (int c = 0; c < p.H.outerSize(); ++c)
    for (SpMat::InnerIterator it(p.H, c); it; ++it)
      if (map[it.row()] >= 0 && map[it.col()] >= 0) th.emplace_back(map[it.row()], map[it.col()], it.value());
  for (int c = 0; c < p.A.outerSize(); ++c)
    for (SpMat::InnerIterator it(p.A, c); it; ++it)
      if (map[it.col()] >= 0) ta.emplace_back(it.row(), map[it.col()], it.value());
  SpMat Af(m, nf);
  Af.setFromTriplets(ta.begin(), ta.end());
  const VectorXd Hx = p.H * xfix;
  const VectorXd bf = m > 0 ? VectorXd(p.b - p.A * xfix) : VectorXd();

  // Full row rank shows as well-conditioned pivots of A A^T; otherwise the
  // dependent rows come from a rank-revealing QR of A^T.
  bool full_rank = false;
  if (m > 0) {
    const VectorXd rn = Af.cwiseAbs2() * VectorXd::Ones(nf);
    if (rn.minCoeff() > 0.0) {
      SpMat G = Af * SpMat(Af.transpose());
      Eigen::SimplicialLDLT<SpMat, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt(G);
      if (ldlt.info() == Eigen::Success) {
        const VectorXd& D = ldlt.vectorD();
        full_rank = D.minCoeff() > 1e-10 * rn.maxCoeff();
      }
    }
  }
  if (full_rank) {
    for (int i = 0; i < m; ++i) out.map.kept_rows.push_back(i);
  } else if (m > 0) {
    SpMat At = Af.transpose();
    At.makeCompressed();
    Eigen::SparseQR<SpMat, Eigen::COLAMDOrdering<int>> qr;
    qr.compute(At);
    if (qr.info() != Eigen::Success) throw InfeasibleError("QR factorization of the equality rows failed");
    const int rank = static_cast<int>(qr.rank());
    std::vector<char> keep(m, 0);
    const auto& perm = qr.colsPermutation().indices();
    for (int k = 0; k < rank; ++k) keep[perm(k)] = 1;
    for (int i = 0; i < m; ++i) (keep[i] ? out.map.kept_rows : out.map.dropped_rows).push_back(i);
    if (!out.map.dropped_rows.empty()) {
      // Each dropped row is a combination y of the kept ones; check b likewise.
      std::vector<Triplet> tk;
      std::vector<int> rmap(m, -1);
      for (std::size_t k = 0; k < out.map.kept_rows.size(); ++k) rmap[out.map.kept_rows[k]] = static_cast<int>(k);
      for (int c = 0; c < Af.outerSize(); ++c)
        for (SpMat::InnerIterator it(Af, c); it; ++it)
          if (rmap[it.row()] >= 0) tk.emplace_back(it.col(), rmap[it.row()], it.value());
      SpMat Kt(nf, static_cast<int>(out.map.kept_rows.size()));
      Kt.setFromTriplets(tk.begin(), tk.end());
      Kt.makeCompressed();
      Eigen::SparseQR<SpMat, Eigen::COLAMDOrdering<int>> qk;
      qk.compute(Kt);
      VectorXd bk(out.map.kept_rows.size());
      for (std::size_t k = 0; k < out.map.kept_rows.size(); ++k) bk(k) = bf(out.map.kept_rows[k]);
      const SpMat AfT = Af.transpose();
      for (int r : out.map.dropped_rows) {
        const VectorXd a = AfT.col(r);
        const VectorXd y = qk.solve(a);
        const double scale = 1.0 + inf_norm(bf) * (1.0 + inf_norm(y));
        if (std::abs(bf(r) - y.dot(bk)) > 1e-8 * scale)
          throw InfeasibleError("inconsistent dependent equality row " + std::to_string(r) +
                                " (residual " + std::to_string(bf(r) - y.dot(bk)) + ")");
      }
    }
  }

  QPProblem& q = out.problem;
  q.tol = p.tol;
  q.H.resize(nf, nf);
  q.H.setFromTriplets(th.begin(), th.end());
  q.g.resize(nf);
  q.lower.resize(nf);
  q.upper.resize(nf);
  for (int k = 0; k < nf; ++k) {
    const int i = out.map.free_vars[k];
    q.g(k) = p.g(i) + Hx(i);
    q.lower(k) = p.lower(i);
    q.upper(k) = p.upper(i);
  }
  const int mk = static_cast<int>(out.map.kept_rows.size());
  std::vector<int> rmap(m, -1);
  for (int k = 0; k < mk; ++k) rmap[out.map.kept_rows[k]] = k;
  std::vector<Triplet> tr;
  for (int c = 0; c < Af.outerSize(); ++c)
    for (SpMat::InnerIterator it(Af, c); it; ++it)
      if (rmap[it.row()] >= 0) tr.emplace_back(rmap[it.row()], it.col(), it.value());
  q.A.resize(mk, nf);
  q.A.setFromTriplets(tr.begin(), tr.end());
  q.b.resize(mk);
  for (int k = 0; k < mk; ++k) q.b(k) = bf(out.map.kept_rows[k]);
  return out;
}

QPSolution postsolve(const QPProblem& original, const PresolveMap& map, const QPSolution& red) {
  QPProblem p = original;
  p.normalize();
  const int n = p.n();
  QPSolution s = red;
  s.x = VectorXd::Zero(n);
  s.mu_min = VectorXd::Zero(n);
  s.mu_max = VectorXd::Zero(n);
  s.lambda = VectorXd::Zero(p.m());
  for (std::size_t k = 0; k < map.free_vars.size(); ++k) {
    s.x(map.free_vars[k]) = red.x(k);
    s.mu_min(map.free_vars[k]) = red.mu_min(k);
    s.mu_max(map.free_vars[k]) = red.mu_max(k);
  }
  for (std::size_t k = 0; k < map.fixed_vars.size(); ++k) s.x(map.fixed_vars[k]) = map.fixed_values(k);
  for (std::size_t k = 0; k < map.kept_rows.size(); ++k) s.lambda(map.kept_rows[k]) = red.lambda(k);
  if (!map.fixed_vars.empty()) {
    VectorXd y = p.H * s.x + p.g;
    if (p.m() > 0) y += p.A.transpose() * s.lambda;
    for (int i : map.fixed_vars) {
      s.mu_min(i) = std::max(y(i), 0.0);
      s.mu_max(i) = std::max(-y(i), 0.0);
    }
  }
  s.kkt = check_kkt(p, s);
  count_active(p, s);
  return s;
}

QPSolution solve_qp(QPProblem p, const QPOptions& opt) {
  p.normalize();
  const Presolved pre = presolve(p);
  const QPProblem& q = pre.problem;

  QPSolution red;
  if (q.n() == 0) {
    red.x = VectorXd();
    red.lambda = VectorXd::Zero(q.m());
    red.mu_min = red.mu_max = VectorXd();
  } else {
    QPOptions o = opt;
    if (opt.start) {
      VectorXd st(q.n());
      for (int k = 0; k < q.n(); ++k) st(k) = (*opt.start)(pre.map.free_vars[k]);
      o.start = st;
    }
    red = interior_point(q, o);
    red.kkt = check_kkt(q, red);
    const bool has_bounds = (q.lower.array().isFinite() || q.upper.array().isFinite()).any();
    // Polishing cannot improve a certificate already well inside tolerance.
    const bool converged = red.kkt.max() <= 1e-2 * opt.certificate_tol;
    if (opt.polish && has_bounds && !converged) {
      QPSolution pol;
      if (polish(q, o, red, pol)) {
        pol.iterations = red.iterations;
        pol.kkt = check_kkt(q, pol);
        if (pol.kkt.max() <= red.kkt.max()) red = pol;
      }
    }
  }
  QPSolution s = postsolve(p, pre.map, red);
  if (s.kkt.max() <= opt.certificate_tol) {
    s.status = QPStatus::Optimal;
  } else if (s.kkt.primal_equality > opt.certificate_tol || s.kkt.primal_bounds > opt.certificate_tol) {
    s.status = QPStatus::Infeasible;
    s.message = "primal residual above tolerance";
  } else {
    s.status = QPStatus::BestFeasible;
    s.message = "certificate above tolerance";
  }
  return s;
}

std::string certificate_json(const QPSolution& s) {
  nlohmann::json j;
  j["status"] = to_string(s.status);
  j["iterations"] = s.iterations;
  j["polish_iterations"] = s.polish_iterations;
  j["active_lower"] = s.active_lower;
  j["active_upper"] = s.active_upper;
  j["residuals"] = {{"stationarity", s.kkt.stationarity},
                    {"primal_equality", s.kkt.primal_equality},
                    {"primal_bounds", s.kkt.primal_bounds},
                    {"dual_feasibility", s.kkt.dual_feasibility},
                    {"complementarity", s.kkt.complementarity},
                    {"max", s.kkt.max()}};
  if (!s.message.empty()) j["message"] = s.message;
  return j.dump(2);
}

}  // namespace lsfem
