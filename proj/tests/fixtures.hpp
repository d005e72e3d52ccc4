#pragma once

#include "lsfem/solver.hpp"

#include <functional>

namespace lsfem::test {

// c = 2 + grad . x (default 2 + x - y/2) with constant v and D: q = v c - D grad c is linear, so the
// exact pair lies in every finite element space. f = v . grad c + alpha c.
struct LinearCase {
  StructuredMesh mesh;
  ProblemSpec problem;
  std::function<double(const Vec2&)> c;
  std::function<Vec2(const Vec2&)> q;
  Vec2 velocity, grad;
};

// grad2d orthogonal to (1, 0.5) makes v . grad c vanish, so f = alpha c.
inline LinearCase linear_case(ElementKind kind, int seed, bool outflow_neumann, Vec2 grad2d = Vec2(1.0, -0.5)) {
  LinearCase lc;
  const Vec2 v(1.0, 0.5);
  const double D = 0.05, alpha = 0.3;
  const bool one_d = kind == ElementKind::L2;
  const Vec2 grad = one_d ? Vec2(1.0, 0.0) : grad2d;
  const Vec2 vel = one_d ? Vec2(v.x(), 0.0) : v;
  lc.velocity = vel;
  lc.grad = grad;
  lc.c = [grad](const Vec2& x) { return 2.0 + grad.dot(x); };
  lc.q = [=](const Vec2& x) { return Vec2(vel * (2.0 + grad.dot(x)) - D * grad); };
  lc.mesh = one_d ? generate_interval_mesh(0.0, 1.0, seed)
                  : generate_structured_mesh(Domain{0, 1, 0, 1}, seed, seed, kind);
  ProblemSpec& p = lc.problem;
  p.dim = one_d ? 1 : 2;
  p.velocity = std::make_shared<ConstantVelocity>(vel);
  p.diffusivity = std::make_shared<ScalarDiffusivity>(D);
  p.alpha = ScalarField::constant(alpha);
  const auto c = lc.c;
  p.source = ScalarField{[=](const Vec2& x, double) { return vel.dot(grad) + alpha * c(x); },
                         [=](const Vec2&, double) { return Vec2(alpha * grad); }};
  p.dirichlet_value = [c](const Vec2& x, double) { return c(x); };
  const auto q = lc.q;
  if (outflow_neumann) {
    p.dirichlet_region = [](const BoundaryEdge& b) { return b.side == Side::Left || b.side == Side::Bottom; };
    // Total flux on outflow facets: q.n = c v.n - D grad c.n, and the
    // residual imposes q.n - (v.n) c = q^p, so q^p is the diffusive part.
    p.neumann_value = [=](const Vec2& x, double) {
      const Vec2 n = x.x() >= 1.0 - 1e-12 ? Vec2(1, 0) : Vec2(0, 1);
      return -D * grad.dot(n);
    };
  } else {
    p.dirichlet_region = [](const BoundaryEdge&) { return true; };
  }
  classify_boundary(lc.mesh, [=](const Vec2&) { return vel; }, p.dirichlet_region, true);
  return lc;
}

// The NSSD flux unknown carries the shift delta v (f - alpha c) = delta v (v . grad c);
// pass the (uniform) element delta, or 0 for the primitive flux.
inline double max_error(const Field& f, const LinearCase& lc, double delta = 0.0) {
  const Vec2 shift = delta * lc.velocity * lc.velocity.dot(lc.grad);
  double e = 0.0;
  const int d = f.mesh->dim;
  for (int i = 0; i < f.mesh->num_nodes(); ++i) {
    const Vec2& x = f.mesh->nodes[i];
    e = std::max(e, std::abs(f.c(i) - lc.c(x)));
    const Vec2 q = lc.q(x) + shift;
    for (int j = 0; j < d; ++j) e = std::max(e, std::abs(f.q(i * d + j) - q(j)));
  }
  return e;
}

}  // namespace lsfem::test
