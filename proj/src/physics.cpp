#include "lsfem/physics.hpp"

#include <cmath>
#include <sstream>

namespace lsfem {

int sign(double phi) {
  if (phi < 0.0) return -1;
  if (phi > 0.0) return 1;
  return 0;
}

ScalarField ScalarField::constant(double c) {
  return ScalarField{[c](const Vec2&, double) { return c; }, [](const Vec2&, double) { return Vec2::Zero().eval(); }};
}

std::shared_ptr<MultiModeVelocity> MultiModeVelocity::plume_default(double Lx, double Ly) {
  return std::make_shared<MultiModeVelocity>(
      std::vector<StreamMode>{{0.08, 4, 1}, {0.02, 5, 5}, {0.01, 10, 10}}, Lx, Ly);
}

Vec2 MultiModeVelocity::value(const Vec2& x, double) const {
  Vec2 v(1.0, 0.0);
  for (const auto& m : modes_) {
    const double kx = m.p * M_PI / Lx_, ky = m.q * M_PI / Ly_;
    const double a = kx * x.x() - M_PI / 2, b = ky * x.y();
    v.x() += m.amplitude * ky * std::cos(a) * std::cos(b);
    v.y() += m.amplitude * kx * std::sin(a) * std::sin(b);
  }
  return v;
}

Mat2 MultiModeVelocity::jacobian(const Vec2& x, double) const {
  Mat2 J = Mat2::Zero();
  for (const auto& m : modes_) {
    const double kx = m.p * M_PI / Lx_, ky = m.q * M_PI / Ly_;
    const double a = kx * x.x() - M_PI / 2, b = ky * x.y();
    J(0, 0) -= m.amplitude * ky * kx * std::sin(a) * std::cos(b);
    J(0, 1) -= m.amplitude * ky * ky * std::cos(a) * std::sin(b);
    J(1, 0) += m.amplitude * kx * kx * std::cos(a) * std::sin(b);
    J(1, 1) += m.amplitude * kx * ky * std::sin(a) * std::cos(b);
  }
  return J;
}

double MultiModeVelocity::divergence(const Vec2& x, double t) const { return jacobian(x, t).trace(); }

bool VortexVelocity::first_half(double t) const {
  const double phase = t / T_ - std::floor(t / T_);
  return phase < 0.5;
}

Vec2 VortexVelocity::value(const Vec2& x, double t) const {
  Vec2 v(std::cos(2 * M_PI * x.y()), std::cos(2 * M_PI * x.x()));
  if (chaotic_) {
    if (first_half(t))
      v.x() += v0_ * std::sin(2 * M_PI * x.y());
    else
      v.y() += v0_ * std::sin(2 * M_PI * x.x());
  }
  return v;
}

Mat2 VortexVelocity::jacobian(const Vec2& x, double t) const {
  Mat2 J = Mat2::Zero();
  J(0, 1) = -2 * M_PI * std::sin(2 * M_PI * x.y());
  J(1, 0) = -2 * M_PI * std::sin(2 * M_PI * x.x());
  if (chaotic_) {
    if (first_half(t))
      J(0, 1) += 2 * M_PI * v0_ * std::cos(2 * M_PI * x.y());
    else
      J(1, 0) += 2 * M_PI * v0_ * std::cos(2 * M_PI * x.x());
  }
  return J;
}

double VortexVelocity::divergence(const Vec2& x, double t) const { return jacobian(x, t).trace(); }

Vec2 CellularVelocity::value(const Vec2& x, double) const {
  const double k = 2 * M_PI / L_;
  return Vec2(-std::sin(k * x.x()) * std::cos(k * x.y()), std::cos(k * x.x()) * std::sin(k * x.y()));
}

Mat2 CellularVelocity::jacobian(const Vec2& x, double) const {
  const double k = 2 * M_PI / L_;
  const double sx = std::sin(k * x.x()), cx = std::cos(k * x.x());
  const double sy = std::sin(k * x.y()), cy = std::cos(k * x.y());
  Mat2 J;
  J << -k * cx * cy, k * sx * sy, -k * sx * sy, k * cx * cy;
  return J;
}

double CellularVelocity::divergence(const Vec2& x, double t) const { return jacobian(x, t).trace(); }

namespace {

Mat2 rotation(double theta) {
  Mat2 R;
  R << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  return R;
}

}  // namespace

Mat2 AnisotropicDiffusivity::value(const Vec2& x) const {
  const double xs = x.x() + w1_, ys = x.y() + w1_;
  Mat2 D0;
  D0 << ys * ys + w2_ * xs * xs, -(1 - w2_) * xs * ys, -(1 - w2_) * xs * ys, w2_ * ys * ys + xs * xs;
  const Mat2 R = rotation(theta_);
  return w0_ * R * D0 * R.transpose();
}

Vec2 AnisotropicDiffusivity::divergence(const Vec2& x) const {
  const double xs = x.x() + w1_, ys = x.y() + w1_;
  Mat2 dx, dy;
  dx << 2 * w2_ * xs, -(1 - w2_) * ys, -(1 - w2_) * ys, 2 * xs;
  dy << 2 * ys, -(1 - w2_) * xs, -(1 - w2_) * xs, 2 * w2_ * ys;
  const Mat2 R = rotation(theta_);
  const Mat2 Dx = w0_ * R * dx * R.transpose();
  const Mat2 Dy = w0_ * R * dy * R.transpose();
  // d/dx_j of R D0(x) R^T chains through x* = x + w1 and y* = y + w1, but
  // R rotates tensor components only; the argument is not rotated.
  return Vec2(Dx(0, 0) + Dy(0, 1), Dx(1, 0) + Dy(1, 1));
}

std::pair<double, double> AnisotropicDiffusivity::eigenvalues(const Vec2& x) const {
  const double xs = x.x() + w1_, ys = x.y() + w1_;
  const double r2 = xs * xs + ys * ys;
  return {w0_ * r2, w0_ * w2_ * r2};
}

Weights evaluate_weights(WeightType type, const Mat2& D, double alpha, int dim) {
  Weights w{Mat2::Identity(), 1.0};
  if (type == WeightType::Type1) return w;
  if (dim == 1) {
    w.A = Mat2::Zero();
    w.A(0, 0) = 1.0 / std::sqrt(D(0, 0));
    w.A(1, 1) = 1.0;
  } else {
    Eigen::SelfAdjointEigenSolver<Mat2> es(D);
    if (es.eigenvalues().minCoeff() <= 0.0) throw EllipticityError("diffusivity not positive definite");
    w.A = es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
          es.eigenvectors().transpose();
  }
  w.beta = (alpha != 0.0) ? 1.0 / std::sqrt(alpha) : 1.0;
  return w;
}

EigenBounds diffusivity_bounds(const Diffusivity& D, const std::vector<Vec2>& samples, int dim) {
  EigenBounds b;
  for (const auto& x : samples) {
    const Mat2 d = D.value(x);
    if (dim == 1) {
      b.lambda_min = std::min(b.lambda_min, d(0, 0));
      b.lambda_max = std::max(b.lambda_max, d(0, 0));
      continue;
    }
    Eigen::SelfAdjointEigenSolver<Mat2> es(0.5 * (d + d.transpose()), Eigen::EigenvaluesOnly);
    b.lambda_min = std::min(b.lambda_min, es.eigenvalues()(0));
    b.lambda_max = std::max(b.lambda_max, es.eigenvalues()(1));
  }
  return b;
}

AssumptionReport check_assumptions(const ProblemSpec& p, const std::vector<Vec2>& samples) {
  AssumptionReport r;
  r.eig = diffusivity_bounds(*p.diffusivity, samples, p.dim);
  if (!(r.eig.lambda_min > 0.0)) {
    std::ostringstream os;
    os << "diffusivity is not uniformly elliptic (lambda_min = " << r.eig.lambda_min << ")";
    throw EllipticityError(os.str());
  }
  for (const auto& x : samples) {
    const Mat2 d = p.diffusivity->value(x);
    if (p.dim == 2 && std::abs(d(0, 1) - d(1, 0)) > 1e-12 * (1.0 + d.norm()))
      throw EllipticityError("diffusivity is not symmetric");
    const double a = p.alpha.value(x, p.time);
    const double dv = p.velocity->divergence(x, p.time);
    r.min_alpha_plus_divv = std::min(r.min_alpha_plus_divv, a + dv);
    r.min_alpha_plus_half_divv = std::min(r.min_alpha_plus_half_divv, a + 0.5 * dv);
  }
  const double tol = 1e-12;
  if (r.min_alpha_plus_divv < -tol) r.warnings.push_back("alpha + div v < 0 at some sample points");
  if (r.min_alpha_plus_half_divv < -tol) r.warnings.push_back("alpha + div v / 2 < 0 at some sample points");
  return r;
}

double strongly_nonuniform_indicator(const VelocityField& v, double dt, const std::vector<Vec2>& samples,
                                     double t) {
  double m = 0.0;
  bool first = true;
  for (const auto& x : samples) {
    const Mat2 J = v.jacobian(x, t);
    const double s = (J(0, 0) - J(1, 1)) * dt;
    if (first || s > m) m = s;
    first = false;
  }
  return m;
}

}  // namespace lsfem
