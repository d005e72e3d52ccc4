#pragma once

#include "lsfem/mesh.hpp"
#include "lsfem/types.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace lsfem {

// Exact trichotomy: -1, 0 or +1.
int sign(double phi);

class VelocityField {
 public:
  virtual ~VelocityField() = default;
  virtual Vec2 value(const Vec2& x, double t) const = 0;
  virtual double divergence(const Vec2& x, double t) const = 0;
  // J_ij = d v_i / d x_j
  virtual Mat2 jacobian(const Vec2& x, double t) const = 0;
  virtual std::string name() const = 0;
};

class ConstantVelocity : public VelocityField {
 public:
  explicit ConstantVelocity(Vec2 v) : v_(v) {}
  Vec2 value(const Vec2&, double) const override { return v_; }
  double divergence(const Vec2&, double) const override { return 0.0; }
  Mat2 jacobian(const Vec2&, double) const override { return Mat2::Zero(); }
  std::string name() const override { return "constant"; }

 private:
  Vec2 v_;
};

// v = (a * y, 0): shear flow of the thermal boundary layer.
class ShearVelocity : public VelocityField {
 public:
  explicit ShearVelocity(double a) : a_(a) {}
  Vec2 value(const Vec2& x, double) const override { return Vec2(a_ * x.y(), 0.0); }
  double divergence(const Vec2&, double) const override { return 0.0; }
  Mat2 jacobian(const Vec2&, double) const override {
    Mat2 J = Mat2::Zero();
    J(0, 1) = a_;
    return J;
  }
  std::string name() const override { return "shear"; }

 private:
  double a_;
};

struct StreamMode {
  double amplitude, p, q;
};

// v_x = -d psi/dy, v_y = d psi/dx for
// psi = -y - sum A_k cos(p_k pi x / Lx - pi/2) sin(q_k pi y / Ly).
class MultiModeVelocity : public VelocityField {
 public:
  MultiModeVelocity(std::vector<StreamMode> modes, double Lx, double Ly)
      : modes_(std::move(modes)), Lx_(Lx), Ly_(Ly) {}
  static std::shared_ptr<MultiModeVelocity> plume_default(double Lx = 2.0, double Ly = 1.0);
  Vec2 value(const Vec2& x, double t) const override;
  double divergence(const Vec2& x, double t) const override;
  Mat2 jacobian(const Vec2& x, double t) const override;
  std::string name() const override { return "multimode"; }

 private:
  std::vector<StreamMode> modes_;
  double Lx_, Ly_;
};

// v = (cos 2 pi y, cos 2 pi x), optionally with the time-periodic chaotic
// perturbation of amplitude v0 and period T.
class VortexVelocity : public VelocityField {
 public:
  VortexVelocity() = default;
  VortexVelocity(double period, double v0) : chaotic_(true), T_(period), v0_(v0) {}
  Vec2 value(const Vec2& x, double t) const override;
  double divergence(const Vec2& x, double t) const override;
  Mat2 jacobian(const Vec2& x, double t) const override;
  std::string name() const override { return chaotic_ ? "chaotic-vortex" : "vortex"; }

 private:
  // true during the first half of each period
  bool first_half(double t) const;
  bool chaotic_ = false;
  double T_ = 0.0, v0_ = 0.0;
};

// v = (-sin(2 pi x/L) cos(2 pi y/L), cos(2 pi x/L) sin(2 pi y/L)).
class CellularVelocity : public VelocityField {
 public:
  explicit CellularVelocity(double cell) : L_(cell) {}
  Vec2 value(const Vec2& x, double t) const override;
  double divergence(const Vec2& x, double t) const override;
  Mat2 jacobian(const Vec2& x, double t) const override;
  std::string name() const override { return "cellular"; }

 private:
  double L_;
};

class Diffusivity {
 public:
  virtual ~Diffusivity() = default;
  virtual Mat2 value(const Vec2& x) const = 0;
  // (div D)_i = sum_j d D_ij / d x_j
  virtual Vec2 divergence(const Vec2& x) const = 0;
  virtual std::string name() const = 0;
};

class ScalarDiffusivity : public Diffusivity {
 public:
  explicit ScalarDiffusivity(double d) : d_(d) {}
  Mat2 value(const Vec2&) const override { return d_ * Mat2::Identity(); }
  Vec2 divergence(const Vec2&) const override { return Vec2::Zero(); }
  std::string name() const override { return "scalar"; }

 private:
  double d_;
};

// D = R D0 R^T with D0 = w0 [[y*^2 + w2 x*^2, -(1 - w2) x* y*], [., w2 y*^2 + x*^2]],
// x* = x + w1, y* = y + w1.
class AnisotropicDiffusivity : public Diffusivity {
 public:
  AnisotropicDiffusivity(double theta, double w0, double w1, double w2)
      : theta_(theta), w0_(w0), w1_(w1), w2_(w2) {}
  Mat2 value(const Vec2& x) const override;
  Vec2 divergence(const Vec2& x) const override;
  std::string name() const override { return "anisotropic"; }
  // Closed-form eigenvalues (large, small).
  std::pair<double, double> eigenvalues(const Vec2& x) const;

 private:
  double theta_, w0_, w1_, w2_;
};

// Scalar field with analytic gradient.
struct ScalarField {
  std::function<double(const Vec2&, double)> value;
  std::function<Vec2(const Vec2&, double)> gradient;
  static ScalarField constant(double c);
};

enum class WeightType { Type1, Type2 };

struct Weights {
  Mat2 A;
  double beta;
};

// Type-1: A = I, beta = 1. Type-2: A = D^{-1/2}, beta = alpha^{-1/2} (1 if alpha == 0).
Weights evaluate_weights(WeightType type, const Mat2& D, double alpha, int dim);

struct EigenBounds {
  double lambda_min = kInf;
  double lambda_max = 0.0;
};

// Eigenvalue extrema of the (dim x dim) diffusivity over the given samples.
EigenBounds diffusivity_bounds(const Diffusivity& D, const std::vector<Vec2>& samples, int dim);

struct ProblemSpec {
  int dim = 2;
  ScalarField alpha = ScalarField::constant(0.0);
  std::shared_ptr<VelocityField> velocity = std::make_shared<ConstantVelocity>(Vec2::Zero());
  std::shared_ptr<Diffusivity> diffusivity = std::make_shared<ScalarDiffusivity>(1.0);
  ScalarField source = ScalarField::constant(0.0);

  // Facets carrying prescribed concentration.
  EdgePredicate dirichlet_region;
  std::function<double(const Vec2&, double)> dirichlet_value = [](const Vec2&, double) { return 0.0; };
  // Prescribed normal flux on Neumann facets.
  std::function<double(const Vec2&, double)> neumann_value = [](const Vec2&, double) { return 0.0; };
  // Neumann facets on which the total normal flux q.n = q^p is imposed
  // strongly on the nodal flux unknowns (impermeable walls).
  EdgePredicate flux_wall_region;

  WeightType weights = WeightType::Type1;
  std::optional<double> c_min;
  std::optional<double> c_max;
  double time = 0.0;
};

struct AssumptionReport {
  EigenBounds eig;
  double min_alpha_plus_divv = kInf;
  double min_alpha_plus_half_divv = kInf;
  std::vector<std::string> warnings;
};

// Ellipticity is a hard error; the (alpha + div v) conditions only warn.
AssumptionReport check_assumptions(const ProblemSpec& p, const std::vector<Vec2>& samples);

// max over samples of (d v_x/dx - d v_y/dy) * dt.
double strongly_nonuniform_indicator(const VelocityField& v, double dt, const std::vector<Vec2>& samples,
                                     double t = 0.0);

}  // namespace lsfem
