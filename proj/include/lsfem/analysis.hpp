#pragma once

#include "lsfem/mesh.hpp"
#include "lsfem/physics.hpp"
#include "lsfem/solver.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace lsfem {

// Closed-form solution with derivatives. grad_q row i is grad q_i.
struct ExactSolution {
  std::function<double(const Vec2&)> c;
  std::function<Vec2(const Vec2&)> grad_c;
  std::function<Vec2(const Vec2&)> q;
  std::function<Mat2(const Vec2&)> grad_q;
};

struct ErrorNorms {
  double l2_c = 0.0, h1_c = 0.0;  // H1 entries are seminorms
  double l2_q = 0.0, h1_q = 0.0;
};

// Error-level quadrature, two orders above Standard.
ErrorNorms error_norms(const Field& field, const ExactSolution& exact);

// Slopes log(e_i / e_{i+1}) / log(h_i / h_{i+1}).
std::vector<double> convergence_rates(const std::vector<double>& h, const std::vector<double>& e);

// c = sin(pi x) (E e^{m1 y} - e^{m2 y}) / (E - 1), E = e^{m2 - m1}, on the
// unit square with v = e_y, alpha = 0 and f = 0.
struct ManufacturedSolution {
  double D = 0.0, m1 = 0.0, m2 = 0.0;
  double g(double y) const;
  double dg(double y) const;
  double d2g(double y) const;
  ExactSolution exact() const;
  double source(const Vec2& x) const;  // alpha c + div(c v - D grad c)
};

struct ManufacturedProblem {
  ProblemSpec problem;
  ManufacturedSolution solution;
};

ManufacturedProblem manufactured_problem(double D);

enum class FluxBC { Total, Diffusive, SignAware };

// Solution of (v c - D c')' = 0 on (0, L), c(0) = c0, with the flux
// condition at x = L of the given kind.
std::function<double(double)> analytical_adr_1d(double v, double D, double c0, double q0, double L, FluxBC kind);

// Interior rows of the two-node Galerkin discretization of
// alpha c + v c' - D c'' = f on (0, 1), c(0) = c(1) = 0.
struct Galerkin1D {
  MatrixXd K;  // (nelem - 1) square
  VectorXd f;
  double h = 0.0;
};

Galerkin1D galerkin_1d_system(int nelem, double v, double D, double alpha, double f);

// 2-norm condition number by dense SVD.
double condition_number(const MatrixXd& M);

// Sign changes of consecutive first differences above floor in magnitude.
int oscillation_count(const VectorXd& values, double floor = 1e-8);

struct NormalEquationsDemo {
  double peclet = 0.0;  // v h / (2 D)
  double cond_K = 0.0, cond_KtK = 0.0;
  VectorXd galerkin, normal, normal_nn;  // interior nodal values
  int osc_galerkin = 0, osc_normal = 0, osc_normal_nn = 0;
  QPStatus nn_status = QPStatus::BestFeasible;
};

NormalEquationsDemo normal_equations_demo(int nelem, double v, double D, double f);

// Largest h for which the interior Galerkin rows are Z-patterned.
double zmatrix_threshold_1d(double v, double D, double alpha);

struct MatrixClass {
  bool is_Z = false, is_P = false, is_M = false;
};

MatrixClass classify_matrix(const MatrixXd& M, double tol = 0.0);

struct MeshMetrics {
  double h = 0.0;          // largest element diameter
  double h_edge = 0.0;     // largest edge length
  double peclet = 0.0;     // |v|_inf h / (2 lambda_min)
  double peclet_edge = 0.0;
  double damkohler = 0.0;  // alpha_inf h^2 / lambda_min
  double lambda_min = 0.0, lambda_max = 0.0;
};

MeshMetrics mesh_metrics(const StructuredMesh& mesh, const ProblemSpec& problem);

MatrixClass classify_matrix(const SpMat& M, double tol = 0.0);

// Single-field Galerkin stiffness (advection not integrated by parts,
// inflow Neumann term on the left) restricted to nodes off Dirichlet facets.
SpMat galerkin_stiffness(const StructuredMesh& mesh, const ProblemSpec& problem);

struct CoarseMeshVerdict {
  MeshMetrics metrics;
  MatrixClass galerkin;
  bool oscillations = false;      // Pe_h > 1
  bool reaction = false;          // Pe_h > 1 and Da_h > 1
  bool maximum_principle = false;  // Galerkin stiffness is not an M-matrix
};

CoarseMeshVerdict coarse_mesh_verdict(const StructuredMesh& mesh, const ProblemSpec& problem);

// Global balance int alpha c + oint_boundary q.n - int f evaluated from
// domain and boundary integrals, independent of the LSB rows.
double gsb_direct(const Field& field, const ProblemSpec& problem, RuleLevel level = RuleLevel::Standard);

// CSV with columns h,dofs,L2c,H1c,L2q,H1q,rate_L2c,rate_H1c,rate_L2q,rate_H1q.
std::string convergence_csv(const std::vector<double>& h, const std::vector<int>& dofs,
                            const std::vector<ErrorNorms>& errors);

}  // namespace lsfem
