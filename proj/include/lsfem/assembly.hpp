#pragma once

#include "lsfem/elements.hpp"
#include "lsfem/mesh.hpp"
#include "lsfem/physics.hpp"
#include "lsfem/types.hpp"

#include <string>
#include <vector>

namespace lsfem {

struct StabilizationConstants {
  double delta0 = 0.0, delta1 = 0.0, delta2 = 0.0;
  double tau0 = 0.0, tau1 = 0.0, tau2 = 0.0;
};

struct StabilizationParams {
  StabilizationConstants constants;
  std::vector<double> delta;  // per element, <= 0
  std::vector<double> tau;    // per element, <= 0
  double lambda_min = 0.0, lambda_max = 0.0;
  double max_alpha_divv_sq = 0.0;
  double max_divD_sq = 0.0;

  static StabilizationParams zero(int num_elements);
};

struct AssemblyOptions {
  RuleLevel level = RuleLevel::Standard;
  // Hessian terms of the Q4 operator rows; no effect on L2 and T3.
  bool second_derivatives = true;
  int threads = 1;
  // Optional nodal field added to the source and its gradient through the
  // finite element interpolant (backward Euler history term).
  VectorXd nodal_source;
};

// Physical coordinates of every quadrature point of the mesh.
std::vector<Vec2> quadrature_points(const StructuredMesh& mesh, RuleLevel level);

StabilizationParams compute_stabilization(const StructuredMesh& mesh, const ProblemSpec& problem,
                                          const StabilizationConstants& constants,
                                          RuleLevel level = RuleLevel::Enriched);

// Unknown layout: x = [c (nnodes); q (nnodes * dim, node-major)].
struct GlobalSystem {
  int nnodes = 0;
  int dim = 2;
  SpMat K;           // full symmetric Hessian of the functional
  VectorXd r;        // load vector
  double energy0 = 0.0;  // functional at x = 0 is energy0 / 2
  SpMat A;           // LSB rows [A_c | A_q], one per element
  VectorXd b;        // b_f
  VectorXd lower, upper;  // concentration bounds, size nnodes

  int nc() const { return nnodes; }
  int nq() const { return nnodes * dim; }
  int size() const { return nc() + nq(); }
  SpMat K_cc() const;
  SpMat K_cq() const;
  SpMat K_qq() const;
  SpMat A_c() const;
  SpMat A_q() const;
  // 0.5 x^T K x - r^T x + 0.5 energy0
  double functional(const VectorXd& x) const;
};

GlobalSystem assemble_primitive(const StructuredMesh& mesh, const ProblemSpec& problem,
                                const AssemblyOptions& options = {});

GlobalSystem assemble_nssd(const StructuredMesh& mesh, const ProblemSpec& problem,
                           const StabilizationParams& stab, AssemblyOptions options = {RuleLevel::Enriched});

// Functional value at x summed from squared residuals, free of the
// cancellation in 0.5 x^T K x - r^T x + 0.5 energy0. Pass zero
// stabilization for the primitive functional.
double evaluate_functional(const StructuredMesh& mesh, const ProblemSpec& problem, const StabilizationParams& stab,
                           const VectorXd& x, const AssemblyOptions& options = {});

// Rows of int alpha c + sum over element edges int q.n = int f.
void assemble_lsb_constraints(const StructuredMesh& mesh, const ProblemSpec& problem, SpMat& A, VectorXd& b,
                              const AssemblyOptions& options = {});

// Global dofs fixed by strong conditions with their values: Dirichlet
// concentrations and normal flux components on flux walls.
struct FixedDofs {
  std::vector<int> index;  // ascending
  std::vector<double> value;
};

FixedDofs collect_fixed_dofs(const StructuredMesh& mesh, const ProblemSpec& problem);

// Problem over the free dofs after strong elimination.
struct ReducedSystem {
  SpMat K;
  VectorXd r;
  double energy0 = 0.0;
  SpMat A;
  VectorXd b;
  VectorXd lower, upper;
  std::vector<int> free;  // reduced index -> global dof
  VectorXd fixed_full;    // global vector holding the fixed values, zero elsewhere
  int num_free_c = 0;     // free concentration dofs come first

  VectorXd expand(const VectorXd& y) const;
  VectorXd restrict_(const VectorXd& x) const;
};

ReducedSystem apply_dirichlet(const GlobalSystem& system, const FixedDofs& fixed);

// MatrixMarket coordinate dump of K, A and the load vectors into dir.
void dump_matrix_market(const GlobalSystem& system, const std::string& dir);

}  // namespace lsfem
