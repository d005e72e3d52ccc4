#pragma once

#include "lsfem/physics.hpp"
#include "lsfem/solver.hpp"

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace lsfem {

// A + B -> C with n_A A + n_B B -> n_C C.
struct Stoichiometry {
  double nA = 1.0, nB = 1.0, nC = 1.0;
};

enum Species { kA = 0, kB = 1, kC = 2 };

using InitialFn = std::function<double(const Vec2&)>;

// Per-species problems. Velocity, diffusivity, alpha, region selectors and
// weights are taken from species A; the others must share the same
// velocity and diffusivity objects.
struct ReactionSystem {
  Stoichiometry n;
  std::array<ProblemSpec, 3> species;
  std::array<InitialFn, 3> initial;  // optional, transient runs only
};

struct InvariantProblems {
  ProblemSpec F, G;
  InitialFn initial_F, initial_G;
};

// c_F = c_A + (n_A/n_C) c_C and c_G = c_B + (n_B/n_C) c_C, applied to
// sources, Dirichlet data, Neumann data and initial conditions.
InvariantProblems transform_to_invariants(const ReactionSystem& system);

struct SpeciesFields {
  VectorXd cA, cB, cC;
};

// Nodal recovery under the non-coexistence assumption.
SpeciesFields recover_species(const VectorXd& cF, const VectorXd& cG, const Stoichiometry& n);

struct SecondMoment {
  std::optional<double> theta2;  // absent when the total product vanishes
  bool negative = false;
  double numerator = 0.0, denominator = 0.0;
};

// int (y - y0)^2 c dOmega / int c dOmega with the Error-level rule.
SecondMoment second_moment(const StructuredMesh& mesh, const VectorXd& cC, double y0);

// Smallest nodal y with c > 1e-6 max c; nullopt if max c <= 0.
std::optional<double> product_onset_y(const StructuredMesh& mesh, const VectorXd& cC);

// Closed-form invariants on [0, 1]. Case 1: f_G source, c_G(0) = c_G(1) = 0.
// Case 2: c_G(0) = 0, c_G(1) = 1.
std::pair<double, double> analytical_invariants_1d(int which, double v, double D, double fG, double x);

// Exact c_C of the 1D cases through the recovery formulas.
double analytical_product_1d(int which, double v, double D, double fG, const Stoichiometry& n, double x);

struct MixingDiagnostics {
  double time = 0.0;
  std::array<double, 3> mean{};  // int c / area
  std::array<double, 3> min{}, max{};
  double integral_F = 0.0, integral_G = 0.0;
  SecondMoment moment;
  double y0 = 0.0;
};

struct BimolecularSnapshot {
  double time = 0.0;
  VectorXd cF, cG;
  SpeciesFields species;
  MixingDiagnostics diag;
};

struct BimolecularConfig {
  SolveOptions solve;
  // Transient when dt > 0.
  double dt = 0.0;
  double t_final = 0.0;
  // Fixed reference line; default is the onset of product at the first snapshot.
  std::optional<double> y0;
};

struct BimolecularResult {
  std::vector<BimolecularSnapshot> snapshots;
  std::vector<KKTReport> certificates;  // F and G solves interleaved per step
  std::vector<QPStatus> status;
};

BimolecularResult run_bimolecular(const StructuredMesh& mesh, const ReactionSystem& system,
                                  const BimolecularConfig& config);

// Header plus one row per snapshot:
// t, mean_A, mean_B, mean_C, theta2, min/max of A, B, C.
std::string diagnostics_csv(const BimolecularResult& result);

}  // namespace lsfem
