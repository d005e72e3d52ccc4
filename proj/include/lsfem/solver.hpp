#pragma once

#include "lsfem/assembly.hpp"
#include "lsfem/mesh.hpp"
#include "lsfem/physics.hpp"
#include "lsfem/qp.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace lsfem {

enum class Formulation { Primitive, NSSD };

// NN is DMP with c_min = 0 and c_max = +inf.
enum class ConstraintMode { None, NN, DMP, LSB, LSB_NN, LSB_DMP };

const char* to_string(Formulation f);
const char* to_string(ConstraintMode c);
Formulation parse_formulation(const std::string& s);
ConstraintMode parse_constraints(const std::string& s);
bool has_lsb(ConstraintMode c);
bool has_bounds(ConstraintMode c);

// Nodal concentration and flux on a mesh.
struct Field {
  const StructuredMesh* mesh = nullptr;
  VectorXd c;  // nnodes
  VectorXd q;  // nnodes * dim, node-major
  double time = 0.0;

  VectorXd packed() const;
  // Concentration at reference point xi of element e.
  double value(int e, const Vec2& xi) const;
  // Integral of c over the domain.
  double integral(RuleLevel level = RuleLevel::Standard) const;
};

Field make_field(const StructuredMesh& mesh, const VectorXd& x, double time);
Field interpolate(const StructuredMesh& mesh, const std::function<double(const Vec2&)>& c,
                  const std::function<Vec2(const Vec2&)>& q = {}, double time = 0.0);

struct BalanceReport {
  VectorXd lsb;  // per element: int alpha c + oint q.n - int f
  double gsb = 0.0;
  double max_abs_lsb = 0.0;
  double abs_gsb = 0.0;
};

struct SolveOptions {
  Formulation formulation = Formulation::NSSD;
  ConstraintMode constraints = ConstraintMode::None;
  StabilizationConstants stabilization;
  // Defaults: Standard for primitive, Enriched for NSSD.
  std::optional<RuleLevel> level;
  bool second_derivatives = true;
  int threads = 1;
  QPOptions qp;
  // Overrides for the DMP bounds.
  std::optional<double> c_min, c_max;
  // Data extrema entering the default DMP bounds (initial condition).
  std::optional<double> data_min, data_max;
};

RuleLevel effective_level(const SolveOptions& o);

struct SteadyResult {
  Field field;
  QPSolution qp;
  BalanceReport balance;
  double objective = 0.0;
  StabilizationParams stab;
  AssumptionReport assumptions;
  double lower = -kInf, upper = kInf;  // bounds that were imposed
};

// Bounds for a constraint mode: NN -> [0, inf); DMP -> problem or option
// overrides, else [min(0, min c^p, data_min), max(max c^p, data_max)].
std::pair<double, double> constraint_bounds(const StructuredMesh& mesh, const ProblemSpec& problem,
                                            const SolveOptions& options);

BalanceReport lsb_errors(const Field& field, const ProblemSpec& problem, const AssemblyOptions& options = {});

// Assembled and reduced system for one solve, without the QP step.
struct PreparedSystem {
  GlobalSystem global;
  ReducedSystem reduced;
  StabilizationParams stab;
  AssemblyOptions assembly;
};

PreparedSystem prepare_system(const StructuredMesh& mesh, const ProblemSpec& problem, const SolveOptions& options,
                              const VectorXd& nodal_source = {});

SteadyResult solve_steady(const StructuredMesh& mesh, const ProblemSpec& problem, const SolveOptions& options,
                          const VectorXd& nodal_source = {});

struct TransientConfig {
  double dt = 0.0;
  double t_final = 0.0;
  std::function<double(const Vec2&)> initial;
  // Called after every step; returning false stops the run.
  std::function<bool(int step, const SteadyResult&)> on_step;
};

struct TransientResult {
  std::vector<Field> fields;  // initial state first
  std::vector<KKTReport> certificates;
  std::vector<QPStatus> status;
};

// Backward Euler: each step solves with alpha + 1/dt and f + c_prev/dt.
TransientResult solve_transient(const StructuredMesh& mesh, const ProblemSpec& problem, const SolveOptions& options,
                                const TransientConfig& config);

}  // namespace lsfem
