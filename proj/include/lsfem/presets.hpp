#pragma once

#include "lsfem/analysis.hpp"
#include "lsfem/reactions.hpp"
#include "lsfem/solver.hpp"

#include <optional>
#include <string>
#include <vector>

namespace lsfem {

enum class PresetKind { Academic, Convergence, Steady, Bimolecular };

const char* to_string(PresetKind k);

// Benchmark setup with every parameter the command line may override.
struct Preset {
  std::string name;
  std::string description;
  PresetKind kind = PresetKind::Steady;

  Domain domain;
  ElementKind element = ElementKind::Q4;
  int xseed = 11, yseed = 11;
  std::vector<int> sequence;  // convergence meshes (square)

  Formulation formulation = Formulation::NSSD;
  ConstraintMode constraints = ConstraintMode::None;
  StabilizationConstants stabilization;
  WeightType weights = WeightType::Type1;

  double dt = 0.0, t_final = 0.0;
  std::optional<double> y0;

  // Physical parameters; their meaning depends on the benchmark.
  double diffusivity = 1.0;
  double speed = 0.0;        // academic and 1D bimolecular velocity
  double source = 0.0;       // academic f
  int case_id = 1;           // 1D bimolecular case
  bool anisotropic = false;  // plume with anisotropic diffusivity
  bool chaotic = false;      // time-periodic perturbed vortex
  double cell_length = 0.5;  // cellular flow
  std::string benchmark;     // academic-1d, hconv, thermal-layer, bimolecular-1d, plume, vortex, cellular
};

std::vector<std::string> preset_names();
// Throws ConfigError for unknown names.
Preset find_preset(const std::string& name);

// Mesh for the preset with boundary facets classified.
StructuredMesh make_mesh(const Preset& p, int xseed, int yseed);

// Single-field problem of the Convergence and Steady presets.
ProblemSpec make_problem(const Preset& p);

// Species data of the Bimolecular presets.
ReactionSystem make_reaction_system(const Preset& p);

SolveOptions make_solve_options(const Preset& p);

}  // namespace lsfem
