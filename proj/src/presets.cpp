#include "lsfem/presets.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace lsfem {

const char* to_string(PresetKind k) {
  switch (k) {
    case PresetKind::Academic: return "academic";
    case PresetKind::Convergence: return "convergence";
    case PresetKind::Steady: return "steady";
    case PresetKind::Bimolecular: return "bimolecular";
  }
  return "?";
}

namespace {

Preset academic() {
  Preset p;
  p.name = p.benchmark = "academic-1d";
  p.description = "1D Galerkin and normal-equations counterexample, 11 elements, v/D = 150, f = 1";
  p.kind = PresetKind::Academic;
  p.domain = Domain{0.0, 1.0, 0.0, 0.0};
  p.element = ElementKind::L2;
  p.xseed = 12;
  p.yseed = 1;
  p.speed = 150.0;
  p.diffusivity = 1.0;
  p.source = 1.0;
  p.formulation = Formulation::Primitive;
  return p;
}

Preset hconv(bool desk) {
  Preset p;
  p.name = desk ? "hconv-desk" : "hconv";
  p.benchmark = "hconv";
  p.description = "manufactured solution h-convergence, D = 1e-2, Q4";
  p.kind = PresetKind::Convergence;
  p.domain = Domain{0.0, 1.0, 0.0, 1.0};
  p.sequence = desk ? std::vector<int>{11, 21, 41} : std::vector<int>{11, 21, 41, 81};
  p.xseed = p.yseed = p.sequence.back();
  p.diffusivity = 1e-2;
  p.stabilization = {0.01, 0.0, 0.0, 0.01, 0.0, 0.0};
  return p;
}

Preset thermal() {
  Preset p;
  p.name = p.benchmark = "thermal-layer";
  p.description = "thermal boundary layer, v = 2y e_x, D = 1e-4, Q4 41x21";
  p.kind = PresetKind::Steady;
  p.domain = Domain{0.0, 1.0, 0.0, 0.5};
  p.xseed = 41;
  p.yseed = 21;
  p.diffusivity = 1e-4;
  p.constraints = ConstraintMode::LSB_NN;
  p.stabilization = {0.01, 0.0, 0.0, 0.001, 0.0, 0.0};
  return p;
}

Preset bimolecular_1d(int which, bool pe20) {
  Preset p;
  p.name = "bimolecular-1d-case" + std::to_string(which) + (pe20 ? "-pe20" : "");
  p.benchmark = "bimolecular-1d";
  p.description = "1D fast bimolecular reaction, case " + std::to_string(which) + (pe20 ? ", v = 1" : ", v = 0.25");
  p.kind = PresetKind::Bimolecular;
  p.domain = Domain{0.0, 1.0, 0.0, 0.0};
  p.element = ElementKind::L2;
  p.xseed = 11;
  p.yseed = 1;
  p.case_id = which;
  p.diffusivity = 2.5e-3;
  p.speed = pe20 ? 1.0 : 0.25;
  p.stabilization = pe20 ? StabilizationConstants{0.083, 0.0, 0.0, 0.0121, 0.0, 0.0}
                         : StabilizationConstants{0.08, 0.0, 0.0, 0.04, 0.0, 0.0};
  return p;
}

Preset plume(bool type2, bool desk) {
  Preset p;
  p.name = std::string("plume-type") + (type2 ? "2" : "1") + (desk ? "-desk" : "");
  p.benchmark = "plume";
  p.description = std::string("steady plume in a reaction tank, ") + (type2 ? "anisotropic" : "scalar") + " diffusivity";
  p.kind = PresetKind::Bimolecular;
  p.domain = Domain{0.0, 2.0, 0.0, 1.0};
  p.xseed = p.yseed = desk ? 51 : 501;
  p.diffusivity = 1e-2;
  p.anisotropic = type2;
  p.constraints = ConstraintMode::LSB_DMP;
  p.stabilization = {1e-3, 0.0, 1e-4, 1e-3, 0.0, 1e-4};
  return p;
}

Preset vortex(bool chaotic, bool desk) {
  Preset p;
  p.name = std::string("vortex-mix") + (chaotic ? "-chaotic" : "") + (desk ? "-desk" : "");
  p.benchmark = "vortex";
  p.description = std::string(chaotic ? "chaotic" : "non-chaotic") + " vortex-stirred mixing, zero-flux walls";
  p.kind = PresetKind::Bimolecular;
  p.domain = Domain{0.0, 1.0, 0.0, 1.0};
  p.xseed = p.yseed = desk ? 41 : 121;
  p.diffusivity = 1e-2;
  p.chaotic = chaotic;
  p.constraints = ConstraintMode::LSB_NN;
  p.stabilization = {1e-3, 1e-4, 0.0, 1e-3, 1e-4, 0.0};
  p.dt = 0.1;
  p.t_final = desk ? 1.0 : 5.0;
  return p;
}

Preset cellular(bool desk) {
  Preset p;
  p.name = desk ? "cellular-desk" : "cellular";
  p.benchmark = "cellular";
  p.description = "species mixing in cellular flow, zero-flux walls";
  p.kind = PresetKind::Bimolecular;
  p.domain = Domain{0.0, 1.0, 0.0, 0.5};
  p.xseed = desk ? 21 : 61;
  p.yseed = desk ? 41 : 241;
  p.diffusivity = 5e-3;
  p.cell_length = 0.5;
  p.constraints = ConstraintMode::LSB_DMP;
  p.stabilization = {1e-3, 1e-4, 0.0, 1e-3, 1e-4, 0.0};
  p.dt = 0.1;
  p.t_final = desk ? 1.0 : 5.0;
  return p;
}

std::vector<Preset> all_presets() {
  return {academic(),
          hconv(false),
          hconv(true),
          thermal(),
          bimolecular_1d(1, false),
          bimolecular_1d(1, true),
          bimolecular_1d(2, false),
          bimolecular_1d(2, true),
          plume(false, false),
          plume(false, true),
          plume(true, false),
          plume(true, true),
          vortex(false, false),
          vortex(false, true),
          vortex(true, false),
          vortex(true, true),
          cellular(false),
          cellular(true)};
}

EdgePredicate all_edges() {
  return [](const BoundaryEdge&) { return true; };
}

EdgePredicate no_edges() {
  return [](const BoundaryEdge&) { return false; };
}

bool is_transport_only(const Preset& p) { return p.benchmark == "vortex" || p.benchmark == "cellular"; }

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> n;
  for (const auto& p : all_presets()) n.push_back(p.name);
  return n;
}

Preset find_preset(const std::string& name) {
  for (const auto& p : all_presets())
    if (p.name == name) return p;
  std::string list;
  for (const auto& n : preset_names()) list += (list.empty() ? "" : ", ") + n;
  throw ConfigError("unknown preset '" + name + "' (available: " + list + ")");
}

ProblemSpec make_problem(const Preset& p) {
  ProblemSpec s;
  if (p.benchmark == "hconv") {
    s = manufactured_problem(p.diffusivity).problem;
  } else if (p.benchmark == "thermal-layer") {
    s.velocity = std::make_shared<ShearVelocity>(2.0);
    s.diffusivity = std::make_shared<ScalarDiffusivity>(p.diffusivity);
    s.dirichlet_region = all_edges();
    const Domain d = p.domain;
    // The inflow value 1 also holds at the corner (x0, y0).
    s.dirichlet_value = [d](const Vec2& x, double) {
      if (x.x() <= d.x0) return 1.0;
      if (x.y() <= d.y0) return 0.0;
      if (x.y() >= d.y1) return 1.0;
      return (x.y() - d.y0) / (d.y1 - d.y0);  // 2y on [0, 0.5]
    };
  } else if (p.benchmark == "academic-1d") {
    s.dim = 1;
    s.velocity = std::make_shared<ConstantVelocity>(Vec2(p.speed, 0.0));
    s.diffusivity = std::make_shared<ScalarDiffusivity>(p.diffusivity);
    s.source = ScalarField::constant(p.source);
    s.dirichlet_region = all_edges();
  } else {
    throw ConfigError("preset '" + p.name + "' has no single-field problem");
  }
  s.weights = p.weights;
  return s;
}

ReactionSystem make_reaction_system(const Preset& p) {
  ReactionSystem sys;
  std::shared_ptr<VelocityField> vel;
  std::shared_ptr<Diffusivity> diff = std::make_shared<ScalarDiffusivity>(p.diffusivity);
  const Domain d = p.domain;

  if (p.benchmark == "bimolecular-1d") {
    sys.n = {2.0, 1.0, 1.0};
    vel = std::make_shared<ConstantVelocity>(Vec2(p.speed, 0.0));
  } else if (p.benchmark == "plume") {
    sys.n = {1.0, 1.0, 1.0};
    vel = MultiModeVelocity::plume_default(d.x1 - d.x0, d.y1 - d.y0);
    if (p.anisotropic) diff = std::make_shared<AnisotropicDiffusivity>(std::numbers::pi / 6.0, 1.0, 1e-3, 1e-3);
  } else if (p.benchmark == "vortex") {
    sys.n = {1.0, 1.0, 1.0};
    vel = p.chaotic ? std::make_shared<VortexVelocity>(0.8, 1.0) : std::make_shared<VortexVelocity>();
  } else if (p.benchmark == "cellular") {
    sys.n = {1.0, 1.0, 1.0};
    vel = std::make_shared<CellularVelocity>(p.cell_length);
  } else {
    throw ConfigError("preset '" + p.name + "' is not a reaction benchmark");
  }

  for (auto& s : sys.species) {
    s.dim = p.element == ElementKind::L2 ? 1 : 2;
    s.velocity = vel;
    s.diffusivity = diff;
    s.weights = p.weights;
    if (is_transport_only(p)) {
      s.dirichlet_region = no_edges();
      s.flux_wall_region = all_edges();
    } else {
      s.dirichlet_region = all_edges();
    }
  }

  if (p.benchmark == "bimolecular-1d") {
    sys.species[kA].dirichlet_value = [d](const Vec2& x, double) { return x.x() <= d.x0 ? 1.0 : 0.0; };
    if (p.case_id == 1) {
      sys.species[kB].source = ScalarField::constant(1.0);
    } else {
      sys.species[kB].dirichlet_value = [d](const Vec2& x, double) { return x.x() >= d.x1 ? 1.0 : 0.0; };
    }
  } else if (p.benchmark == "plume") {
    // Left side: A on the lower half, B on the upper half, both 1/2 on the split.
    const double ym = 0.5 * (d.y0 + d.y1);
    auto side = [d, ym](bool lower) {
      return [d, ym, lower](const Vec2& x, double) {
        if (x.x() > d.x0) return 0.0;
        if (x.y() == ym) return 0.5;
        return (x.y() < ym) == lower ? 1.0 : 0.0;
      };
    };
    sys.species[kA].dirichlet_value = side(true);
    sys.species[kB].dirichlet_value = side(false);
  } else if (p.benchmark == "vortex") {
    auto slug = [](const Vec2& x) {
      auto in = [&](double cx, double cy) { return std::abs(x.x() - cx) <= 0.125 && std::abs(x.y() - cy) <= 0.125; };
      return in(0.25, 0.75) || in(0.75, 0.25);
    };
    sys.initial[kA] = [slug](const Vec2& x) { return slug(x) ? 8.0 : 0.0; };
    sys.initial[kB] = [slug](const Vec2& x) { return slug(x) ? 0.0 : 1.5; };
    sys.initial[kC] = [](const Vec2&) { return 0.0; };
  } else if (p.benchmark == "cellular") {
    const double ym = 0.5 * (d.y0 + d.y1);
    sys.initial[kA] = [ym](const Vec2& x) { return x.y() < ym ? 1.0 : x.y() == ym ? 0.5 : 0.0; };
    sys.initial[kB] = [ym](const Vec2& x) { return x.y() > ym ? 1.0 : x.y() == ym ? 0.5 : 0.0; };
    sys.initial[kC] = [](const Vec2&) { return 0.0; };
  }
  return sys;
}

StructuredMesh make_mesh(const Preset& p, int xseed, int yseed) {
  StructuredMesh mesh = p.element == ElementKind::L2 ? generate_interval_mesh(p.domain.x0, p.domain.x1, xseed)
                                                     : generate_structured_mesh(p.domain, xseed, yseed, p.element);
  std::shared_ptr<VelocityField> vel;
  EdgePredicate dir;
  bool require = true;
  if (p.kind == PresetKind::Bimolecular) {
    const ReactionSystem sys = make_reaction_system(p);
    vel = sys.species[kA].velocity;
    dir = sys.species[kA].dirichlet_region;
    require = !is_transport_only(p);
  } else {
    const ProblemSpec s = make_problem(p);
    vel = s.velocity;
    dir = s.dirichlet_region;
  }
  classify_boundary(mesh, [vel](const Vec2& x) { return vel->value(x, 0.0); }, dir, require);
  return mesh;
}

SolveOptions make_solve_options(const Preset& p) {
  SolveOptions o;
  o.formulation = p.formulation;
  o.constraints = p.constraints;
  o.stabilization = p.stabilization;
  return o;
}

}  // namespace lsfem
