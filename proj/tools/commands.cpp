#include "commands.hpp"

#include "lsfem/io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <ostream>

namespace lsfem::cli {

namespace {

using json = nlohmann::ordered_json;

json certificate_json(const std::string& label, QPStatus status, const KKTReport& k, int iterations, double tol) {
  return json{{"solve", label},
              {"status", to_string(status)},
              {"iterations", iterations},
              {"stationarity", k.stationarity},
              {"primal_equality", k.primal_equality},
              {"primal_bounds", k.primal_bounds},
              {"dual_feasibility", k.dual_feasibility},
              {"complementarity", k.complementarity},
              {"max", k.max()},
              {"tolerance", tol},
              {"pass", status == QPStatus::Optimal && k.max() <= tol}};
}

std::string path_in(const RunConfig& c, const std::string& file) {
  return (std::filesystem::path(c.out_dir) / file).string();
}

void write_json(const RunConfig& c, const std::string& file, const json& j) {
  if (c.json) write_text(path_in(c, file), j.dump(2) + "\n");
}

SolveOptions solve_options(const RunConfig& c) {
  SolveOptions o = make_solve_options(c.preset);
  o.level = c.quadrature;
  o.threads = c.threads;
  o.qp.certificate_tol = c.certificate_tol;
  o.c_min = c.c_min;
  o.c_max = c.c_max;
  return o;
}

bool all_pass(const json& certs) {
  for (const auto& j : certs)
    if (!j["pass"].get<bool>()) return false;
  return true;
}

int steady(const RunConfig& c, std::ostream& os) {
  const Preset& p = c.preset;
  const StructuredMesh mesh = make_mesh(p, p.xseed, p.yseed);
  const ProblemSpec problem = make_problem(p);
  const SteadyResult r = solve_steady(mesh, problem, solve_options(c));

  const double cmin = r.field.c.minCoeff(), cmax = r.field.c.maxCoeff();
  json certs = json::array({certificate_json("steady", r.qp.status, r.qp.kkt, r.qp.iterations, c.certificate_tol)});
  json summary{{"preset", p.name},
               {"formulation", to_string(p.formulation)},
               {"constraints", to_string(p.constraints)},
               {"nodes", mesh.num_nodes()},
               {"elements", mesh.num_elements()},
               {"objective", r.objective},
               {"bounds", {{"imposed_lower", r.lower}, {"imposed_upper", r.upper}, {"min_c", cmin}, {"max_c", cmax}}},
               {"balance", {{"max_abs_lsb", r.balance.max_abs_lsb}, {"abs_gsb", r.balance.abs_gsb}}},
               {"warnings", r.assumptions.warnings},
               {"certificates", certs}};
  // Infinite bounds are not valid JSON numbers.
  if (!std::isfinite(r.lower)) summary["bounds"]["imposed_lower"] = nullptr;
  if (!std::isfinite(r.upper)) summary["bounds"]["imposed_upper"] = nullptr;
  write_json(c, "certificate.json", summary);

  if (c.vtk) {
    std::vector<NodalVector> vec{{"q", r.field.q}};
    write_text(path_in(c, "field.vtk"), vtk_string(mesh, {{"c", r.field.c}}, vec, {{"lsb", r.balance.lsb}}));
  }
  if (c.csv) {
    std::string csv = "element,lsb\n";
    for (Eigen::Index e = 0; e < r.balance.lsb.size(); ++e)
      csv += std::to_string(e) + "," + format_double(r.balance.lsb(e)) + "\n";
    write_text(path_in(c, "balance.csv"), csv);
    std::string nodes = "node,x,y,c";
    for (int j = 0; j < mesh.dim; ++j) nodes += ",q" + std::to_string(j + 1);
    nodes += "\n";
    for (int i = 0; i < mesh.num_nodes(); ++i) {
      nodes += std::to_string(i) + "," + format_double(mesh.nodes[i].x()) + "," + format_double(mesh.nodes[i].y()) +
               "," + format_double(r.field.c(i));
      for (int j = 0; j < mesh.dim; ++j) nodes += "," + format_double(r.field.q(i * mesh.dim + j));
      nodes += "\n";
    }
    write_text(path_in(c, "nodal.csv"), nodes);
  }

  os << p.name << ": " << mesh.num_nodes() << " nodes, " << to_string(p.formulation) << " + "
     << to_string(p.constraints) << "\n";
  os << "  c range [" << format_double(cmin) << ", " << format_double(cmax) << "]\n";
  os << "  max |LSB| " << format_double(r.balance.max_abs_lsb) << ", |GSB| " << format_double(r.balance.abs_gsb)
     << "\n";
  os << "  certificate " << to_string(r.qp.status) << " (max residual " << format_double(r.qp.kkt.max()) << ")\n";
  for (const auto& w : r.assumptions.warnings) os << "  warning: " << w << "\n";
  return all_pass(certs) ? kExitOk : kExitCertificate;
}

}  // namespace

int cmd_solve(const RunConfig& c, std::ostream& os) {
  if (c.preset.kind == PresetKind::Bimolecular) return cmd_bimolecular(c, os);
  return steady(c, os);
}

int cmd_converge(const RunConfig& c, std::ostream& os) {
  const Preset& p = c.preset;
  if (p.benchmark != "hconv") throw ConfigError("converge needs a preset with an exact solution (hconv, hconv-desk)");
  const ManufacturedProblem mp = manufactured_problem(p.diffusivity);
  ProblemSpec problem = mp.problem;
  problem.weights = p.weights;
  const ExactSolution exact = mp.solution.exact();
  const SolveOptions o = solve_options(c);

  std::vector<double> h;
  std::vector<int> dofs;
  std::vector<ErrorNorms> errors;
  json certs = json::array();
  for (int s : p.sequence) {
    const StructuredMesh mesh = make_mesh(p, s, s);
    const SteadyResult r = solve_steady(mesh, problem, o);
    h.push_back(mesh.h);
    dofs.push_back(mesh.num_nodes() * (1 + mesh.dim));
    errors.push_back(error_norms(r.field, exact));
    certs.push_back(
        certificate_json("xseed " + std::to_string(s), r.qp.status, r.qp.kkt, r.qp.iterations, c.certificate_tol));
    if (c.vtk)
      write_text(path_in(c, "field_" + std::to_string(s) + ".vtk"),
                 vtk_string(mesh, {{"c", r.field.c}}, {{"q", r.field.q}}));
  }
  const std::string table = convergence_csv(h, dofs, errors);
  if (c.csv) write_text(path_in(c, "convergence.csv"), table);
  write_json(c, "certificate.json", json{{"preset", p.name}, {"certificates", certs}});
  os << table;
  return all_pass(certs) ? kExitOk : kExitCertificate;
}

int cmd_bimolecular(const RunConfig& c, std::ostream& os) {
  const Preset& p = c.preset;
  if (p.kind != PresetKind::Bimolecular) throw ConfigError("preset '" + p.name + "' is not a reaction benchmark");
  const StructuredMesh mesh = make_mesh(p, p.xseed, p.yseed);
  BimolecularConfig bc;
  bc.solve = solve_options(c);
  bc.dt = p.dt;
  bc.t_final = p.t_final;
  bc.y0 = p.y0;
  const BimolecularResult r = run_bimolecular(mesh, make_reaction_system(p), bc);

  json certs = json::array();
  for (std::size_t i = 0; i < r.certificates.size(); ++i) {
    const std::string label = std::string(i % 2 == 0 ? "F" : "G") + " step " + std::to_string(i / 2 + (bc.dt > 0.0));
    certs.push_back(certificate_json(label, r.status[i], r.certificates[i], 0, c.certificate_tol));
  }
  const auto& last = r.snapshots.back().diag;
  json summary{{"preset", p.name},
               {"formulation", to_string(p.formulation)},
               {"constraints", to_string(p.constraints)},
               {"nodes", mesh.num_nodes()},
               {"snapshots", r.snapshots.size()},
               {"final",
                {{"time", last.time},
                 {"min", last.min},
                 {"max", last.max},
                 {"theta2", last.moment.theta2 ? json(*last.moment.theta2) : json(nullptr)},
                 {"theta2_negative", last.moment.negative},
                 {"y0", last.y0}}},
               {"certificates", certs}};
  write_json(c, "certificate.json", summary);
  const std::string table = diagnostics_csv(r);
  if (c.csv) write_text(path_in(c, "diagnostics.csv"), table);
  if (c.vtk) {
    for (std::size_t k = 0; k < r.snapshots.size(); ++k) {
      const auto& s = r.snapshots[k];
      char name[32];
      std::snprintf(name, sizeof(name), "species_%04zu.vtk", k);
      write_text(path_in(c, name), vtk_string(mesh, {{"cA", s.species.cA},
                                                     {"cB", s.species.cB},
                                                     {"cC", s.species.cC},
                                                     {"cF", s.cF},
                                                     {"cG", s.cG}}));
    }
  }
  os << p.name << ": " << mesh.num_nodes() << " nodes, " << r.snapshots.size() << " snapshot(s), "
     << to_string(p.formulation) << " + " << to_string(p.constraints) << "\n";
  os << table;
  if (last.moment.negative) os << "  warning: negative second moment of the product\n";
  return all_pass(certs) ? kExitOk : kExitCertificate;
}

int cmd_diagnose(const RunConfig& c, std::ostream& os) {
  const Preset& p = c.preset;
  const StructuredMesh mesh = make_mesh(p, p.xseed, p.yseed);
  ProblemSpec problem;
  std::string note = "steady operator";
  if (p.kind == PresetKind::Bimolecular) {
    problem = transform_to_invariants(make_reaction_system(p)).F;
    if (p.dt > 0.0) {
      // Each backward Euler step solves with alpha + 1/dt.
      const ScalarField a = problem.alpha;
      const double inv_dt = 1.0 / p.dt;
      problem.alpha = {[a, inv_dt](const Vec2& x, double t) { return a.value(x, t) + inv_dt; }, a.gradient};
      note = "backward Euler step operator (alpha + 1/dt)";
    }
  } else {
    problem = make_problem(p);
  }
  const CoarseMeshVerdict v = coarse_mesh_verdict(mesh, problem);
  const auto yes = [](bool b) { return b ? "yes" : "no"; };

  json j{{"preset", p.name},
         {"operator", note},
         {"h", v.metrics.h},
         {"h_edge", v.metrics.h_edge},
         {"peclet", v.metrics.peclet},
         {"peclet_edge", v.metrics.peclet_edge},
         {"damkohler", v.metrics.damkohler},
         {"lambda_min", v.metrics.lambda_min},
         {"lambda_max", v.metrics.lambda_max},
         {"galerkin", {{"Z", v.galerkin.is_Z}, {"P", v.galerkin.is_P}, {"M", v.galerkin.is_M}}},
         {"coarse",
          {{"oscillations", v.oscillations}, {"reaction", v.reaction}, {"maximum_principle", v.maximum_principle}}}};

  os << p.name << " (" << note << ")\n";
  os << "  h " << format_double(v.metrics.h) << ", max edge " << format_double(v.metrics.h_edge) << "\n";
  os << "  Pe_h " << format_double(v.metrics.peclet) << " (edge-based " << format_double(v.metrics.peclet_edge)
     << "), Da_h " << format_double(v.metrics.damkohler) << "\n";
  os << "  Galerkin stiffness: Z " << yes(v.galerkin.is_Z) << ", P " << yes(v.galerkin.is_P) << ", M "
     << yes(v.galerkin.is_M) << "\n";
  os << "  coarse w.r.t. (a) oscillations: " << yes(v.oscillations) << "\n";
  os << "  coarse w.r.t. (b) oscillations and reaction: " << yes(v.reaction) << "\n";
  os << "  coarse w.r.t. (c) maximum principle: " << yes(v.maximum_principle) << "\n";

  if (p.benchmark == "academic-1d") {
    const NormalEquationsDemo d = normal_equations_demo(p.xseed - 1, p.speed, p.diffusivity, p.source);
    j["academic"] = {{"peclet", d.peclet},
                     {"cond_K", d.cond_K},
                     {"cond_KtK", d.cond_KtK},
                     {"oscillations_galerkin", d.osc_galerkin},
                     {"oscillations_normal", d.osc_normal},
                     {"oscillations_normal_nn", d.osc_normal_nn}};
    os << "  cond(K) " << format_double(d.cond_K) << ", cond(K^T K) " << format_double(d.cond_KtK) << "\n";
    os << "  sign changes: Galerkin " << d.osc_galerkin << ", normal equations " << d.osc_normal
       << ", normal equations + NN " << d.osc_normal_nn << "\n";
  }
  write_json(c, "diagnostics.json", j);
  return kExitOk;
}

int cmd_mesh_export(const RunConfig& c, std::ostream& os) {
  const Preset& p = c.preset;
  const StructuredMesh mesh = make_mesh(p, p.xseed, p.yseed);
  VectorXd dir = VectorXd::Zero(mesh.num_nodes());
  for (int n : dirichlet_nodes(mesh)) dir(n) = 1.0;
  VectorXd id(mesh.num_elements());
  for (int e = 0; e < mesh.num_elements(); ++e) id(e) = e;
  const std::string vtk = vtk_string(mesh, {{"dirichlet", dir}}, {}, {{"element", id}});
  write_text(path_in(c, "mesh.vtk"), vtk);
  if (c.csv) {
    std::string csv = "facet,element,side,tag,nx,ny,length\n";
    for (std::size_t i = 0; i < mesh.boundary.size(); ++i) {
      const BoundaryEdge& b = mesh.boundary[i];
      csv += std::to_string(i) + "," + std::to_string(b.element) + "," + to_string(b.side) + "," + to_string(b.tag) +
             "," + format_double(b.normal.x()) + "," + format_double(b.normal.y()) + "," + format_double(b.length) +
             "\n";
    }
    write_text(path_in(c, "boundary.csv"), csv);
  }
  os << p.name << ": " << mesh.num_nodes() << " nodes, " << mesh.num_elements() << " " << to_string(mesh.kind)
     << " elements, " << mesh.boundary.size() << " boundary facets\n";
  return kExitOk;
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Least-squares finite element solver for advection-diffusion-reaction problems"};
  app.require_subcommand(0, 1);
  std::string config_path, preset, formulation, constraints, out_dir;
  std::optional<int> xseed, yseed, threads;
  std::optional<double> dt, tfinal;
  std::vector<std::string> sets;
  bool dry_run = false, list = false;
  app.add_option("--config", config_path, "YAML configuration file");
  app.add_option("--preset", preset, "built-in benchmark");
  app.add_option("--formulation", formulation, "primitive or nssd");
  app.add_option("--constraints", constraints, "none, nn, dmp, lsb, lsb+nn or lsb+dmp");
  app.add_option("--xseed", xseed, "nodes along x");
  app.add_option("--yseed", yseed, "nodes along y");
  app.add_option("--dt", dt, "time step (0 for steady)");
  app.add_option("--tfinal", tfinal, "final time");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--threads", threads, "worker threads");
  app.add_option("--set", sets, "override any configuration key: section.key=value");
  app.add_flag("--dry-run", dry_run, "print the resolved configuration and exit");
  app.add_flag("--list-presets", list, "print the built-in presets and exit");

  using Command = int (*)(const RunConfig&, std::ostream&);
  const std::vector<std::pair<std::string, Command>> commands = {
      {"solve", cmd_solve},           {"converge", cmd_converge},       {"bimolecular", cmd_bimolecular},
      {"diagnose", cmd_diagnose},     {"mesh-export", cmd_mesh_export},
  };
  for (const auto& [name, fn] : commands) app.add_subcommand(name)->fallthrough();
  app.allow_extras(false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  if (list) {
    for (const auto& n : preset_names()) out << n << "  " << find_preset(n).description << "\n";
    return kExitOk;
  }
  if (app.get_subcommands().empty()) {
    err << "error: a subcommand is required (solve, converge, bimolecular, diagnose, mesh-export)\n";
    return kExitConfig;
  }

  try {
    KeyValues cli;
    if (!preset.empty()) cli["preset"] = preset;
    if (!formulation.empty()) cli["solver.formulation"] = formulation;
    if (!constraints.empty()) cli["solver.constraints"] = constraints;
    if (xseed) cli["mesh.xseed"] = std::to_string(*xseed);
    if (yseed) cli["mesh.yseed"] = std::to_string(*yseed);
    if (dt) cli["transient.dt"] = format_double(*dt);
    if (tfinal) cli["transient.t_final"] = format_double(*tfinal);
    if (!out_dir.empty()) cli["output.dir"] = out_dir;
    if (threads) cli["solver.threads"] = std::to_string(*threads);
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got '" + s + "'");
      cli[s.substr(0, eq)] = s.substr(eq + 1);
    }
    const KeyValues file = config_path.empty() ? KeyValues{} : load_yaml(config_path);
    const RunConfig config = resolve(file, cli);
    if (dry_run) {
      out << dump(config);
      return kExitOk;
    }
    for (const auto& [name, fn] : commands)
      if (app.got_subcommand(name)) return fn(config, out);
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace lsfem::cli
