#include "config.hpp"

#include "lsfem/io.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <fstream>
#include <sstream>

namespace lsfem::cli {

namespace {

const std::vector<std::string> kKeys = {
    "preset",
    "mesh.element",
    "mesh.xseed",
    "mesh.yseed",
    "mesh.sequence",
    "solver.formulation",
    "solver.constraints",
    "solver.weights",
    "solver.quadrature",
    "solver.threads",
    "solver.certificate_tol",
    "solver.c_min",
    "solver.c_max",
    "stabilization.delta0",
    "stabilization.delta1",
    "stabilization.delta2",
    "stabilization.tau0",
    "stabilization.tau1",
    "stabilization.tau2",
    "transient.dt",
    "transient.t_final",
    "transient.y0",
    "physics.diffusivity",
    "physics.speed",
    "physics.source",
    "physics.case",
    "physics.anisotropic",
    "physics.chaotic",
    "physics.cell_length",
    "output.dir",
    "output.vtk",
    "output.csv",
    "output.json",
};

bool is_known(const std::string& key) { return std::find(kKeys.begin(), kKeys.end(), key) != kKeys.end(); }

void flatten(const YAML::Node& node, const std::string& prefix, KeyValues& out) {
  if (node.IsMap()) {
    for (const auto& kv : node) {
      const std::string key = prefix.empty() ? kv.first.as<std::string>() : prefix + "." + kv.first.as<std::string>();
      flatten(kv.second, key, out);
    }
    return;
  }
  if (!is_known(prefix)) throw ConfigError("unknown configuration key '" + prefix + "'");
  if (node.IsSequence()) {
    std::string joined;
    for (const auto& item : node) {
      if (!item.IsScalar()) throw ConfigError("key '" + prefix + "' expects a list of scalars");
      joined += (joined.empty() ? "" : ",") + item.as<std::string>();
    }
    out[prefix] = joined;
  } else if (node.IsScalar()) {
    out[prefix] = node.as<std::string>();
  } else {
    throw ConfigError("key '" + prefix + "' has no value");
  }
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double d = 0.0;
  try {
    d = std::stod(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != v.size()) throw ConfigError("key '" + key + "' expects a number, got '" + v + "'");
  return d;
}

int to_int(const std::string& key, const std::string& v) {
  const double d = to_double(key, v);
  if (d != static_cast<int>(d)) throw ConfigError("key '" + key + "' expects an integer, got '" + v + "'");
  return static_cast<int>(d);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("key '" + key + "' expects a boolean, got '" + v + "'");
}

std::vector<int> to_int_list(const std::string& key, const std::string& v) {
  std::vector<int> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_int(key, item));
  if (out.empty()) throw ConfigError("key '" + key + "' expects a non-empty list");
  return out;
}

ElementKind to_element(const std::string& key, const std::string& v) {
  if (v == "L2" || v == "l2") return ElementKind::L2;
  if (v == "T3" || v == "t3") return ElementKind::T3;
  if (v == "Q4" || v == "q4") return ElementKind::Q4;
  throw ConfigError("key '" + key + "' expects L2, T3 or Q4, got '" + v + "'");
}

WeightType to_weights(const std::string& key, const std::string& v) {
  if (v == "type1") return WeightType::Type1;
  if (v == "type2") return WeightType::Type2;
  throw ConfigError("key '" + key + "' expects type1 or type2, got '" + v + "'");
}

RuleLevel to_level(const std::string& key, const std::string& v) {
  if (v == "standard") return RuleLevel::Standard;
  if (v == "enriched") return RuleLevel::Enriched;
  if (v == "error") return RuleLevel::Error;
  throw ConfigError("key '" + key + "' expects standard, enriched or error, got '" + v + "'");
}

const char* level_name(RuleLevel l) {
  switch (l) {
    case RuleLevel::Standard: return "standard";
    case RuleLevel::Enriched: return "enriched";
    case RuleLevel::Error: return "error";
  }
  return "?";
}

void apply(RunConfig& c, const std::string& key, const std::string& v) {
  Preset& p = c.preset;
  StabilizationConstants& s = p.stabilization;
  if (key == "preset") return;
  if (key == "mesh.element") p.element = to_element(key, v);
  else if (key == "mesh.xseed") p.xseed = to_int(key, v);
  else if (key == "mesh.yseed") p.yseed = to_int(key, v);
  else if (key == "mesh.sequence") p.sequence = to_int_list(key, v);
  else if (key == "solver.formulation") p.formulation = parse_formulation(v);
  else if (key == "solver.constraints") p.constraints = parse_constraints(v);
  else if (key == "solver.weights") p.weights = to_weights(key, v);
  else if (key == "solver.quadrature") c.quadrature = to_level(key, v);
  else if (key == "solver.threads") c.threads = to_int(key, v);
  else if (key == "solver.certificate_tol") c.certificate_tol = to_double(key, v);
  else if (key == "solver.c_min") c.c_min = to_double(key, v);
  else if (key == "solver.c_max") c.c_max = to_double(key, v);
  else if (key == "stabilization.delta0") s.delta0 = to_double(key, v);
  else if (key == "stabilization.delta1") s.delta1 = to_double(key, v);
  else if (key == "stabilization.delta2") s.delta2 = to_double(key, v);
  else if (key == "stabilization.tau0") s.tau0 = to_double(key, v);
  else if (key == "stabilization.tau1") s.tau1 = to_double(key, v);
  else if (key == "stabilization.tau2") s.tau2 = to_double(key, v);
  else if (key == "transient.dt") p.dt = to_double(key, v);
  else if (key == "transient.t_final") p.t_final = to_double(key, v);
  else if (key == "transient.y0") p.y0 = to_double(key, v);
  else if (key == "physics.diffusivity") p.diffusivity = to_double(key, v);
  else if (key == "physics.speed") p.speed = to_double(key, v);
  else if (key == "physics.source") p.source = to_double(key, v);
  else if (key == "physics.case") p.case_id = to_int(key, v);
  else if (key == "physics.anisotropic") p.anisotropic = to_bool(key, v);
  else if (key == "physics.chaotic") p.chaotic = to_bool(key, v);
  else if (key == "physics.cell_length") p.cell_length = to_double(key, v);
  else if (key == "output.dir") c.out_dir = v;
  else if (key == "output.vtk") c.vtk = to_bool(key, v);
  else if (key == "output.csv") c.csv = to_bool(key, v);
  else if (key == "output.json") c.json = to_bool(key, v);
  else throw ConfigError("unknown configuration key '" + key + "'");
}

void validate(const RunConfig& c) {
  const Preset& p = c.preset;
  const bool one_d = p.domain.y1 == p.domain.y0;
  if (one_d != (p.element == ElementKind::L2))
    throw ConfigError(std::string("key 'mesh.element': ") + to_string(p.element) + " does not match the domain of preset '" +
                      p.name + "'");
  if (p.xseed < 2 || (!one_d && p.yseed < 2)) throw ConfigError("key 'mesh.xseed'/'mesh.yseed': seeds must be >= 2");
  for (int s : p.sequence)
    if (s < 2) throw ConfigError("key 'mesh.sequence': seeds must be >= 2");
  if (p.dt < 0.0 || p.t_final < 0.0) throw ConfigError("key 'transient.dt'/'transient.t_final' must be >= 0");
  if (p.dt > 0.0 && p.t_final < p.dt) throw ConfigError("key 'transient.t_final' must be >= transient.dt");
  if (!(p.diffusivity > 0.0)) throw ConfigError("key 'physics.diffusivity' must be positive");
  if (p.case_id != 1 && p.case_id != 2) throw ConfigError("key 'physics.case' must be 1 or 2");
  if (!(p.cell_length > 0.0)) throw ConfigError("key 'physics.cell_length' must be positive");
  if (c.threads < 1) throw ConfigError("key 'solver.threads' must be >= 1");
  if (!(c.certificate_tol > 0.0)) throw ConfigError("key 'solver.certificate_tol' must be positive");
  for (double d : {p.stabilization.delta0, p.stabilization.delta1, p.stabilization.delta2, p.stabilization.tau0,
                   p.stabilization.tau1, p.stabilization.tau2})
    if (d < 0.0) throw ConfigError("stabilization constants must be >= 0");
}

}  // namespace

const std::vector<std::string>& known_keys() { return kKeys; }

KeyValues parse_yaml(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("malformed configuration: ") + e.what());
  }
  KeyValues out;
  if (root.IsNull()) return out;
  if (!root.IsMap()) throw ConfigError("configuration must be a map of sections");
  flatten(root, "", out);
  return out;
}

KeyValues load_yaml(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read configuration file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_yaml(ss.str());
}

RunConfig resolve(const KeyValues& file, const KeyValues& cli) {
  for (const KeyValues* m : {&file, &cli})
    for (const auto& [k, v] : *m)
      if (!is_known(k)) throw ConfigError("unknown configuration key '" + k + "'");
  std::string name;
  if (auto it = cli.find("preset"); it != cli.end()) name = it->second;
  else if (auto jt = file.find("preset"); jt != file.end()) name = jt->second;
  if (name.empty()) throw ConfigError("no preset selected (set 'preset' or pass --preset)");

  RunConfig c;
  c.preset = find_preset(name);
  for (const auto& [k, v] : file) apply(c, k, v);
  for (const auto& [k, v] : cli) apply(c, k, v);
  validate(c);
  return c;
}

std::string dump(const RunConfig& c) {
  const Preset& p = c.preset;
  const StabilizationConstants& s = p.stabilization;
  const auto num = [](double v) { return format_double(v); };
  std::ostringstream os;
  os << "preset: " << p.name << "\n";
  os << "benchmark: " << p.benchmark << "\n";
  os << "kind: " << to_string(p.kind) << "\n";
  os << "mesh:\n";
  os << "  element: " << to_string(p.element) << "\n";
  os << "  xseed: " << p.xseed << "\n";
  os << "  yseed: " << p.yseed << "\n";
  os << "  sequence: [";
  for (std::size_t i = 0; i < p.sequence.size(); ++i) os << (i ? ", " : "") << p.sequence[i];
  os << "]\n";
  os << "solver:\n";
  os << "  formulation: " << to_string(p.formulation) << "\n";
  os << "  constraints: " << to_string(p.constraints) << "\n";
  os << "  weights: " << (p.weights == WeightType::Type1 ? "type1" : "type2") << "\n";
  os << "  quadrature: " << (c.quadrature ? level_name(*c.quadrature) : "default") << "\n";
  os << "  threads: " << c.threads << "\n";
  os << "  certificate_tol: " << num(c.certificate_tol) << "\n";
  os << "  c_min: " << (c.c_min ? num(*c.c_min) : "default") << "\n";
  os << "  c_max: " << (c.c_max ? num(*c.c_max) : "default") << "\n";
  os << "stabilization:\n";
  os << "  delta0: " << num(s.delta0) << "\n  delta1: " << num(s.delta1) << "\n  delta2: " << num(s.delta2) << "\n";
  os << "  tau0: " << num(s.tau0) << "\n  tau1: " << num(s.tau1) << "\n  tau2: " << num(s.tau2) << "\n";
  os << "transient:\n";
  os << "  dt: " << num(p.dt) << "\n  t_final: " << num(p.t_final) << "\n";
  os << "  y0: " << (p.y0 ? num(*p.y0) : "onset") << "\n";
  os << "physics:\n";
  os << "  diffusivity: " << num(p.diffusivity) << "\n  speed: " << num(p.speed) << "\n  source: " << num(p.source)
     << "\n";
  os << "  case: " << p.case_id << "\n  anisotropic: " << (p.anisotropic ? "true" : "false")
     << "\n  chaotic: " << (p.chaotic ? "true" : "false") << "\n  cell_length: " << num(p.cell_length) << "\n";
  os << "output:\n";
  os << "  dir: " << c.out_dir << "\n  vtk: " << (c.vtk ? "true" : "false") << "\n  csv: " << (c.csv ? "true" : "false")
     << "\n  json: " << (c.json ? "true" : "false") << "\n";
  return os.str();
}

}  // namespace lsfem::cli
