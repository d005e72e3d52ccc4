#pragma once

#include "lsfem/presets.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace lsfem::cli {

// Dotted key -> raw value. Sequences are comma-joined.
using KeyValues = std::map<std::string, std::string>;

struct RunConfig {
  Preset preset;
  int threads = 1;
  std::optional<RuleLevel> quadrature;
  double certificate_tol = 1e-8;
  std::optional<double> c_min, c_max;
  std::string out_dir = "out";
  bool vtk = true, csv = true, json = true;
};

// Every accepted key.
const std::vector<std::string>& known_keys();

// Flattens nested YAML maps into dotted keys. Throws ConfigError on
// malformed files and unknown keys.
KeyValues load_yaml(const std::string& path);
KeyValues parse_yaml(const std::string& text);

// Resolves preset defaults, then file values, then command-line values.
// "preset" must be present in one of the two maps.
RunConfig resolve(const KeyValues& file, const KeyValues& cli);

// Resolved configuration as YAML, keys in a fixed order.
std::string dump(const RunConfig& c);

}  // namespace lsfem::cli
