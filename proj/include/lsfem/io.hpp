#pragma once

#include "lsfem/mesh.hpp"

#include <string>
#include <utility>
#include <vector>

namespace lsfem {

struct NodalScalar {
  std::string name;
  VectorXd values;  // one per node
};

struct NodalVector {
  std::string name;
  VectorXd values;  // node-major, dim per node
};

struct CellScalar {
  std::string name;
  VectorXd values;  // one per element
};

// Legacy ASCII VTK unstructured grid. 1D meshes are written as lines.
std::string vtk_string(const StructuredMesh& mesh, const std::vector<NodalScalar>& scalars,
                       const std::vector<NodalVector>& vectors = {}, const std::vector<CellScalar>& cells = {});

void write_text(const std::string& path, const std::string& content);

// Number formatting used by every writer (17 significant digits).
std::string format_double(double v);

}  // namespace lsfem
