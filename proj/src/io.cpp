#include "lsfem/io.hpp"

#include <fmt/format.h>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace lsfem {

std::string format_double(double v) { return fmt::format("{:.17g}", v); }

std::string vtk_string(const StructuredMesh& mesh, const std::vector<NodalScalar>& scalars,
                       const std::vector<NodalVector>& vectors, const std::vector<CellScalar>& cells) {
  const int nn = mesh.num_nodes(), ne = mesh.num_elements(), npe = mesh.nodes_per_element();
  std::ostringstream os;
  os << "# vtk DataFile Version 3.0\nlsfem\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << nn << " double\n";
  for (const Vec2& x : mesh.nodes)
    os << format_double(x.x()) << ' ' << format_double(mesh.dim == 2 ? x.y() : 0.0) << " 0\n";
  os << "CELLS " << ne << ' ' << ne * (npe + 1) << '\n';
  for (const auto& el : mesh.elements) {
    os << npe;
    for (int a = 0; a < npe; ++a) os << ' ' << el[a];
    os << '\n';
  }
  const int type = mesh.kind == ElementKind::L2 ? 3 : mesh.kind == ElementKind::T3 ? 5 : 9;
  os << "CELL_TYPES " << ne << '\n';
  for (int e = 0; e < ne; ++e) os << type << '\n';
  if (!scalars.empty() || !vectors.empty()) {
    os << "POINT_DATA " << nn << '\n';
    for (const auto& s : scalars) {
      if (s.values.size() != nn) throw InvalidArgument("nodal field '" + s.name + "' has the wrong size");
      os << "SCALARS " << s.name << " double 1\nLOOKUP_TABLE default\n";
      for (int i = 0; i < nn; ++i) os << format_double(s.values(i)) << '\n';
    }
    for (const auto& v : vectors) {
      if (v.values.size() != static_cast<Eigen::Index>(nn) * mesh.dim)
        throw InvalidArgument("vector field '" + v.name + "' has the wrong size");
      os << "VECTORS " << v.name << " double\n";
      for (int i = 0; i < nn; ++i) {
        os << format_double(v.values(i * mesh.dim));
        os << ' ' << format_double(mesh.dim == 2 ? v.values(i * mesh.dim + 1) : 0.0) << " 0\n";
      }
    }
  }
  if (!cells.empty()) {
    os << "CELL_DATA " << ne << '\n';
    for (const auto& c : cells) {
      if (c.values.size() != ne) throw InvalidArgument("cell field '" + c.name + "' has the wrong size");
      os << "SCALARS " << c.name << " double 1\nLOOKUP_TABLE default\n";
      for (int e = 0; e < ne; ++e) os << format_double(c.values(e)) << '\n';
    }
  }
  return os.str();
}

void write_text(const std::string& path, const std::string& content) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  f << content;
  if (!f) throw std::runtime_error("write to '" + path + "' failed");
}

}  // namespace lsfem
