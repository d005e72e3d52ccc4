#pragma once

#include "lsfem/types.hpp"

#include <array>
#include <functional>
#include <vector>

namespace lsfem {

enum class ElementKind { L2, T3, Q4 };

enum class BoundaryTag { Dirichlet, NeumannInflow, NeumannOutflow };

// Sides of the axis-aligned domain. 1D meshes use Left/Right only.
enum class Side { Left, Right, Bottom, Top };

const char* to_string(ElementKind kind);
const char* to_string(BoundaryTag tag);
const char* to_string(Side side);

int nodes_per_element(ElementKind kind);

struct Domain {
  double x0 = 0.0, x1 = 1.0;
  double y0 = 0.0, y1 = 0.0;  // ignored in 1D
};

// One boundary facet. In 1D a facet is an end point with unit measure.
struct BoundaryEdge {
  int element = -1;
  int local = -1;  // local edge index within the element
  std::array<int, 2> nodes{-1, -1};
  Vec2 normal = Vec2::Zero();
  Vec2 midpoint = Vec2::Zero();
  double length = 0.0;
  Side side = Side::Left;
  BoundaryTag tag = BoundaryTag::Dirichlet;
};

struct StructuredMesh {
  int dim = 2;
  ElementKind kind = ElementKind::Q4;
  Domain domain;
  int xseed = 0, yseed = 0;
  std::vector<Vec2> nodes;
  std::vector<std::array<int, 4>> elements;  // unused slots are -1
  std::vector<double> h_e;
  double h = 0.0;
  std::vector<BoundaryEdge> boundary;

  int num_nodes() const { return static_cast<int>(nodes.size()); }
  int num_elements() const { return static_cast<int>(elements.size()); }
  int nodes_per_element() const { return lsfem::nodes_per_element(kind); }
  // Largest element edge length; equals h_e on 1D meshes.
  double max_edge_length() const;
  double element_area(int e) const;
  // Local node pairs of element edges, counter-clockwise.
  std::vector<std::array<int, 2>> local_edges() const;
};

// Row-major structured mesh. T3 splits each cell along the lower-left to
// upper-right diagonal. All boundary facets start tagged Dirichlet.
StructuredMesh generate_structured_mesh(const Domain& domain, int xseed, int yseed,
                                        ElementKind kind);
StructuredMesh generate_interval_mesh(double x0, double x1, int xseed);

using VelocityFn = std::function<Vec2(const Vec2&)>;
using EdgePredicate = std::function<bool(const BoundaryEdge&)>;

struct BoundaryPartition {
  std::vector<int> dirichlet;  // indices into mesh.boundary
  std::vector<int> inflow;
  std::vector<int> outflow;
};

// Tags each boundary facet. Neumann facets are split by the sign of v.n at
// the facet midpoint; v.n == 0 counts as outflow.
BoundaryPartition classify_boundary(StructuredMesh& mesh, const VelocityFn& velocity,
                                    const EdgePredicate& dirichlet, bool require_dirichlet);

// Nodes touched by Dirichlet facets, ascending.
std::vector<int> dirichlet_nodes(const StructuredMesh& mesh);

}  // namespace lsfem
