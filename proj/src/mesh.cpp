#include "lsfem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

namespace lsfem {

const char* to_string(ElementKind kind) {
  switch (kind) {
    case ElementKind::L2: return "L2";
    case ElementKind::T3: return "T3";
    case ElementKind::Q4: return "Q4";
  }
  return "?";
}

const char* to_string(BoundaryTag tag) {
  switch (tag) {
    case BoundaryTag::Dirichlet: return "dirichlet";
    case BoundaryTag::NeumannInflow: return "inflow";
    case BoundaryTag::NeumannOutflow: return "outflow";
  }
  return "?";
}

const char* to_string(Side side) {
  switch (side) {
    case Side::Left: return "left";
    case Side::Right: return "right";
    case Side::Bottom: return "bottom";
    case Side::Top: return "top";
  }
  return "?";
}

int nodes_per_element(ElementKind kind) {
  switch (kind) {
    case ElementKind::L2: return 2;
    case ElementKind::T3: return 3;
    case ElementKind::Q4: return 4;
  }
  return 0;
}

std::vector<std::array<int, 2>> StructuredMesh::local_edges() const {
  switch (kind) {
    case ElementKind::L2: return {{0, 0}, {1, 1}};
    case ElementKind::T3: return {{0, 1}, {1, 2}, {2, 0}};
    case ElementKind::Q4: return {{0, 1}, {1, 2}, {2, 3}, {3, 0}};
  }
  return {};
}

double StructuredMesh::max_edge_length() const {
  if (dim == 1) return h;
  double m = 0.0;
  const auto edges = local_edges();
  for (const auto& el : elements)
    for (const auto& le : edges)
      m = std::max(m, (nodes[el[le[1]]] - nodes[el[le[0]]]).norm());
  return m;
}

double StructuredMesh::element_area(int e) const {
  const auto& el = elements[e];
  if (dim == 1) return std::abs(nodes[el[1]].x() - nodes[el[0]].x());
  const int n = nodes_per_element();
  double a = 0.0;
  for (int i = 0; i < n; ++i) {
    const Vec2& p = nodes[el[i]];
    const Vec2& q = nodes[el[(i + 1) % n]];
    a += p.x() * q.y() - q.x() * p.y();
  }
  return 0.5 * a;
}

namespace {

void finalize_diameters(StructuredMesh& m) {
  const int n = m.nodes_per_element();
  m.h_e.assign(m.elements.size(), 0.0);
  m.h = 0.0;
  for (std::size_t e = 0; e < m.elements.size(); ++e) {
    double d = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        d = std::max(d, (m.nodes[m.elements[e][i]] - m.nodes[m.elements[e][j]]).norm());
    m.h_e[e] = d;
    m.h = std::max(m.h, d);
  }
}

}  // namespace

StructuredMesh generate_interval_mesh(double x0, double x1, int xseed) {
  if (xseed < 2) throw InvalidArgument("xseed must be >= 2");
  if (!(x1 > x0)) throw InvalidArgument("degenerate interval");
  StructuredMesh m;
  m.dim = 1;
  m.kind = ElementKind::L2;
  m.domain = Domain{x0, x1, 0.0, 0.0};
  m.xseed = xseed;
  m.yseed = 1;
  const double dx = (x1 - x0) / (xseed - 1);
  for (int i = 0; i < xseed; ++i) {
    const double x = (i == xseed - 1) ? x1 : x0 + i * dx;
    m.nodes.emplace_back(x, 0.0);
  }
  for (int i = 0; i + 1 < xseed; ++i) m.elements.push_back({i, i + 1, -1, -1});
  finalize_diameters(m);

  BoundaryEdge left;
  left.element = 0;
  left.local = 0;
  left.nodes = {0, 0};
  left.normal = Vec2(-1.0, 0.0);
  left.midpoint = m.nodes.front();
  left.length = 1.0;
  left.side = Side::Left;
  BoundaryEdge right;
  right.element = m.num_elements() - 1;
  right.local = 1;
  right.nodes = {xseed - 1, xseed - 1};
  right.normal = Vec2(1.0, 0.0);
  right.midpoint = m.nodes.back();
  right.length = 1.0;
  right.side = Side::Right;
  m.boundary = {left, right};
  return m;
}

StructuredMesh generate_structured_mesh(const Domain& d, int xseed, int yseed, ElementKind kind) {
  if (kind == ElementKind::L2) {
    if (!(d.x1 > d.x0)) throw InvalidArgument("degenerate interval");
    return generate_interval_mesh(d.x0, d.x1, xseed);
  }
  if (xseed < 2 || yseed < 2) throw InvalidArgument("xseed and yseed must be >= 2");
  if (!(d.x1 > d.x0) || !(d.y1 > d.y0)) throw InvalidArgument("degenerate rectangle");

  StructuredMesh m;
  m.dim = 2;
  m.kind = kind;
  m.domain = d;
  m.xseed = xseed;
  m.yseed = yseed;
  const double dx = (d.x1 - d.x0) / (xseed - 1);
  const double dy = (d.y1 - d.y0) / (yseed - 1);
  for (int j = 0; j < yseed; ++j) {
    const double y = (j == yseed - 1) ? d.y1 : d.y0 + j * dy;
    for (int i = 0; i < xseed; ++i) {
      const double x = (i == xseed - 1) ? d.x1 : d.x0 + i * dx;
      m.nodes.emplace_back(x, y);
    }
  }
  auto id = [xseed](int i, int j) { return j * xseed + i; };

  struct CellEdge {
    int element, local;
    Side side;
  };
  std::vector<CellEdge> boundary;
  for (int j = 0; j + 1 < yseed; ++j) {
    for (int i = 0; i + 1 < xseed; ++i) {
      const int n0 = id(i, j), n1 = id(i + 1, j), n2 = id(i + 1, j + 1), n3 = id(i, j + 1);
      if (kind == ElementKind::Q4) {
        const int e = m.num_elements();
        m.elements.push_back({n0, n1, n2, n3});
        if (j == 0) boundary.push_back({e, 0, Side::Bottom});
        if (i == xseed - 2) boundary.push_back({e, 1, Side::Right});
        if (j == yseed - 2) boundary.push_back({e, 2, Side::Top});
        if (i == 0) boundary.push_back({e, 3, Side::Left});
      } else {
        const int e0 = m.num_elements();
        m.elements.push_back({n0, n1, n2, -1});
        const int e1 = e0 + 1;
        m.elements.push_back({n0, n2, n3, -1});
        if (j == 0) boundary.push_back({e0, 0, Side::Bottom});
        if (i == xseed - 2) boundary.push_back({e0, 1, Side::Right});
        if (j == yseed - 2) boundary.push_back({e1, 1, Side::Top});
        if (i == 0) boundary.push_back({e1, 2, Side::Left});
      }
    }
  }
  finalize_diameters(m);

  // Deterministic facet order: bottom, right, top, left, each along the boundary.
  auto side_rank = [](Side s) {
    switch (s) {
      case Side::Bottom: return 0;
      case Side::Right: return 1;
      case Side::Top: return 2;
      case Side::Left: return 3;
    }
    return 4;
  };
  const auto edges = m.local_edges();
  for (const auto& ce : boundary) {
    BoundaryEdge be;
    be.element = ce.element;
    be.local = ce.local;
    const auto& el = m.elements[ce.element];
    be.nodes = {el[edges[ce.local][0]], el[edges[ce.local][1]]};
    const Vec2 a = m.nodes[be.nodes[0]], b = m.nodes[be.nodes[1]];
    be.midpoint = 0.5 * (a + b);
    be.length = (b - a).norm();
    const Vec2 t = (b - a) / be.length;
    be.normal = Vec2(t.y(), -t.x());  // counter-clockwise ordering: right-hand normal points out
    be.side = ce.side;
    m.boundary.push_back(be);
  }
  std::stable_sort(m.boundary.begin(), m.boundary.end(),
                   [&](const BoundaryEdge& p, const BoundaryEdge& q) {
                     const int rp = side_rank(p.side), rq = side_rank(q.side);
                     if (rp != rq) return rp < rq;
                     const double sp = (p.side == Side::Bottom || p.side == Side::Top) ? p.midpoint.x()
                                                                                        : p.midpoint.y();
                     const double sq = (q.side == Side::Bottom || q.side == Side::Top) ? q.midpoint.x()
                                                                                        : q.midpoint.y();
                     return sp < sq;
                   });
  return m;
}

BoundaryPartition classify_boundary(StructuredMesh& mesh, const VelocityFn& velocity,
                                    const EdgePredicate& dirichlet, bool require_dirichlet) {
  BoundaryPartition p;
  for (std::size_t k = 0; k < mesh.boundary.size(); ++k) {
    auto& be = mesh.boundary[k];
    if (dirichlet && dirichlet(be)) {
      be.tag = BoundaryTag::Dirichlet;
      p.dirichlet.push_back(static_cast<int>(k));
      continue;
    }
    const double vn = velocity ? velocity(be.midpoint).dot(be.normal) : 0.0;
    if (vn < 0.0) {
      be.tag = BoundaryTag::NeumannInflow;
      p.inflow.push_back(static_cast<int>(k));
    } else {
      be.tag = BoundaryTag::NeumannOutflow;
      p.outflow.push_back(static_cast<int>(k));
    }
  }
  if (require_dirichlet && p.dirichlet.empty())
    throw ConfigError("Dirichlet boundary selects no edges in a steady problem");
  return p;
}

std::vector<int> dirichlet_nodes(const StructuredMesh& mesh) {
  std::set<int> s;
  for (const auto& be : mesh.boundary)
    if (be.tag == BoundaryTag::Dirichlet) {
      s.insert(be.nodes[0]);
      s.insert(be.nodes[1]);
    }
  return {s.begin(), s.end()};
}

}  // namespace lsfem
