#include "lsfem/mesh.hpp"

#include "support.hpp"

#include <cmath>
#include <numeric>

using namespace lsfem;
using namespace lsfem::test;

TEST_SUITE("mesh") {
  TEST_CASE("structured counts and sizes") {
    const Domain d{0.0, 2.0, 0.0, 1.0};
    const StructuredMesh q = generate_structured_mesh(d, 5, 3, ElementKind::Q4);
    CHECK(q.num_nodes() == 15);
    CHECK(q.num_elements() == 8);
    CHECK(q.boundary.size() == 12u);
    CHECK(q.h == doctest::Approx(std::hypot(0.5, 0.5)));
    CHECK(q.max_edge_length() == doctest::Approx(0.5));

    const StructuredMesh t = generate_structured_mesh(d, 5, 3, ElementKind::T3);
    CHECK(t.num_elements() == 16);
    CHECK(t.boundary.size() == 12u);

    const StructuredMesh l = generate_interval_mesh(0.0, 1.0, 11);
    CHECK(l.dim == 1);
    CHECK(l.num_elements() == 10);
    CHECK(l.boundary.size() == 2u);
    CHECK(l.h == doctest::Approx(0.1));
  }

  TEST_CASE("elements are counter-clockwise and tile the domain") {
    const Domain d{-1.0, 1.0, 0.0, 0.5};
    for (ElementKind k : {ElementKind::Q4, ElementKind::T3}) {
      const StructuredMesh m = generate_structured_mesh(d, 7, 4, k);
      double area = 0.0;
      for (int e = 0; e < m.num_elements(); ++e) {
        CHECK(m.element_area(e) > 0.0);
        area += m.element_area(e);
      }
      CHECK(area == doctest::Approx(1.0));
    }
  }

  TEST_CASE("boundary normals are outward and facet lengths sum to the perimeter") {
    const Domain d{0.0, 1.0, 0.0, 2.0};
    const StructuredMesh m = generate_structured_mesh(d, 4, 6, ElementKind::Q4);
    const Vec2 centre(0.5, 1.0);
    double perimeter = 0.0;
    for (const auto& be : m.boundary) {
      CHECK(be.normal.norm() == doctest::Approx(1.0));
      CHECK(be.normal.dot(be.midpoint - centre) > 0.0);
      perimeter += be.length;
    }
    CHECK(perimeter == doctest::Approx(6.0));
  }

  TEST_CASE("classification by the sign of v.n") {
    StructuredMesh m = generate_structured_mesh(Domain{0, 1, 0, 1}, 5, 5, ElementKind::Q4);
    const auto left = [](const BoundaryEdge& b) { return b.side == Side::Left; };
    const BoundaryPartition p = classify_boundary(m, [](const Vec2&) { return Vec2(1.0, 0.0); }, left, true);
    CHECK(p.dirichlet.size() == 4u);
    CHECK(p.inflow.empty());
    CHECK(p.outflow.size() == 12u);  // right side plus the tangential top and bottom
    CHECK(dirichlet_nodes(m).size() == 5u);

    const BoundaryPartition q =
        classify_boundary(m, [](const Vec2&) { return Vec2(1.0, 0.0); }, [](const BoundaryEdge&) { return false; }, false);
    CHECK(q.inflow.size() == 4u);
    CHECK(dirichlet_nodes(m).empty());
  }

  TEST_CASE("a steady problem without Dirichlet facets is rejected") {
    StructuredMesh m = generate_structured_mesh(Domain{0, 1, 0, 1}, 3, 3, ElementKind::Q4);
    CHECK_THROWS_AS(classify_boundary(m, {}, [](const BoundaryEdge&) { return false; }, true), ConfigError);
  }

  TEST_CASE("interval end points") {
    StructuredMesh m = generate_interval_mesh(0.0, 2.0, 5);
    CHECK(m.boundary[0].normal.x() == -1.0);
    CHECK(m.boundary[1].normal.x() == 1.0);
    classify_boundary(m, [](const Vec2&) { return Vec2(1.0, 0.0); }, [](const BoundaryEdge& b) { return b.side == Side::Left; },
                      true);
    CHECK(m.boundary[0].tag == BoundaryTag::Dirichlet);
    CHECK(m.boundary[1].tag == BoundaryTag::NeumannOutflow);
  }
}
