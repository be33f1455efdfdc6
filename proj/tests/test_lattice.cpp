#include <doctest.h>

#include "fkdyn/error.hpp"
#include "fkdyn/lattice.hpp"

using namespace fkdyn;

TEST_CASE("rectangle counts") {
  auto a = Lattice::build_rect(1, 1);
  CHECK(a.num_vertices() == 4);
  CHECK(a.num_edges() == 4);
  auto b = Lattice::build_rect(2, 2);
  CHECK(b.num_vertices() == 9);
  CHECK(b.num_edges() == 12);
  auto c = Lattice::build_rect(2, 2, EdgeSetVariant::modified);
  CHECK(c.num_vertices() == 9);
  REQUIRE(c.num_edges() == 4);
  const int center = c.vertex_index(1, 1);
  for (const auto& e : c.edges()) CHECK((e.u == center || e.v == center));
  for (int n = 1; n <= 6; ++n)
    for (int l = 1; l <= 6; ++l) CHECK(Lattice::build_rect(n, l).num_edges() == n * (l + 1) + l * (n + 1));
  CHECK_THROWS_AS(Lattice::build_rect(0, 3), Error);
}

TEST_CASE("indexing round trips and unit edges") {
  for (auto var : {EdgeSetVariant::full, EdgeSetVariant::modified}) {
    auto lat = Lattice::build_rect(5, 3, var);
    for (int v = 0; v < lat.num_vertices(); ++v) {
      auto p = lat.vertex(v);
      CHECK(lat.vertex_index(p.x, p.y) == v);
    }
    int prev_min = -1, prev_or = -1;
    for (int e = 0; e < lat.num_edges(); ++e) {
      const auto& ed = lat.edge(e);
      CHECK(lat.distance(ed.u, ed.v) == 1);
      CHECK(lat.edge_index(ed.u, ed.v) == e);
      CHECK(lat.edge_index(ed.v, ed.u) == e);
      CHECK((ed.u > prev_min || (ed.u == prev_min && ed.orient > prev_or)));
      prev_min = ed.u;
      prev_or = ed.orient;
    }
  }
}

TEST_CASE("boundary cycle order") {
  auto l1 = Lattice::build_rect(1, 1);
  std::vector<Vertex> expect{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  REQUIRE(l1.cycle_length() == 4);
  for (int i = 0; i < 4; ++i) CHECK(l1.vertex(l1.boundary_cycle()[i]) == expect[i]);

  auto l2 = Lattice::build_rect(2, 2);
  CHECK(l2.cycle_length() == 8);
  CHECK(l2.vertex(l2.boundary_cycle().back()) == Vertex{0, 1});

  auto thin = Lattice::build_rect(3, 1);
  CHECK(thin.cycle_length() == 8);
  for (int v = 0; v < thin.num_vertices(); ++v) CHECK(thin.on_boundary(v));

  for (int n = 1; n <= 5; ++n)
    for (int l = 1; l <= 5; ++l) {
      auto lat = Lattice::build_rect(n, l);
      CHECK(lat.cycle_length() == 2 * n + 2 * l);
      for (int i = 0; i < lat.cycle_length(); ++i) {
        const int a = lat.boundary_cycle()[i], b = lat.boundary_cycle()[(i + 1) % lat.cycle_length()];
        CHECK(lat.distance(a, b) == 1);
      }
    }
}

TEST_CASE("dual rectangle") {
  auto m3 = Lattice::build_rect(3, 3, EdgeSetVariant::modified);
  auto d3 = dual_lattice(m3);
  CHECK(d3.dual.n() == 2);
  CHECK(d3.dual.l() == 2);
  CHECK(m3.num_edges() == 12);
  CHECK(d3.dual.num_edges() == 12);

  auto d2 = dual_lattice(Lattice::build_rect(2, 2, EdgeSetVariant::modified));
  CHECK(d2.dual.n() == 1);
  CHECK(d2.dual.num_edges() == 4);

  try {
    dual_lattice(Lattice::build_rect(2, 2));
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::precondition);
  }

  // the dual edge crosses its primal edge at the midpoint
  auto m = Lattice::build_rect(5, 4, EdgeSetVariant::modified);
  auto d = dual_lattice(m);
  for (int e = 0; e < m.num_edges(); ++e) {
    const auto& pe = m.edge(e);
    const auto& de = d.dual.edge(d.primal_to_dual[e]);
    CHECK(d.dual_to_primal[d.primal_to_dual[e]] == e);
    CHECK(pe.orient != de.orient);
    auto pa = m.vertex(pe.u), pb = m.vertex(pe.v);
    auto da = d.dual.vertex(de.u), db = d.dual.vertex(de.v);
    CHECK(pa.x + pb.x == da.x + db.x + 1);
    CHECK(pa.y + pb.y == da.y + db.y + 1);
  }
}

TEST_CASE("dual of the dual recovers the primal geometry") {
  for (int n = 3; n <= 6; ++n)
    for (int l = 3; l <= 5; ++l) {
      auto m = Lattice::build_rect(n, l, EdgeSetVariant::modified);
      auto d1 = dual_lattice(m);
      auto dm = Lattice::build_rect(d1.dual.n(), d1.dual.l(), EdgeSetVariant::modified);
      auto d2 = dual_lattice(dm);
      for (int e = 0; e < dm.num_edges(); ++e) {
        // the full dual contains dm's edges; locate the matching index by geometry
        const auto& de = dm.edge(e);
        const int full_idx = d1.dual.edge_index(de.u, de.v);
        const int primal = d1.dual_to_primal[full_idx];
        const auto& pe = m.edge(primal);
        const auto& ee = d2.dual.edge(d2.primal_to_dual[e]);
        auto a = d2.dual.vertex(ee.u), b = d2.dual.vertex(ee.v);
        auto pa = m.vertex(pe.u), pb = m.vertex(pe.v);
        CHECK(a.x + 1 == pa.x);
        CHECK(a.y + 1 == pa.y);
        CHECK(b.x + 1 == pb.x);
        CHECK(b.y + 1 == pb.y);
      }
    }
}

TEST_CASE("regions") {
  auto lat = Lattice::build_rect(4, 3);
  auto r = Region::box(lat, 1, 1, 3, 2);
  CHECK(r.is_box());
  CHECK(r.size() == 6);
  CHECK(r.inner_edges().size() + r.outer_edges().size() == static_cast<size_t>(lat.num_edges()));
  CHECK(r.inner_edges().size() == 7);
  CHECK(Region::all(lat).inner_edges().size() == static_cast<size_t>(lat.num_edges()));
  CHECK(Region::none(lat).inner_edges().empty());
}
