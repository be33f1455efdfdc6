#include <doctest.h>

#include <bit>
#include <cmath>
#include <set>

#include "fkdyn/dynamics.hpp"
#include "fkdyn/error.hpp"
#include "fkdyn/exact.hpp"
#include "fkdyn/experiments.hpp"
#include "fkdyn/rng.hpp"

using namespace fkdyn;

namespace {

// Exact Pr[e open] on a small lattice by enumeration.
double exact_marginal(const Lattice& lat, const BoundaryCondition& bc, const Params& prm, int e) {
  const auto pi = enumerate_pi(lat, bc, prm);
  double s = 0;
  for (size_t x = 0; x < pi.size(); ++x)
    if ((x >> e) & 1u) s += pi[x];
  return s;
}

int edge_at(const Lattice& lat, int x0, int y0, int x1, int y1) { return lat.edge_between({x0, y0}, {x1, y1}); }

}  // namespace

TEST_CASE("block collection geometry") {
  const Lattice lat = Lattice::build_rect(26, 26);
  const auto br = build_Br(lat, 2);
  CHECK(br.strips[0] == Box{6, 22, 20, 26});
  CHECK(br.corners[3] == Box{0, 0, 10, 10});
  const int e = edge_at(lat, 13, 13, 14, 13);
  const auto c = select_block(lat, br, e);
  CHECK(c.kind == BlockKind::edge_box);
  CHECK(c.box == Box{11, 11, 16, 16});
  CHECK(c.box[2] - c.box[0] == 2 * 2 + 1);
  // vertical edge near the east side pushes its extra column west
  const int v = edge_at(lat, 26, 13, 26, 14);
  CHECK(edge_box(lat, v, 2)[0] == 23);
  CHECK(select_block(lat, br, edge_at(lat, 0, 0, 1, 0)).kind == BlockKind::corner);
  CHECK(select_block(lat, br, edge_at(lat, 13, 26, 14, 26)).kind == BlockKind::frame);
  CHECK_THROWS_AS(build_Br(Lattice::build_rect(24, 30), 2), Error);
}

TEST_CASE("every edge gets a block at distance r from its inner boundary") {
  for (auto [n, r] : {std::pair{13, 1}, {14, 1}, {20, 1}, {25, 2}, {31, 2}, {37, 3}}) {
    const Lattice lat = Lattice::build_rect(n, n);
    const auto a = audit_Br(lat, build_Br(lat, r));
    CAPTURE(n);
    CAPTURE(r);
    CHECK(a.violations == 0);
    CHECK(a.min_distance2 >= 2 * r);
    CHECK(a.by_kind[0] + a.by_kind[1] + a.by_kind[2] == lat.num_edges());
    CHECK(a.by_kind[1] > 0);
    CHECK(a.by_kind[2] > 0);
  }
}

TEST_CASE("spatial mixing: trivial exterior gives zero") {
  const Lattice lat = Lattice::build_rect(4, 4);
  const auto est = msm_delta(lat, BoundaryCondition::free(lat), Region::all(lat), edge_at(lat, 2, 2, 3, 2),
                             {0.4, 2.0}, RngStream(3), {200, true, 1});
  CHECK(est.delta == 0.0);
  CHECK(est.half_width == 0.0);
}

TEST_CASE("spatial mixing: q = 1 has no boundary influence") {
  const Lattice lat = Lattice::build_rect(8, 8);
  const Region box = Region::box(lat, 2, 2, 5, 5);
  const auto est = msm_delta(lat, BoundaryCondition::free(lat), box, edge_at(lat, 3, 3, 4, 3), {0.5, 1.0},
                             RngStream(5), {400, true, 1});
  CHECK(est.delta < 1e-12);
}

TEST_CASE("spatial mixing marginals match exact enumeration") {
  const Lattice lat = Lattice::build_rect(6, 6);
  const Region box = Region::box(lat, 2, 2, 4, 4);
  const int e = edge_at(lat, 3, 3, 4, 3);
  const Params prm{0.55, 3.0};
  const auto est = msm_delta(lat, BoundaryCondition::free(lat), box, e, prm, RngStream(17), {4000, true, 1});
  const Lattice sub = Lattice::build_rect(2, 2);
  const int se = edge_at(sub, 1, 1, 2, 1);
  const BoundaryCondition bw = induced_region_bc(lat, box, BoundaryCondition::free(lat), FkConfig(lat.num_edges(), true));
  const double pw = exact_marginal(sub, bw, prm, se);
  const double pf = exact_marginal(sub, BoundaryCondition::free(sub), prm, se);
  CHECK(pw > pf);
  CHECK(std::abs(est.p_wired - pw) < 0.02);
  CHECK(std::abs(est.p_free - pf) < 0.02);
  CHECK(std::abs(est.difference - (pw - pf)) < 3 * est.half_width + 1e-3);

  const auto ch = msm_delta_chains(lat, BoundaryCondition::free(lat), box, e, prm, RngStream(18), 2000, 400000);
  CHECK(std::abs(ch.difference - (pw - pf)) < 3 * ch.half_width + 5e-3);
}

TEST_CASE("connection decay: percolation frequencies match enumeration") {
  const Lattice lat = Lattice::build_rect(3, 2);
  const double p = 0.45;
  const auto pairs = row_pairs(lat, 3, 0);
  // brute-force bond percolation, average over the pairs at each distance
  std::vector<double> exact(4, 0.0), count(4, 0.0);
  const int m = lat.num_edges();
  for (uint32_t x = 0; x < (1u << m); ++x) {
    const int k = std::popcount(x);
    const double w = std::pow(p, k) * std::pow(1 - p, m - k);
    std::vector<int> lab(lat.num_vertices());
    for (int v = 0; v < lat.num_vertices(); ++v) lab[v] = v;
    for (bool changed = true; changed;) {
      changed = false;
      for (int e = 0; e < m; ++e)
        if ((x >> e) & 1u) {
          int& a = lab[lat.edge(e).u];
          int& b = lab[lat.edge(e).v];
          if (a != b) {
            a = b = std::min(a, b);
            changed = true;
          }
        }
    }
    for (const auto& pr : pairs)
      if (lab[pr.u] == lab[pr.v]) exact[lat.distance(pr.u, pr.v)] += w;
  }
  for (const auto& pr : pairs) count[lat.distance(pr.u, pr.v)] += 1;
  const auto fit = edc_estimate(lat, BoundaryCondition::free(lat), {p, 1.0}, pairs, RngStream(9), {3000});
  REQUIRE(fit.points.size() == 3);
  for (const auto& pt : fit.points) {
    const double ex = exact[pt.distance] / count[pt.distance];
    const double sd = std::sqrt(ex * (1 - ex) / 3000.0);
    CAPTURE(pt.distance);
    CHECK(std::abs(pt.prob - ex) < 5 * sd);
  }
}

TEST_CASE("connection decay: subcritical decays, supercritical primal does not, dual does") {
  const Lattice lat = Lattice::build_rect(12, 12);
  const auto pairs = row_pairs(lat, 5, 3);
  const auto sub = edc_estimate(lat, BoundaryCondition::free(lat), {0.1, 2.0}, pairs, RngStream(1), {300});
  CHECK(sub.decays);
  CHECK(sub.c > 0);

  const Lattice mod = Lattice::build_rect(13, 13, EdgeSetVariant::modified);
  const auto wired = BoundaryCondition::wired(mod);
  const auto prim = edc_estimate(mod, wired, {0.9, 2.0}, row_pairs(mod, 5, 3), RngStream(2), {200});
  CHECK(!prim.decays);
  const auto dual = edc_estimate(mod, wired, {0.9, 2.0}, row_pairs(dual_lattice(mod).dual, 5, 3), RngStream(2),
                                 {200, true});
  CHECK(dual.decays);
  CHECK_THROWS_AS(edc_estimate(lat, BoundaryCondition::free(lat), {0.9, 2.0}, pairs, RngStream(2), {10, true}),
                  Error);
}

TEST_CASE("decay fit recovers a known rate") {
  std::vector<EdcPoint> pts;
  for (int d = 1; d <= 6; ++d) {
    EdcPoint p;
    p.distance = d;
    p.trials = 1000000;
    p.prob = std::exp(-0.7 * d);
    p.connected = static_cast<uint64_t>(p.prob * p.trials);
    pts.push_back(p);
  }
  const auto fit = fit_decay(pts);
  CHECK(fit.c == doctest::Approx(0.7).epsilon(1e-9));
  CHECK(fit.decays);
}

TEST_CASE("frame unfolding with free bc") {
  const int r = 1, n = 14;
  const Lattice lat = Lattice::build_rect(n, n);
  const auto u = unfold_frame(lat, r, BoundaryCondition::free(lat));
  CHECK(u.audit_ok);
  CHECK(u.q.n() == 4 * (n - 6 * r));
  CHECK(u.q.l() == 2 * r);
  CHECK(u.q_edges + 3 * 2 * r == u.frame_edges);
  CHECK(u.wired_columns.size() == 3);
  // one wired block: W, S and E sides of Q
  const auto& q = u.q;
  std::set<int> side_labels;
  int side_positions = 0;
  for (int v = 0; v < q.num_vertices(); ++v) {
    const Vertex p = q.vertex(v);
    if (p.x == 0 || p.x == q.n() || p.y == 0) {
      side_labels.insert(u.xi.label(q.cycle_position(v)));
      ++side_positions;
    }
  }
  CHECK(side_labels.size() == 1);
  CHECK(u.xi.num_blocks() == u.xi.cycle_length() - side_positions + 1);
  CHECK(is_realizable(u.xi));
}

TEST_CASE("frame unfolding of random corner-free bcs") {
  const int r = 1, n = 16;
  const Lattice lat = Lattice::build_rect(n, n);
  RngStream rng(77);
  int wired_top = 0;
  for (int i = 0; i < 500; ++i) {
    const auto bc = corner_free_modification(random_realizable(n, n, rng), 5 * r);
    REQUIRE(corner_free(bc, 5 * r));
    const auto u = unfold_frame(lat, r, bc);
    CHECK(u.audit_ok);
    CHECK(is_realizable(u.xi));
    if (!bc.is_free()) ++wired_top;
  }
  CHECK(wired_top > 0);
  const auto bad = BoundaryCondition::from_blocks(n, n, {{0, 1}});
  CHECK_THROWS_AS(unfold_frame(lat, r, bad), Error);
}

TEST_CASE("graph embedding") {
  const auto emb = embed_graph(SourceGraph::complete(3), 12, 12);
  const int n = 12, l = 12;
  const std::vector<std::vector<int>> want = {
      {north_position(n, l, 1), north_position(n, l, 4)},
      {north_position(n, l, 5), north_position(n, l, 8)},
      {north_position(n, l, 9), north_position(n, l, 0)},
  };
  auto got = emb.bc.nontrivial_blocks();
  std::set<std::vector<int>> gs, ws;
  for (auto b : got) {
    std::sort(b.begin(), b.end());
    gs.insert(b);
  }
  for (auto b : want) {
    std::sort(b.begin(), b.end());
    ws.insert(b);
  }
  CHECK(gs == ws);
  CHECK(is_realizable(emb.bc));
  CHECK(!is_realizable(embed_graph(SourceGraph::complete(4), 24, 4).bc));
  const auto path = embed_graph(SourceGraph::path(3), 8, 2);
  CHECK(path.bc.nontrivial_blocks().size() == 1);
  CHECK(path.bc.nontrivial_blocks()[0].size() == 2);
  CHECK_THROWS_AS(embed_graph(SourceGraph::complete(3), 11, 11), Error);
}

TEST_CASE("external connections") {
  const auto emb = embed_graph(SourceGraph::complete(3), 12, 3);
  const Lattice lat = Lattice::build_rect(12, 3);
  FkConfig s(lat.num_edges());
  CHECK(count_external_connections(lat, emb, s) == 0);
  // carrier edges alone join nothing
  for (int e : emb.l_edges) s.set(e, true);
  CHECK(count_external_connections(lat, emb, s) == 0);
  // top path from x=1 to x=4 stays inside the block of graph vertex 1
  for (int x = 1; x < 4; ++x) s.set(edge_at(lat, x, 3, x + 1, 3), true);
  CHECK(count_external_connections(lat, emb, s) == 0);
  // dropping to row 2 and back up at x=5 reaches the block of vertex 2
  s.set(edge_at(lat, 4, 2, 4, 3), true);
  s.set(edge_at(lat, 4, 2, 5, 2), true);
  s.set(edge_at(lat, 5, 2, 5, 3), true);
  CHECK(count_external_connections(lat, emb, s) == 2);
  CHECK(in_R(lat, emb, s, 2));
  CHECK(!in_R(lat, emb, s, 1));
}

TEST_CASE("external connections are monotone and their tails shrink") {
  const auto emb = embed_graph(SourceGraph::complete(3), 12, 4);
  const Lattice lat = Lattice::build_rect(12, 4);
  RngStream rng(21);
  std::vector<int> tally(4, 0);
  const int trials = 3000;
  for (int i = 0; i < trials; ++i) {
    FkConfig a(lat.num_edges()), b(lat.num_edges());
    for (int e = 0; e < lat.num_edges(); ++e) {
      const double u = rng.uniform();
      a.set(e, u < 0.3);
      b.set(e, u < 0.5);
    }
    CHECK(count_external_connections(lat, emb, a) <= count_external_connections(lat, emb, b));
    ++tally[count_external_connections(lat, emb, a)];
  }
  CHECK(tally[1] == 0);  // a joined block always has a partner
  // Pr[count >= M] is nonincreasing in M
  int tail = trials;
  for (int m = 0; m <= 3; ++m) {
    const int next = tail - tally[m];
    CHECK(next <= tail);
    tail = next;
  }
  CHECK(tally[0] > tally[2]);
}

TEST_CASE("bottleneck sets on the source graph") {
  const auto g = SourceGraph::complete(3);
  CHECK(largest_component(g, 0) == 1);
  CHECK(largest_component(g, 1) == 2);
  CHECK(largest_component(g, 3) == 3);
  CHECK(in_S_star(g, {2, true, 0}, 1));
  CHECK(!in_S_star(g, {2, true, 0}, 3));
  CHECK(in_S_star(g, {2, false, 0}, 5));
}

TEST_CASE("graph conductance agrees with a direct cut computation") {
  const auto g = SourceGraph::complete(3);
  const auto fk = enumerate_graph(g);
  const Params prm{0.4, 3.0};
  const auto pi = graph_pi(fk, prm);
  // A = empty configuration only; leaving it means opening one edge (always a cut edge)
  std::vector<char> a(8, 0);
  a[0] = 1;
  CHECK(graph_conductance(fk, pi, prm, a) == doctest::Approx(prm.p_hat()));
  const auto h = largest_histogram(fk, pi);
  CHECK(h.size() == 3);
  CHECK(h[0] + h[1] + h[2] == doctest::Approx(1.0));
  CHECK(h[0] == doctest::Approx(pi[0]));
}

TEST_CASE("MHB conductance matches the transition matrix") {
  const Lattice lat = Lattice::build_rect(2, 1);
  const auto bc = BoundaryCondition::free(lat);
  const Region L = Region::box(lat, 0, 1, 2, 1);
  const Params prm{0.5, 2.5};
  const auto chain = mhb_transition_matrix(lat, bc, L, prm);
  RngStream rng(5);
  for (int t = 0; t < 10; ++t) {
    std::vector<char> set(1u << lat.num_edges());
    for (auto& c : set) c = rng.uniform() < 0.4;
    set[0] = 1;
    CHECK(mhb_conductance(lat, bc, L, prm, set) == doctest::Approx(conductance(chain, set)).epsilon(1e-10));
  }
}

TEST_CASE("bimodality detector") {
  int a = -1;
  CHECK(is_bimodal({0.4, 0.1, 0.5}, 0.02, &a));
  CHECK(a == 1);
  CHECK(!is_bimodal({0.1, 0.3, 0.6}, 0.02, &a));
  CHECK(a == -1);
  CHECK(!is_bimodal({0.5, 0.495, 0.5}, 0.02));
  // percolation on K_5 has a unimodal largest-component law
  const auto fk = enumerate_graph(SourceGraph::complete(5));
  const auto sc = scan_window(fk, 1.0, 0.5, 4.5, 0.1, 0.02);
  CHECK(!sc.found);
  const auto hot = scan_window(fk, 8.0, 0.5, 4.9, 0.02, 0.02);
  CHECK(hot.found);
  CHECK(hot.lo <= hot.mid);
  CHECK(hot.mid <= hot.hi);
}

TEST_CASE("tiny bottleneck conductance") {
  // values from tests/oracles/tiny_am.py
  const auto a = tiny_am_conductance({0.5, 5.0}, 2, 1);
  CHECK(a.phi == doctest::Approx(0.030033010070).epsilon(1e-9));
  CHECK(a.phi_complement == doctest::Approx(0.217569005043).epsilon(1e-9));
  CHECK(a.mass == doctest::Approx(0.878704500624).epsilon(1e-9));
  const auto b = tiny_am_conductance({0.48, 5.0}, 2, 1);
  CHECK(b.phi == doctest::Approx(0.024514789367).epsilon(1e-9));
  CHECK(b.mass == doctest::Approx(0.896925487615).epsilon(1e-9));
}

TEST_CASE("typical boundary conditions") {
  const auto bc = typical_sample(6, 3, {0.5, 2.0}, RngStream(4));
  CHECK(bc.n() == 6);
  CHECK(is_realizable(bc));
  const auto lo = typicality_rate(8, 4, {0.2, 2.0}, 0.5, 20, RngStream(6));
  CHECK(lo.samples == 20);
  CHECK(lo.rate >= lo.rate_lo);
  CHECK(lo.in_class > lo.in_class_star);
  const auto hi = typicality_rate(8, 4, {0.9, 2.0}, 0.5, 20, RngStream(6));
  CHECK(hi.in_class_star > hi.in_class);
}
