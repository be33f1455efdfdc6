#include <doctest.h>

#include <cmath>

#include "fkdyn/error.hpp"
#include "fkdyn/rng.hpp"
#include "fkdyn/state.hpp"

using namespace fkdyn;

TEST_CASE("component counts on the unit square") {
  auto lat = Lattice::build_rect(1, 1);
  FkConfig empty(lat.num_edges());
  CHECK(component_count(lat, empty, BoundaryCondition::free(lat)) == 4);
  CHECK(component_count(lat, empty, BoundaryCondition::wired(lat)) == 1);
  FkConfig west(lat.num_edges());
  west.set(lat.edge_between({0, 0}, {0, 1}), true);
  CHECK(component_count(lat, west, BoundaryCondition::free(lat)) == 3);
}

TEST_CASE("cut edges on the unit square") {
  auto lat = Lattice::build_rect(1, 1);
  auto fr = BoundaryCondition::free(lat);
  FkConfig u(lat.num_edges(), true);
  const int top = lat.edge_between({0, 1}, {1, 1});
  u.set(top, false);
  CHECK_FALSE(is_cut_edge(lat, u, fr, top));
  FkConfig empty(lat.num_edges());
  for (int e = 0; e < 4; ++e) {
    CHECK(is_cut_edge(lat, empty, fr, e));
    CHECK_FALSE(is_cut_edge(lat, empty, BoundaryCondition::wired(lat), e));
  }
}

TEST_CASE("log weights") {
  auto lat = Lattice::build_rect(1, 1);
  Params prm{0.5, 2.0};
  CHECK(log_weight(lat, FkConfig(4), BoundaryCondition::free(lat), prm) == doctest::Approx(0.0));
  CHECK(log_weight(lat, FkConfig(4, true), BoundaryCondition::wired(lat), prm) ==
        doctest::Approx(-3.0 * std::log(2.0)));
}

TEST_CASE("params") {
  Params prm{0.5, 2.0};
  CHECK(prm.p_hat() == doctest::Approx(1.0 / 3.0));
  CHECK(Params{0.3, 1.0}.p_hat() == doctest::Approx(0.3));
  CHECK(critical_p(1.0) == doctest::Approx(0.5));
  // self-dual at the critical point
  const double pc = critical_p(3.0);
  CHECK(Params{pc, 3.0}.p_star() == doctest::Approx(pc));
  CHECK_THROWS_AS((Params{1.0, 2.0}.validate()), Error);
}

TEST_CASE("cut-edge characterization, exhaustive on small lattices") {
  RngStream rng(1);
  std::vector<Lattice> lats{Lattice::build_rect(1, 1), Lattice::build_rect(2, 1), Lattice::build_rect(1, 2),
                            Lattice::build_rect(3, 2, EdgeSetVariant::modified),
                            Lattice::build_rect(2, 2, EdgeSetVariant::modified)};
  for (const auto& lat : lats) {
    std::vector<BoundaryCondition> bcs{BoundaryCondition::free(lat), BoundaryCondition::wired(lat)};
    for (int i = 0; i < 3; ++i) bcs.push_back(random_realizable(lat.n(), lat.l(), rng, 0.7));
    for (const auto& bc : bcs) {
      Kernel k(lat, bc);
      const int m = lat.num_edges();
      for (uint64_t mask = 0; mask < (uint64_t{1} << m); ++mask) {
        auto s = FkConfig::from_mask(m, mask);
        for (int e = 0; e < m; ++e) {
          auto with = s, without = s;
          with.set(e, true);
          without.set(e, false);
          const int diff = k.component_count(without) - k.component_count(with);
          CHECK(k.is_cut_edge(s, e) == (diff == 1));
        }
      }
    }
  }
}

TEST_CASE("component count is monotone in edges and in bc order") {
  RngStream rng(8);
  auto lat = Lattice::build_rect(4, 3);
  for (int t = 0; t < 200; ++t) {
    auto fine = random_realizable(4, 3, rng, 0.6);
    // coarsen by merging two random blocks (may cross; the count is still monotone)
    auto lab = fine.labels();
    const int a = lab[rng.below(lab.size())], b = lab[rng.below(lab.size())];
    for (auto& x : lab)
      if (x == b) x = a;
    auto coarse = BoundaryCondition::from_labels(4, 3, lab);
    FkConfig s(lat.num_edges());
    for (auto& bit : s.bits) bit = rng.uniform() < 0.5;
    auto s2 = s;
    s2.set(static_cast<int>(rng.below(lat.num_edges())), true);
    CHECK(component_count(lat, s2, fine) <= component_count(lat, s, fine));
    CHECK(component_count(lat, s, coarse) <= component_count(lat, s, fine));
  }
}

TEST_CASE("kernel agrees with the naive oracle") {
  RngStream rng(77);
  int queries = 0;
  while (queries < 100000) {
    const int n = 1 + static_cast<int>(rng.below(12)), l = 1 + static_cast<int>(rng.below(12));
    const bool modified = n >= 2 && l >= 2 && rng.uniform() < 0.3;
    auto lat = Lattice::build_rect(n, l, modified ? EdgeSetVariant::modified : EdgeSetVariant::full);
    if (lat.num_edges() == 0) continue;
    BoundaryCondition bc;
    const double pick = rng.uniform();
    if (pick < 0.2)
      bc = BoundaryCondition::free(lat);
    else if (pick < 0.4)
      bc = BoundaryCondition::wired(lat);
    else if (pick < 0.9)
      bc = random_realizable(n, l, rng, rng.uniform());
    else {
      auto lab = random_realizable(n, l, rng, 0.5).labels();
      for (int i = 0; i + 2 < static_cast<int>(lab.size()); i += 3) lab[i] = lab[i + 2];
      bc = BoundaryCondition::from_labels(n, l, lab);
    }
    Kernel k(lat, bc);
    const double density = rng.uniform();
    for (int t = 0; t < 200; ++t, ++queries) {
      FkConfig s(lat.num_edges());
      for (auto& b : s.bits) b = rng.uniform() < density;
      const int e = static_cast<int>(rng.below(lat.num_edges()));
      REQUIRE(k.connected_off(s, e) == k.connected_off_naive(s, e));
    }
  }
}

TEST_CASE("connectivity queries") {
  auto lat = Lattice::build_rect(3, 3);
  FkConfig empty(lat.num_edges());
  const int u = lat.vertex_index(0, 0), v = lat.vertex_index(3, 2);
  CHECK_FALSE(connected(lat, empty, BoundaryCondition::free(lat), u, v, true));
  CHECK(connected(lat, empty, BoundaryCondition::wired(lat), u, v, true));
  CHECK_FALSE(connected(lat, empty, BoundaryCondition::wired(lat), u, v, false));
  RngStream rng(3);
  Kernel k(lat, BoundaryCondition::free(lat));
  for (int t = 0; t < 500; ++t) {
    FkConfig s(lat.num_edges());
    for (auto& b : s.bits) b = rng.uniform() < 0.5;
    const int a = static_cast<int>(rng.below(lat.num_vertices())), b = static_cast<int>(rng.below(lat.num_vertices()));
    // plain BFS oracle
    std::vector<char> seen(lat.num_vertices(), 0);
    std::vector<int> st{a};
    seen[a] = 1;
    while (!st.empty()) {
      int w = st.back();
      st.pop_back();
      auto [nb, end] = lat.incident(w);
      const int* inc = lat.incident_edges(w);
      for (; nb != end; ++nb, ++inc)
        if (s.open(*inc) && !seen[*nb]) {
          seen[*nb] = 1;
          st.push_back(*nb);
        }
    }
    CHECK(k.connected(s, a, b) == static_cast<bool>(seen[b]));
  }
}

TEST_CASE("configuration duality") {
  auto lat = Lattice::build_rect(4, 3, EdgeSetVariant::modified);
  FkConfig all(lat.num_edges(), true);
  auto d = dual_config(all, lat);
  CHECK(d.count_open() == 0);
  RngStream rng(6);
  for (int t = 0; t < 50; ++t) {
    FkConfig s(lat.num_edges());
    for (auto& b : s.bits) b = rng.uniform() < 0.5;
    CHECK(primal_config(dual_config(s, lat), lat) == s);
  }
  CHECK_THROWS_AS(dual_config(FkConfig(12), Lattice::build_rect(2, 2)), Error);
}

TEST_CASE("serialization") {
  auto lat = Lattice::build_rect(3, 2);
  RngStream rng(10);
  FkConfig s(lat.num_edges());
  for (auto& b : s.bits) b = rng.uniform() < 0.5;
  auto text = serialize_config(lat, s);
  CHECK(deserialize_config(lat, text) == s);
  CHECK_THROWS_AS(deserialize_config(Lattice::build_rect(2, 2), text), Error);
}
