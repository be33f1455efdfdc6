#include <doctest.h>

#include <json.hpp>

#include "fkdyn/blocks.hpp"
#include "fkdyn/error.hpp"
#include "fkdyn/rng.hpp"

using namespace fkdyn;

namespace {

BoundaryCondition top_blocks(int n, int l, const std::vector<std::vector<int>>& cols) {
  std::vector<std::vector<int>> blocks;
  for (const auto& b : cols) {
    std::vector<int> pos;
    for (int x : b) pos.push_back(north_position(n, l, x));
    blocks.push_back(pos);
  }
  return BoundaryCondition::from_blocks(n, l, blocks);
}

}  // namespace

TEST_CASE("interval classification") {
  auto bc = top_blocks(8, 3, {{1, 4}});
  CHECK(classify_interval(bc, 1, 4) == IntervalType::free_wired);
  CHECK(classify_interval(bc, 2, 3) == IntervalType::free);
  CHECK(classify_interval(bc, 0, 2) == IntervalType::none);
  CHECK(classify_interval(bc, 5, 5) == IntervalType::free_wired);
  auto nested = top_blocks(10, 2, {{1, 7}, {2, 4}, {8, 9}});
  CHECK(classify_interval(nested, 1, 7) == IntervalType::free_wired);
  CHECK(classify_interval(nested, 1, 8) == IntervalType::none);
  CHECK(classify_interval(nested, 0, 4) == IntervalType::none);
  CHECK(classify_interval(nested, 2, 4) == IntervalType::free_wired);
  CHECK(classify_interval(nested, 1, 9) == IntervalType::free);
  CHECK(classify_interval(nested, 5, 6) == IntervalType::free);
  // a wiring that leaves the top side never makes the interval free
  auto side = BoundaryCondition::from_blocks(4, 2, {{north_position(4, 2, 2), 1}});
  CHECK(classify_interval(side, 0, 4) == IntervalType::none);
  CHECK(!free_off_top(side));
}

TEST_CASE("interval lemmas hold on realizable bcs and fail on a crossing one") {
  CHECK(check_interval_lemmas(BoundaryCondition::free(20, 3)).empty());
  CHECK(check_interval_lemmas(top_blocks(12, 2, {{1, 9}, {2, 5}, {6, 8}, {10, 11}})).empty());
  RngStream rng(4);
  for (int i = 0; i < 40; ++i) {
    auto bc = random_top_bc(24, 2, 1, rng);
    REQUIRE(is_realizable(bc));
    CHECK(check_interval_lemmas(bc).empty());
  }
  auto crossing = top_blocks(8, 2, {{1, 3}, {2, 4}});
  CHECK(!is_realizable(crossing));
  CHECK(!check_interval_lemmas(crossing).empty());
}

TEST_CASE("groups of rectangles") {
  GroupOfRectangles g(100, 3, {{0, 30}, {40, 70}, {80, 100}});
  CHECK(g.width() == 80);
  CHECK(g.width_within(20, 45) == 15);
  CHECK(g.slab_of(35) == -1);
  CHECK(g.slab_of(40) == 1);
  CHECK(g.parallel_distance(50) == 10);
  CHECK(g.valid(10));
  CHECK(!g.valid(11));
  CHECK_THROWS_AS(GroupOfRectangles(10, 2, {{0, 5}, {5, 9}}), Error);
  auto c = g.clip({{10, 50}});
  CHECK(c.slabs() == std::vector<Slab>{{10, 30}, {40, 50}});
  CHECK(GroupOfRectangles::whole(10, 2).region(Lattice::build_rect(10, 2)).size() == 33);
}

TEST_CASE("compatibility") {
  const int n = 200, m = 4;
  CHECK(is_compatible(GroupOfRectangles::whole(n, 3), BoundaryCondition::free(n, 3), m));
  // a wired arc through the gap between slabs makes the gap interval fail
  auto bc = top_blocks(n, 3, {{105, 150}});
  GroupOfRectangles g(n, 3, {{0, 100}, {110, 200}});
  CHECK(is_compatible(g, BoundaryCondition::free(n, 3), m));
  CHECK(!is_compatible(g, bc, m));
  // too thin
  CHECK(!is_compatible(GroupOfRectangles(n, 3, {{0, 5}, {50, 200}}), BoundaryCondition::free(n, 3), m));
  // corner wiring violates the standing assumption
  CHECK(!is_compatible(GroupOfRectangles::whole(n, 3), top_blocks(n, 3, {{2, 150}}), m));
}

TEST_CASE("split on the free bc") {
  const int n = 400, m = 3;
  auto s = split(GroupOfRectangles::whole(n, 2), BoundaryCondition::free(n, 2), m);
  CHECK(has_free(classify_interval(BoundaryCondition::free(n, 2), s.c_star, s.d_star)));
  const int w = s.A_int.width();
  CHECK(4 * w >= n);
  CHECK(4 * w <= 3 * n);
  CHECK(s.R_int.width() == w + 2 * m);
  auto t = nlohmann::json::parse(s.trace);
  CHECK(t["c_star"] == s.c_star);
}

TEST_CASE("split on fully nested arcs gives multi-slab blocks") {
  const int n = 300, m = 2;
  // arcs nested around the middle; no pair sits inside the width band
  auto bc = top_blocks(n, 2, {{10, 290}, {20, 280}, {30, 270}});
  auto s = split(GroupOfRectangles::whole(n, 2), bc, m);
  CHECK(s.R_ext.count() == 2);
  CHECK(s.R_int.count() == 1);
  CHECK(is_compatible(s.R_int, bc, m));
  CHECK(is_compatible(s.R_ext, bc, m));
}

TEST_CASE("split postconditions on random instances") {
  RngStream rng(77);
  for (int i = 0; i < 150; ++i) {
    auto in = random_split_instance(rng);
    REQUIRE(is_compatible(in.group, in.bc, in.m));
    SplitResult s = split(in.group, in.bc, in.m);
    const int W = in.group.width();
    CHECK(is_disconnecting(classify_interval(in.bc, s.c_star, s.d_star)));
    CHECK(in.group.parallel_distance(s.c_star) >= in.m);
    CHECK(in.group.parallel_distance(s.d_star) >= in.m);
    CHECK(in.group.on_top(s.c_star));
    CHECK(in.group.on_top(s.d_star));
    CHECK(4 * s.A_int.width() >= W);
    CHECK(4 * s.A_int.width() <= 3 * W);
    CHECK(5 * s.R_int.width() >= W);
    CHECK(5 * s.R_int.width() <= 4 * W);
    CHECK(5 * s.R_ext.width() >= W);
    CHECK(5 * s.R_ext.width() <= 4 * W);
    CHECK(is_compatible(s.R_int, in.bc, in.m));
    CHECK(is_compatible(s.R_ext, in.bc, in.m));
    // determinism
    CHECK(split(in.group, in.bc, in.m).trace == s.trace);
  }
}

TEST_CASE("split preconditions") {
  CHECK_THROWS_AS(split(GroupOfRectangles::whole(50, 2), BoundaryCondition::free(50, 2), 1), Error);
  CHECK_THROWS_AS(split(GroupOfRectangles::whole(200, 2), BoundaryCondition::wired(200, 2), 1), Error);
}

TEST_CASE("recursion depth") {
  const int n = 3000, m = 2;
  auto bc = BoundaryCondition::free(n, 2);
  std::vector<GroupOfRectangles> frontier{GroupOfRectangles::whole(n, 2)};
  int levels = 0;
  while (!frontier.empty()) {
    std::vector<GroupOfRectangles> next;
    for (const auto& g : frontier) {
      if (g.width() < 100 * m) continue;
      auto s = split(g, bc, m);
      next.push_back(s.R_int);
      next.push_back(s.R_ext);
    }
    if (next.empty()) break;
    frontier = next;
    ++levels;
  }
  CHECK(levels <= static_cast<int>(std::ceil(std::log(n) / std::log(1.25))) + 1);
}

TEST_CASE("gamma events") {
  const int n = 220, l = 4, m = 2;
  Lattice lat = Lattice::build_rect(n, l);
  auto s = split(GroupOfRectangles::whole(n, l), BoundaryCondition::free(n, l), m);
  FkConfig closed(lat.num_edges(), false), open(lat.num_edges(), true);
  CHECK(gamma_event(lat, closed, s, m, GammaKind::dual));
  CHECK(!gamma_event(lat, closed, s, m, GammaKind::primal));
  CHECK(!gamma_event(lat, open, s, m, GammaKind::dual));
  CHECK(gamma_event(lat, open, s, m, GammaKind::primal));
  // a single open vertical column inside Q_W blocks the dual crossing there
  FkConfig wall = closed;
  for (int y = 0; y < l; ++y) wall.set(lat.edge_between({s.c_star - 1, y}, {s.c_star - 1, y + 1}), true);
  for (int x = s.c_star - m; x < s.c_star; ++x) wall.set(lat.edge_between({x, 0}, {x + 1, 0}), true);
  CHECK(!gamma_event(lat, wall, s, m, GammaKind::dual));
}
