#include <doctest.h>

#include <bit>
#include <cmath>
#include <map>

#include "fkdyn/dynamics.hpp"
#include "fkdyn/error.hpp"
#include "fkdyn/exact.hpp"
#include "fkdyn/stats.hpp"

using namespace fkdyn;

TEST_CASE("open probability at q = 1 ignores cut status") {
  Lattice lat = Lattice::build_rect(1, 1);
  Kernel k(lat, BoundaryCondition::free(lat));
  Params prm{0.4, 1.0};
  FkConfig s(lat.num_edges());
  CHECK(heat_bath_open(k, s, 0, 0.399, prm));
  CHECK(!heat_bath_open(k, s, 0, 0.4, prm));
  FkConfig loop(lat.num_edges(), true);
  CHECK(heat_bath_open(k, loop, 0, 0.399, prm));
}

TEST_CASE("cut-edge opens with probability p-hat") {
  Params prm{0.5, 2.0};
  CHECK(prm.p_hat() == doctest::Approx(1.0 / 3.0));
  Lattice lat = Lattice::build_rect(1, 1);
  Kernel k(lat, BoundaryCondition::free(lat));
  FkConfig s(lat.num_edges());
  RngStream rng(11);
  const int trials = 100000;
  int opened = 0;
  for (int i = 0; i < trials; ++i) opened += heat_bath_open(k, s, 0, rng.uniform(), prm);
  const double ph = prm.p_hat(), sd = std::sqrt(trials * ph * (1 - ph));
  CHECK(std::abs(opened - trials * ph) <= 3 * sd);
}

TEST_CASE("steps consume exactly two variates and replay") {
  Lattice lat = Lattice::build_rect(3, 2);
  Kernel k(lat, BoundaryCondition::wired(lat));
  Params prm{0.5, 2.0};
  RngStream a(5), b(5);
  FkConfig x(lat.num_edges()), y(lat.num_edges());
  for (int i = 0; i < 500; ++i) {
    glauber_step(k, x, prm, a);
    CHECK(a.counter() == 2u * (i + 1));
  }
  for (int i = 0; i < 500; ++i) y = glauber_step(lat, y, BoundaryCondition::wired(lat), prm, b);
  CHECK(x == y);
}

TEST_CASE("identity coupling preserves order") {
  Lattice lat = Lattice::build_rect(4, 4);
  for (double q : {1.0, 2.0, 4.0}) {
    Kernel k(lat, BoundaryCondition::free(lat));
    Params prm{0.4, q};
    RngStream rng(17);
    FkConfig x(lat.num_edges(), false), y(lat.num_edges(), true), z(lat.num_edges(), false);
    int violations = 0;
    for (int t = 0; t < 100000; ++t) {
      const uint64_t c = rng.counter();
      identity_coupled_step(k, x, y, prm, rng);
      // a third chain replaying the same update keeps the sandwich
      RngStream replay = rng;
      replay.seek(c);
      glauber_step(k, z, prm, replay);
      violations += !x.subset_of(y) || !x.subset_of(z) || !z.subset_of(y);
    }
    CHECK(violations == 0);
  }
  // equal inputs stay equal
  Kernel k(lat, BoundaryCondition::wired(lat));
  RngStream rng(3);
  FkConfig x(lat.num_edges(), true), y = x;
  for (int t = 0; t < 2000; ++t) identity_coupled_step(k, x, y, {0.3, 2.0}, rng);
  CHECK(x == y);
}

TEST_CASE("coupling time") {
  Lattice lat = Lattice::build_rect(3, 3);
  auto st = coupling_time(lat, BoundaryCondition::free(lat), {0.3, 1.5}, 1000000, 40, RngStream(7), 2, 50);
  CHECK(st.censored == 0);
  CHECK(st.median > 0);
  CHECK(st.q25 <= st.median);
  CHECK(st.median <= st.q75);
  CHECK(st.t_quarter >= st.q25);
  for (const auto& r : st.runs) CHECK(r.trajectory.front().size_x == lat.num_edges());
  // thread count does not change results
  auto st1 = coupling_time(lat, BoundaryCondition::free(lat), {0.3, 1.5}, 1000000, 40, RngStream(7), 1, 50);
  for (int i = 0; i < 40; ++i) CHECK(st.runs[i].steps == st1.runs[i].steps);
  auto cens = coupling_time(lat, BoundaryCondition::free(lat), {0.3, 1.5}, 5, 4, RngStream(7));
  CHECK(cens.censored == 4);
  CHECK(cens.t_quarter == 0);
  CHECK_THROWS_AS(coupling_time(lat, BoundaryCondition::free(lat), {0.3, 0.5}, 5, 4, RngStream(7)), Error);
}

namespace {

ChiSquare cftp_fit(const Lattice& lat, const BoundaryCondition& bc, const Params& prm, int samples, uint64_t seed) {
  Kernel k(lat, bc);
  const auto pi = enumerate_pi(lat, bc, prm);
  std::vector<uint64_t> counts(pi.size(), 0);
  RngStream root(seed);
  for (int i = 0; i < samples; ++i) ++counts[cftp_sample(k, prm, root.split(i)).to_mask()];
  return chi_square_gof(counts, pi);
}

}  // namespace

TEST_CASE("CFTP matches the enumerated measure") {
  for (auto var : {EdgeSetVariant::full, EdgeSetVariant::modified}) {
    Lattice lat = Lattice::build_rect(2, var == EdgeSetVariant::full ? 1 : 2, var);
    for (int b = 0; b < 2; ++b) {
      auto bc = b ? BoundaryCondition::wired(lat) : BoundaryCondition::free(lat);
      auto chi = cftp_fit(lat, bc, {0.5, 2.0}, 20000, 100 + b);
      CHECK(chi.p_value > 0.001);
    }
  }
  Lattice lat = Lattice::build_rect(2, 2);
  Kernel k(lat, BoundaryCondition::wired(lat));
  int empty = 0;
  for (int i = 0; i < 200; ++i) empty += cftp_sample(k, {1e-6, 2.0}, RngStream(9).split(i)).count_open() == 0;
  CHECK(empty >= 199);
}

TEST_CASE("CFTP is reproducible and respects the epoch cap") {
  Lattice lat = Lattice::build_rect(3, 3);
  Kernel k(lat, BoundaryCondition::free(lat));
  CftpStats s1, s2;
  auto a = cftp_sample(k, {0.5, 2.0}, RngStream(1), {}, &s1);
  auto b = cftp_sample(k, {0.5, 2.0}, RngStream(1), {}, &s2);
  CHECK(a == b);
  CHECK(s1.T == s2.T);
  CHECK(s1.T % lat.num_edges() == 0);
  CHECK_THROWS_AS(cftp_sample(k, {0.5, 2.0}, RngStream(1), CftpOptions{1}), Error);
}

TEST_CASE("conditional CFTP matches the exact conditional law") {
  Lattice lat = Lattice::build_rect(2, 1);
  auto bc = BoundaryCondition::free(lat);
  Params prm{0.6, 2.5};
  const auto pi = enumerate_pi(lat, bc, prm);
  Kernel k(lat, bc);
  const std::vector<int> free_edges{0, 2, 4};
  FkConfig base(lat.num_edges());
  base.set(1, true);
  base.set(5, true);
  uint32_t fmask = 0;
  for (int e : free_edges) fmask |= 1u << e;
  const uint32_t fixed = static_cast<uint32_t>(base.to_mask()) & ~fmask;
  std::vector<double> cond(8, 0.0);
  std::vector<uint64_t> counts(8, 0);
  auto code = [&](uint32_t x) {
    int c = 0;
    for (int i = 0; i < 3; ++i) c |= ((x >> free_edges[i]) & 1u) << i;
    return c;
  };
  double z = 0;
  for (uint32_t x = 0; x < pi.size(); ++x)
    if ((x & ~fmask) == fixed) {
      cond[code(x)] += pi[x];
      z += pi[x];
    }
  for (auto& c : cond) c /= z;
  for (int i = 0; i < 20000; ++i) {
    auto s = cftp_conditional(k, base, free_edges, prm, RngStream(4).split(i));
    CHECK(((static_cast<uint32_t>(s.to_mask()) & ~fmask) == fixed));
    ++counts[code(static_cast<uint32_t>(s.to_mask()))];
  }
  CHECK(chi_square_gof(counts, cond).p_value > 0.001);
}

TEST_CASE("coupled CFTP outputs are ordered by boundary condition") {
  Lattice lat = Lattice::build_rect(4, 4);
  Kernel kf(lat, BoundaryCondition::free(lat)), kw(lat, BoundaryCondition::wired(lat));
  std::vector<int> all(lat.num_edges());
  for (int e = 0; e < lat.num_edges(); ++e) all[e] = e;
  for (int i = 0; i < 100; ++i) {
    auto out = cftp_coupled({&kf, &kw}, FkConfig(lat.num_edges()), all, {0.5, 2.0}, RngStream(8).split(i));
    CHECK(out[0].subset_of(out[1]));
  }
}

TEST_CASE("MHB with L = whole box is Glauber") {
  Lattice lat = Lattice::build_rect(3, 3);
  Kernel k(lat, BoundaryCondition::free(lat));
  Params prm{0.5, 2.0};
  RngStream a(2), b(2);
  FkConfig x(lat.num_edges()), y(lat.num_edges());
  for (int t = 0; t < 1000; ++t) {
    mhb_step(k, x, Region::all(lat), prm, a);
    glauber_step(k, y, prm, b);
  }
  CHECK(x == y);
}

TEST_CASE("MHB with empty L resamples everything") {
  Lattice lat = Lattice::build_rect(2, 1);
  auto bc = BoundaryCondition::wired(lat);
  Params prm{0.5, 2.0};
  Kernel k(lat, bc);
  const auto pi = enumerate_pi(lat, bc, prm);
  std::vector<uint64_t> counts(pi.size(), 0);
  RngStream rng(6);
  FkConfig s(lat.num_edges(), true);
  for (int t = 0; t < 20000; ++t) {
    mhb_step(k, s, Region::none(lat), prm, rng);
    ++counts[s.to_mask()];
  }
  CHECK(chi_square_gof(counts, pi).p_value > 0.001);
}

TEST_CASE("block dynamics") {
  Lattice lat = Lattice::build_rect(8, 2);
  auto bc = BoundaryCondition::free(lat);
  Params prm{0.55, 2.0};
  Kernel k(lat, bc);
  CHECK_THROWS_AS(validate_cover(lat, {Region::box(lat, 0, 0, 4, 2)}), Error);
  std::vector<Region> blocks{Region::box(lat, 0, 0, 5, 2), Region::box(lat, 3, 0, 8, 2)};
  validate_cover(lat, blocks);
  // stationary mean of |S| against independent CFTP samples
  RngStream rng(12);
  FkConfig s(lat.num_edges());
  const int steps = 4000;
  double sb = 0, sb2 = 0, sc = 0, sc2 = 0;
  for (int t = 0; t < steps; ++t) {
    block_dynamics_step(k, s, blocks, prm, rng);
    const double v = s.count_open();
    sb += v;
    sb2 += v * v;
    const double w = cftp_sample(k, prm, RngStream(99).split(t)).count_open();
    sc += w;
    sc2 += w * w;
  }
  const double mb = sb / steps, mc = sc / steps;
  const double var = (sb2 / steps - mb * mb + sc2 / steps - mc * mc) / steps;
  // block updates are strongly correlated only through the overlap; allow a 3x inflation
  CHECK(std::abs(mb - mc) <= 3 * std::sqrt(3 * var));
  // whole box as the only block: each step is an exact sample
  FkConfig t0(lat.num_edges());
  RngStream r2(1);
  block_dynamics_step(k, t0, {Region::all(lat)}, prm, r2);
  CHECK(r2.counter() == 2);
}

TEST_CASE("primal trajectories map to the dual measure") {
  Lattice lat = Lattice::build_rect(3, 3, EdgeSetVariant::modified);
  DualLattice dl = dual_lattice(lat);
  Params prm{0.45, 2.0};
  auto bc = BoundaryCondition::wired(lat);
  auto dbc = dual_bc(bc, lat);
  const auto pd = enumerate_pi(dl.dual, dbc, {prm.p_star(), prm.q});
  double exact_mean = 0;
  for (uint32_t x = 0; x < pd.size(); ++x) exact_mean += pd[x] * std::popcount(x);
  Kernel k(lat, bc);
  RngStream rng(21);
  FkConfig s(lat.num_edges());
  const int batches = 50, per = 4000;
  std::vector<double> means;
  for (int b = 0; b < batches; ++b) {
    double acc = 0;
    for (int t = 0; t < per; ++t) {
      glauber_step(k, s, prm, rng);
      acc += dual_config(s, lat).count_open();
    }
    means.push_back(acc / per);
  }
  double m = 0, v = 0;
  for (double x : means) m += x / batches;
  for (double x : means) v += (x - m) * (x - m) / (batches - 1);
  CHECK(std::abs(m - exact_mean) <= 4 * std::sqrt(v / batches));
}

TEST_CASE("trace rows") {
  Lattice lat = Lattice::build_rect(2, 2);
  Kernel k(lat, BoundaryCondition::free(lat));
  auto rows = simulate_trace(k, FkConfig(lat.num_edges()), {0.5, 2.0}, 100, 10, RngStream(1));
  CHECK(rows.size() == 11);
  CHECK(rows.front().components == lat.num_vertices());
  CHECK(rows.back().step == 100);
}
