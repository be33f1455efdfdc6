#include "fkdyn/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "fkdyn/error.hpp"

namespace fkdyn {

EdgeUpdate update_at(const RngStream& rng, uint64_t t, int num_edges) {
  const double u = rng.uniform_at(2 * t);
  const int e = std::min(num_edges - 1, static_cast<int>(u * num_edges));
  return {e, rng.uniform_at(2 * t + 1)};
}

EdgeUpdate update_at(const RngStream& rng, uint64_t t, const std::vector<int>& choices) {
  EdgeUpdate u = update_at(rng, t, static_cast<int>(choices.size()));
  u.e = choices[u.e];
  return u;
}

bool heat_bath_open(Kernel& k, const FkConfig& s, int e, double r, const Params& prm) {
  const double ph = prm.p_hat();
  const double lo = std::min(ph, prm.p), hi = std::max(ph, prm.p);
  if (r < lo) return true;
  if (r >= hi) return false;
  return r < (k.connected_off(s, e) ? prm.p : ph);
}

void apply_update(Kernel& k, FkConfig& s, const EdgeUpdate& u, const Params& prm) {
  s.set(u.e, heat_bath_open(k, s, u.e, u.r, prm));
}

void apply_coupled(Kernel& k, FkConfig& x, FkConfig& y, const EdgeUpdate& u, const Params& prm) {
  const double ph = prm.p_hat();
  if (u.r < ph) {
    x.set(u.e, true);
    y.set(u.e, true);
  } else if (u.r >= prm.p) {
    x.set(u.e, false);
    y.set(u.e, false);
  } else if (k.connected_off(x, u.e)) {
    // x <= y, so the endpoints are joined in y as well
    x.set(u.e, true);
    y.set(u.e, true);
  } else {
    x.set(u.e, false);
    y.set(u.e, k.connected_off(y, u.e));
  }
}

void glauber_step(Kernel& k, FkConfig& s, const Params& prm, RngStream& rng) {
  const uint64_t c = rng.counter();
  require(c % 2 == 0, ErrorCode::internal, "stream counter must be even at a step boundary");
  apply_update(k, s, update_at(rng, c / 2, s.size()), prm);
  rng.seek(c + 2);
}

FkConfig glauber_step(const Lattice& lat, const FkConfig& s, const BoundaryCondition& bc, const Params& prm,
                      RngStream& rng) {
  prm.validate();
  Kernel k(lat, bc);
  FkConfig out = s;
  glauber_step(k, out, prm, rng);
  return out;
}

void identity_coupled_step(Kernel& k, FkConfig& x, FkConfig& y, const Params& prm, RngStream& rng) {
  const uint64_t c = rng.counter();
  require(c % 2 == 0, ErrorCode::internal, "stream counter must be even at a step boundary");
  const EdgeUpdate u = update_at(rng, c / 2, x.size());
  rng.seek(c + 2);
  if (prm.q >= 1.0 && x.subset_of(y)) {
    apply_coupled(k, x, y, u, prm);
  } else {
    apply_update(k, x, u, prm);
    apply_update(k, y, u, prm);
  }
}

CouplingResult couple_once(Kernel& k, const Params& prm, uint64_t max_steps, RngStream rng,
                           uint64_t checkpoint_every) {
  require(prm.q >= 1.0, ErrorCode::precondition, "monotone coupling needs q >= 1");
  const int m = k.lattice().num_edges();
  FkConfig x(m, false), y(m, true);  // x bottom, y top
  int diff = m;
  CouplingResult res;
  auto record = [&](uint64_t t) {
    if (checkpoint_every && t % checkpoint_every == 0) res.trajectory.push_back({t, y.count_open(), x.count_open()});
  };
  record(0);
  for (uint64_t t = 0; t < max_steps && diff > 0; ++t) {
    const EdgeUpdate u = update_at(rng, t, m);
    const int before = x.open(u.e) != y.open(u.e);
    apply_coupled(k, x, y, u, prm);
    diff += (x.open(u.e) != y.open(u.e)) - before;
    res.steps = t + 1;
    record(t + 1);
  }
  res.coupled = diff == 0;
  return res;
}

CouplingStats coupling_time(const Lattice& lat, const BoundaryCondition& bc, const Params& prm, uint64_t max_steps,
                            int reps, const RngStream& rng, int threads, uint64_t checkpoint_every) {
  prm.validate();
  require(reps >= 1, ErrorCode::invalid_argument, "reps must be positive");
  CouplingStats st;
  st.runs.resize(reps);
  threads = std::max(1, std::min(threads, reps));
  auto worker = [&](int w) {
    Kernel k(lat, bc);
    for (int i = w; i < reps; i += threads)
      st.runs[i] = couple_once(k, prm, max_steps, rng.split(static_cast<uint64_t>(i)), checkpoint_every);
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w) pool.emplace_back(worker, w);
    for (auto& t : pool) t.join();
  }
  std::vector<double> times;
  for (const auto& r : st.runs) {
    st.censored += !r.coupled;
    times.push_back(r.coupled ? static_cast<double>(r.steps) : static_cast<double>(max_steps));
  }
  std::sort(times.begin(), times.end());
  auto quant = [&](double a) {
    const double pos = a * (times.size() - 1);
    const size_t i = static_cast<size_t>(pos);
    const double f = pos - i;
    return i + 1 < times.size() ? times[i] * (1 - f) + times[i + 1] * f : times[i];
  };
  st.median = quant(0.5);
  st.q25 = quant(0.25);
  st.q75 = quant(0.75);
  const size_t need = static_cast<size_t>(std::ceil(0.75 * reps));
  std::vector<uint64_t> met;
  for (const auto& r : st.runs)
    if (r.coupled) met.push_back(r.steps);
  std::sort(met.begin(), met.end());
  if (met.size() >= need && need > 0) st.t_quarter = met[need - 1];
  return st;
}

FkConfig cftp_conditional(Kernel& k, const FkConfig& base, const std::vector<int>& free_edges, const Params& prm,
                          const RngStream& rng, const CftpOptions& opt, CftpStats* stats) {
  prm.validate();
  require(prm.q >= 1.0, ErrorCode::precondition, "monotone CFTP needs q >= 1");
  FkConfig top = base, bot = base;
  if (free_edges.empty()) {
    if (stats) *stats = {0, 0};
    return base;
  }
  uint64_t T = free_edges.size();
  for (int epoch = 1;; ++epoch) {
    for (int e : free_edges) {
      top.set(e, true);
      bot.set(e, false);
    }
    int diff = static_cast<int>(free_edges.size());
    for (uint64_t t = T; t >= 1; --t) {
      const EdgeUpdate u = update_at(rng, t - 1, free_edges);
      if (diff == 0) {
        apply_update(k, top, u, prm);
        continue;
      }
      const int before = top.open(u.e) != bot.open(u.e);
      apply_coupled(k, bot, top, u, prm);
      diff += (top.open(u.e) != bot.open(u.e)) - before;
      if (diff == 0) bot = top;
    }
    if (diff == 0) {
      if (stats) *stats = {T, epoch};
      return top;
    }
    if (epoch >= opt.max_doublings) fail(ErrorCode::epoch_cap, "CFTP did not coalesce within the epoch cap");
    T *= 2;
  }
}

FkConfig cftp_sample(Kernel& k, const Params& prm, const RngStream& rng, const CftpOptions& opt, CftpStats* stats) {
  const int m = k.lattice().num_edges();
  std::vector<int> all(m);
  for (int e = 0; e < m; ++e) all[e] = e;
  return cftp_conditional(k, FkConfig(m), all, prm, rng, opt, stats);
}

FkConfig cftp_sample(const Lattice& lat, const BoundaryCondition& bc, const Params& prm, const RngStream& rng) {
  Kernel k(lat, bc);
  return cftp_sample(k, prm, rng);
}

std::vector<FkConfig> cftp_coupled(const std::vector<Kernel*>& kernels, const FkConfig& base,
                                   const std::vector<int>& free_edges, const Params& prm, const RngStream& rng,
                                   const CftpOptions& opt, CftpStats* stats) {
  // Once coalesced from -T, the output is unchanged from any earlier start with the
  // same per-time randomness, so each kernel's own output equals the common-start one.
  std::vector<FkConfig> out;
  CftpStats worst;
  for (Kernel* k : kernels) {
    CftpStats s;
    out.push_back(cftp_conditional(*k, base, free_edges, prm, rng, opt, &s));
    if (s.T > worst.T) worst = s;
  }
  if (stats) *stats = worst;
  return out;
}

std::vector<int> region_edges(const Region& r) { return r.inner_edges(); }

std::vector<int> complement_edges(const Lattice& lat, const Region& L) {
  std::vector<int> out;
  for (int e = 0; e < lat.num_edges(); ++e)
    if (!L.has_edge(e)) out.push_back(e);
  return out;
}

void validate_cover(const Lattice& lat, const std::vector<Region>& blocks) {
  require(!blocks.empty(), ErrorCode::invalid_argument, "no blocks given");
  std::vector<uint8_t> hit(lat.num_edges(), 0);
  for (const auto& b : blocks)
    for (int e : b.inner_edges()) hit[e] = 1;
  require(std::all_of(hit.begin(), hit.end(), [](uint8_t h) { return h != 0; }), ErrorCode::precondition,
          "blocks do not cover every edge");
}

void mhb_step(Kernel& k, FkConfig& s, const Region& L, const Params& prm, RngStream& rng) {
  const uint64_t c = rng.counter();
  const EdgeUpdate u = update_at(rng, c / 2, s.size());
  rng.seek(c + 2);
  if (L.has_edge(u.e)) {
    apply_update(k, s, u, prm);
    return;
  }
  const RngStream inner = rng.split(rng.next_u64());
  rng.seek(rng.counter() + 1);  // keep step boundaries even
  s = cftp_conditional(k, s, complement_edges(k.lattice(), L), prm, inner);
}

void block_dynamics_step(Kernel& k, FkConfig& s, const std::vector<Region>& blocks, const Params& prm,
                         RngStream& rng) {
  const uint64_t c = rng.counter();
  const double u = rng.uniform_at(c);
  const size_t i = std::min(blocks.size() - 1, static_cast<size_t>(u * blocks.size()));
  const RngStream inner = rng.split(rng.bits_at(c + 1));
  rng.seek(c + 2);
  s = cftp_conditional(k, s, blocks[i].inner_edges(), prm, inner);
}

std::vector<TraceRow> simulate_trace(Kernel& k, FkConfig start, const Params& prm, uint64_t steps, uint64_t every,
                                     RngStream rng) {
  std::vector<TraceRow> rows;
  if (every == 0) every = 1;
  rows.push_back({0, start.count_open(), k.component_count(start), false});
  for (uint64_t t = 1; t <= steps; ++t) {
    apply_update(k, start, update_at(rng, t - 1, start.size()), prm);
    if (t % every == 0 || t == steps) rows.push_back({t, start.count_open(), k.component_count(start), false});
  }
  return rows;
}

}  // namespace fkdyn
