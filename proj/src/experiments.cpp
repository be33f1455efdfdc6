#include "fkdyn/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <thread>

#include "fkdyn/dsu.hpp"
#include "fkdyn/dynamics.hpp"
#include "fkdyn/error.hpp"
#include "fkdyn/exact.hpp"
#include "fkdyn/stats.hpp"

namespace fkdyn {

namespace {

// fn(index, worker). Work is assigned dynamically, so fn must only write to
// slot `index` for results to be independent of the thread count.
template <class F>
void parallel_for(int count, int threads, F&& fn) {
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) fn(i, 0);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr err;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (int w = 0; w < threads; ++w)
    pool.emplace_back([&, w] {
      for (;;) {
        const int i = next++;
        if (i >= count) return;
        try {
          fn(i, w);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!err) err = std::current_exception();
          next = count;
        }
      }
    });
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

Region box_region(const Lattice& lat, const Box& b) { return Region::box(lat, b[0], b[1], b[2], b[3]); }

bool edge_in_box(const Lattice& lat, int e, const Box& b) {
  const Vertex u = lat.vertex(lat.edge(e).u), v = lat.vertex(lat.edge(e).v);
  auto in = [&](Vertex p) { return p.x >= b[0] && p.x <= b[2] && p.y >= b[1] && p.y <= b[3]; };
  return in(u) && in(v);
}

double wilson_lower(int k, int n) {
  if (n == 0) return 0.0;
  const double z = 1.959963984540054, ph = static_cast<double>(k) / n, z2 = z * z / n;
  return (ph + z2 / 2 - z * std::sqrt(ph * (1 - ph) / n + z2 / (4.0 * n))) / (1 + z2);
}

}  // namespace

// ---------------------------------------------------------------------------

Region BrCollection::corner_region(const Lattice& lat, int i) const { return box_region(lat, corners.at(i)); }
Region BrCollection::strip_region(const Lattice& lat, int i) const { return box_region(lat, strips.at(i)); }

Region BrCollection::frame(const Lattice& lat) const {
  std::vector<uint8_t> mask(lat.num_vertices(), 0);
  for (const auto& b : strips)
    for (int y = b[1]; y <= b[3]; ++y)
      for (int x = b[0]; x <= b[2]; ++x) mask[lat.vertex_index(x, y)] = 1;
  return Region(lat, std::move(mask));
}

BrCollection build_Br(const Lattice& lat, int r) {
  const int n = lat.n(), l = lat.l();
  require(r >= 1, ErrorCode::invalid_argument, "r must be positive");
  require(n > 12 * r && l > 12 * r, ErrorCode::precondition, "block collection needs n > 12r");
  BrCollection br;
  br.n = n;
  br.l = l;
  br.r = r;
  const int c = 5 * r, t = 2 * r, o = 3 * r;
  br.corners = {Box{n - c, l - c, n, l}, Box{0, l - c, c, l}, Box{n - c, 0, n, c}, Box{0, 0, c, c}};
  br.strips = {Box{o, l - t, n - o, l}, Box{n - t, o, n, l - o}, Box{0, o, t, l - o}, Box{o, 0, n - o, t}};
  return br;
}

int edge_vertex_distance2(const Lattice& lat, int e, int v) {
  const Vertex a = lat.vertex(lat.edge(e).u), b = lat.vertex(lat.edge(e).v), p = lat.vertex(v);
  return std::abs(a.x + b.x - 2 * p.x) + std::abs(a.y + b.y - 2 * p.y);
}

int edge_boundary_distance2(const Lattice& lat, int e) {
  const Vertex a = lat.vertex(lat.edge(e).u), b = lat.vertex(lat.edge(e).v);
  const int mx = a.x + b.x, my = a.y + b.y;
  // nearest boundary vertex along each side; half-integer midpoints pay half a step sideways
  return std::min({mx + (my & 1), 2 * lat.n() - mx + (my & 1), my + (mx & 1), 2 * lat.l() - my + (mx & 1)});
}

std::vector<int> inner_boundary(const Lattice& lat, const Region& s) {
  std::vector<int> out;
  static constexpr int dx[4] = {1, -1, 0, 0}, dy[4] = {0, 0, 1, -1};
  for (int v = 0; v < lat.num_vertices(); ++v) {
    if (!s.contains(v) || lat.on_boundary(v)) continue;
    const Vertex p = lat.vertex(v);
    for (int k = 0; k < 4; ++k) {
      const int x = p.x + dx[k], y = p.y + dy[k];
      if (lat.contains(x, y) && !s.contains(lat.vertex_index(x, y))) {
        out.push_back(v);
        break;
      }
    }
  }
  return out;
}

int edge_set_distance2(const Lattice& lat, int e, const std::vector<int>& vertices) {
  int best = std::numeric_limits<int>::max();
  for (int v : vertices) best = std::min(best, edge_vertex_distance2(lat, e, v));
  return best;
}

Box edge_box(const Lattice& lat, int e, int r) {
  const Edge& ed = lat.edge(e);
  const Vertex a = lat.vertex(ed.u);
  int x0 = a.x - r, x1 = a.x + r, y0 = a.y - r, y1 = a.y + r;
  if (ed.orient == 0) {
    x1 += 1;
    if (y1 + 1 <= lat.l()) ++y1; else --y0;
  } else {
    y1 += 1;
    if (x1 + 1 <= lat.n()) ++x1; else --x0;
  }
  return {std::max(0, x0), std::max(0, y0), std::min(lat.n(), x1), std::min(lat.l(), y1)};
}

const char* to_string(BlockKind k) {
  switch (k) {
    case BlockKind::edge_box: return "box";
    case BlockKind::frame: return "frame";
    case BlockKind::corner: return "corner";
  }
  return "?";
}

BlockChoice select_block(const Lattice& lat, const BrCollection& br, int e) {
  const int r2 = 2 * br.r;
  if (edge_boundary_distance2(lat, e) > r2) return {BlockKind::edge_box, -1, edge_box(lat, e, br.r)};
  for (const auto& s : br.strips) {
    if (!edge_in_box(lat, e, s)) continue;
    const Region frame = br.frame(lat);
    if (edge_set_distance2(lat, e, inner_boundary(lat, frame)) >= r2) return {BlockKind::frame, -1, s};
    break;
  }
  for (int i = 0; i < 4; ++i)
    if (edge_in_box(lat, e, br.corners[i])) return {BlockKind::corner, i, br.corners[i]};
  fail(ErrorCode::internal, "edge has no block in the collection");
}

Region block_region(const Lattice& lat, const BrCollection& br, const BlockChoice& c) {
  return c.kind == BlockKind::frame ? br.frame(lat) : box_region(lat, c.box);
}

BrAudit audit_Br(const Lattice& lat, const BrCollection& br) {
  BrAudit a;
  a.edges = lat.num_edges();
  a.min_distance2 = std::numeric_limits<int>::max();
  const Region frame = br.frame(lat);
  const auto frame_bd = inner_boundary(lat, frame);
  std::array<std::vector<int>, 4> corner_bd;
  for (int i = 0; i < 4; ++i) corner_bd[i] = inner_boundary(lat, br.corner_region(lat, i));
  for (int e = 0; e < lat.num_edges(); ++e) {
    BlockKind kind;
    int d2;
    bool member;
    if (edge_boundary_distance2(lat, e) > 2 * br.r) {
      const Box b = edge_box(lat, e, br.r);
      const Region reg = box_region(lat, b);
      kind = BlockKind::edge_box;
      member = reg.has_edge(e);
      d2 = edge_set_distance2(lat, e, inner_boundary(lat, reg));
    } else if (frame.has_edge(e) && edge_set_distance2(lat, e, frame_bd) >= 2 * br.r) {
      kind = BlockKind::frame;
      member = true;
      d2 = edge_set_distance2(lat, e, frame_bd);
    } else {
      kind = BlockKind::corner;
      int i = 0;
      while (i < 4 && !edge_in_box(lat, e, br.corners[i])) ++i;
      member = i < 4;
      d2 = member ? edge_set_distance2(lat, e, corner_bd[i]) : -1;
    }
    ++a.by_kind[static_cast<int>(kind)];
    if (!member || d2 < 2 * br.r) ++a.violations;
    a.min_distance2 = std::min(a.min_distance2, d2);
  }
  return a;
}

// ---------------------------------------------------------------------------

namespace {

struct BoxChains {
  Lattice sub;
  BoundaryCondition wired, free;
  int edge = -1;
};

BoxChains box_chains(const Lattice& lat, const BoundaryCondition& bc, const Region& block, int e) {
  require(lat.variant() == EdgeSetVariant::full, ErrorCode::precondition, "spatial mixing runs on full lattices");
  require(block.is_box(), ErrorCode::precondition, "block must be a box");
  require(e >= 0 && e < lat.num_edges() && block.has_edge(e), ErrorCode::precondition, "edge must lie in the block");
  const auto bb = block.bbox();
  BoxChains bx;
  bx.sub = Lattice::build_rect(bb[2] - bb[0], bb[3] - bb[1]);
  bx.wired = induced_region_bc(lat, block, bc, FkConfig(lat.num_edges(), true));
  bx.free = induced_region_bc(lat, block, bc, FkConfig(lat.num_edges(), false));
  const Vertex a = lat.vertex(lat.edge(e).u), b = lat.vertex(lat.edge(e).v);
  bx.edge = bx.sub.edge_between({a.x - bb[0], a.y - bb[1]}, {b.x - bb[0], b.y - bb[1]});
  require(bx.edge >= 0, ErrorCode::internal, "edge lost in box");
  return bx;
}

double edge_score(Kernel& k, const FkConfig& s, int e, const Params& prm, bool rao_blackwell) {
  if (!rao_blackwell) return s.open(e) ? 1.0 : 0.0;
  // conditional open probability given the rest
  return k.connected_off(s, e) ? prm.p : prm.p_hat();
}

MsmEstimate summarize(const std::vector<double>& gw, const std::vector<double>& gf) {
  MsmEstimate out;
  const size_t n = gw.size();
  out.samples = static_cast<int>(n);
  double sw = 0, sf = 0;
  for (size_t i = 0; i < n; ++i) {
    sw += gw[i];
    sf += gf[i];
  }
  out.p_wired = sw / n;
  out.p_free = sf / n;
  out.difference = out.p_wired - out.p_free;
  out.delta = std::abs(out.difference);
  double ss = 0;
  for (size_t i = 0; i < n; ++i) {
    const double d = gw[i] - gf[i] - out.difference;
    ss += d * d;
  }
  out.half_width = n > 1 ? normal_quantile(0.975) * std::sqrt(ss / (n - 1) / n) : 0.0;
  return out;
}

}  // namespace

MsmEstimate msm_delta(const Lattice& lat, const BoundaryCondition& bc, const Region& block, int e,
                      const Params& prm, const RngStream& rng, const MsmOptions& opt) {
  require(opt.samples >= 2, ErrorCode::invalid_argument, "need at least two samples");
  const BoxChains bx = box_chains(lat, bc, block, e);
  const int threads = std::max(1, opt.threads);
  std::vector<Kernel> kw, kf;
  for (int t = 0; t < threads; ++t) {
    kw.emplace_back(bx.sub, bx.wired);
    kf.emplace_back(bx.sub, bx.free);
  }
  std::vector<int> all(bx.sub.num_edges());
  for (int i = 0; i < bx.sub.num_edges(); ++i) all[i] = i;
  std::vector<double> gw(opt.samples), gf(opt.samples);
  const FkConfig base(bx.sub.num_edges());
  parallel_for(opt.samples, threads, [&](int i, int w) {
    const auto out = cftp_coupled({&kw[w], &kf[w]}, base, all, prm, rng.split(static_cast<uint64_t>(i)));
    gw[i] = edge_score(kw[w], out[0], bx.edge, prm, opt.rao_blackwell);
    gf[i] = edge_score(kf[w], out[1], bx.edge, prm, opt.rao_blackwell);
  });
  return summarize(gw, gf);
}

MsmEstimate msm_delta_chains(const Lattice& lat, const BoundaryCondition& bc, const Region& block, int e,
                             const Params& prm, const RngStream& rng, uint64_t burn_in, uint64_t steps) {
  require(steps >= 40, ErrorCode::invalid_argument, "need at least 40 recorded steps");
  const BoxChains bx = box_chains(lat, bc, block, e);
  Kernel kw(bx.sub, bx.wired), kf(bx.sub, bx.free);
  FkConfig sw(bx.sub.num_edges(), true), sf(bx.sub.num_edges(), true);
  const int m = bx.sub.num_edges();
  for (uint64_t t = 0; t < burn_in; ++t) {
    const EdgeUpdate u = update_at(rng, t, m);
    apply_update(kw, sw, u, prm);
    apply_update(kf, sf, u, prm);
  }
  // batch means over 20 batches for the CI
  const int batches = 20;
  const uint64_t per = steps / batches;
  std::vector<double> bw(batches, 0.0), bf(batches, 0.0);
  for (int b = 0; b < batches; ++b) {
    for (uint64_t i = 0; i < per; ++i) {
      const uint64_t t = burn_in + b * per + i;
      const EdgeUpdate u = update_at(rng, t, m);
      apply_update(kw, sw, u, prm);
      apply_update(kf, sf, u, prm);
      bw[b] += sw.open(bx.edge);
      bf[b] += sf.open(bx.edge);
    }
    bw[b] /= per;
    bf[b] /= per;
  }
  MsmEstimate out = summarize(bw, bf);
  out.samples = static_cast<int>(per * batches);
  return out;
}

std::vector<VertexPair> row_pairs(const Lattice& lat, int max_distance, int margin) {
  std::vector<VertexPair> out;
  for (int d = 1; d <= max_distance; ++d)
    for (int y = margin; y <= lat.l() - margin; ++y)
      for (int x = margin; x + d <= lat.n() - margin; ++x)
        out.push_back({lat.vertex_index(x, y), lat.vertex_index(x + d, y)});
  return out;
}

EdcFit fit_decay(const std::vector<EdcPoint>& points) {
  EdcFit fit;
  fit.points = points;
  std::vector<double> xs, ys;
  for (const auto& p : points)
    if (p.connected > 0) {
      xs.push_back(p.distance);
      ys.push_back(std::log(p.prob));
    }
  if (xs.size() < 3) return fit;
  const LinearFit lf = linear_fit(xs, ys);
  fit.c = -lf.slope;
  fit.c_ci95 = lf.slope_ci95;
  const double range = *std::max_element(xs.begin(), xs.end()) - *std::min_element(xs.begin(), xs.end());
  fit.decays = fit.c - fit.c_ci95 > 0 && std::exp(-fit.c * range) <= 0.5;
  return fit;
}

EdcFit edc_estimate(const Lattice& lat, const BoundaryCondition& bc, const Params& prm,
                    const std::vector<VertexPair>& pairs, const RngStream& rng, const EdcOptions& opt) {
  require(!pairs.empty(), ErrorCode::invalid_argument, "no vertex pairs given");
  require(opt.samples >= 1, ErrorCode::invalid_argument, "need at least one sample");
  std::optional<DualLattice> dl;
  BoundaryCondition target_bc = bc;
  if (opt.dual) {
    require(lat.variant() == EdgeSetVariant::modified, ErrorCode::precondition,
            "dual connections need the modified edge set");
    dl = dual_lattice(lat);
    target_bc = dual_bc(bc, lat);
  }
  const Lattice& target = opt.dual ? dl->dual : lat;
  int dmax = 0;
  for (const auto& pr : pairs) {
    require(pr.u >= 0 && pr.v >= 0 && pr.u < target.num_vertices() && pr.v < target.num_vertices(),
            ErrorCode::invalid_argument, "pair vertex out of range");
    dmax = std::max(dmax, target.distance(pr.u, pr.v));
  }
  const int threads = std::max(1, opt.threads);
  std::vector<Kernel> kernels;
  for (int t = 0; t < threads; ++t) kernels.emplace_back(lat, bc);
  std::vector<std::vector<uint32_t>> hits(opt.samples, std::vector<uint32_t>(dmax + 1, 0));
  parallel_for(opt.samples, threads, [&](int i, int w) {
    const FkConfig s = cftp_sample(kernels[w], prm, rng.split(static_cast<uint64_t>(i)));
    const FkConfig c = opt.dual ? dual_config(s, lat) : s;
    DisjointSets dsu(target.num_vertices());
    for (int e = 0; e < target.num_edges(); ++e)
      if (c.open(e)) dsu.unite(target.edge(e).u, target.edge(e).v);
    if (opt.use_bc)
      for (const auto& blk : target_bc.nontrivial_blocks())
        for (size_t j = 1; j < blk.size(); ++j)
          dsu.unite(target.boundary_cycle()[blk[0]], target.boundary_cycle()[blk[j]]);
    for (const auto& pr : pairs)
      if (dsu.find(pr.u) == dsu.find(pr.v)) ++hits[i][target.distance(pr.u, pr.v)];
  });
  std::vector<EdcPoint> pts(dmax + 1);
  for (int d = 0; d <= dmax; ++d) pts[d].distance = d;
  for (const auto& pr : pairs) pts[target.distance(pr.u, pr.v)].trials += opt.samples;
  for (const auto& h : hits)
    for (int d = 0; d <= dmax; ++d) pts[d].connected += h[d];
  std::vector<EdcPoint> used;
  for (auto& p : pts)
    if (p.trials > 0) {
      p.prob = static_cast<double>(p.connected) / p.trials;
      used.push_back(p);
    }
  return fit_decay(used);
}

// ---------------------------------------------------------------------------

bool corner_free(const BoundaryCondition& bc, int dist) {
  const int n = bc.n(), l = bc.l();
  const auto cyc = boundary_cycle_of(n, l);
  for (const auto& blk : bc.nontrivial_blocks())
    for (int p : blk) {
      const int v = cyc[p], x = v % (n + 1), y = v / (n + 1);
      const int d = std::min({x + y, n - x + y, x + l - y, n - x + l - y});
      if (d <= dist) return false;
    }
  return true;
}

UnfoldResult unfold_frame(const Lattice& lat, int r, const BoundaryCondition& bc) {
  require(lat.variant() == EdgeSetVariant::full, ErrorCode::precondition, "unfolding runs on the full lattice");
  require(bc.n() == lat.n() && bc.l() == lat.l(), ErrorCode::invalid_argument, "bc/lattice mismatch");
  const BrCollection br = build_Br(lat, r);
  require(corner_free(bc, 5 * r), ErrorCode::precondition, "bc must be free within 5r of the corners");
  const int n = lat.n(), l = lat.l(), t = 2 * r;
  const int len_ns = n - 6 * r, len_ew = l - 6 * r;
  // Strips in unfolding order W, N, E, S; local (a, b) with b = t on the lattice boundary.
  struct Piece {
    int len;
    std::function<Vertex(int, int)> at;
  };
  const std::array<Piece, 4> pieces = {
      Piece{len_ew, [=](int a, int b) { return Vertex{t - b, 3 * r + a}; }},
      Piece{len_ns, [=](int a, int b) { return Vertex{3 * r + a, l - t + b}; }},
      Piece{len_ew, [=](int a, int b) { return Vertex{n - t + b, l - 3 * r - a}; }},
      Piece{len_ns, [=](int a, int b) { return Vertex{n - 3 * r - a, t - b}; }},
  };
  const int width = 2 * len_ns + 2 * len_ew;
  UnfoldResult out;
  out.q = Lattice::build_rect(width, t);
  const Lattice& q = out.q;
  out.vertex_preimage.assign(q.num_vertices(), {});
  out.edge_preimage.assign(q.num_edges(), {});
  int offset = 0;
  for (int k = 0; k < 4; ++k) {
    const Piece& pc = pieces[k];
    for (int a = 0; a <= pc.len; ++a)
      for (int b = 0; b <= t; ++b) {
        const Vertex v = pc.at(a, b);
        out.vertex_preimage[q.vertex_index(offset + a, b)].push_back(lat.vertex_index(v.x, v.y));
      }
    for (int a = 0; a <= pc.len; ++a)
      for (int b = 0; b <= t; ++b) {
        const int qa = q.vertex_index(offset + a, b);
        const Vertex va = pc.at(a, b);
        if (a < pc.len) {
          const int qe = q.edge_index(qa, q.vertex_index(offset + a + 1, b));
          out.edge_preimage[qe].push_back(lat.edge_between(va, pc.at(a + 1, b)));
        }
        if (b < t) {
          const int qe = q.edge_index(qa, q.vertex_index(offset + a, b + 1));
          out.edge_preimage[qe].push_back(lat.edge_between(va, pc.at(a, b + 1)));
        }
      }
    offset += pc.len;
    if (k < 3) out.wired_columns.push_back(offset);
  }

  // bc: top carries the lattice partition, the other three sides form one block
  const auto& cyc = q.boundary_cycle();
  std::vector<int> lab(cyc.size());
  const int wired = static_cast<int>(cyc.size()) + bc.cycle_length();
  int fresh = wired + 1;
  for (size_t i = 0; i < cyc.size(); ++i) {
    const Vertex v = q.vertex(cyc[i]);
    if (v.y == t && v.x > 0 && v.x < width) {
      const auto& pre = out.vertex_preimage[cyc[i]];
      if (pre.size() == 1) {
        const int pos = lat.cycle_position(pre[0]);
        require(pos >= 0, ErrorCode::internal, "top of Q must map to the lattice boundary");
        lab[i] = bc.label(pos);
      } else {
        lab[i] = fresh++;  // glued column tops are free (corner-free bc)
      }
    } else {
      lab[i] = wired;
    }
  }
  out.xi = BoundaryCondition::from_labels(width, t, lab);

  const Region frame = br.frame(lat);
  out.frame_edges = static_cast<int>(frame.inner_edges().size());
  out.q_edges = q.num_edges();
  std::vector<int> seen(lat.num_edges(), 0);
  int mapped = 0;
  bool ok = true;
  for (const auto& pre : out.edge_preimage) {
    if (pre.empty() || pre.size() > 2) ok = false;
    if (pre.size() == 2) ++out.duplicated_edges;
    for (int e : pre) {
      if (e < 0 || !frame.has_edge(e)) {
        ok = false;
        continue;
      }
      ++seen[e];
      ++mapped;
    }
  }
  for (int e : frame.inner_edges()) ok = ok && seen[e] == 1;
  out.audit_ok = ok && mapped == out.frame_edges && out.q_edges + out.duplicated_edges == out.frame_edges &&
                 out.duplicated_edges == 3 * t;
  return out;
}

// ---------------------------------------------------------------------------

SourceGraph SourceGraph::complete(int k) {
  SourceGraph g;
  g.num_vertices = k;
  // Hamiltonian cycle first (ab, bc, ..., ka), then the chords
  for (int a = 0; a + 1 < k; ++a) g.edges.push_back({a, a + 1});
  if (k >= 3) g.edges.push_back({k - 1, 0});
  for (int a = 0; a < k; ++a)
    for (int b = a + 2; b < k; ++b)
      if (!(a == 0 && b == k - 1)) g.edges.push_back({a, b});
  return g;
}

SourceGraph SourceGraph::path(int k) {
  SourceGraph g;
  g.num_vertices = k;
  for (int a = 0; a + 1 < k; ++a) g.edges.push_back({a, a + 1});
  return g;
}

Region EmbeddedGraph::region(const Lattice& lat) const {
  std::vector<uint8_t> mask(lat.num_vertices(), 0);
  for (int v : l_vertices) mask[v] = 1;
  return Region(lat, std::move(mask));
}

EmbeddedGraph embed_graph(const SourceGraph& g, int n, int l, int stride) {
  if (l < 0) l = n;
  const int m = static_cast<int>(g.edges.size());
  require(stride >= 2, ErrorCode::invalid_argument, "stride must be at least 2");
  require(m >= 1, ErrorCode::invalid_argument, "graph has no edges");
  if (stride == 4)
    require(4 * m <= n, ErrorCode::size_cap, "graph has more than n/4 edges");
  else
    require(stride * (m - 1) + 1 <= n, ErrorCode::size_cap, "graph does not fit on the top side");
  for (auto [a, b] : g.edges)
    require(a >= 0 && b >= 0 && a < g.num_vertices && b < g.num_vertices && a != b, ErrorCode::invalid_argument,
            "bad graph edge");
  EmbeddedGraph emb;
  emb.graph = g;
  emb.n = n;
  emb.l = l;
  emb.stride = stride;
  const Lattice lat = Lattice::build_rect(n, l);
  std::vector<std::vector<int>> pre(g.num_vertices);
  for (int i = 0; i < m; ++i) {
    const auto [a, b] = g.edges[i];
    const int x = stride * i;
    emb.l_vertices.push_back(lat.vertex_index(x, l));
    emb.l_vertices.push_back(lat.vertex_index(x + 1, l));
    emb.phi.push_back(a);
    emb.phi.push_back(b);
    emb.l_edges.push_back(lat.edge_between({x, l}, {x + 1, l}));
    pre[a].push_back(north_position(n, l, x));
    pre[b].push_back(north_position(n, l, x + 1));
  }
  std::vector<std::vector<int>> blocks;
  for (auto& b : pre)
    if (b.size() > 1) blocks.push_back(b);
  emb.bc = BoundaryCondition::from_blocks(n, l, blocks);
  return emb;
}

int count_external_connections(const Lattice& lat, const EmbeddedGraph& emb, const FkConfig& s) {
  require(lat.n() == emb.n && lat.l() == emb.l && s.size() == lat.num_edges(), ErrorCode::invalid_argument,
          "embedding/lattice mismatch");
  std::vector<uint8_t> skip(lat.num_edges(), 0);
  for (int e : emb.l_edges) skip[e] = 1;
  DisjointSets dsu(lat.num_vertices());
  for (int e = 0; e < lat.num_edges(); ++e)
    if (s.open(e) && !skip[e]) dsu.unite(lat.edge(e).u, lat.edge(e).v);
  // (root, block) incidences; a block is joined when one of its roots is shared
  std::vector<std::pair<int, int>> touch;
  for (size_t i = 0; i < emb.l_vertices.size(); ++i) touch.push_back({dsu.find(emb.l_vertices[i]), emb.phi[i]});
  std::sort(touch.begin(), touch.end());
  touch.erase(std::unique(touch.begin(), touch.end()), touch.end());
  std::vector<uint8_t> joined(emb.graph.num_vertices, 0);
  for (size_t i = 0; i < touch.size();) {
    size_t j = i;
    while (j < touch.size() && touch[j].first == touch[i].first) ++j;
    if (j - i > 1)
      for (size_t t = i; t < j; ++t) joined[touch[t].second] = 1;
    i = j;
  }
  return static_cast<int>(std::count(joined.begin(), joined.end(), 1));
}

uint64_t graph_config(const EmbeddedGraph& emb, const FkConfig& s) {
  uint64_t mask = 0;
  for (size_t i = 0; i < emb.l_edges.size(); ++i)
    if (s.open(emb.l_edges[i])) mask |= uint64_t{1} << i;
  return mask;
}

int largest_component(const SourceGraph& g, uint64_t mask) {
  DisjointSets d(g.num_vertices);
  for (size_t i = 0; i < g.edges.size(); ++i)
    if ((mask >> i) & 1u) d.unite(g.edges[i].first, g.edges[i].second);
  int best = 0;
  for (int v = 0; v < g.num_vertices; ++v) best = std::max(best, d.size_of(v));
  return best;
}

bool in_S_star(const SourceGraph& g, const BottleneckSpec& b, uint64_t mask) {
  const int s = largest_component(g, mask);
  return b.at_most ? s <= b.threshold : s > b.threshold;
}

bool in_A_M(const Lattice& lat, const EmbeddedGraph& emb, const BottleneckSpec& b, const FkConfig& s) {
  return in_S_star(emb.graph, b, graph_config(emb, s)) && count_external_connections(lat, emb, s) <= b.M;
}

GraphFk enumerate_graph(const SourceGraph& g) {
  const int m = static_cast<int>(g.edges.size());
  require(m <= kMaxEnumEdges, ErrorCode::size_cap, "graph too large to enumerate");
  require(g.num_vertices <= 255, ErrorCode::size_cap, "graph has too many vertices");
  GraphFk out;
  out.graph = g;
  const uint32_t n = uint32_t{1} << m;
  out.comp.resize(n);
  out.largest.resize(n);
  DisjointSets d;
  for (uint32_t x = 0; x < n; ++x) {
    d.reset(g.num_vertices);
    for (uint32_t bits = x; bits; bits &= bits - 1) {
      const auto& ed = g.edges[std::countr_zero(bits)];
      d.unite(ed.first, ed.second);
    }
    out.comp[x] = static_cast<uint8_t>(d.count());
    int best = 0;
    for (int v = 0; v < g.num_vertices; ++v) best = std::max(best, d.size_of(v));
    out.largest[x] = static_cast<uint8_t>(best);
  }
  return out;
}

std::vector<double> graph_pi(const GraphFk& g, const Params& prm) {
  return pi_from_components(std::vector<int>(g.comp.begin(), g.comp.end()), static_cast<int>(g.graph.edges.size()),
                            prm);
}

std::vector<double> largest_histogram(const GraphFk& g, const std::vector<double>& pi) {
  std::vector<double> h(g.graph.num_vertices, 0.0);
  for (size_t x = 0; x < pi.size(); ++x) h[g.largest[x] - 1] += pi[x];
  return h;
}

double graph_conductance(const GraphFk& g, const std::vector<double>& pi, const Params& prm,
                         const std::vector<char>& in_set) {
  const int m = static_cast<int>(g.graph.edges.size());
  require(in_set.size() == pi.size(), ErrorCode::invalid_argument, "set size mismatch");
  const double phat = prm.p_hat(), w = 1.0 / m;
  double flow = 0.0, mass = 0.0;
  for (uint32_t x = 0; x < pi.size(); ++x) {
    if (!in_set[x]) continue;
    mass += pi[x];
    for (int e = 0; e < m; ++e) {
      const uint32_t up = x | (uint32_t{1} << e), down = x & ~(uint32_t{1} << e);
      const double po = g.comp[down] - g.comp[up] == 1 ? phat : prm.p;
      if (!in_set[up]) flow += pi[x] * w * po;
      if (!in_set[down]) flow += pi[x] * w * (1.0 - po);
    }
  }
  require(mass > 0, ErrorCode::invalid_argument, "set has zero mass");
  return flow / mass;
}

namespace {

// Q(A, A^c) and pi(A) for MHB dynamics whose single-edge moves act on the edges in in_l.
std::pair<double, double> mhb_flow(const Lattice& lat, const BoundaryCondition& bc, uint32_t in_l,
                                   const Params& prm, const std::vector<char>& in_set) {
  const int m = lat.num_edges();
  require(m <= kMaxEnumEdges, ErrorCode::size_cap, "lattice too large to enumerate");
  const auto comp = enumerate_components(lat, bc);
  const auto pi = pi_from_components(comp, m, prm);
  require(in_set.size() == pi.size(), ErrorCode::invalid_argument, "set size mismatch");
  const int k_in = std::popcount(in_l);
  // class of x = its restriction to the single-move edges
  std::vector<double> total(pi.size(), 0.0), out_mass(pi.size(), 0.0);
  for (uint32_t x = 0; x < pi.size(); ++x) {
    total[x & in_l] += pi[x];
    if (!in_set[x]) out_mass[x & in_l] += pi[x];
  }
  const double phat = prm.p_hat(), w = 1.0 / m;
  double flow = 0.0, mass = 0.0;
  for (uint32_t x = 0; x < pi.size(); ++x) {
    if (!in_set[x]) continue;
    mass += pi[x];
    for (uint32_t bits = in_l; bits; bits &= bits - 1) {
      const int e = std::countr_zero(bits);
      const uint32_t up = x | (uint32_t{1} << e), down = x & ~(uint32_t{1} << e);
      const double po = comp[down] - comp[up] == 1 ? phat : prm.p;
      if (!in_set[up]) flow += pi[x] * w * po;
      if (!in_set[down]) flow += pi[x] * w * (1.0 - po);
    }
    if (k_in < m) flow += pi[x] * w * (m - k_in) * out_mass[x & in_l] / total[x & in_l];
  }
  return {flow, mass};
}

}  // namespace

double mhb_conductance(const Lattice& lat, const BoundaryCondition& bc, const Region& L, const Params& prm,
                       const std::vector<char>& in_set) {
  uint32_t in_l = 0;
  for (int e : L.inner_edges()) in_l |= uint32_t{1} << e;
  const auto [flow, mass] = mhb_flow(lat, bc, in_l, prm, in_set);
  require(mass > 0, ErrorCode::invalid_argument, "set has zero mass");
  return flow / mass;
}

// ---------------------------------------------------------------------------

bool is_bimodal(const std::vector<double>& hist, double rel_depth, int* antimode) {
  const int k = static_cast<int>(hist.size());
  double best = std::numeric_limits<double>::infinity();
  int best_at = -1;
  for (int a = 1; a + 1 < k; ++a) {
    const double left = *std::max_element(hist.begin(), hist.begin() + a);
    const double right = *std::max_element(hist.begin() + a + 1, hist.end());
    const double lo = std::min(left, right);
    if (lo <= 0) continue;
    const double ratio = hist[a] / lo;
    if (ratio < best) {
      best = ratio;
      best_at = a;
    }
  }
  const bool yes = best_at >= 0 && best * (1.0 + rel_depth) < 1.0;
  if (antimode) *antimode = yes ? best_at : -1;
  return yes;
}

WindowScan scan_window(const GraphFk& g, double q, double lam_lo, double lam_hi, double step, double rel_depth) {
  const int ell = g.graph.num_vertices;
  require(step > 0 && lam_lo > 0 && lam_hi < ell, ErrorCode::invalid_argument, "bad lambda grid");
  WindowScan sc;
  const int count = static_cast<int>(std::floor((lam_hi - lam_lo) / step + 1e-9)) + 1;
  int run_start = -1, best_start = -1, best_len = 0;
  for (int i = 0; i < count; ++i) {
    const double lam = lam_lo + i * step;
    const auto pi = graph_pi(g, {lam / ell, q});
    sc.lambdas.push_back(lam);
    sc.hist.push_back(largest_histogram(g, pi));
    sc.bimodal.push_back(is_bimodal(sc.hist.back(), rel_depth) ? 1 : 0);
    if (sc.bimodal.back()) {
      if (run_start < 0) run_start = i;
      if (i - run_start + 1 > best_len) {
        best_len = i - run_start + 1;
        best_start = run_start;
      }
    } else {
      run_start = -1;
    }
  }
  if (best_len > 0) {
    sc.found = true;
    sc.lo = sc.lambdas[best_start];
    sc.hi = sc.lambdas[best_start + best_len - 1];
    sc.mid = sc.lambdas[best_start + (best_len - 1) / 2];
  }
  return sc;
}

TinyBottleneck tiny_am_conductance(const Params& prm, int threshold, int M) {
  const Lattice lat = Lattice::build_rect(5, 1);
  const EmbeddedGraph emb = embed_graph(SourceGraph::complete(3), 5, 1, 2);
  const BottleneckSpec spec{threshold, true, M};
  const uint32_t states = uint32_t{1} << lat.num_edges();
  std::vector<char> in_set(states);
  for (uint32_t x = 0; x < states; ++x)
    in_set[x] = in_A_M(lat, emb, spec, FkConfig::from_mask(lat.num_edges(), x)) ? 1 : 0;
  // E(L) is the set of carrier edges; with stride 2 the top edges between neighbouring
  // pairs also join L-vertices, so E(L) is not vertex-induced here.
  uint32_t in_l = 0;
  for (int e : emb.l_edges) in_l |= uint32_t{1} << e;
  const auto [flow, mass] = mhb_flow(lat, emb.bc, in_l, prm, in_set);
  TinyBottleneck out;
  out.mass = mass;
  out.phi = mass > 0 ? flow / mass : 0.0;
  out.phi_complement = mass < 1 ? flow / (1.0 - mass) : 0.0;
  return out;
}

SlowmixReport slowmix_pipeline(double q, int ell, int n, const RngStream& rng, const SlowmixOptions& opt) {
  require(q > 2, ErrorCode::precondition, "slow mixing pipeline needs q > 2");
  require(ell >= 3 && ell <= 7, ErrorCode::size_cap, "clique size must be in [3, 7]");
  const SourceGraph kg = SourceGraph::complete(ell);
  require(4 * static_cast<int>(kg.edges.size()) <= n, ErrorCode::precondition, "need 4|E(K)| <= n");
  SlowmixReport rep;
  rep.q = q;
  rep.ell = ell;
  rep.n = n;
  const GraphFk g = enumerate_graph(kg);
  rep.scan = scan_window(g, q, opt.lam_lo, ell - opt.lam_step, opt.lam_step, opt.rel_depth);
  if (!rep.scan.found) return rep;
  rep.inconclusive = false;
  rep.lambda = rep.scan.mid;
  rep.p = rep.lambda / ell;
  const Params prm{rep.p, q};
  const auto pi = graph_pi(g, prm);
  const auto hist = largest_histogram(g, pi);
  is_bimodal(hist, opt.rel_depth, &rep.antimode);

  // threshold cuts {largest <= t}, taking the side of mass <= 1/2
  auto cut_at = [&](int t, BottleneckSpec& spec, double& mass) {
    std::vector<char> in(pi.size());
    mass = 0.0;
    for (size_t x = 0; x < pi.size(); ++x) {
      in[x] = g.largest[x] <= t;
      if (in[x]) mass += pi[x];
    }
    spec = {t, true, 0};
    if (mass > 0.5) {
      for (auto& c : in) c = !c;
      mass = 1.0 - mass;
      spec.at_most = false;
    }
    return graph_conductance(g, pi, prm, in);
  };
  rep.phi_cut = cut_at(rep.antimode + 1, rep.cut, rep.cut_mass);
  rep.best_phi_cut = std::numeric_limits<double>::infinity();
  for (int t = 1; t < ell; ++t) {
    BottleneckSpec s;
    double mass;
    const double phi = cut_at(t, s, mass);
    if (phi < rep.best_phi_cut) {
      rep.best_phi_cut = phi;
      rep.best_threshold = t;
    }
  }

  const Lattice tiny = Lattice::build_rect(opt.tiny_n, opt.tiny_l);
  const ExactChain ch = fk_transition_matrix(tiny, BoundaryCondition::free(tiny), prm);
  rep.tiny_gap = spectrum(ch).gap;
  rep.tiny_phi_lower = rep.tiny_gap / 2.0;
  rep.tiny_phi_upper = min_conductance(ch, level_set_family(tiny.num_edges())).phi;
  rep.ratio_a = rep.tiny_phi_lower / rep.best_phi_cut;
  rep.pass_a = rep.ratio_a >= 10.0;

  const TinyBottleneck tb = tiny_am_conductance(prm, 2, 1);
  rep.am_phi = tb.phi;
  rep.am_phi_complement = tb.phi_complement;
  rep.am_mass = tb.mass;

  if (opt.run_coupling) {
    const Lattice lat = Lattice::build_rect(n, n);
    const EmbeddedGraph emb = embed_graph(kg, n);
    const auto free_stats = coupling_time(lat, BoundaryCondition::free(lat), prm, opt.max_steps_free, opt.reps,
                                          rng.split(1), opt.threads);
    rep.median_free = free_stats.median;
    rep.censored_free = free_stats.censored;
    // enough room to see the target ratio; censored runs still give a valid lower bound on the median
    rep.cap_embedded = static_cast<uint64_t>(std::ceil(opt.slowdown_target * 1.01 * rep.median_free)) + 1;
    const auto emb_stats = coupling_time(lat, emb.bc, prm, rep.cap_embedded, opt.reps, rng.split(2), opt.threads);
    rep.median_embedded = emb_stats.median;
    rep.censored_embedded = emb_stats.censored;
    rep.ratio_b = rep.median_free > 0 ? rep.median_embedded / rep.median_free : 0.0;
    rep.pass_b = rep.censored_free == 0 && rep.ratio_b >= opt.slowdown_target;
  }
  return rep;
}

// ---------------------------------------------------------------------------

namespace {

BoundaryCondition typical_from(Kernel& k, int n, int pad, const Params& prm, const RngStream& rng) {
  const FkConfig s = cftp_sample(k, prm, rng);
  AnnulusConfig ann = empty_annulus(n, n, EdgeSetVariant::full, pad);
  for (int e = 0; e < ann.host.num_edges(); ++e)
    if (!ann.inner[e]) ann.open[e] = s.bits[e];
  return induce_bc(ann);
}

}  // namespace

BoundaryCondition typical_sample(int n, int pad, const Params& prm, const RngStream& rng) {
  require(n >= 1 && pad >= 1, ErrorCode::invalid_argument, "need n >= 1 and pad >= 1");
  const Lattice host = Lattice::build_rect(n + 2 * pad, n + 2 * pad);
  Kernel k(host, BoundaryCondition::free(host));
  return typical_from(k, n, pad, prm, rng);
}

std::vector<BoundaryCondition> typical_samples(int n, int pad, const Params& prm, int reps, const RngStream& rng,
                                               int threads) {
  require(n >= 2 && pad >= 1 && reps >= 1, ErrorCode::invalid_argument, "need n >= 2, pad >= 1, reps >= 1");
  const Lattice host = Lattice::build_rect(n + 2 * pad, n + 2 * pad);
  threads = std::max(1, threads);
  std::vector<Kernel> kernels;
  for (int t = 0; t < threads; ++t) kernels.emplace_back(host, BoundaryCondition::free(host));
  std::vector<BoundaryCondition> out(reps);
  parallel_for(reps, threads, [&](int i, int w) {
    out[i] = typical_from(kernels[w], n, pad, prm, rng.split(static_cast<uint64_t>(i)));
  });
  return out;
}

TypicalityRate typicality_rate(const std::vector<BoundaryCondition>& bcs, double alpha) {
  TypicalityRate out;
  out.samples = static_cast<int>(bcs.size());
  for (const auto& bc : bcs) {
    out.in_class += in_C_alpha(bc, alpha);
    out.in_class_star += in_C_alpha_star(bc, alpha);
  }
  if (out.samples > 0) {
    out.rate = static_cast<double>(out.in_class) / out.samples;
    out.rate_star = static_cast<double>(out.in_class_star) / out.samples;
  }
  out.rate_lo = wilson_lower(out.in_class, out.samples);
  out.rate_star_lo = wilson_lower(out.in_class_star, out.samples);
  return out;
}

TypicalityRate typicality_rate(int n, int pad, const Params& prm, double alpha, int reps, const RngStream& rng,
                               int threads) {
  return typicality_rate(typical_samples(n, pad, prm, reps, rng, threads), alpha);
}

}  // namespace fkdyn
