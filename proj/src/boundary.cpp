#include "fkdyn/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <map>

#include "fkdyn/dsu.hpp"
#include "fkdyn/error.hpp"
#include "fkdyn/rng.hpp"

namespace fkdyn {

std::vector<int> canonical_labels(const std::vector<int>& labels) {
  std::map<int, int> remap;
  std::vector<int> out(labels.size());
  for (size_t i = 0; i < labels.size(); ++i) {
    auto it = remap.try_emplace(labels[i], static_cast<int>(remap.size())).first;
    out[i] = it->second;
  }
  return out;
}

BoundaryCondition BoundaryCondition::from_labels(int n, int l, const std::vector<int>& labels) {
  require(n >= 1 && l >= 1, ErrorCode::invalid_argument, "boundary condition needs n, l >= 1");
  require(static_cast<int>(labels.size()) == 2 * n + 2 * l, ErrorCode::invalid_argument,
          "label vector does not match the boundary cycle length");
  BoundaryCondition bc;
  bc.n_ = n;
  bc.l_ = l;
  bc.label_ = canonical_labels(labels);
  bc.num_blocks_ = bc.label_.empty() ? 0 : *std::max_element(bc.label_.begin(), bc.label_.end()) + 1;
  return bc;
}

BoundaryCondition BoundaryCondition::free(int n, int l) {
  std::vector<int> lab(2 * n + 2 * l);
  for (size_t i = 0; i < lab.size(); ++i) lab[i] = static_cast<int>(i);
  return from_labels(n, l, lab);
}

BoundaryCondition BoundaryCondition::wired(int n, int l) {
  return from_labels(n, l, std::vector<int>(2 * n + 2 * l, 0));
}

BoundaryCondition BoundaryCondition::from_blocks(int n, int l, const std::vector<std::vector<int>>& blocks) {
  const int k = 2 * n + 2 * l;
  std::vector<int> lab(k, -1);
  int next = 0;
  for (const auto& b : blocks) {
    for (int p : b) {
      require(p >= 0 && p < k, ErrorCode::invalid_argument, "cycle position out of range");
      require(lab[p] < 0, ErrorCode::invalid_argument, "blocks overlap");
      lab[p] = next;
    }
    ++next;
  }
  for (int& x : lab)
    if (x < 0) x = next++;
  return from_labels(n, l, lab);
}

std::vector<std::vector<int>> BoundaryCondition::blocks() const {
  std::vector<std::vector<int>> out(num_blocks_);
  for (int i = 0; i < cycle_length(); ++i) out[label_[i]].push_back(i);
  return out;
}

std::vector<std::vector<int>> BoundaryCondition::nontrivial_blocks() const {
  std::vector<std::vector<int>> out;
  for (auto& b : blocks())
    if (b.size() > 1) out.push_back(std::move(b));
  return out;
}

std::string bc_to_json(const BoundaryCondition& bc) {
  nlohmann::json j;
  j["n"] = bc.n();
  j["l"] = bc.l();
  j["blocks"] = bc.nontrivial_blocks();
  return j.dump();
}

BoundaryCondition bc_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    fail(ErrorCode::invalid_argument, std::string("boundary JSON: ") + e.what());
  }
  require(j.contains("n") && j.contains("l"), ErrorCode::invalid_argument, "boundary JSON needs n and l");
  std::vector<std::vector<int>> blocks;
  if (j.contains("blocks")) blocks = j["blocks"].get<std::vector<std::vector<int>>>();
  return BoundaryCondition::from_blocks(j["n"].get<int>(), j["l"].get<int>(), blocks);
}

bool is_noncrossing(const std::vector<int>& labels) {
  const int k = static_cast<int>(labels.size());
  std::map<int, int> last;
  for (int i = 0; i < k; ++i) last[labels[i]] = i;
  std::vector<int> stack;
  std::map<int, bool> seen;
  for (int i = 0; i < k; ++i) {
    const int b = labels[i];
    const bool first = !seen[b];
    seen[b] = true;
    if (first) {
      if (last[b] != i) stack.push_back(b);
      continue;
    }
    if (stack.empty() || stack.back() != b) return false;
    if (last[b] == i) stack.pop_back();
  }
  return true;
}

bool is_realizable(const BoundaryCondition& bc) { return is_noncrossing(bc.labels()); }

std::vector<int> nesting_depth(const BoundaryCondition& bc) {
  auto blocks = bc.blocks();
  std::vector<int> depth(blocks.size(), 0);
  std::vector<int> order;
  for (size_t b = 0; b < blocks.size(); ++b)
    if (blocks[b].size() > 1) order.push_back(static_cast<int>(b));
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return blocks[a].back() - blocks[a].front() < blocks[b].back() - blocks[b].front();
  });
  for (size_t i = 0; i < order.size(); ++i) {
    const auto& B = blocks[order[i]];
    int inner = 0;
    for (size_t j = 0; j < i; ++j) {
      const auto& C = blocks[order[j]];
      if (C.front() > B.front() && C.back() < B.back()) inner = std::max(inner, depth[order[j]]);
    }
    depth[order[i]] = inner + 1;
  }
  return depth;
}

namespace {

struct Dir {
  int dx, dy;
};

Vertex cycle_vertex(int n, int l, int pos) {
  if (pos <= n) return {pos, 0};
  if (pos <= n + l) return {n, pos - n};
  if (pos <= 2 * n + l) return {2 * n + l - pos, l};
  return {0, 2 * n + 2 * l - pos};
}

Dir arm_direction(int n, int l, int pos) {
  if (pos <= n) return {0, -1};
  if (pos <= n + l) return {1, 0};
  if (pos <= 2 * n + l) return {0, 1};
  return {-1, 0};
}

// Index of (x,y) along the ring at Chebyshev distance h, starting at (-h,-h) heading east.
int ring_index(int n, int l, int h, int x, int y) {
  const int w = n + 2 * h, t = l + 2 * h;
  if (y == -h) return x + h;
  if (x == n + h) return w + (y + h);
  if (y == l + h) return w + t + (n + h - x);
  return 2 * w + t + (l + h - y);
}

Vertex ring_point(int n, int l, int h, int idx) {
  const int w = n + 2 * h, t = l + 2 * h;
  if (idx <= w) return {idx - h, -h};
  if (idx <= w + t) return {n + h, idx - w - h};
  if (idx <= 2 * w + t) return {n + h - (idx - w - t), l + h};
  return {-h, l + h - (idx - 2 * w - t)};
}

}  // namespace

AnnulusConfig empty_annulus(int n, int l, EdgeSetVariant variant, int pad) {
  AnnulusConfig ann;
  ann.n = n;
  ann.l = l;
  ann.variant = variant;
  ann.pad = pad;
  ann.host = Lattice::build_rect(n + 2 * pad, l + 2 * pad, EdgeSetVariant::full);
  ann.inner.assign(ann.host.num_edges(), 0);
  ann.open.assign(ann.host.num_edges(), 0);
  for (int e = 0; e < ann.host.num_edges(); ++e) {
    const Edge& ed = ann.host.edge(e);
    const Vertex a = ann.host.vertex(ed.u), b = ann.host.vertex(ed.v);
    auto inside = [&](Vertex p) { return p.x >= pad && p.x <= pad + n && p.y >= pad && p.y <= pad + l; };
    auto on_rim = [&](Vertex p) {
      return p.x == pad || p.x == pad + n || p.y == pad || p.y == pad + l;
    };
    if (!inside(a) || !inside(b)) continue;
    if (variant == EdgeSetVariant::modified && on_rim(a) && on_rim(b)) continue;
    ann.inner[e] = 1;
  }
  return ann;
}

AnnulusConfig realize(const BoundaryCondition& bc, EdgeSetVariant variant) {
  require(is_realizable(bc), ErrorCode::not_realizable, "realize: partition is crossing");
  const int n = bc.n(), l = bc.l();
  const auto depth = nesting_depth(bc);
  const int max_depth = depth.empty() ? 0 : *std::max_element(depth.begin(), depth.end());
  AnnulusConfig ann = empty_annulus(n, l, variant, max_depth + 2);
  auto open_between = [&](Vertex a, Vertex b) {
    const int e = ann.host.edge_between({a.x + ann.pad, a.y + ann.pad}, {b.x + ann.pad, b.y + ann.pad});
    require(e >= 0 && !ann.inner[e], ErrorCode::internal, "realize: gadget edge outside annulus");
    ann.open[e] = 1;
  };
  const auto blocks = bc.blocks();
  for (size_t b = 0; b < blocks.size(); ++b) {
    const auto& B = blocks[b];
    if (B.size() < 2) continue;
    const int h = depth[b];
    for (int pos : B) {
      Vertex v = cycle_vertex(n, l, pos);
      const Dir d = arm_direction(n, l, pos);
      for (int s = 0; s < h; ++s) {
        const Vertex w{v.x + d.dx, v.y + d.dy};
        open_between(v, w);
        v = w;
      }
    }
    const Vertex first = cycle_vertex(n, l, B.front()), last = cycle_vertex(n, l, B.back());
    const Dir df = arm_direction(n, l, B.front()), dl = arm_direction(n, l, B.back());
    const int i0 = ring_index(n, l, h, first.x + h * df.dx, first.y + h * df.dy);
    const int i1 = ring_index(n, l, h, last.x + h * dl.dx, last.y + h * dl.dy);
    require(i0 < i1, ErrorCode::internal, "realize: ring order not monotone");
    for (int i = i0; i < i1; ++i) open_between(ring_point(n, l, h, i), ring_point(n, l, h, i + 1));
  }
  return ann;
}

BoundaryCondition induce_bc(const AnnulusConfig& ann) {
  DisjointSets dsu(ann.host.num_vertices());
  for (int e = 0; e < ann.host.num_edges(); ++e)
    if (ann.open[e] && !ann.inner[e]) dsu.unite(ann.host.edge(e).u, ann.host.edge(e).v);
  const auto cyc = boundary_cycle_of(ann.n, ann.l);
  std::vector<int> lab(cyc.size());
  for (size_t i = 0; i < cyc.size(); ++i) {
    const int x = cyc[i] % (ann.n + 1), y = cyc[i] / (ann.n + 1);
    lab[i] = dsu.find(ann.host_vertex(x, y));
  }
  return BoundaryCondition::from_labels(ann.n, ann.l, lab);
}

namespace {

// Points 0..k-1 interleave with separators; separator s lies between point s-1+shift and s+shift.
// Two separators share a block iff no point block straddles the arc between them.
std::vector<int> complement_partition(const std::vector<int>& point_labels, int shift) {
  const int k = static_cast<int>(point_labels.size());
  int nb = 0;
  for (int x : point_labels) nb = std::max(nb, x + 1);
  std::vector<int> total(nb, 0);
  for (int x : point_labels) ++total[x];
  DisjointSets dsu(k);
  std::vector<int> cnt(nb);
  for (int f = 0; f < k; ++f) {
    std::fill(cnt.begin(), cnt.end(), 0);
    int partial = 0;
    for (int g = f + 1; g < k; ++g) {
      // arc between separator f and g covers points f+shift .. g-1+shift
      const int b = point_labels[((g - 1 + shift) % k + k) % k];
      ++cnt[b];
      if (total[b] > 1) {
        if (cnt[b] == 1) ++partial;
        if (cnt[b] == total[b]) --partial;
      }
      if (partial == 0) dsu.unite(f, g);
    }
  }
  std::vector<int> out(k);
  for (int i = 0; i < k; ++i) out[i] = dsu.find(i);
  return canonical_labels(out);
}

std::vector<int> noncorner_positions(int n, int l) {
  std::vector<int> out;
  const int k = 2 * n + 2 * l;
  for (int p = 0; p < k; ++p)
    if (p != 0 && p != n && p != n + l && p != 2 * n + l) out.push_back(p);
  // start at (1,0), which is position 1
  return out;
}

}  // namespace

BoundaryCondition dual_bc(const BoundaryCondition& bc, const Lattice& lat) {
  require(lat.variant() == EdgeSetVariant::modified, ErrorCode::precondition, "dual_bc needs the modified edge set");
  require(lat.n() == bc.n() && lat.l() == bc.l(), ErrorCode::invalid_argument, "dual_bc: lattice mismatch");
  require(lat.n() >= 2 && lat.l() >= 2, ErrorCode::precondition, "dual_bc needs n, l >= 2");
  require(is_realizable(bc), ErrorCode::not_realizable, "dual_bc: partition is crossing");
  const auto nc = noncorner_positions(bc.n(), bc.l());
  std::vector<int> pts(nc.size());
  for (size_t j = 0; j < nc.size(); ++j) pts[j] = bc.label(nc[j]);
  // dual position k sits between non-corner vertex k-1 and k
  auto dual = complement_partition(canonical_labels(pts), 0);
  return BoundaryCondition::from_labels(bc.n() - 1, bc.l() - 1, dual);
}

BoundaryCondition primal_bc(const BoundaryCondition& dual, const Lattice& lat) {
  require(lat.variant() == EdgeSetVariant::modified, ErrorCode::precondition, "primal_bc needs the modified edge set");
  require(dual.n() == lat.n() - 1 && dual.l() == lat.l() - 1, ErrorCode::invalid_argument,
          "primal_bc: lattice mismatch");
  require(is_realizable(dual), ErrorCode::not_realizable, "primal_bc: partition is crossing");
  // non-corner vertex j sits between dual positions j and j+1
  auto pts = complement_partition(dual.labels(), 1);
  const auto nc = noncorner_positions(lat.n(), lat.l());
  const int k = 2 * lat.n() + 2 * lat.l();
  std::vector<int> lab(k, -1);
  for (size_t j = 0; j < nc.size(); ++j) lab[nc[j]] = pts[j];
  int next = static_cast<int>(nc.size());
  for (int& x : lab)
    if (x < 0) x = next++;
  return BoundaryCondition::from_labels(lat.n(), lat.l(), lab);
}

BoundaryCondition corners_to_singletons(const BoundaryCondition& bc) {
  std::vector<int> lab = bc.labels();
  int next = bc.cycle_length();
  for (int p : {0, bc.n(), bc.n() + bc.l(), 2 * bc.n() + bc.l()}) lab[p] = next++;
  return BoundaryCondition::from_labels(bc.n(), bc.l(), lab);
}

std::vector<int> dual_gap_partition(const BoundaryCondition& bc) {
  // gap k lies between positions k and k+1: separator s between point s-1+shift and s+shift with shift 1
  return complement_partition(bc.labels(), 1);
}

BoundaryCondition induced_region_bc(const Lattice& lat, const Region& region, const BoundaryCondition& bc,
                                    const FkConfig& outside) {
  require(region.is_box(), ErrorCode::precondition, "induced_region_bc needs a box region");
  require(bc.n() == lat.n() && bc.l() == lat.l(), ErrorCode::invalid_argument, "bc/lattice mismatch");
  const auto bb = region.bbox();
  require(bb[2] > bb[0] && bb[3] > bb[1], ErrorCode::precondition, "induced_region_bc needs a 2D box");
  DisjointSets dsu(lat.num_vertices());
  for (int e : region.outer_edges())
    if (outside.open(e)) dsu.unite(lat.edge(e).u, lat.edge(e).v);
  std::vector<int> rep(bc.num_blocks(), -1);
  const auto& cyc = lat.boundary_cycle();
  for (int p = 0; p < bc.cycle_length(); ++p) {
    int& r = rep[bc.label(p)];
    if (r < 0)
      r = cyc[p];
    else
      dsu.unite(r, cyc[p]);
  }
  const int w = bb[2] - bb[0], h = bb[3] - bb[1];
  const auto sub = boundary_cycle_of(w, h);
  std::vector<int> lab(sub.size());
  for (size_t i = 0; i < sub.size(); ++i) {
    const int x = sub[i] % (w + 1) + bb[0], y = sub[i] / (w + 1) + bb[1];
    lab[i] = dsu.find(lat.vertex_index(x, y));
  }
  return BoundaryCondition::from_labels(w, h, lab);
}

int arc_span(const std::vector<int>& labels, int label) {
  const int k = static_cast<int>(labels.size());
  std::vector<int> pos;
  for (int i = 0; i < k; ++i)
    if (labels[i] == label) pos.push_back(i);
  if (pos.empty()) return 0;
  int max_gap = 0;
  for (size_t i = 0; i < pos.size(); ++i) {
    const int next = (i + 1 < pos.size()) ? pos[i + 1] : pos[0] + k;
    max_gap = std::max(max_gap, next - pos[i]);
  }
  return k - max_gap + 1;
}

int localization(const std::vector<int>& labels) {
  const int k = static_cast<int>(labels.size());
  int nb = 0;
  for (int x : labels) nb = std::max(nb, x + 1);
  std::vector<int> first(nb, -1), prev(nb, -1), gap(nb, 0);
  for (int i = 0; i < k; ++i) {
    const int b = labels[i];
    if (first[b] < 0) first[b] = i;
    if (prev[b] >= 0) gap[b] = std::max(gap[b], i - prev[b]);
    prev[b] = i;
  }
  int best = 0;
  for (int b = 0; b < nb; ++b) {
    if (first[b] < 0) continue;
    const int wrap = first[b] + k - prev[b];
    best = std::max(best, k - std::max(gap[b], wrap) + 1);
  }
  return best;
}

int localization(const BoundaryCondition& bc) { return localization(bc.labels()); }

bool in_C_alpha(const BoundaryCondition& bc, double alpha) {
  const double n = std::max(bc.n(), bc.l());
  return localization(bc) <= alpha * std::log(n);
}

bool in_C_alpha_star(const BoundaryCondition& bc, double alpha) {
  const double n = std::max(bc.n(), bc.l());
  return localization(dual_gap_partition(bc)) <= alpha * std::log(n);
}

BoundaryCondition corner_free_modification(const BoundaryCondition& bc, int ell) {
  const int k = bc.cycle_length(), n = bc.n(), l = bc.l();
  std::vector<int> lab = bc.labels();
  int next = k;
  for (int p = 0; p < k; ++p) {
    for (int c : {0, n, n + l, 2 * n + l}) {
      const int d = std::abs(p - c);
      if (std::min(d, k - d) <= ell) {
        lab[p] = next++;
        break;
      }
    }
  }
  return BoundaryCondition::from_labels(n, l, lab);
}

int partition_distance(const std::vector<int>& a, const std::vector<int>& b) {
  require(a.size() == b.size(), ErrorCode::invalid_argument, "partition_distance: size mismatch");
  const int k = static_cast<int>(a.size());
  auto count = [&](const std::vector<int>& lab) {
    DisjointSets d(k);
    std::map<int, int> rep;
    for (int i = 0; i < k; ++i) {
      auto [it, fresh] = rep.try_emplace(lab[i], i);
      if (!fresh) d.unite(it->second, i);
    }
    return d;
  };
  DisjointSets da = count(a), db = count(b);
  DisjointSets join = count(a);
  std::map<int, int> rep;
  for (int i = 0; i < k; ++i) {
    auto [it, fresh] = rep.try_emplace(b[i], i);
    if (!fresh) join.unite(it->second, i);
  }
  return da.count() + db.count() - 2 * join.count();
}

namespace {

std::vector<int> random_stack_partition(const std::vector<int>& positions, int k, RngStream& rng, double density) {
  std::vector<int> lab(k);
  for (int i = 0; i < k; ++i) lab[i] = i;
  std::vector<int> stack;
  for (int p : positions) {
    if (rng.uniform() >= density) continue;
    const double v = rng.uniform();
    if (stack.empty() || v < 0.35) {
      stack.push_back(p);
    } else if (v < 0.7) {
      lab[p] = lab[stack.back()];
    } else {
      lab[p] = lab[stack.back()];
      stack.pop_back();
    }
  }
  return lab;
}

}  // namespace

BoundaryCondition random_realizable(int n, int l, RngStream& rng, double density) {
  const int k = 2 * n + 2 * l;
  std::vector<int> pos(k);
  for (int i = 0; i < k; ++i) pos[i] = i;
  return BoundaryCondition::from_labels(n, l, random_stack_partition(pos, k, rng, density));
}

BoundaryCondition random_north_bc(int n, int l, int x_lo, int x_hi, RngStream& rng, double density) {
  std::vector<int> pos;
  for (int x = x_lo + 1; x < x_hi; ++x) pos.push_back(north_position(n, l, x));
  std::sort(pos.begin(), pos.end());
  return BoundaryCondition::from_labels(n, l, random_stack_partition(pos, 2 * n + 2 * l, rng, density));
}

}  // namespace fkdyn
