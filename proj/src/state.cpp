#include "fkdyn/state.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "fkdyn/dsu.hpp"
#include "fkdyn/error.hpp"

namespace fkdyn {

void Params::validate() const {
  require(p > 0.0 && p < 1.0, ErrorCode::invalid_argument, "p must lie in (0,1)");
  require(q > 0.0, ErrorCode::invalid_argument, "q must be positive");
}

double critical_p(double q) { return std::sqrt(q) / (std::sqrt(q) + 1.0); }

FkConfig FkConfig::from_mask(int num_edges, uint64_t mask) {
  FkConfig c(num_edges);
  for (int e = 0; e < num_edges; ++e) c.bits[e] = (mask >> e) & 1u;
  return c;
}

uint64_t FkConfig::to_mask() const {
  uint64_t m = 0;
  for (int e = 0; e < size() && e < 64; ++e)
    if (bits[e]) m |= uint64_t{1} << e;
  return m;
}

int FkConfig::count_open() const {
  int c = 0;
  for (auto b : bits) c += b;
  return c;
}

bool FkConfig::subset_of(const FkConfig& other) const {
  for (size_t i = 0; i < bits.size(); ++i)
    if (bits[i] > other.bits[i]) return false;
  return true;
}

std::string serialize_config(const Lattice& lat, const FkConfig& cfg) {
  std::string out = std::to_string(lat.n()) + " " + std::to_string(lat.l()) + " " +
                    (lat.variant() == EdgeSetVariant::full ? "full" : "modified") + " ";
  static const char* hex = "0123456789abcdef";
  for (int i = 0; i < cfg.size(); i += 4) {
    int nib = 0;
    for (int b = 0; b < 4 && i + b < cfg.size(); ++b) nib |= cfg.bits[i + b] << b;
    out.push_back(hex[nib]);
  }
  return out;
}

FkConfig deserialize_config(const Lattice& lat, const std::string& text) {
  std::istringstream is(text);
  int n = 0, l = 0;
  std::string variant, bits;
  is >> n >> l >> variant >> bits;
  require(n == lat.n() && l == lat.l(), ErrorCode::invalid_argument, "config dimensions do not match lattice");
  require((variant == "full") == (lat.variant() == EdgeSetVariant::full), ErrorCode::invalid_argument,
          "config edge-set variant mismatch");
  FkConfig c(lat.num_edges());
  require(static_cast<int>(bits.size()) == (lat.num_edges() + 3) / 4, ErrorCode::invalid_argument,
          "config bit string has wrong length");
  for (int i = 0; i < c.size(); ++i) {
    const char ch = bits[i / 4];
    const int nib = (ch >= 'a') ? ch - 'a' + 10 : ch - '0';
    c.bits[i] = (nib >> (i % 4)) & 1;
  }
  return c;
}

Kernel::Kernel(const Lattice& lat, const BoundaryCondition& bc, bool use_dual) : lat_(lat), bc_(bc) {
  require(bc.n() == lat.n() && bc.l() == lat.l(), ErrorCode::invalid_argument, "bc does not match lattice");
  vblock_.assign(lat.num_vertices(), -1);
  for (const auto& blk : bc.nontrivial_blocks()) {
    std::vector<int> members;
    for (int p : blk) {
      const int v = lat.boundary_cycle()[p];
      vblock_[v] = static_cast<int>(block_members_.size());
      members.push_back(v);
    }
    block_members_.push_back(std::move(members));
  }
  mark_a_.assign(lat.num_vertices(), 0);
  mark_b_.assign(lat.num_vertices(), 0);
  bmark_a_.assign(block_members_.size(), 0);
  bmark_b_.assign(block_members_.size(), 0);

  if (!use_dual || !is_realizable(bc)) return;
  AnnulusConfig ann = bc.nontrivial_blocks().empty() ? empty_annulus(lat.n(), lat.l(), lat.variant(), 0)
                                                     : realize(bc, lat.variant());
  has_dual_ = true;
  host_ = ann.host;
  host_w_ = host_.n();
  host_h_ = host_.l();
  edge_to_host_.assign(lat.num_edges(), -1);
  host_to_edge_.assign(host_.num_edges(), -1);
  host_fixed_ = ann.open;
  for (int e = 0; e < lat.num_edges(); ++e) {
    const Edge& ed = lat.edge(e);
    const Vertex a = lat.vertex(ed.u), b = lat.vertex(ed.v);
    const int he = host_.edge_between({a.x + ann.pad, a.y + ann.pad}, {b.x + ann.pad, b.y + ann.pad});
    edge_to_host_[e] = he;
    host_to_edge_[he] = e;
  }
  // Faces: (i,j) -> j*W+i, plus the outer face.
  const int nf = host_w_ * host_h_ + 1;
  outer_face_ = nf - 1;
  std::vector<std::vector<std::pair<int, int>>> adj(nf);
  for (int he = 0; he < host_.num_edges(); ++he) {
    const Edge& ed = host_.edge(he);
    const Vertex a = host_.vertex(ed.u);
    int f1, f2;
    if (ed.orient == 0) {
      f1 = a.y > 0 ? (a.y - 1) * host_w_ + a.x : outer_face_;
      f2 = a.y < host_h_ ? a.y * host_w_ + a.x : outer_face_;
    } else {
      f1 = a.x > 0 ? a.y * host_w_ + a.x - 1 : outer_face_;
      f2 = a.x < host_w_ ? a.y * host_w_ + a.x : outer_face_;
    }
    adj[f1].push_back({he, f2});
    adj[f2].push_back({he, f1});
  }
  face_start_.assign(nf + 1, 0);
  for (int f = 0; f < nf; ++f) face_start_[f + 1] = face_start_[f] + static_cast<int>(adj[f].size());
  for (int f = 0; f < nf; ++f)
    for (auto [he, g] : adj[f]) {
      face_edge_.push_back(he);
      face_nbr_.push_back(g);
    }
  fmark_.assign(nf, 0);
}

void Kernel::bump_stamp() {
  if (++stamp_ == 0) {
    std::fill(mark_a_.begin(), mark_a_.end(), 0);
    std::fill(mark_b_.begin(), mark_b_.end(), 0);
    std::fill(bmark_a_.begin(), bmark_a_.end(), 0);
    std::fill(bmark_b_.begin(), bmark_b_.end(), 0);
    std::fill(fmark_.begin(), fmark_.end(), 0);
    stamp_ = 1;
  }
}

Kernel::Step Kernel::step_primal(const FkConfig& s, Side& side, std::vector<uint32_t>& mine,
                                 std::vector<uint32_t>& theirs, std::vector<uint32_t>& blocks_mine, int skip_edge,
                                 bool with_bc) {
  if (side.head == side.queue.size()) return Step::exhausted;
  const int w = side.queue[side.head++];
  auto visit = [&](int x) {
    if (theirs[x] == stamp_) return true;
    if (mine[x] != stamp_) {
      mine[x] = stamp_;
      side.queue.push_back(x);
    }
    return false;
  };
  if (with_bc && vblock_[w] >= 0 && blocks_mine[vblock_[w]] != stamp_) {
    blocks_mine[vblock_[w]] = stamp_;
    for (int m : block_members_[vblock_[w]])
      if (visit(m)) return Step::found;
  }
  auto [nb, nb_end] = lat_.incident(w);
  const int* inc = lat_.incident_edges(w);
  for (; nb != nb_end; ++nb, ++inc) {
    if (*inc == skip_edge || !s.bits[*inc]) continue;
    if (visit(*nb)) return Step::found;
  }
  return Step::more;
}

Kernel::Step Kernel::step_dual(const FkConfig& s, int target, int skip_host_edge) {
  Side& side = side_d_;
  if (side.head == side.queue.size()) return Step::exhausted;
  const int f = side.queue[side.head++];
  for (int k = face_start_[f]; k < face_start_[f + 1]; ++k) {
    const int he = face_edge_[k];
    if (he == skip_host_edge) continue;
    const int e = host_to_edge_[he];
    const bool closed = e >= 0 ? s.bits[e] == 0 : host_fixed_[he] == 0;
    if (!closed) continue;
    const int g = face_nbr_[k];
    if (fmark_[g] == stamp_) continue;
    if (g == target) return Step::found;
    fmark_[g] = stamp_;
    side.queue.push_back(g);
  }
  return Step::more;
}

bool Kernel::search(const FkConfig& s, int u, int v, int skip_edge, bool with_bc) {
  if (u == v) return true;
  if (with_bc && vblock_[u] >= 0 && vblock_[u] == vblock_[v]) return true;
  bump_stamp();
  side_a_.queue.clear();
  side_a_.head = 0;
  side_b_.queue.clear();
  side_b_.head = 0;
  mark_a_[u] = stamp_;
  mark_b_[v] = stamp_;
  side_a_.queue.push_back(u);
  side_b_.queue.push_back(v);

  const bool dual = has_dual_ && with_bc && skip_edge >= 0;
  int target = -1, skip_host = -1;
  if (dual) {
    skip_host = edge_to_host_[skip_edge];
    int f1 = -1, f2 = -1;
    // faces on both sides of the host edge
    const Edge& ed = host_.edge(skip_host);
    const Vertex a = host_.vertex(ed.u);
    if (ed.orient == 0) {
      f1 = a.y > 0 ? (a.y - 1) * host_w_ + a.x : outer_face_;
      f2 = a.y < host_h_ ? a.y * host_w_ + a.x : outer_face_;
    } else {
      f1 = a.x > 0 ? a.y * host_w_ + a.x - 1 : outer_face_;
      f2 = a.x < host_w_ ? a.y * host_w_ + a.x : outer_face_;
    }
    side_d_.queue.clear();
    side_d_.head = 0;
    fmark_[f1] = stamp_;
    side_d_.queue.push_back(f1);
    target = f2;
  }
  for (;;) {
    Step r = step_primal(s, side_a_, mark_a_, mark_b_, bmark_a_, skip_edge, with_bc);
    if (r == Step::found) return true;
    if (r == Step::exhausted) return false;
    r = step_primal(s, side_b_, mark_b_, mark_a_, bmark_b_, skip_edge, with_bc);
    if (r == Step::found) return true;
    if (r == Step::exhausted) return false;
    if (dual) {
      r = step_dual(s, target, skip_host);
      if (r == Step::found) return false;
      if (r == Step::exhausted) return true;
    }
  }
}

bool Kernel::connected_off(const FkConfig& s, int e) {
  const Edge& ed = lat_.edge(e);
  return search(s, ed.u, ed.v, e, true);
}

bool Kernel::connected(const FkConfig& s, int u, int v, bool with_bc) { return search(s, u, v, -1, with_bc); }

bool Kernel::connected_off_naive(const FkConfig& s, int e) const {
  const Edge& ed = lat_.edge(e);
  std::vector<char> seen(lat_.num_vertices(), 0);
  std::vector<int> stack{ed.u};
  seen[ed.u] = 1;
  while (!stack.empty()) {
    const int w = stack.back();
    stack.pop_back();
    if (w == ed.v) return true;
    std::vector<int> next;
    if (vblock_[w] >= 0) next = block_members_[vblock_[w]];
    auto [nb, nb_end] = lat_.incident(w);
    const int* inc = lat_.incident_edges(w);
    for (; nb != nb_end; ++nb, ++inc)
      if (*inc != e && s.bits[*inc]) next.push_back(*nb);
    for (int x : next)
      if (!seen[x]) {
        seen[x] = 1;
        stack.push_back(x);
      }
  }
  return false;
}

int Kernel::component_count(const FkConfig& s) const {
  DisjointSets dsu(lat_.num_vertices());
  for (int e = 0; e < lat_.num_edges(); ++e)
    if (s.bits[e]) dsu.unite(lat_.edge(e).u, lat_.edge(e).v);
  for (const auto& m : block_members_)
    for (size_t i = 1; i < m.size(); ++i) dsu.unite(m[0], m[i]);
  return dsu.count();
}

double Kernel::log_weight(const FkConfig& s, const Params& prm) const {
  const int open = s.count_open();
  return open * std::log(prm.p) + (lat_.num_edges() - open) * std::log1p(-prm.p) +
         component_count(s) * std::log(prm.q);
}

int component_count(const Lattice& lat, const FkConfig& s, const BoundaryCondition& bc) {
  return Kernel(lat, bc, false).component_count(s);
}

bool is_cut_edge(const Lattice& lat, const FkConfig& s, const BoundaryCondition& bc, int e) {
  return Kernel(lat, bc, false).is_cut_edge(s, e);
}

bool connected(const Lattice& lat, const FkConfig& s, const BoundaryCondition& bc, int u, int v, bool with_bc) {
  return Kernel(lat, bc, false).connected(s, u, v, with_bc);
}

double log_weight(const Lattice& lat, const FkConfig& s, const BoundaryCondition& bc, const Params& prm) {
  return Kernel(lat, bc, false).log_weight(s, prm);
}

FkConfig dual_config(const FkConfig& s, const Lattice& lat) {
  const DualLattice d = dual_lattice(lat);
  require(s.size() == lat.num_edges(), ErrorCode::invalid_argument, "config size mismatch");
  FkConfig out(d.dual.num_edges());
  for (int e = 0; e < d.dual.num_edges(); ++e) out.bits[e] = s.bits[d.dual_to_primal[e]] ? 0 : 1;
  return out;
}

FkConfig primal_config(const FkConfig& dual, const Lattice& lat) {
  const DualLattice d = dual_lattice(lat);
  require(dual.size() == d.dual.num_edges(), ErrorCode::invalid_argument, "config size mismatch");
  FkConfig out(lat.num_edges());
  for (int e = 0; e < lat.num_edges(); ++e) out.bits[e] = dual.bits[d.primal_to_dual[e]] ? 0 : 1;
  return out;
}

}  // namespace fkdyn
