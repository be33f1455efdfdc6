#include "fkdyn/lattice.hpp"

#include <algorithm>
#include <cstdlib>

#include "fkdyn/error.hpp"

namespace fkdyn {

std::vector<int> boundary_cycle_of(int n, int l) {
  std::vector<int> cyc;
  auto idx = [n](int x, int y) { return y * (n + 1) + x; };
  for (int x = 0; x <= n; ++x) cyc.push_back(idx(x, 0));
  for (int y = 1; y <= l; ++y) cyc.push_back(idx(n, y));
  for (int x = n - 1; x >= 0; --x) cyc.push_back(idx(x, l));
  for (int y = l - 1; y >= 1; --y) cyc.push_back(idx(0, y));
  return cyc;
}

Lattice Lattice::build_rect(int n, int l, EdgeSetVariant variant) {
  require(n >= 1 && l >= 1, ErrorCode::invalid_argument, "rectangle needs n >= 1 and l >= 1");
  Lattice lat;
  lat.n_ = n;
  lat.l_ = l;
  lat.variant_ = variant;
  const int nv = (n + 1) * (l + 1);
  lat.cycle_ = boundary_cycle_of(n, l);
  lat.cycle_pos_.assign(nv, -1);
  for (int i = 0; i < static_cast<int>(lat.cycle_.size()); ++i) lat.cycle_pos_[lat.cycle_[i]] = i;

  lat.east_edge_.assign(nv, -1);
  lat.north_edge_.assign(nv, -1);
  auto keep = [&](int a, int b) {
    if (variant == EdgeSetVariant::full) return true;
    return lat.cycle_pos_[a] < 0 || lat.cycle_pos_[b] < 0;
  };
  for (int v = 0; v < nv; ++v) {
    const int x = v % (n + 1), y = v / (n + 1);
    if (x < n && keep(v, v + 1)) {
      lat.east_edge_[v] = static_cast<int>(lat.edges_.size());
      lat.edges_.push_back({v, v + 1, 0});
    }
    if (y < l && keep(v, v + n + 1)) {
      lat.north_edge_[v] = static_cast<int>(lat.edges_.size());
      lat.edges_.push_back({v, v + n + 1, 1});
    }
  }

  std::vector<int> deg(nv, 0);
  for (const auto& e : lat.edges_) {
    ++deg[e.u];
    ++deg[e.v];
  }
  lat.inc_start_.assign(nv + 1, 0);
  for (int v = 0; v < nv; ++v) lat.inc_start_[v + 1] = lat.inc_start_[v] + deg[v];
  lat.inc_nbr_.resize(lat.inc_start_[nv]);
  lat.inc_edge_.resize(lat.inc_start_[nv]);
  std::vector<int> fill(lat.inc_start_.begin(), lat.inc_start_.end() - 1);
  for (int e = 0; e < lat.num_edges(); ++e) {
    const auto& ed = lat.edges_[e];
    lat.inc_nbr_[fill[ed.u]] = ed.v;
    lat.inc_edge_[fill[ed.u]++] = e;
    lat.inc_nbr_[fill[ed.v]] = ed.u;
    lat.inc_edge_[fill[ed.v]++] = e;
  }
  return lat;
}

int Lattice::edge_index(int u, int v) const {
  if (u > v) std::swap(u, v);
  if (u < 0 || v >= num_vertices()) return -1;
  const Vertex a = vertex(u), b = vertex(v);
  if (b.y == a.y && b.x == a.x + 1) return east_edge_[u];
  if (b.x == a.x && b.y == a.y + 1) return north_edge_[u];
  return -1;
}

int Lattice::edge_between(Vertex a, Vertex b) const {
  if (!contains(a.x, a.y) || !contains(b.x, b.y)) return -1;
  return edge_index(vertex_index(a.x, a.y), vertex_index(b.x, b.y));
}

int Lattice::distance(int u, int v) const {
  const Vertex a = vertex(u), b = vertex(v);
  return std::abs(a.x - b.x) + std::abs(a.y - b.y);
}

DualLattice dual_lattice(const Lattice& lat) {
  require(lat.variant() == EdgeSetVariant::modified, ErrorCode::precondition,
          "dual_lattice requires the modified edge set");
  require(lat.n() >= 2 && lat.l() >= 2, ErrorCode::precondition, "dual_lattice requires n, l >= 2");
  DualLattice out{Lattice::build_rect(lat.n() - 1, lat.l() - 1, EdgeSetVariant::full), {}, {}};
  out.primal_to_dual.assign(lat.num_edges(), -1);
  out.dual_to_primal.assign(out.dual.num_edges(), -1);
  for (int e = 0; e < lat.num_edges(); ++e) {
    const Edge& ed = lat.edge(e);
    const Vertex a = lat.vertex(ed.u);
    int d;
    if (ed.orient == 0) {
      // faces (x+1/2, y-1/2) and (x+1/2, y+1/2)
      d = out.dual.edge_between({a.x, a.y - 1}, {a.x, a.y});
    } else {
      d = out.dual.edge_between({a.x - 1, a.y}, {a.x, a.y});
    }
    require(d >= 0, ErrorCode::internal, "dual edge missing");
    out.primal_to_dual[e] = d;
    out.dual_to_primal[d] = e;
  }
  return out;
}

Region::Region(const Lattice& lat, std::vector<uint8_t> mask) : mask_(std::move(mask)) {
  require(static_cast<int>(mask_.size()) == lat.num_vertices(), ErrorCode::invalid_argument,
          "region mask size mismatch");
  edge_in_.assign(lat.num_edges(), 0);
  for (int e = 0; e < lat.num_edges(); ++e) {
    const auto& ed = lat.edge(e);
    if (mask_[ed.u] && mask_[ed.v]) {
      edge_in_[e] = 1;
      inner_.push_back(e);
    } else {
      outer_.push_back(e);
    }
  }
  int x0 = lat.n() + 1, y0 = lat.l() + 1, x1 = -1, y1 = -1;
  for (int v = 0; v < lat.num_vertices(); ++v) {
    if (!mask_[v]) continue;
    ++count_;
    const Vertex p = lat.vertex(v);
    x0 = std::min(x0, p.x);
    y0 = std::min(y0, p.y);
    x1 = std::max(x1, p.x);
    y1 = std::max(y1, p.y);
  }
  if (count_ > 0) {
    bbox_ = {x0, y0, x1, y1};
    is_box_ = count_ == (x1 - x0 + 1) * (y1 - y0 + 1);
  }
}

Region Region::box(const Lattice& lat, int x0, int y0, int x1, int y1) {
  std::vector<uint8_t> m(lat.num_vertices(), 0);
  for (int y = std::max(0, y0); y <= std::min(lat.l(), y1); ++y)
    for (int x = std::max(0, x0); x <= std::min(lat.n(), x1); ++x) m[lat.vertex_index(x, y)] = 1;
  return Region(lat, std::move(m));
}

Region Region::all(const Lattice& lat) { return Region(lat, std::vector<uint8_t>(lat.num_vertices(), 1)); }
Region Region::none(const Lattice& lat) { return Region(lat, std::vector<uint8_t>(lat.num_vertices(), 0)); }

}  // namespace fkdyn
