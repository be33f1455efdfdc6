#include "fkdyn/blocks.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <deque>
#include <map>
#include <json.hpp>

#include "fkdyn/error.hpp"

namespace fkdyn {

const char* to_string(IntervalType t) {
  switch (t) {
    case IntervalType::none: return "none";
    case IntervalType::free: return "free";
    case IntervalType::wired: return "wired";
    case IntervalType::free_wired: return "free_wired";
  }
  return "?";
}

IntervalClassifier::IntervalClassifier(const BoundaryCondition& bc) : n_(bc.n()) {
  const int n = bc.n(), l = bc.l();
  top_label_.resize(n + 1);
  for (int x = 0; x <= n; ++x) top_label_[x] = bc.label(north_position(n, l, x));
  // per label: extent on the top side, or "escapes" if it has members elsewhere
  const int k = bc.num_blocks();
  std::vector<int> lo(k, n + 1), hi(k, -1);
  for (int x = 0; x <= n; ++x) {
    lo[top_label_[x]] = std::min(lo[top_label_[x]], x);
    hi[top_label_[x]] = std::max(hi[top_label_[x]], x);
  }
  for (int pos = 0; pos < bc.cycle_length(); ++pos) {
    const bool top = pos >= n + l && pos <= 2 * n + l;
    if (!top) {
      lo[bc.label(pos)] = -1;
      hi[bc.label(pos)] = n + 1;
    }
  }
  lo_.assign(1, std::vector<int>(n + 1));
  hi_.assign(1, std::vector<int>(n + 1));
  for (int x = 0; x <= n; ++x) {
    lo_[0][x] = lo[top_label_[x]];
    hi_[0][x] = hi[top_label_[x]];
  }
  for (int k = 1; (1 << k) <= n + 1; ++k) {
    const int len = n + 2 - (1 << k);
    lo_.emplace_back(len);
    hi_.emplace_back(len);
    for (int x = 0; x < len; ++x) {
      lo_[k][x] = std::min(lo_[k - 1][x], lo_[k - 1][x + (1 << (k - 1))]);
      hi_[k][x] = std::max(hi_[k - 1][x], hi_[k - 1][x + (1 << (k - 1))]);
    }
  }
}

IntervalType IntervalClassifier::classify(int a, int b) const {
  require(0 <= a && a <= b && b <= n_, ErrorCode::invalid_argument, "interval outside [0,n]");
  const int k = std::bit_width(static_cast<unsigned>(b - a + 1)) - 1;
  const int mn = std::min(lo_[k][a], lo_[k][b + 1 - (1 << k)]);
  const int mx = std::max(hi_[k][a], hi_[k][b + 1 - (1 << k)]);
  const bool f = mn >= a && mx <= b;
  const bool w = top_label_[a] == top_label_[b];
  if (f && w) return IntervalType::free_wired;
  if (f) return IntervalType::free;
  if (w) return IntervalType::wired;
  return IntervalType::none;
}

IntervalType classify_interval(const BoundaryCondition& bc, int a, int b) {
  return IntervalClassifier(bc).classify(a, b);
}

bool free_off_top(const BoundaryCondition& bc) {
  const int n = bc.n(), l = bc.l();
  std::vector<int> count(bc.num_blocks(), 0);
  for (int pos = 0; pos < bc.cycle_length(); ++pos) ++count[bc.label(pos)];
  for (int pos = 0; pos < bc.cycle_length(); ++pos) {
    const bool inner_top = pos > n + l && pos < 2 * n + l;
    if (!inner_top && count[bc.label(pos)] > 1) return false;
  }
  return true;
}

bool corner_free_top(const BoundaryCondition& bc, int m) {
  const int n = bc.n(), l = bc.l();
  std::vector<int> count(bc.num_blocks(), 0);
  for (int pos = 0; pos < bc.cycle_length(); ++pos) ++count[bc.label(pos)];
  for (int x = 0; x <= n; ++x) {
    if (x > m && x < n - m) continue;
    if (count[bc.label(north_position(n, l, x))] > 1) return false;
  }
  return true;
}

std::vector<LemmaViolation> check_interval_lemmas(const BoundaryCondition& bc) {
  const IntervalClassifier c(bc);
  const int n = bc.n();
  std::vector<LemmaViolation> out;
  auto T = [&](int a, int b) { return c.classify(a, b); };
  for (int a = 0; a <= n; ++a)
    for (int b = a + 1; b <= n; ++b)
      for (int cc = b + 1; cc <= n; ++cc) {
        if (has_wired(T(a, b)) && has_wired(T(b, cc)) && !has_wired(T(a, cc)))
          out.push_back({"union-wired", {a, b, cc}});
        if (b + 1 <= cc && has_free(T(a, b)) && has_free(T(b + 1, cc)) && !has_free(T(a, cc)))
          out.push_back({"union-free", {a, b, cc}});
      }
  for (int a = 0; a <= n; ++a)
    for (int b = a + 1; b <= n; ++b)
      for (int cc = b; cc <= n; ++cc)
        for (int d = cc + 1; d <= n; ++d) {
          const IntervalType ac = T(a, cc), bd = T(b, d);
          if (!is_disconnecting(ac) || !is_disconnecting(bd)) continue;
          const bool both_free = has_free(ac) && has_free(bd);
          const bool both_wired = has_wired(ac) && has_wired(bd);
          if (!both_free && !both_wired) out.push_back({"overlap-type", {a, b, cc, d}});
          if (cc == b) continue;
          if (both_wired && !(has_wired(T(a, b)) && has_wired(T(b, cc)) && has_wired(T(cc, d)) && has_wired(T(a, d))))
            out.push_back({"intersection-wired", {a, b, cc, d}});
          if (both_free && !(has_free(T(a, b - 1)) && has_free(T(b, cc)) && has_free(T(cc + 1, d)) &&
                             has_free(T(a, d))))
            out.push_back({"intersection-free", {a, b, cc, d}});
        }
  return out;
}

GroupOfRectangles::GroupOfRectangles(int n, int l, std::vector<Slab> slabs) : n_(n), l_(l), slabs_(std::move(slabs)) {
  require(!slabs_.empty(), ErrorCode::invalid_argument, "group needs at least one slab");
  for (size_t i = 0; i < slabs_.size(); ++i) {
    require(0 <= slabs_[i].a && slabs_[i].a < slabs_[i].b && slabs_[i].b <= n, ErrorCode::invalid_argument,
            "slab outside the host rectangle");
    require(i == 0 || slabs_[i - 1].b < slabs_[i].a, ErrorCode::invalid_argument, "slabs must be sorted and disjoint");
  }
}

int GroupOfRectangles::width() const {
  int w = 0;
  for (const auto& s : slabs_) w += s.width();
  return w;
}

int GroupOfRectangles::width_within(int x, int y) const {
  int w = 0;
  for (const auto& s : slabs_) w += std::max(0, std::min(s.b, y) - std::max(s.a, x));
  return w;
}

int GroupOfRectangles::slab_of(int x) const {
  for (int i = 0; i < count(); ++i)
    if (slabs_[i].a <= x && x <= slabs_[i].b) return i;
  return -1;
}

int GroupOfRectangles::parallel_distance(int x) const {
  int d = 1 << 30;
  for (const auto& s : slabs_) d = std::min({d, std::abs(x - s.a), std::abs(x - s.b)});
  return d;
}

GroupOfRectangles GroupOfRectangles::clip(const std::vector<Slab>& windows) const {
  std::vector<Slab> out;
  for (const auto& s : slabs_)
    for (const auto& w : windows) {
      const int a = std::max(s.a, w.a), b = std::min(s.b, w.b);
      if (a < b) out.push_back({a, b});
    }
  std::sort(out.begin(), out.end(), [](const Slab& x, const Slab& y) { return x.a < y.a; });
  // windows may overlap or touch inside one slab: merge
  std::vector<Slab> merged;
  for (const auto& s : out) {
    if (!merged.empty() && s.a <= merged.back().b)
      merged.back().b = std::max(merged.back().b, s.b);
    else
      merged.push_back(s);
  }
  return {n_, l_, merged};
}

bool GroupOfRectangles::valid(int m) const {
  if (slabs_.empty()) return false;
  for (size_t i = 0; i < slabs_.size(); ++i) {
    if (slabs_[i].width() < 2 * m) return false;
    if (i && slabs_[i - 1].b >= slabs_[i].a) return false;
  }
  return true;
}

Region GroupOfRectangles::region(const Lattice& lat) const {
  std::vector<uint8_t> mask(lat.num_vertices(), 0);
  for (const auto& s : slabs_)
    for (int x = s.a; x <= s.b; ++x)
      for (int y = 0; y <= l_; ++y) mask[lat.vertex_index(x, y)] = 1;
  return Region(lat, std::move(mask));
}

bool is_compatible(const GroupOfRectangles& g, const BoundaryCondition& bc, int m) {
  if (!g.valid(m) || !free_off_top(bc) || !corner_free_top(bc, m)) return false;
  const IntervalClassifier c(bc);
  const auto& s = g.slabs();
  for (int i = 0; i + 1 < g.count(); ++i)
    if (!is_disconnecting(c.classify(s[i].b - m, s[i + 1].a + m))) return false;
  return is_disconnecting(c.classify(s.front().a + m, s.back().b - m));
}

int default_m(int l, double c_star) { return std::max(1, static_cast<int>(std::floor(c_star * std::log(l)))); }

namespace {

struct Piece {
  int left, right;
};

// Maximal hulls of the bc blocks restricted to the group's top columns in [lo,hi].
std::vector<Piece> maximal_pieces(const IntervalClassifier& c, const GroupOfRectangles& g, int lo, int hi) {
  std::map<int, Piece> hull;
  for (int x = lo; x <= hi; ++x) {
    if (!g.on_top(x)) continue;
    auto [it, fresh] = hull.try_emplace(c.top_label(x), Piece{x, x});
    if (!fresh) it->second.right = x;
  }
  std::vector<Piece> all;
  for (auto& [lab, p] : hull) all.push_back(p);
  std::sort(all.begin(), all.end(), [](const Piece& a, const Piece& b) {
    return a.left != b.left ? a.left < b.left : a.right > b.right;
  });
  std::vector<Piece> out;
  for (const auto& p : all)
    if (out.empty() || p.left > out.back().right) out.push_back(p);
  return out;
}

}  // namespace

SplitResult split(const GroupOfRectangles& g, const BoundaryCondition& bc, int m) {
  require(m >= 1, ErrorCode::invalid_argument, "m must be positive");
  require(g.n() == bc.n() && g.l() == bc.l(), ErrorCode::invalid_argument, "group and bc live on different rectangles");
  require(g.valid(m), ErrorCode::precondition, "not a group of rectangles for this m");
  require(free_off_top(bc), ErrorCode::precondition, "bc must be free on the south, east and west sides");
  require(corner_free_top(bc, m), ErrorCode::precondition, "bc must be free within m of the corners");
  require(is_compatible(g, bc, m), ErrorCode::precondition, "group is not compatible with the bc");
  const int W = g.width();
  require(W >= 100 * m, ErrorCode::precondition, "group is too narrow to split");

  const IntervalClassifier cls(bc);
  nlohmann::json tr;
  auto in_band = [&](int w) { return 3 * w >= W && 3 * w <= 2 * W; };

  // top columns of the group per bc block
  std::map<int, std::vector<int>> members;
  for (const auto& s : g.slabs())
    for (int x = s.a; x <= s.b; ++x) members[cls.top_label(x)].push_back(x);

  int c = -1, d = -1;
  int x0 = -1, y0 = -1, best_over = -1;
  for (const auto& [lab, xs] : members)
    for (size_t i = 0; i < xs.size(); ++i)
      for (size_t j = i + 1; j < xs.size(); ++j) {
        const int w = g.width_within(xs[i], xs[j]);
        if (in_band(w) && (c < 0 || xs[i] < c || (xs[i] == c && xs[j] < d))) {
          c = xs[i];
          d = xs[j];
        }
        if (3 * w > 2 * W && (best_over < 0 || w < best_over || (w == best_over && xs[i] < x0))) {
          best_over = w;
          x0 = xs[i];
          y0 = xs[j];
        }
      }
  if (c >= 0) {
    tr["candidate"] = "wired-pair";
  } else {
    int lo = 0, hi = g.n();
    if (x0 >= 0) {
      lo = x0 + 1;
      hi = y0 - 1;
      tr["enclosing"] = {x0, y0};
    }
    const auto pieces = maximal_pieces(cls, g, lo, hi);
    tr["candidate"] = "merged-pieces";
    tr["pieces"] = pieces.size();
    int rejected = 0;
    for (size_t s = 0; s < pieces.size() && c < 0; ++s) {
      for (size_t t = s; t < pieces.size(); ++t) {
        const int w = g.width_within(pieces[s].left, pieces[t].right);
        if (3 * w > 2 * W) break;
        if (!in_band(w)) continue;
        if (!is_disconnecting(cls.classify(pieces[s].left, pieces[t].right))) {
          ++rejected;
          continue;
        }
        c = pieces[s].left;
        d = pieces[t].right;
        tr["merged"] = {s, t};
        break;
      }
    }
    tr["rejected_merges"] = rejected;
    if (c < 0) fail(ErrorCode::internal, "split: no candidate interval in the width band");
  }
  tr["c"] = c;
  tr["d"] = d;
  tr["candidate_type"] = to_string(cls.classify(c, d));

  const auto& S = g.slabs();
  const int N = g.count();
  int cs = c, ds = d;
  std::string c_rule = "kept", d_rule = "kept";
  {
    const int i = g.slab_of(c);
    if (c - S[i].a < m) {
      const bool wired_gap = i > 0 && has_wired(cls.classify(S[i - 1].b - m, S[i].a + m));
      if (wired_gap || i == 0 || S[i].width() == 2 * m) {
        cs = S[i].a + m;
        c_rule = i == 0 ? "first-slab" : wired_gap ? "wired-gap" : "thin-slab";
      } else {
        cs = S[i].a + m + 1;
        c_rule = "free-gap";
      }
    } else if (S[i].b - c < m) {
      cs = S[i].b - m;
      c_rule = "east-side";
    }
  }
  {
    const int i = g.slab_of(d);
    if (S[i].b - d < m) {
      const bool wired_gap = i + 1 < N && has_wired(cls.classify(S[i].b - m, S[i + 1].a + m));
      if (wired_gap || i + 1 == N || S[i].width() == 2 * m) {
        ds = S[i].b - m;
        d_rule = i + 1 == N ? "last-slab" : wired_gap ? "wired-gap" : "thin-slab";
      } else {
        ds = S[i].b - m - 1;
        d_rule = "free-gap";
      }
    } else if (d - S[i].a < m) {
      ds = S[i].a + m;
      d_rule = "west-side";
    }
  }
  tr["c_rule"] = c_rule;
  tr["d_rule"] = d_rule;
  tr["c_star"] = cs;
  tr["d_star"] = ds;
  if (!(cs < ds) || !is_disconnecting(cls.classify(cs, ds)))
    fail(ErrorCode::internal, "split: adjusted interval is not disconnecting");
  tr["type"] = to_string(cls.classify(cs, ds));

  SplitResult r;
  r.c_star = cs;
  r.d_star = ds;
  const int n = g.n();
  r.A_int = g.clip({{cs, ds}});
  r.A_ext = g.clip({{0, cs}, {ds, n}});
  r.R_int = g.clip({{cs - m, ds + m}});
  r.R_ext = g.clip({{0, cs + m}, {ds - m, n}});
  tr["W"] = W;
  tr["W_A_int"] = r.A_int.width();
  tr["W_R_int"] = r.R_int.width();
  tr["W_R_ext"] = r.R_ext.width();
  r.trace = tr.dump();
  return r;
}

namespace {

bool in_cols(int x, int lo, int hi) { return lo <= x && x <= hi; }

// Dual path from the top edge between columns (sx, sx+1) to a south edge with left end in [south_lo, south_hi],
// using only closed edges inside columns [lo, hi].
bool dual_crossing(const Lattice& lat, const FkConfig& s, int lo, int hi, int sx, int south_lo, int south_hi) {
  const int l = lat.l();
  auto allowed = [&](int e) {
    const Edge& ed = lat.edge(e);
    const Vertex a = lat.vertex(ed.u), b = lat.vertex(ed.v);
    return in_cols(a.x, lo, hi) && in_cols(b.x, lo, hi) && !s.open(e);
  };
  const int start = lat.edge_between({sx, l}, {sx + 1, l});
  if (start < 0 || !allowed(start)) return false;
  std::vector<uint8_t> seen(lat.num_edges(), 0);
  std::deque<int> q{start};
  seen[start] = 1;
  auto face_edges = [&](int fx, int fy, int out[4]) {
    out[0] = lat.edge_between({fx, fy}, {fx + 1, fy});
    out[1] = lat.edge_between({fx, fy + 1}, {fx + 1, fy + 1});
    out[2] = lat.edge_between({fx, fy}, {fx, fy + 1});
    out[3] = lat.edge_between({fx + 1, fy}, {fx + 1, fy + 1});
  };
  while (!q.empty()) {
    const int e = q.front();
    q.pop_front();
    const Edge& ed = lat.edge(e);
    const Vertex a = lat.vertex(ed.u);
    if (ed.orient == 0 && a.y == 0 && in_cols(a.x, south_lo, south_hi)) return true;
    int faces[2][2];
    int nf = 0;
    if (ed.orient == 0) {
      if (a.y - 1 >= 0) faces[nf][0] = a.x, faces[nf++][1] = a.y - 1;
      if (a.y < l) faces[nf][0] = a.x, faces[nf++][1] = a.y;
    } else {
      if (a.x - 1 >= 0) faces[nf][0] = a.x - 1, faces[nf++][1] = a.y;
      if (a.x < lat.n()) faces[nf][0] = a.x, faces[nf++][1] = a.y;
    }
    for (int f = 0; f < nf; ++f) {
      int es[4];
      face_edges(faces[f][0], faces[f][1], es);
      for (int x : es)
        if (x >= 0 && !seen[x] && allowed(x)) {
          seen[x] = 1;
          q.push_back(x);
        }
    }
  }
  return false;
}

bool primal_crossing(const Lattice& lat, const FkConfig& s, int lo, int hi, int sx, int target_lo, int target_hi) {
  const int start = lat.vertex_index(sx, lat.l());
  std::vector<uint8_t> seen(lat.num_vertices(), 0);
  std::deque<int> q{start};
  seen[start] = 1;
  while (!q.empty()) {
    const int v = q.front();
    q.pop_front();
    const Vertex p = lat.vertex(v);
    if (p.y == 0 && in_cols(p.x, target_lo, target_hi)) return true;
    const int* es = lat.incident_edges(v);
    for (int k = 0; k < lat.degree(v); ++k) {
      const int e = es[k];
      if (!s.open(e)) continue;
      const Edge& ed = lat.edge(e);
      const int w = ed.u == v ? ed.v : ed.u;
      const Vertex pw = lat.vertex(w);
      if (!in_cols(p.x, lo, hi) || !in_cols(pw.x, lo, hi) || seen[w]) continue;
      seen[w] = 1;
      q.push_back(w);
    }
  }
  return false;
}

}  // namespace

bool gamma_event(const Lattice& lat, const FkConfig& config, const SplitResult& s, int m, GammaKind which) {
  require(config.size() == lat.num_edges(), ErrorCode::invalid_argument, "config does not match lattice");
  const int cs = s.c_star, ds = s.d_star;
  if (which == GammaKind::dual) {
    // west: edges within columns [c*-m, c*], starting at the top edge (c*-1, c*)
    const bool west = dual_crossing(lat, config, cs - m, cs, cs - 1, cs - m, cs - 1);
    const bool east = dual_crossing(lat, config, ds, ds + m, ds, ds, ds + m - 1);
    return west && east;
  }
  const bool west = primal_crossing(lat, config, cs - m, cs, cs, cs - m, cs - 1);
  const bool east = primal_crossing(lat, config, ds, ds + m, ds, ds + 1, ds + m);
  return west && east;
}

}  // namespace fkdyn

#include "fkdyn/rng.hpp"

namespace fkdyn {

BoundaryCondition random_top_bc(int n, int l, int m, RngStream& rng) {
  const int span = n - 2 * m - 1;
  if (span < 2 || rng.uniform() < 0.5) return random_north_bc(n, l, m, n - m, rng, 0.2 + 0.7 * rng.uniform());
  // long arcs: choose 2k columns, pair them by a random balanced bracket word
  const int k = std::min(span / 2, 1 + static_cast<int>(rng.below(12)));
  std::vector<int> cols;
  std::vector<uint8_t> used(n + 1, 0);
  while (static_cast<int>(cols.size()) < 2 * k) {
    const int x = m + 1 + static_cast<int>(rng.below(span));
    if (!used[x]) {
      used[x] = 1;
      cols.push_back(x);
    }
  }
  std::sort(cols.begin(), cols.end());
  std::vector<int> labels(2 * n + 2 * l);
  for (int i = 0; i < static_cast<int>(labels.size()); ++i) labels[i] = i;
  std::vector<int> stack;
  int opens = 0;
  for (int i = 0; i < 2 * k; ++i) {
    const int remaining = 2 * k - i;
    const bool must_close = static_cast<int>(stack.size()) == remaining;
    const bool can_open = opens < k;
    if (!must_close && can_open && (stack.empty() || rng.uniform() < 0.5)) {
      stack.push_back(cols[i]);
      ++opens;
    } else {
      const int a = stack.back();
      stack.pop_back();
      labels[north_position(n, l, cols[i])] = labels[north_position(n, l, a)];
      // occasionally merge the finished arc into its enclosing one
      if (!stack.empty() && rng.uniform() < 0.2) {
        const int from = labels[north_position(n, l, a)], to = labels[north_position(n, l, stack.back())];
        for (int& lab : labels)
          if (lab == from) lab = to;
      }
    }
  }
  return BoundaryCondition::from_labels(n, l, labels);
}

SplitInstance random_split_instance(RngStream& rng) {
  for (;;) {
    SplitInstance in;
    in.m = 1 + static_cast<int>(rng.below(4));
    const int n = 100 * in.m + static_cast<int>(rng.below(250 * in.m));
    const int l = 1 + static_cast<int>(rng.below(6));
    in.bc = random_top_bc(n, l, in.m, rng);
    in.group = GroupOfRectangles::whole(n, l);
    const double mode = rng.uniform();
    if (mode < 0.3) return in;
    if (mode < 0.7) {
      // descend through earlier splits
      GroupOfRectangles g = in.group;
      const int levels = 1 + static_cast<int>(rng.below(3));
      bool ok = true;
      for (int lv = 0; lv < levels; ++lv) {
        SplitResult s;
        try {
          s = split(g, in.bc, in.m);
        } catch (const Error&) {
          ok = false;
          break;
        }
        const GroupOfRectangles& next = rng.uniform() < 0.5 ? s.R_int : s.R_ext;
        if (next.width() < 100 * in.m) break;
        g = next;
      }
      if (!ok) continue;
      in.group = g;
      return in;
    }
    // random slabs accepted by compatibility
    for (int tries = 0; tries < 200; ++tries) {
      const int k = 2 + static_cast<int>(rng.below(3));
      std::vector<int> cuts;
      for (int i = 0; i < 2 * k; ++i) cuts.push_back(static_cast<int>(rng.below(n + 1)));
      std::sort(cuts.begin(), cuts.end());
      std::vector<Slab> slabs;
      bool good = true;
      for (int i = 0; i < k; ++i) {
        if (cuts[2 * i] >= cuts[2 * i + 1] || (i && cuts[2 * i - 1] >= cuts[2 * i])) good = false;
        slabs.push_back({cuts[2 * i], cuts[2 * i + 1]});
      }
      if (!good) continue;
      GroupOfRectangles g(n, l, slabs);
      if (g.width() >= 100 * in.m && is_compatible(g, in.bc, in.m)) {
        in.group = g;
        return in;
      }
    }
  }
}

}  // namespace fkdyn
