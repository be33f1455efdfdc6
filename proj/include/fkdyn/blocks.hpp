#pragma once

#include <string>
#include <vector>

#include "fkdyn/boundary.hpp"
#include "fkdyn/config.hpp"
#include "fkdyn/lattice.hpp"

namespace fkdyn {

// Intervals are column ranges [a,b] of the top side y = l.
enum class IntervalType { none, free, wired, free_wired };

const char* to_string(IntervalType t);
inline bool is_disconnecting(IntervalType t) { return t != IntervalType::none; }
inline bool has_free(IntervalType t) { return t == IntervalType::free || t == IntervalType::free_wired; }
inline bool has_wired(IntervalType t) { return t == IntervalType::wired || t == IntervalType::free_wired; }

// Precomputed O(1) interval classification for one bc.
class IntervalClassifier {
 public:
  explicit IntervalClassifier(const BoundaryCondition& bc);
  IntervalType classify(int a, int b) const;
  int n() const { return n_; }
  int top_label(int x) const { return top_label_[x]; }

 private:
  int n_ = 0;
  std::vector<int> top_label_;
  // sparse tables over columns: min extent-left and max extent-right of the block at x
  std::vector<std::vector<int>> lo_, hi_;
};

IntervalType classify_interval(const BoundaryCondition& bc, int a, int b);

// Free on the south, east and west sides (corners included).
bool free_off_top(const BoundaryCondition& bc);
// Top vertices within distance m of the east/west sides are singletons.
bool corner_free_top(const BoundaryCondition& bc, int m);

struct LemmaViolation {
  std::string lemma;
  std::vector<int> points;
};

std::vector<LemmaViolation> check_interval_lemmas(const BoundaryCondition& bc);

struct Slab {
  int a = 0;
  int b = 0;
  int width() const { return b - a; }
  bool operator==(const Slab&) const = default;
};

class GroupOfRectangles {
 public:
  GroupOfRectangles() = default;
  GroupOfRectangles(int n, int l, std::vector<Slab> slabs);
  static GroupOfRectangles whole(int n, int l) { return {n, l, {{0, n}}}; }

  int n() const { return n_; }
  int l() const { return l_; }
  const std::vector<Slab>& slabs() const { return slabs_; }
  int count() const { return static_cast<int>(slabs_.size()); }
  int width() const;
  // W(R cap [x,y] x [0,l]).
  int width_within(int x, int y) const;
  // Index of the slab containing column x, or -1.
  int slab_of(int x) const;
  bool on_top(int x) const { return slab_of(x) >= 0; }
  // Distance of (x,l) to the vertical sides of the group.
  int parallel_distance(int x) const;
  // Intersection with a union of column intervals; zero-width pieces dropped.
  GroupOfRectangles clip(const std::vector<Slab>& windows) const;
  bool valid(int m) const;
  Region region(const Lattice& lat) const;
  bool operator==(const GroupOfRectangles&) const = default;

 private:
  int n_ = 0, l_ = 0;
  std::vector<Slab> slabs_;
};

bool is_compatible(const GroupOfRectangles& g, const BoundaryCondition& bc, int m);

struct SplitResult {
  int c_star = 0;
  int d_star = 0;
  GroupOfRectangles A_int, A_ext, R_int, R_ext;
  std::string trace;  // JSON
};

SplitResult split(const GroupOfRectangles& g, const BoundaryCondition& bc, int m);

// Default m = C log l (natural log), at least 1.
int default_m(int l, double c_star = 8.0);

enum class GammaKind { dual, primal };

// config is indexed by the edges of lat, the full n x l host rectangle.
bool gamma_event(const Lattice& lat, const FkConfig& config, const SplitResult& s, int m, GammaKind which);

}  // namespace fkdyn

namespace fkdyn {

class RngStream;

// Random realizable bc on the top side, free within m of the corners. Mixes
// short local arcs with long nested arcs (random Dyck matchings).
BoundaryCondition random_top_bc(int n, int l, int m, RngStream& rng);

struct SplitInstance {
  GroupOfRectangles group;
  BoundaryCondition bc;
  int m = 1;
};

// Random compatible (group, bc, m) with W >= 100 m: whole boxes, split descendants and random slab groups.
SplitInstance random_split_instance(RngStream& rng);

}  // namespace fkdyn
