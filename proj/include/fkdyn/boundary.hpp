#pragma once

#include <string>
#include <vector>

#include "fkdyn/config.hpp"
#include "fkdyn/lattice.hpp"

namespace fkdyn {

class RngStream;

// Partition of the boundary cycle of an n x l rectangle. Labels are canonical:
// block ids are assigned in order of first appearance along the cycle.
class BoundaryCondition {
 public:
  BoundaryCondition() = default;
  static BoundaryCondition free(int n, int l);
  static BoundaryCondition wired(int n, int l);
  static BoundaryCondition free(const Lattice& lat) { return free(lat.n(), lat.l()); }
  static BoundaryCondition wired(const Lattice& lat) { return wired(lat.n(), lat.l()); }
  // Positions not listed become singletons.
  static BoundaryCondition from_blocks(int n, int l, const std::vector<std::vector<int>>& blocks);
  static BoundaryCondition from_labels(int n, int l, const std::vector<int>& labels);

  int n() const { return n_; }
  int l() const { return l_; }
  int cycle_length() const { return static_cast<int>(label_.size()); }
  int label(int pos) const { return label_[pos]; }
  const std::vector<int>& labels() const { return label_; }
  int num_blocks() const { return num_blocks_; }
  bool same_block(int a, int b) const { return label_[a] == label_[b]; }
  bool is_free() const { return num_blocks_ == cycle_length(); }
  std::vector<std::vector<int>> blocks() const;
  std::vector<std::vector<int>> nontrivial_blocks() const;
  bool operator==(const BoundaryCondition& o) const {
    return n_ == o.n_ && l_ == o.l_ && label_ == o.label_;
  }

 private:
  int n_ = 0;
  int l_ = 0;
  int num_blocks_ = 0;
  std::vector<int> label_;
};

// JSON: {"n":..,"l":..,"blocks":[[cycle positions],...]}; only non-singletons are written.
std::string bc_to_json(const BoundaryCondition& bc);
BoundaryCondition bc_from_json(const std::string& text);

// Canonical relabelling of an arbitrary label vector.
std::vector<int> canonical_labels(const std::vector<int>& labels);
bool is_noncrossing(const std::vector<int>& labels);
bool is_realizable(const BoundaryCondition& bc);

// Configuration on the padded rectangle minus E(lattice).
struct AnnulusConfig {
  int n = 0;
  int l = 0;
  EdgeSetVariant variant = EdgeSetVariant::full;
  int pad = 0;
  Lattice host;                // full rectangle of size (n+2pad) x (l+2pad)
  std::vector<uint8_t> inner;  // host edge lies in E(lattice)
  std::vector<uint8_t> open;   // host edge state; always 0 on inner edges

  int host_vertex(int x, int y) const { return host.vertex_index(x + pad, y + pad); }
};

AnnulusConfig empty_annulus(int n, int l, EdgeSetVariant variant, int pad);
AnnulusConfig realize(const BoundaryCondition& bc, EdgeSetVariant variant = EdgeSetVariant::full);
BoundaryCondition induce_bc(const AnnulusConfig& ann);
// Nesting depth per block label (0 for singletons).
std::vector<int> nesting_depth(const BoundaryCondition& bc);

// Duality on the modified edge set of lat; the result lives on the dual (n-1)x(l-1) rectangle.
BoundaryCondition dual_bc(const BoundaryCondition& bc, const Lattice& lat);
// Inverse of dual_bc: maps a bc on the dual rectangle back to the primal; corners become singletons.
BoundaryCondition primal_bc(const BoundaryCondition& dual, const Lattice& lat);
BoundaryCondition corners_to_singletons(const BoundaryCondition& bc);

// Dual partition on the gaps between consecutive boundary vertices (full edge set view);
// gap k sits between cycle positions k and k+1.
std::vector<int> dual_gap_partition(const BoundaryCondition& bc);

BoundaryCondition induced_region_bc(const Lattice& lat, const Region& region, const BoundaryCondition& bc,
                                    const FkConfig& outside);

// Smallest cyclic arc (in vertices) containing each block; max over blocks.
int arc_span(const std::vector<int>& labels, int label);
int localization(const std::vector<int>& labels);
int localization(const BoundaryCondition& bc);
bool in_C_alpha(const BoundaryCondition& bc, double alpha);
bool in_C_alpha_star(const BoundaryCondition& bc, double alpha);

BoundaryCondition corner_free_modification(const BoundaryCondition& bc, int ell);

// D(rho, rho') = c(rho) + c(rho') - 2 c(rho v rho').
int partition_distance(const std::vector<int>& a, const std::vector<int>& b);

// Random non-crossing partition of the cycle. density in [0,1] controls how many
// positions join non-singleton blocks.
BoundaryCondition random_realizable(int n, int l, RngStream& rng, double density = 0.5);
// Random non-crossing bc supported on the north side strictly between x_lo and x_hi.
BoundaryCondition random_north_bc(int n, int l, int x_lo, int x_hi, RngStream& rng, double density = 0.5);

inline int north_position(int n, int l, int x) { return 2 * n + l - x; }

}  // namespace fkdyn
