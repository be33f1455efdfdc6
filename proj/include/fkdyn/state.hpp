#pragma once

#include <cstdint>
#include <vector>

#include "fkdyn/boundary.hpp"
#include "fkdyn/config.hpp"
#include "fkdyn/lattice.hpp"

namespace fkdyn {

struct Params {
  double p = 0.5;
  double q = 1.0;

  void validate() const;
  // Open probability for a cut-edge under heat-bath.
  double p_hat() const { return p / (q * (1.0 - p) + p); }
  double p_star() const { return q * (1.0 - p) / (q * (1.0 - p) + p); }
};

double critical_p(double q);

// Connectivity engine for a fixed (lattice, bc). Holds scratch buffers, so one
// instance per chain/thread. Queries combine a bidirectional primal search with
// a planar dual search when the bc is non-crossing; whichever finishes first wins.
class Kernel {
 public:
  Kernel(const Lattice& lat, const BoundaryCondition& bc, bool use_dual = true);

  const Lattice& lattice() const { return lat_; }
  const BoundaryCondition& bc() const { return bc_; }
  bool has_dual() const { return has_dual_; }

  // Endpoints of e joined in (S \ {e}) with boundary wirings.
  bool connected_off(const FkConfig& s, int e);
  bool is_cut_edge(const FkConfig& s, int e) { return !connected_off(s, e); }
  bool connected(const FkConfig& s, int u, int v, bool with_bc = true);
  int component_count(const FkConfig& s) const;
  double log_weight(const FkConfig& s, const Params& prm) const;
  // Super-vertex id of a vertex (boundary blocks contracted).
  int block_of(int v) const { return vblock_[v]; }

  // Reference implementation: plain BFS over (S \ {e})^xi, no dual, no bidirectional tricks.
  bool connected_off_naive(const FkConfig& s, int e) const;

 private:
  enum class Step { more, found, exhausted };
  struct Side {
    std::vector<int> queue;
    size_t head = 0;
  };

  bool search(const FkConfig& s, int u, int v, int skip_edge, bool with_bc);
  Step step_primal(const FkConfig& s, Side& side, std::vector<uint32_t>& mine, std::vector<uint32_t>& theirs,
                   std::vector<uint32_t>& blocks_mine, int skip_edge, bool with_bc);
  Step step_dual(const FkConfig& s, int target, int skip_host_edge);
  void bump_stamp();

  Lattice lat_;
  BoundaryCondition bc_;
  std::vector<int> vblock_;  // nontrivial block id or -1
  std::vector<std::vector<int>> block_members_;

  bool has_dual_ = false;
  int host_w_ = 0, host_h_ = 0, outer_face_ = 0;
  Lattice host_;
  std::vector<int> edge_to_host_;
  std::vector<int> host_to_edge_;      // -1 for annulus edges
  std::vector<uint8_t> host_fixed_;    // state of annulus edges
  std::vector<int> face_start_, face_edge_, face_nbr_;

  uint32_t stamp_ = 0;
  std::vector<uint32_t> mark_a_, mark_b_, bmark_a_, bmark_b_, fmark_;
  Side side_a_, side_b_, side_d_;
};

int component_count(const Lattice& lat, const FkConfig& s, const BoundaryCondition& bc);
bool is_cut_edge(const Lattice& lat, const FkConfig& s, const BoundaryCondition& bc, int e);
bool connected(const Lattice& lat, const FkConfig& s, const BoundaryCondition& bc, int u, int v, bool with_bc);
double log_weight(const Lattice& lat, const FkConfig& s, const BoundaryCondition& bc, const Params& prm);

// Complement through the primal/dual edge bijection (modified edge set only).
FkConfig dual_config(const FkConfig& s, const Lattice& lat);
// Inverse direction: configuration on the dual rectangle back to the modified primal.
FkConfig primal_config(const FkConfig& dual, const Lattice& lat);

}  // namespace fkdyn
