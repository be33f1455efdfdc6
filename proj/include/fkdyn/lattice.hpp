#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

namespace fkdyn {

enum class EdgeSetVariant { full, modified };

struct Vertex {
  int x = 0;
  int y = 0;
  bool operator==(const Vertex&) const = default;
};

// orient 0: (x,y)-(x+1,y); orient 1: (x,y)-(x,y+1). u is always the lower index.
struct Edge {
  int u = 0;
  int v = 0;
  int orient = 0;
};

class Lattice {
 public:
  static Lattice build_rect(int n, int l, EdgeSetVariant variant = EdgeSetVariant::full);

  int n() const { return n_; }
  int l() const { return l_; }
  EdgeSetVariant variant() const { return variant_; }
  int num_vertices() const { return (n_ + 1) * (l_ + 1); }
  int num_edges() const { return static_cast<int>(edges_.size()); }

  int vertex_index(int x, int y) const { return y * (n_ + 1) + x; }
  Vertex vertex(int idx) const { return {idx % (n_ + 1), idx / (n_ + 1)}; }
  bool contains(int x, int y) const { return x >= 0 && y >= 0 && x <= n_ && y <= l_; }

  const Edge& edge(int e) const { return edges_[e]; }
  const std::vector<Edge>& edges() const { return edges_; }
  // -1 when the pair is not an edge of this lattice.
  int edge_index(int u, int v) const;
  int edge_between(Vertex a, Vertex b) const;

  // Incident (neighbor, edge) pairs, CSR layout.
  std::pair<const int*, const int*> incident(int v) const {
    return {&inc_nbr_[inc_start_[v]], &inc_nbr_[inc_start_[v + 1]]};
  }
  const int* incident_edges(int v) const { return &inc_edge_[inc_start_[v]]; }
  int degree(int v) const { return inc_start_[v + 1] - inc_start_[v]; }

  bool on_boundary(int v) const { return cycle_pos_[v] >= 0; }
  const std::vector<int>& boundary_cycle() const { return cycle_; }
  int cycle_length() const { return static_cast<int>(cycle_.size()); }
  // Position of v on the boundary cycle, -1 for interior vertices.
  int cycle_position(int v) const { return cycle_pos_[v]; }

  // Graph distance on Z^2 restricted to the rectangle (L1).
  int distance(int u, int v) const;

 private:
  int n_ = 0;
  int l_ = 0;
  EdgeSetVariant variant_ = EdgeSetVariant::full;
  std::vector<Edge> edges_;
  std::vector<int> east_edge_;   // edge index of (x,y)-(x+1,y) or -1
  std::vector<int> north_edge_;  // edge index of (x,y)-(x,y+1) or -1
  std::vector<int> inc_start_, inc_nbr_, inc_edge_;
  std::vector<int> cycle_;
  std::vector<int> cycle_pos_;
};

std::vector<int> boundary_cycle_of(int n, int l);

struct DualLattice {
  Lattice dual;
  std::vector<int> primal_to_dual;  // primal edge -> dual edge crossing it
  std::vector<int> dual_to_primal;
};

DualLattice dual_lattice(const Lattice& lat);

// Vertex mask with induced edge sets.
class Region {
 public:
  Region() = default;
  Region(const Lattice& lat, std::vector<uint8_t> mask);
  static Region box(const Lattice& lat, int x0, int y0, int x1, int y1);
  static Region all(const Lattice& lat);
  static Region none(const Lattice& lat);

  bool contains(int v) const { return mask_[v] != 0; }
  const std::vector<uint8_t>& mask() const { return mask_; }
  // E(R): edges with both endpoints in R.
  const std::vector<int>& inner_edges() const { return inner_; }
  const std::vector<int>& outer_edges() const { return outer_; }
  bool has_edge(int e) const { return edge_in_[e] != 0; }
  bool empty() const { return count_ == 0; }
  int size() const { return count_; }
  // Bounding box [x0,x1]x[y0,y1] when R is exactly a box.
  bool is_box() const { return is_box_; }
  std::array<int, 4> bbox() const { return bbox_; }

 private:
  std::vector<uint8_t> mask_;
  std::vector<uint8_t> edge_in_;
  std::vector<int> inner_, outer_;
  int count_ = 0;
  bool is_box_ = false;
  std::array<int, 4> bbox_{0, 0, -1, -1};
};

}  // namespace fkdyn
