#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "fkdyn/boundary.hpp"
#include "fkdyn/config.hpp"
#include "fkdyn/lattice.hpp"
#include "fkdyn/rng.hpp"
#include "fkdyn/state.hpp"

namespace fkdyn {

// Inclusive vertex box [x0,x1] x [y0,y1].
using Box = std::array<int, 4>;

// ---------------------------------------------------------------------------
// Block collection near the boundary

struct BrCollection {
  int n = 0;
  int l = 0;
  int r = 0;
  std::array<Box, 4> corners{};  // NE, NW, SE, SW; side 5r
  std::array<Box, 4> strips{};   // N, E, W, S; thickness 2r, offset 3r

  Region corner_region(const Lattice& lat, int i) const;
  Region strip_region(const Lattice& lat, int i) const;
  Region frame(const Lattice& lat) const;  // union of the four strips
};

BrCollection build_Br(const Lattice& lat, int r);

// Distances from an edge are measured from its midpoint (L1) and returned doubled,
// so they stay integral.
int edge_vertex_distance2(const Lattice& lat, int e, int v);
int edge_boundary_distance2(const Lattice& lat, int e);
// Vertices of s off the lattice boundary with a lattice neighbour outside s.
std::vector<int> inner_boundary(const Lattice& lat, const Region& s);
int edge_set_distance2(const Lattice& lat, int e, const std::vector<int>& vertices);

// Square box of side 2r+1 around e (the extra row/column goes north/east unless that
// leaves the lattice), clipped to the lattice.
Box edge_box(const Lattice& lat, int e, int r);

enum class BlockKind { edge_box, frame, corner };
const char* to_string(BlockKind k);

struct BlockChoice {
  BlockKind kind = BlockKind::edge_box;
  int corner = -1;
  Box box{};
};

BlockChoice select_block(const Lattice& lat, const BrCollection& br, int e);
Region block_region(const Lattice& lat, const BrCollection& br, const BlockChoice& c);

struct BrAudit {
  int edges = 0;
  int violations = 0;
  std::array<int, 3> by_kind{};  // edge_box, frame, corner
  int min_distance2 = 0;
};

// Every edge gets a block and sits at distance >= r from its inner boundary.
BrAudit audit_Br(const Lattice& lat, const BrCollection& br);

// ---------------------------------------------------------------------------
// Spatial mixing estimates

struct MsmOptions {
  int samples = 10000;
  bool rao_blackwell = true;
  int threads = 1;
};

struct MsmEstimate {
  double delta = 0.0;       // |p_wired - p_free|
  double difference = 0.0;  // p_wired - p_free
  double half_width = 0.0;  // 95% CI half-width of the difference
  double p_wired = 0.0;
  double p_free = 0.0;
  int samples = 0;
};

// Edge marginal of e under all-open vs all-closed configuration outside the box
// block, sampled by grand-coupled CFTP on the box with the induced bcs.
MsmEstimate msm_delta(const Lattice& lat, const BoundaryCondition& bc, const Region& block, int e,
                      const Params& prm, const RngStream& rng, const MsmOptions& opt = {});
// Cross-check: time averages of two Glauber chains on the box.
MsmEstimate msm_delta_chains(const Lattice& lat, const BoundaryCondition& bc, const Region& block, int e,
                             const Params& prm, const RngStream& rng, uint64_t burn_in, uint64_t steps);

struct VertexPair {
  int u = 0;
  int v = 0;
};

// Horizontal pairs at distance 1..max_distance along every row at least `margin`
// away from the boundary.
std::vector<VertexPair> row_pairs(const Lattice& lat, int max_distance, int margin);

struct EdcOptions {
  int samples = 2000;
  bool dual = false;   // connections in the dual configuration (modified lattice)
  bool use_bc = false;
  int threads = 1;
};

struct EdcPoint {
  int distance = 0;
  uint64_t trials = 0;
  uint64_t connected = 0;
  double prob = 0.0;
};

struct EdcFit {
  std::vector<EdcPoint> points;
  double c = 0.0;  // fitted decay rate of log P(u <-> v) in d
  double c_ci95 = 0.0;
  // Rate positive at 95% and the fitted profile drops by at least half over the range.
  bool decays = false;
};

EdcFit fit_decay(const std::vector<EdcPoint>& points);
EdcFit edc_estimate(const Lattice& lat, const BoundaryCondition& bc, const Params& prm,
                    const std::vector<VertexPair>& pairs, const RngStream& rng, const EdcOptions& opt = {});

// ---------------------------------------------------------------------------
// Frame unfolding

struct UnfoldResult {
  Lattice q;
  BoundaryCondition xi;
  std::vector<int> wired_columns;                 // x positions of the glued columns
  std::vector<std::vector<int>> vertex_preimage;  // per Q vertex, lattice vertices
  std::vector<std::vector<int>> edge_preimage;    // per Q edge, lattice edges
  int frame_edges = 0;
  int q_edges = 0;
  int duplicated_edges = 0;
  bool audit_ok = false;
};

bool corner_free(const BoundaryCondition& bc, int dist);
// Wired exterior case: W, S and E sides of Q wired, lattice bc carried on the top.
UnfoldResult unfold_frame(const Lattice& lat, int r, const BoundaryCondition& bc);

// ---------------------------------------------------------------------------
// Graph embeddings and bottlenecks

struct SourceGraph {
  int num_vertices = 0;
  std::vector<std::pair<int, int>> edges;

  static SourceGraph complete(int k);
  static SourceGraph path(int k);  // k vertices
};

struct EmbeddedGraph {
  SourceGraph graph;
  int n = 0;
  int l = 0;
  int stride = 4;
  std::vector<int> l_vertices;  // lattice vertex ids of L, in x order
  std::vector<int> phi;         // graph vertex per entry of l_vertices
  std::vector<int> l_edges;     // lattice edge carrying graph edge i
  BoundaryCondition bc;

  Region region(const Lattice& lat) const;
};

// Graph edge i sits on the top edge (stride*i, l)-(stride*i+1, l). stride 4 is the
// standard layout; stride 2 packs small graphs into tiny lattices.
EmbeddedGraph embed_graph(const SourceGraph& g, int n, int l = -1, int stride = 4);

// Number of bc blocks joined to another block by open edges outside E(L).
int count_external_connections(const Lattice& lat, const EmbeddedGraph& emb, const FkConfig& s);
inline bool in_R(const Lattice& lat, const EmbeddedGraph& emb, const FkConfig& s, int M) {
  return count_external_connections(lat, emb, s) <= M;
}

uint64_t graph_config(const EmbeddedGraph& emb, const FkConfig& s);
int largest_component(const SourceGraph& g, uint64_t mask);

struct BottleneckSpec {
  int threshold = 0;
  bool at_most = true;  // S* = {largest <= threshold}, else {largest > threshold}
  int M = 0;
};

bool in_S_star(const SourceGraph& g, const BottleneckSpec& b, uint64_t mask);
bool in_A_M(const Lattice& lat, const EmbeddedGraph& emb, const BottleneckSpec& b, const FkConfig& s);

// Exhaustive FK model on a small graph.
struct GraphFk {
  SourceGraph graph;
  std::vector<uint8_t> comp;
  std::vector<uint8_t> largest;
};

GraphFk enumerate_graph(const SourceGraph& g);
std::vector<double> graph_pi(const GraphFk& g, const Params& prm);
// Index s-1 holds Pr[largest component = s].
std::vector<double> largest_histogram(const GraphFk& g, const std::vector<double>& pi);
double graph_conductance(const GraphFk& g, const std::vector<double>& pi, const Params& prm,
                         const std::vector<char>& in_set);

// Exact MHB edge-measure ratio Q(A, A^c) / pi(A) by enumeration (no transition matrix).
double mhb_conductance(const Lattice& lat, const BoundaryCondition& bc, const Region& L, const Params& prm,
                       const std::vector<char>& in_set);

// ---------------------------------------------------------------------------
// Slow mixing pipeline

// Two maxima separated by an antimode at least rel_depth below both.
bool is_bimodal(const std::vector<double>& hist, double rel_depth, int* antimode = nullptr);

struct WindowScan {
  std::vector<double> lambdas;
  std::vector<std::vector<double>> hist;
  std::vector<char> bimodal;
  bool found = false;
  double lo = 0.0;
  double hi = 0.0;
  double mid = 0.0;
};

WindowScan scan_window(const GraphFk& g, double q, double lam_lo, double lam_hi, double step, double rel_depth);

struct SlowmixOptions {
  int reps = 50;
  int threads = 1;
  double lam_lo = 0.5;
  double lam_step = 0.02;
  double rel_depth = 0.02;
  uint64_t max_steps_free = 1ull << 34;
  double slowdown_target = 100.0;
  bool run_coupling = true;
  int tiny_n = 3;  // free-bc comparison chain on the tiny_n x tiny_l rectangle
  int tiny_l = 1;
};

struct SlowmixReport {
  bool inconclusive = true;
  WindowScan scan;
  double lambda = 0.0;
  double p = 0.0;
  double q = 0.0;
  int ell = 0;
  int n = 0;

  // (a) bottleneck on the source graph vs a small free-bc lattice chain
  int antimode = 0;
  BottleneckSpec cut;
  double cut_mass = 0.0;
  double phi_cut = 0.0;
  int best_threshold = 0;
  double best_phi_cut = 0.0;
  double tiny_gap = 0.0;
  double tiny_phi_lower = 0.0;  // gap/2 <= Phi_*
  double tiny_phi_upper = 0.0;  // best candidate cut >= Phi_*
  double ratio_a = 0.0;         // tiny_phi_lower / best_phi_cut
  bool pass_a = false;

  // (b) coupling times on the lattice
  double median_free = 0.0;
  double median_embedded = 0.0;
  int censored_free = 0;
  int censored_embedded = 0;
  uint64_t cap_embedded = 0;
  double ratio_b = 0.0;
  bool pass_b = false;

  // (c) bottleneck set on a tiny embedded instance
  double am_phi = 0.0;
  double am_phi_complement = 0.0;
  double am_mass = 0.0;
};

SlowmixReport slowmix_pipeline(double q, int ell, int n, const RngStream& rng, const SlowmixOptions& opt = {});

struct TinyBottleneck {
  double phi = 0.0;
  double phi_complement = 0.0;
  double mass = 0.0;
};

// K_3 packed with stride 2 on the 5x1 rectangle (16 edges), S* = {largest <= threshold}.
TinyBottleneck tiny_am_conductance(const Params& prm, int threshold, int M);

// ---------------------------------------------------------------------------
// Typical boundary conditions

// Exact sample on the (n+2pad)-box with free bc, restricted to the annulus, induced on Lambda_n.
BoundaryCondition typical_sample(int n, int pad, const Params& prm, const RngStream& rng);

struct TypicalityRate {
  int samples = 0;
  int in_class = 0;       // C_alpha
  int in_class_star = 0;  // C_alpha star
  double rate = 0.0;
  double rate_star = 0.0;
  double rate_lo = 0.0;  // 95% Wilson bounds
  double rate_star_lo = 0.0;
};

// Sample i uses rng.split(i).
std::vector<BoundaryCondition> typical_samples(int n, int pad, const Params& prm, int reps, const RngStream& rng,
                                               int threads = 1);
TypicalityRate typicality_rate(const std::vector<BoundaryCondition>& bcs, double alpha);
TypicalityRate typicality_rate(int n, int pad, const Params& prm, double alpha, int reps, const RngStream& rng,
                               int threads = 1);

}  // namespace fkdyn
