#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "fkdyn/boundary.hpp"
#include "fkdyn/lattice.hpp"
#include "fkdyn/state.hpp"

namespace fkdyn {

inline constexpr int kMaxEnumEdges = 22;
inline constexpr int kMaxMatrixEdges = 12;
inline constexpr int kDenseEigenStates = 1024;
inline constexpr int kExhaustiveCutStates = 16;

// Row-major: rows are filled one state at a time.
using TransitionMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Configurations are indexed by bitmask (bit e = edge e open).
struct ExactChain {
  std::vector<double> pi;
  TransitionMatrix P;
  int num_states() const { return static_cast<int>(pi.size()); }
};

// c(S; xi) for every mask.
std::vector<int> enumerate_components(const Lattice& lat, const BoundaryCondition& bc);
std::vector<double> enumerate_pi(const Lattice& lat, const BoundaryCondition& bc, const Params& prm);
std::vector<double> pi_from_components(const std::vector<int>& comp, int num_edges, const Params& prm);

ExactChain fk_transition_matrix(const Lattice& lat, const BoundaryCondition& bc, const Params& prm);
ExactChain mhb_transition_matrix(const Lattice& lat, const BoundaryCondition& bc, const Region& L,
                                 const Params& prm);
ExactChain block_transition_matrix(const Lattice& lat, const BoundaryCondition& bc,
                                   const std::vector<Region>& blocks, const Params& prm);

double stationarity_error(const ExactChain& chain);  // ||pi P - pi||_inf
double row_sum_error(const ExactChain& chain);
double reversibility_error(const ExactChain& chain);  // max |pi_i P_ij - pi_j P_ji|

struct Spectrum {
  double lambda2 = 0.0;
  double lambda_min = 0.0;
  double gap = 0.0;  // 1 - max(|lambda2|, |lambda_min|)
  bool dense = true;
};

// Dense up to kDenseEigenStates states, sparse Lanczos above.
Spectrum spectrum(const ExactChain& chain);
Spectrum spectrum_iterative(const ExactChain& chain);
double spectral_gap(const ExactChain& chain);
// Right eigenvector for lambda2 (used for sweep cuts).
Eigen::VectorXd second_eigenvector(const ExactChain& chain, double lambda2);

// Smallest t with max_x TV(P^t(x,.), pi) <= eps.
int tv_mixing_time(const ExactChain& chain, double eps = 0.25, int t_cap = 1 << 20);
double worst_tv(const TransitionMatrix& Pt, const std::vector<double>& pi);

double conductance(const ExactChain& chain, const std::vector<char>& in_set);

struct CutResult {
  double phi = 0.0;
  std::vector<char> set;
  bool exhaustive = false;
};

// Exhaustive below kExhaustiveCutStates; otherwise minimum over the candidate
// family plus the spectral sweep cuts (an upper bound on the true minimum).
CutResult min_conductance(const ExactChain& chain, const std::vector<std::vector<char>>& candidates = {});
CutResult sweep_cut(const ExactChain& chain, const Eigen::VectorXd& f);
// {|S| <= k} and {|S| >= k} for every k.
std::vector<std::vector<char>> level_set_family(int num_edges);

}  // namespace fkdyn
