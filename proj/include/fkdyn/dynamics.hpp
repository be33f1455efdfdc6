#pragma once

#include <cstdint>
#include <vector>

#include "fkdyn/config.hpp"
#include "fkdyn/rng.hpp"
#include "fkdyn/state.hpp"

namespace fkdyn {

// One heat-bath move: edge choice and threshold. Opening happens iff r is below
// the open-probability (p-hat on cut-edges, p otherwise).
struct EdgeUpdate {
  int e = 0;
  double r = 0.0;
};

// Two variates per update: counters 2t and 2t+1 of the stream.
EdgeUpdate update_at(const RngStream& rng, uint64_t t, const std::vector<int>& choices);
EdgeUpdate update_at(const RngStream& rng, uint64_t t, int num_edges);

bool heat_bath_open(Kernel& k, const FkConfig& s, int e, double r, const Params& prm);
void apply_update(Kernel& k, FkConfig& s, const EdgeUpdate& u, const Params& prm);
// Same update on an ordered pair x <= y (q >= 1); one connectivity query when possible.
void apply_coupled(Kernel& k, FkConfig& x, FkConfig& y, const EdgeUpdate& u, const Params& prm);

void glauber_step(Kernel& k, FkConfig& s, const Params& prm, RngStream& rng);
FkConfig glauber_step(const Lattice& lat, const FkConfig& s, const BoundaryCondition& bc, const Params& prm,
                      RngStream& rng);
void identity_coupled_step(Kernel& k, FkConfig& x, FkConfig& y, const Params& prm, RngStream& rng);

struct Checkpoint {
  uint64_t step;
  int size_x;
  int size_y;
};

struct CouplingResult {
  bool coupled = false;
  uint64_t steps = 0;
  std::vector<Checkpoint> trajectory;
};

// Extremal pair X_0 = E, Y_0 = empty; runs until they agree or max_steps.
CouplingResult couple_once(Kernel& k, const Params& prm, uint64_t max_steps, RngStream rng,
                           uint64_t checkpoint_every = 0);

struct CouplingStats {
  std::vector<CouplingResult> runs;
  int censored = 0;
  double median = 0.0;  // censored runs count as max_steps (a lower bound)
  double q25 = 0.0;
  double q75 = 0.0;
  // Smallest T with empirical Pr[not coupled by T] <= 1/4; 0 when undetermined.
  uint64_t t_quarter = 0;
};

CouplingStats coupling_time(const Lattice& lat, const BoundaryCondition& bc, const Params& prm, uint64_t max_steps,
                            int reps, const RngStream& rng, int threads = 1, uint64_t checkpoint_every = 0);

struct CftpOptions {
  int max_doublings = 26;
};

struct CftpStats {
  uint64_t T = 0;
  int epochs = 0;
};

// Exact sample of the edges in `free_edges` conditional on base elsewhere.
// Randomness for time -t is keyed by counters 2(t-1), 2(t-1)+1 of `rng`.
FkConfig cftp_conditional(Kernel& k, const FkConfig& base, const std::vector<int>& free_edges, const Params& prm,
                          const RngStream& rng, const CftpOptions& opt = {}, CftpStats* stats = nullptr);
FkConfig cftp_sample(Kernel& k, const Params& prm, const RngStream& rng, const CftpOptions& opt = {},
                     CftpStats* stats = nullptr);
FkConfig cftp_sample(const Lattice& lat, const BoundaryCondition& bc, const Params& prm, const RngStream& rng);

// Grand-coupled CFTP under several kernels (same lattice, different bcs) with a
// common start time, so outputs are ordered whenever the bcs are.
std::vector<FkConfig> cftp_coupled(const std::vector<Kernel*>& kernels, const FkConfig& base,
                                   const std::vector<int>& free_edges, const Params& prm, const RngStream& rng,
                                   const CftpOptions& opt = {}, CftpStats* stats = nullptr);

std::vector<int> region_edges(const Region& r);
// Edges outside E(L).
std::vector<int> complement_edges(const Lattice& lat, const Region& L);
void validate_cover(const Lattice& lat, const std::vector<Region>& blocks);

void mhb_step(Kernel& k, FkConfig& s, const Region& L, const Params& prm, RngStream& rng);
void block_dynamics_step(Kernel& k, FkConfig& s, const std::vector<Region>& blocks, const Params& prm,
                         RngStream& rng);

struct TraceRow {
  uint64_t step;
  int open;
  int components;
  bool coupled;
};

std::vector<TraceRow> simulate_trace(Kernel& k, FkConfig start, const Params& prm, uint64_t steps, uint64_t every,
                                     RngStream rng);

}  // namespace fkdyn
