#include "fkdyn/exact.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include <Eigen/Sparse>

#include "fkdyn/dsu.hpp"
#include "fkdyn/error.hpp"

namespace fkdyn {

namespace {

void check_cap(const Lattice& lat, int cap) {
  require(lat.num_edges() <= cap, ErrorCode::size_cap,
          "exact enumeration capped at " + std::to_string(cap) + " edges");
}

uint32_t edge_mask_of(const Region& r) {
  uint32_t m = 0;
  for (int e : r.inner_edges()) m |= uint32_t{1} << e;
  return m;
}

// Exact heat-bath open probability for edge e at state x given component counts.
inline double open_prob(const std::vector<int>& comp, uint32_t x, int e, const Params& prm, double phat) {
  const uint32_t up = x | (uint32_t{1} << e), dn = x & ~(uint32_t{1} << e);
  return comp[dn] - comp[up] == 1 ? phat : prm.p;
}

// Conditional resampling of the edges in `free` given the rest of x; adds w * pi(.|rest) to row x.
void add_conditional(TransitionMatrix& P, uint32_t x, uint32_t free, double w, const std::vector<double>& pi,
                     const std::vector<double>& class_mass) {
  const uint32_t base = x & ~free;
  const double z = class_mass[base];
  uint32_t sub = free;
  for (;;) {
    const uint32_t y = base | sub;
    P(x, y) += w * pi[y] / z;
    if (sub == 0) break;
    sub = (sub - 1) & free;
  }
}

std::vector<double> class_masses(const std::vector<double>& pi, uint32_t free) {
  std::vector<double> mass(pi.size(), 0.0);
  for (uint32_t y = 0; y < pi.size(); ++y) mass[y & ~free] += pi[y];
  return mass;
}

Eigen::MatrixXd symmetrized(const ExactChain& chain) {
  const int n = chain.num_states();
  Eigen::VectorXd s(n);
  for (int i = 0; i < n; ++i) s[i] = std::sqrt(chain.pi[i]);
  Eigen::MatrixXd S = s.asDiagonal() * chain.P * s.cwiseInverse().asDiagonal();
  return 0.5 * (S + S.transpose());
}

}  // namespace

std::vector<int> enumerate_components(const Lattice& lat, const BoundaryCondition& bc) {
  check_cap(lat, kMaxEnumEdges);
  const int m = lat.num_edges();
  const uint32_t n = uint32_t{1} << m;
  std::vector<int> comp(n);
  // wirings first, then edges
  DisjointSets base(lat.num_vertices());
  for (const auto& blk : bc.nontrivial_blocks())
    for (size_t i = 1; i < blk.size(); ++i) base.unite(lat.boundary_cycle()[blk[0]], lat.boundary_cycle()[blk[i]]);
  for (uint32_t x = 0; x < n; ++x) {
    DisjointSets d = base;
    for (uint32_t bits = x; bits; bits &= bits - 1) {
      const int e = std::countr_zero(bits);
      d.unite(lat.edge(e).u, lat.edge(e).v);
    }
    comp[x] = d.count();
  }
  return comp;
}

std::vector<double> pi_from_components(const std::vector<int>& comp, int num_edges, const Params& prm) {
  prm.validate();
  const double lp = std::log(prm.p), lq = std::log1p(-prm.p), lc = std::log(prm.q);
  std::vector<double> lw(comp.size());
  for (uint32_t x = 0; x < comp.size(); ++x) {
    const int k = std::popcount(x);
    lw[x] = k * lp + (num_edges - k) * lq + comp[x] * lc;
  }
  const double mx = *std::max_element(lw.begin(), lw.end());
  double z = 0.0;
  for (double v : lw) z += std::exp(v - mx);
  const double lz = mx + std::log(z);
  for (double& v : lw) v = std::exp(v - lz);
  return lw;
}

std::vector<double> enumerate_pi(const Lattice& lat, const BoundaryCondition& bc, const Params& prm) {
  return pi_from_components(enumerate_components(lat, bc), lat.num_edges(), prm);
}

ExactChain fk_transition_matrix(const Lattice& lat, const BoundaryCondition& bc, const Params& prm) {
  check_cap(lat, kMaxMatrixEdges);
  const auto comp = enumerate_components(lat, bc);
  ExactChain ch{pi_from_components(comp, lat.num_edges(), prm), {}};
  const int m = lat.num_edges();
  const int n = 1 << m;
  ch.P = TransitionMatrix::Zero(n, n);
  const double phat = prm.p_hat(), w = 1.0 / m;
  for (uint32_t x = 0; x < static_cast<uint32_t>(n); ++x)
    for (int e = 0; e < m; ++e) {
      const double po = open_prob(comp, x, e, prm, phat);
      ch.P(x, x | (uint32_t{1} << e)) += w * po;
      ch.P(x, x & ~(uint32_t{1} << e)) += w * (1.0 - po);
    }
  return ch;
}

ExactChain mhb_transition_matrix(const Lattice& lat, const BoundaryCondition& bc, const Region& L,
                                 const Params& prm) {
  check_cap(lat, kMaxMatrixEdges);
  const auto comp = enumerate_components(lat, bc);
  ExactChain ch{pi_from_components(comp, lat.num_edges(), prm), {}};
  const int m = lat.num_edges();
  const int n = 1 << m;
  const uint32_t in_l = edge_mask_of(L);
  const uint32_t outside = (uint32_t(n) - 1) & ~in_l;
  const int k_in = std::popcount(in_l);
  ch.P = TransitionMatrix::Zero(n, n);
  const auto mass = class_masses(ch.pi, outside);
  const double phat = prm.p_hat(), w = 1.0 / m;
  for (uint32_t x = 0; x < static_cast<uint32_t>(n); ++x) {
    for (int e = 0; e < m; ++e) {
      if (!((in_l >> e) & 1u)) continue;
      const double po = open_prob(comp, x, e, prm, phat);
      ch.P(x, x | (uint32_t{1} << e)) += w * po;
      ch.P(x, x & ~(uint32_t{1} << e)) += w * (1.0 - po);
    }
    if (k_in < m) add_conditional(ch.P, x, outside, w * (m - k_in), ch.pi, mass);
  }
  return ch;
}

ExactChain block_transition_matrix(const Lattice& lat, const BoundaryCondition& bc,
                                   const std::vector<Region>& blocks, const Params& prm) {
  check_cap(lat, kMaxMatrixEdges);
  require(!blocks.empty(), ErrorCode::invalid_argument, "block dynamics needs at least one block");
  const int m = lat.num_edges();
  const int n = 1 << m;
  uint32_t cover = 0;
  std::vector<uint32_t> masks;
  for (const auto& b : blocks) {
    masks.push_back(edge_mask_of(b));
    cover |= masks.back();
  }
  require(cover == uint32_t(n) - 1, ErrorCode::precondition, "blocks do not cover every edge");
  ExactChain ch{enumerate_pi(lat, bc, prm), TransitionMatrix::Zero(n, n)};
  const double w = 1.0 / static_cast<double>(blocks.size());
  for (uint32_t mask : masks) {
    const auto mass = class_masses(ch.pi, mask);
    for (uint32_t x = 0; x < static_cast<uint32_t>(n); ++x) add_conditional(ch.P, x, mask, w, ch.pi, mass);
  }
  return ch;
}

double stationarity_error(const ExactChain& chain) {
  Eigen::Map<const Eigen::RowVectorXd> pi(chain.pi.data(), chain.num_states());
  Eigen::RowVectorXd r = pi * chain.P - pi;
  return r.cwiseAbs().maxCoeff();
}

double row_sum_error(const ExactChain& chain) {
  return (chain.P.rowwise().sum().array() - 1.0).abs().maxCoeff();
}

double reversibility_error(const ExactChain& chain) {
  const int n = chain.num_states();
  double worst = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      worst = std::max(worst, std::abs(chain.pi[i] * chain.P(i, j) - chain.pi[j] * chain.P(j, i)));
  return worst;
}

namespace {

// Largest eigenvalue of a symmetric operator restricted to the complement of `deflate`.
using SparseRow = Eigen::SparseMatrix<double, Eigen::RowMajor>;

SparseRow sparse_of(const TransitionMatrix& M) { return M.sparseView(0.0, 0.0); }

SparseRow symmetrized_sparse(const ExactChain& chain) {
  const int n = chain.num_states();
  std::vector<Eigen::Triplet<double>> t;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (chain.P(i, j) != 0.0) {
        const double v = 0.5 * std::sqrt(chain.pi[i] / chain.pi[j]) * chain.P(i, j);
        t.emplace_back(i, j, v);
        t.emplace_back(j, i, v);
      }
  SparseRow S(n, n);
  S.setFromTriplets(t.begin(), t.end());
  return S;
}

struct Extremes {
  double top = 0.0;
  double bottom = 0.0;
  Eigen::VectorXd top_vec;
};

// Lanczos with full reorthogonalization on the complement of `deflate`.
Extremes lanczos(const SparseRow& S, const Eigen::VectorXd& deflate, bool want_vec) {
  const int n = static_cast<int>(S.rows());
  const int cap = std::min(n - 1, 1200);
  Eigen::MatrixXd V(n, cap);
  std::vector<double> alpha, beta;
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = std::cos(0.3 + 1.7 * i) + 0.01 * i / n;
  v -= deflate * deflate.dot(v);
  v.normalize();
  V.col(0) = v;
  Extremes out;
  for (int j = 0;; ++j) {
    Eigen::VectorXd w = S * V.col(j);
    alpha.push_back(V.col(j).dot(w));
    for (int pass = 0; pass < 2; ++pass) {
      w -= deflate * deflate.dot(w);
      w -= V.leftCols(j + 1) * (V.leftCols(j + 1).transpose() * w);
    }
    const double b = w.norm();
    const int k = j + 1;
    const bool exhausted = b < 1e-13 || k == cap;
    if (exhausted || (k >= 8 && k % 8 == 0)) {
      Eigen::VectorXd d = Eigen::Map<Eigen::VectorXd>(alpha.data(), k);
      Eigen::VectorXd e = Eigen::VectorXd::Zero(std::max(k - 1, 1));
      for (int i = 0; i + 1 < k; ++i) e[i] = beta[i];
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
      es.computeFromTridiagonal(d, e.head(k - 1), Eigen::ComputeEigenvectors);
      const auto& Y = es.eigenvectors();
      const double r_top = b * std::abs(Y(k - 1, k - 1)), r_bot = b * std::abs(Y(k - 1, 0));
      if (exhausted || (r_top < 1e-11 && r_bot < 1e-11)) {
        require(b < 1e-13 || (r_top < 1e-8 && r_bot < 1e-8), ErrorCode::internal, "Lanczos did not converge");
        out.top = es.eigenvalues()[k - 1];
        out.bottom = es.eigenvalues()[0];
        if (want_vec) out.top_vec = (V.leftCols(k) * Y.col(k - 1)).normalized();
        return out;
      }
    }
    beta.push_back(b);
    V.col(j + 1) = w / b;
  }
}

Eigen::VectorXd sqrt_pi(const ExactChain& chain) {
  Eigen::VectorXd top(chain.num_states());
  for (int i = 0; i < chain.num_states(); ++i) top[i] = std::sqrt(chain.pi[i]);
  return top.normalized();
}

}  // namespace

Spectrum spectrum(const ExactChain& chain) {
  const int n = chain.num_states();
  require(reversibility_error(chain) <= 1e-10, ErrorCode::precondition, "spectral gap needs a reversible chain");
  Spectrum sp;
  if (n == 1) {
    sp.gap = 1.0;
    return sp;
  }
  const Eigen::MatrixXd S = symmetrized(chain);
  if (n <= kDenseEigenStates) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();  // ascending
    sp.lambda2 = ev[n - 2];
    sp.lambda_min = ev[0];
  } else {
    return spectrum_iterative(chain);
  }
  sp.gap = 1.0 - std::max(std::abs(sp.lambda2), std::abs(sp.lambda_min));
  return sp;
}

Spectrum spectrum_iterative(const ExactChain& chain) {
  require(reversibility_error(chain) <= 1e-10, ErrorCode::precondition, "spectral gap needs a reversible chain");
  Spectrum sp;
  sp.dense = false;
  if (chain.num_states() == 1) {
    sp.gap = 1.0;
    return sp;
  }
  const Extremes ex = lanczos(symmetrized_sparse(chain), sqrt_pi(chain), false);
  sp.lambda2 = ex.top;
  sp.lambda_min = ex.bottom;
  sp.gap = 1.0 - std::max(std::abs(sp.lambda2), std::abs(sp.lambda_min));
  return sp;
}

double spectral_gap(const ExactChain& chain) { return spectrum(chain).gap; }

Eigen::VectorXd second_eigenvector(const ExactChain& chain, double lambda2) {
  const int n = chain.num_states();
  if (n > kDenseEigenStates) {
    const Eigen::VectorXd f = lanczos(symmetrized_sparse(chain), sqrt_pi(chain), true).top_vec;
    Eigen::VectorXd right(n);
    for (int i = 0; i < n; ++i) right[i] = f[i] / std::sqrt(chain.pi[i]);
    return right;
  }
  const Eigen::MatrixXd S = symmetrized(chain);
  Eigen::VectorXd top(n), f(n);
  for (int i = 0; i < n; ++i) top[i] = std::sqrt(chain.pi[i]);
  top.normalize();
  // inverse iteration with a slightly shifted target
  Eigen::MatrixXd shifted = S - (lambda2 + 1e-9) * Eigen::MatrixXd::Identity(n, n);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(shifted);
  for (int i = 0; i < n; ++i) f[i] = std::cos(0.3 + 1.7 * i);
  for (int it = 0; it < 6; ++it) {
    f -= top * top.dot(f);
    f = lu.solve(f);
    f.normalize();
  }
  f -= top * top.dot(f);
  Eigen::VectorXd right(n);
  for (int i = 0; i < n; ++i) right[i] = f[i] / std::sqrt(chain.pi[i]);
  return right;
}

double worst_tv(const TransitionMatrix& Pt, const std::vector<double>& pi) {
  Eigen::Map<const Eigen::RowVectorXd> p(pi.data(), static_cast<Eigen::Index>(pi.size()));
  return 0.5 * (Pt.rowwise() - p).cwiseAbs().rowwise().sum().maxCoeff();
}

int tv_mixing_time(const ExactChain& chain, double eps, int t_cap) {
  auto renorm = [](TransitionMatrix& M) {
    Eigen::VectorXd rs = M.rowwise().sum();
    M = rs.cwiseInverse().asDiagonal() * M;
  };
  const int n = chain.num_states();
  if (worst_tv(TransitionMatrix::Identity(n, n), chain.pi) <= eps) return 0;
  const SparseRow sp = sparse_of(chain.P);
  if (sp.nonZeros() * 8 <= int64_t{n} * n) {
    // sparse chains: P^(t+1) = P P^t, one transition at a time
    TransitionMatrix Pt = chain.P, next(n, n);
    for (int t = 1;; ++t) {
      if (worst_tv(Pt, chain.pi) <= eps) return t;
      require(t < t_cap, ErrorCode::size_cap, "mixing time exceeds the cap");
      next.noalias() = sp * Pt;
      Pt.swap(next);
    }
  }
  std::vector<TransitionMatrix> pw{chain.P};  // pw[k] = P^(2^k)
  while (worst_tv(pw.back(), chain.pi) > eps) {
    require((int64_t{1} << pw.size()) <= t_cap, ErrorCode::size_cap, "mixing time exceeds the cap");
    TransitionMatrix sq = pw.back() * pw.back();
    renorm(sq);
    pw.push_back(std::move(sq));
  }
  const int K = static_cast<int>(pw.size()) - 1;
  if (K == 0) return 1;
  // d(2^(K-1)) > eps >= d(2^K); binary search on the remaining bits
  TransitionMatrix cur = pw[K - 1];
  int t = 1 << (K - 1);
  for (int k = K - 2; k >= 0; --k) {
    TransitionMatrix cand = cur * pw[k];
    renorm(cand);
    if (worst_tv(cand, chain.pi) > eps) {
      cur = std::move(cand);
      t += 1 << k;
    }
  }
  return t + 1;
}

double conductance(const ExactChain& chain, const std::vector<char>& in_set) {
  const int n = chain.num_states();
  double mass = 0.0, flow = 0.0;
  for (int i = 0; i < n; ++i) {
    if (!in_set[i]) continue;
    mass += chain.pi[i];
    for (int j = 0; j < n; ++j)
      if (!in_set[j]) flow += chain.pi[i] * chain.P(i, j);
  }
  require(mass > 0.0, ErrorCode::invalid_argument, "conductance of an empty set");
  return flow / mass;
}

CutResult sweep_cut(const ExactChain& chain, const Eigen::VectorXd& f) {
  const int n = chain.num_states();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  CutResult best{std::numeric_limits<double>::infinity(), {}, false};
  for (int dir = 0; dir < 2; ++dir) {
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return dir ? f[a] > f[b] : f[a] < f[b]; });
    std::vector<char> in(n, 0);
    double mass = 0.0, flow = 0.0;
    int best_k = -1;
    double best_phi = std::numeric_limits<double>::infinity();
    for (int k = 0; k < n - 1; ++k) {
      const int x = order[k];
      double out = 0.0, back = 0.0;
      for (int y = 0; y < n; ++y) {
        if (y == x) continue;
        const double w = chain.pi[x] * chain.P(x, y);
        (in[y] ? back : out) += w;
      }
      in[x] = 1;
      mass += chain.pi[x];
      flow += out - back;
      if (mass > 0.5 + 1e-15) break;
      const double phi = flow / mass;
      if (phi < best_phi) {
        best_phi = phi;
        best_k = k;
      }
    }
    if (best_k >= 0 && best_phi < best.phi) {
      best.phi = best_phi;
      best.set.assign(n, 0);
      for (int k = 0; k <= best_k; ++k) best.set[order[k]] = 1;
    }
  }
  return best;
}

std::vector<std::vector<char>> level_set_family(int num_edges) {
  const int n = 1 << num_edges;
  std::vector<std::vector<char>> fam;
  for (int k = 0; k <= num_edges; ++k) {
    std::vector<char> lo(n), hi(n);
    for (int x = 0; x < n; ++x) {
      lo[x] = std::popcount(static_cast<uint32_t>(x)) <= k;
      hi[x] = std::popcount(static_cast<uint32_t>(x)) >= k;
    }
    fam.push_back(std::move(lo));
    fam.push_back(std::move(hi));
  }
  return fam;
}

CutResult min_conductance(const ExactChain& chain, const std::vector<std::vector<char>>& candidates) {
  const int n = chain.num_states();
  CutResult best{std::numeric_limits<double>::infinity(), {}, false};
  auto consider = [&](const std::vector<char>& s) {
    double mass = 0.0;
    int members = 0;
    for (int i = 0; i < n; ++i)
      if (s[i]) {
        mass += chain.pi[i];
        ++members;
      }
    if (members == 0 || members == n) return;
    std::vector<char> use = s;
    if (mass > 0.5) {
      for (auto& c : use) c = !c;
      mass = 1.0 - mass;
      if (mass > 0.5) return;
    }
    const double phi = conductance(chain, use);
    if (phi < best.phi) {
      best.phi = phi;
      best.set = std::move(use);
    }
  };
  if (n <= kExhaustiveCutStates) {
    best.exhaustive = true;
    std::vector<char> s(n);
    for (uint32_t sub = 1; sub + 1 < (uint32_t{1} << n); ++sub) {
      for (int i = 0; i < n; ++i) s[i] = (sub >> i) & 1u;
      consider(s);
    }
    return best;
  }
  for (const auto& c : candidates) consider(c);
  const Spectrum sp = spectrum(chain);
  if (sp.lambda2 < 1.0 - 1e-12) {
    CutResult sw = sweep_cut(chain, second_eigenvector(chain, sp.lambda2));
    if (sw.phi < best.phi) best = std::move(sw);
  }
  return best;
}

}  // namespace fkdyn
