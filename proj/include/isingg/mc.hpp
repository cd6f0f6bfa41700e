#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "isingg/model.hpp"
#include "isingg/rng.hpp"
#include "isingg/stats.hpp"

namespace isingg {

inline constexpr std::uint64_t kMinBudget = 100;
inline constexpr double kDiscardFraction = 0.1;

/// One Markov chain: spins, its private generator, and reusable cluster scratch.
struct ChainState {
  SpinConfiguration spins;
  Xoshiro256 rng;
  std::uint64_t sweep_count = 0;
  std::uint64_t seed = 0;

  ChainState(std::size_t n, std::uint64_t seed_, bool hot_start = true)
      : spins(n), rng(seed_), seed(seed_), cluster_mark(n, 0) {
    if (hot_start)
      for (std::size_t v = 0; v < n; ++v)
        if (rng() >> 63) spins.flip(static_cast<Vertex>(v));
  }

  // Cluster-growth scratch.
  std::vector<std::uint32_t> cluster_mark;
  std::uint32_t cluster_stamp = 0;
  std::vector<Vertex> cluster_stack;
};

inline std::vector<double> bond_probabilities(const Interactions& inter, double beta) {
  std::vector<double> p(inter.class_weights.size());
  for (std::size_t c = 0; c < p.size(); ++c) p[c] = -std::expm1(-2.0 * beta * inter.class_weights[c]);
  return p;
}

/// One Wolff cluster update; returns the size of the flipped cluster.
inline std::size_t wolff_sweep(ChainState& state, const Interactions& inter, double beta, double h = 0.0) {
  if (h != 0.0) throw std::invalid_argument("wolff_sweep: cluster moves require h = 0; use metropolis_sweep");
  const std::size_t n = inter.vertex_count();
  if (n == 0) return 0;
  const auto p = bond_probabilities(inter, beta);
  if (++state.cluster_stamp == 0) {
    std::fill(state.cluster_mark.begin(), state.cluster_mark.end(), 0);
    state.cluster_stamp = 1;
  }
  const auto seed = static_cast<Vertex>(state.rng.below(n));
  const int s = state.spins.spin(seed);
  auto& stack = state.cluster_stack;
  stack.assign(1, seed);
  state.cluster_mark[seed] = state.cluster_stamp;
  std::size_t size = 0;
  while (!stack.empty()) {
    const Vertex v = stack.back();
    stack.pop_back();
    state.spins.flip(v);
    ++size;
    for (const auto& b : inter.bonds[v]) {
      if (state.cluster_mark[b.to] == state.cluster_stamp || state.spins.spin(b.to) != s) continue;
      if (state.rng.uniform() < p[b.cls]) {
        state.cluster_mark[b.to] = state.cluster_stamp;
        stack.push_back(b.to);
      }
    }
  }
  ++state.sweep_count;
  return size;
}

// Wolff sweep units. During burn-in a unit runs clusters until |V| spins have flipped; that stopping
// rule depends on the state and biases measurements, so the measured phase uses a fixed cluster count
// frozen from the burn-in mean cluster size.
class WolffSchedule {
 public:
  void step(ChainState& state, const Interactions& inter, double beta, bool burn_in) {
    const std::size_t n = inter.vertex_count();
    if (burn_in && per_unit_ == 0) {
      std::size_t flipped = 0;
      while (flipped < n) {
        flipped += wolff_sweep(state, inter, beta);
        ++clusters_;
      }
      flips_ += flipped;
      return;
    }
    if (per_unit_ == 0)
      per_unit_ = clusters_ == 0 ? 1
                                 : std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(
                                                                static_cast<double>(n) * clusters_ / flips_)));
    for (std::size_t c = 0; c < per_unit_; ++c) wolff_sweep(state, inter, beta);
  }
  std::size_t clusters_per_unit() const { return per_unit_; }

 private:
  std::size_t per_unit_ = 0;
  std::size_t clusters_ = 0, flips_ = 0;
};

/// |V| random-site Metropolis proposals; clamped sites are never flipped.
inline std::size_t metropolis_sweep(ChainState& state, const Interactions& inter, double beta, double h,
                                    std::span<const std::uint8_t> clamped = {}) {
  const std::size_t n = inter.vertex_count();
  std::size_t accepted = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const auto x = static_cast<Vertex>(state.rng.below(n));
    if (!clamped.empty() && clamped[x]) continue;
    const double de = delta_energy(inter, h, state.spins, x);
    if (de <= 0.0 || state.rng.uniform() < std::exp(-beta * de)) {
      state.spins.flip(x);
      ++accepted;
    }
  }
  ++state.sweep_count;
  return accepted;
}

inline void require_budget(std::uint64_t budget) {
  if (budget < kMinBudget)
    throw std::invalid_argument("monte carlo budget " + std::to_string(budget) + " is below the minimum of " +
                                std::to_string(kMinBudget) + " sweeps");
}

inline std::uint64_t discard_count(std::uint64_t budget) {
  return static_cast<std::uint64_t>(std::ceil(kDiscardFraction * static_cast<double>(budget)));
}

struct PairEstimate {
  Vertex x = 0;
  Vertex y = 0;
  EstimateWithCI fk;    // same-cluster indicator
  EstimateWithCI spin;  // σ_x σ_y
  bool flagged = false;  // an endpoint sits on the generated frontier
};

struct TwoPointRun {
  std::vector<PairEstimate> pairs;
  std::uint64_t seed = 0;
  std::uint64_t sweeps = 0;
  std::string generator = Xoshiro256::kName;
};

namespace detail {

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { reset(); }
  void reset() { std::iota(parent_.begin(), parent_.end(), Vertex{0}); }
  Vertex find(Vertex v) {
    while (parent_[v] != v) {
      parent_[v] = parent_[parent_[v]];
      v = parent_[v];
    }
    return v;
  }
  void unite(Vertex a, Vertex b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a < b) std::swap(a, b);
    parent_[a] = b;
  }

 private:
  std::vector<Vertex> parent_;
};

// One Swendsen–Wang step. `observe` sees the bond clusters and the spins they were built on.
template <typename Observe>
void swendsen_wang_step(ChainState& state, const Interactions& inter, const std::vector<double>& p, UnionFind& uf,
                        std::vector<std::uint8_t>& flip_root, Observe&& observe) {
  const std::size_t n = inter.vertex_count();
  uf.reset();
  for (std::size_t x = 0; x < n; ++x) {
    const auto vx = static_cast<Vertex>(x);
    const int sx = state.spins.spin(vx);
    for (const auto& b : inter.bonds[x]) {
      if (b.to <= vx || state.spins.spin(b.to) != sx) continue;
      if (state.rng.uniform() < p[b.cls]) uf.unite(vx, b.to);
    }
  }
  observe(uf);
  for (std::size_t x = 0; x < n; ++x)
    if (uf.find(static_cast<Vertex>(x)) == static_cast<Vertex>(x)) flip_root[x] = static_cast<std::uint8_t>(state.rng() >> 63);
  for (std::size_t x = 0; x < n; ++x)
    if (flip_root[uf.find(static_cast<Vertex>(x))]) state.spins.flip(static_cast<Vertex>(x));
  ++state.sweep_count;
}

}  // namespace detail

/// Runs `budget` Swendsen–Wang sweeps and calls observe(clusters, spins) on
/// every sweep after the discarded first 10%.
template <typename Observe>
void run_swendsen_wang(const Graph& g, const Couplings& j, double beta, std::uint64_t budget, std::uint64_t seed,
                       Observe&& observe) {
  require_budget(budget);
  const auto inter = resolve(g, j);
  const auto p = bond_probabilities(inter, beta);
  ChainState state(g.vertex_count(), seed);
  detail::UnionFind uf(g.vertex_count());
  std::vector<std::uint8_t> flip_root(g.vertex_count(), 0);
  const std::uint64_t discard = discard_count(budget);
  for (std::uint64_t sweep = 0; sweep < budget; ++sweep) {
    detail::swendsen_wang_step(state, inter, p, uf, flip_root, [&](detail::UnionFind& clusters) {
      if (sweep >= discard) observe(clusters, std::as_const(state.spins));
    });
  }
}

/**
 * Two-point functions at h = 0, free boundary, from Swendsen–Wang sweeps.
 * Per sweep the Fortuin–Kasteleyn estimator records 1[x <-> y] on the bond
 * clusters and the spin estimator records σ_xσ_y; both are binned.
 */
inline TwoPointRun fk_two_point(const Graph& g, const Couplings& j, double beta, std::span<const VertexPair> pairs,
                                std::uint64_t budget, std::uint64_t seed) {
  for (const auto& [x, y] : pairs) {
    require_vertex(g, x);
    require_vertex(g, y);
  }
  std::vector<BinningAccumulator> fk(pairs.size(), BinningAccumulator(0.0, 1.0)),
      spin(pairs.size(), BinningAccumulator(-1.0, 1.0));
  run_swendsen_wang(g, j, beta, budget, seed, [&](detail::UnionFind& clusters, const SpinConfiguration& s) {
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      const auto [x, y] = pairs[k];
      fk[k].add(clusters.find(x) == clusters.find(y) ? 1.0 : 0.0);
      spin[k].add(static_cast<double>(s.spin(x) * s.spin(y)));
    }
  });
  TwoPointRun run;
  run.seed = seed;
  run.sweeps = budget;
  run.pairs.reserve(pairs.size());
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto [x, y] = pairs[k];
    run.pairs.push_back({x, y, fk[k].result("fk"), spin[k].result("sw-spin"), g.frontier[x] || g.frontier[y]});
  }
  return run;
}

/// Spin-product estimates of ⟨σ_xσ_y⟩ measured after each Wolff sweep unit.
inline std::vector<EstimateWithCI> wolff_two_point(const Graph& g, const Couplings& j, double beta,
                                                   std::span<const VertexPair> pairs, std::uint64_t budget,
                                                   std::uint64_t seed) {
  require_budget(budget);
  const auto inter = resolve(g, j);
  ChainState state(g.vertex_count(), seed);
  std::vector<BinningAccumulator> acc(pairs.size(), BinningAccumulator(-1.0, 1.0));
  const std::uint64_t discard = discard_count(budget);
  WolffSchedule schedule;
  for (std::uint64_t sweep = 0; sweep < budget; ++sweep) {
    schedule.step(state, inter, beta, sweep < discard);
    if (sweep < discard) continue;
    for (std::size_t k = 0; k < pairs.size(); ++k)
      acc[k].add(static_cast<double>(state.spins.spin(pairs[k].first) * state.spins.spin(pairs[k].second)));
  }
  std::vector<EstimateWithCI> out;
  for (auto& a : acc) out.push_back(a.result("wolff"));
  return out;
}

/// ⟨σ_x⟩ with the frontier clamped to +1, by Metropolis.
inline EstimateWithCI estimate_magnetization_plus(const Graph& g, const Couplings& j, double beta, Vertex x,
                                                  std::uint64_t budget, std::uint64_t seed) {
  require_budget(budget);
  require_vertex(g, x);
  if (g.frontier[x]) throw std::invalid_argument("estimate_magnetization_plus: vertex is clamped by the boundary");
  const auto inter = resolve(g, j);
  ChainState state(g.vertex_count(), seed, false);
  BinningAccumulator acc(-1.0, 1.0);
  const std::uint64_t discard = discard_count(budget);
  for (std::uint64_t sweep = 0; sweep < budget; ++sweep) {
    metropolis_sweep(state, inter, beta, 0.0, g.frontier);
    if (sweep >= discard) acc.add(state.spins.spin(x));
  }
  return acc.result("metropolis");
}

/// Single-site ⟨σ_x⟩ at field h with free boundary, by Metropolis.
inline EstimateWithCI metropolis_magnetization(const Graph& g, const Couplings& j, double beta, double h, Vertex x,
                                               std::uint64_t budget, std::uint64_t seed) {
  require_budget(budget);
  require_vertex(g, x);
  const auto inter = resolve(g, j);
  ChainState state(g.vertex_count(), seed);
  BinningAccumulator acc(-1.0, 1.0);
  const std::uint64_t discard = discard_count(budget);
  for (std::uint64_t sweep = 0; sweep < budget; ++sweep) {
    metropolis_sweep(state, inter, beta, h);
    if (sweep >= discard) acc.add(state.spins.spin(x));
  }
  return acc.result("metropolis");
}

struct MagnetizationMoments {
  double beta = 0.0;
  std::size_t vertex_count = 0;
  EstimateWithCI m_abs;  // ⟨|m|⟩, m = Σσ/|V|
  EstimateWithCI m2;
  EstimateWithCI m4;
  JackknifeEstimate binder;  // U = 1 − ⟨m⁴⟩ / (3⟨m²⟩²)
  double chi = 0.0;          // |V| ⟨m²⟩
  JackknifeEstimate chi_connected;  // |V| (⟨m²⟩ − ⟨|m|⟩²)
  std::uint64_t seed = 0;
};

/// Magnetization moments from Wolff sweep units (h = 0, free boundary).
inline MagnetizationMoments sample_moments(const Graph& g, const Couplings& j, double beta, std::uint64_t budget,
                                           std::uint64_t seed) {
  require_budget(budget);
  const auto inter = resolve(g, j);
  const double n = static_cast<double>(g.vertex_count());
  ChainState state(g.vertex_count(), seed);
  std::vector<double> m_abs, m2, m4;
  const std::uint64_t discard = discard_count(budget);
  WolffSchedule schedule;
  for (std::uint64_t sweep = 0; sweep < budget; ++sweep) {
    schedule.step(state, inter, beta, sweep < discard);
    if (sweep < discard) continue;
    const double m = static_cast<double>(state.spins.magnetization()) / n;
    m_abs.push_back(std::abs(m));
    m2.push_back(m * m);
    m4.push_back(m * m * m * m);
  }
  MagnetizationMoments out;
  out.beta = beta;
  out.vertex_count = g.vertex_count();
  out.seed = seed;
  out.m_abs = binning_stats(m_abs, "wolff");
  out.m2 = binning_stats(m2, "wolff");
  out.m4 = binning_stats(m4, "wolff");
  out.chi = n * out.m2.mean;
  out.binder = jackknife(m2, m4, [](double a2, double a4) { return a2 > 0 ? 1.0 - a4 / (3.0 * a2 * a2) : 0.0; });
  out.chi_connected = jackknife(m2, m_abs, [n](double a2, double a1) { return n * (a2 - a1 * a1); });
  return out;
}

}  // namespace isingg
