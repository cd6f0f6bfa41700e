#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "isingg/family.hpp"
#include "isingg/mc.hpp"
#include "isingg/parallel.hpp"

namespace isingg {

/// β at which (degree − 1)·tanh(βJ) = 1, by bisection to machine precision.
inline double tree_threshold(int degree, double j = 1.0) {
  if (degree < 3) throw std::invalid_argument("tree_threshold: degree must be >= 3");
  if (!(j > 0.0)) throw std::invalid_argument("tree_threshold: J must be > 0");
  auto f = [&](double b) { return (degree - 1) * std::tanh(b * j) - 1.0; };
  double lo = 0.0, hi = 1.0;
  while (f(hi) < 0.0) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

inline std::string sweep_task_key(const Graph& g, double beta, int replica = 0) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", beta);
  return g.id() + "|beta=" + buf + "|replica=" + std::to_string(replica);
}

struct SweepPoint {
  int size = 0;
  MagnetizationMoments moments;
};

/// Wolff moments on every (size, β) cell, seeded per cell from the master seed.
/// Rows are ordered by size then β regardless of `jobs`.
inline std::vector<SweepPoint> moment_sweep(const FamilySpec& family, std::span<const int> sizes,
                                            std::span<const double> betas, const Couplings& j, std::uint64_t budget,
                                            std::uint64_t master_seed, std::size_t jobs = 1) {
  std::vector<Graph> graphs;
  for (int s : sizes) graphs.push_back(build_family(family, s));
  const std::size_t cells = sizes.size() * betas.size();
  return parallel_map(cells, jobs, [&](std::size_t idx) {
    const std::size_t si = idx / betas.size(), bi = idx % betas.size();
    const auto& g = graphs[si];
    const auto seed = derive_seed(master_seed, sweep_task_key(g, betas[bi]));
    return SweepPoint{sizes[si], sample_moments(g, j, betas[bi], budget, seed)};
  });
}

struct BinderCrossing {
  int size_small = 0;
  int size_large = 0;
  double beta = 0.0;
};

/// Crossing of U_large − U_small from negative to positive, by linear
/// interpolation; the steepest sign change wins when noise adds spurious ones.
inline std::optional<double> binder_crossing(std::span<const double> betas, std::span<const double> u_small,
                                             std::span<const double> u_large) {
  std::optional<double> best;
  double steepest = 0.0;
  for (std::size_t i = 0; i + 1 < betas.size(); ++i) {
    const double d0 = u_large[i] - u_small[i];
    const double d1 = u_large[i + 1] - u_small[i + 1];
    if (!(d0 < 0.0 && d1 >= 0.0)) continue;
    const double rise = d1 - d0;
    if (rise > steepest) {
      steepest = rise;
      best = betas[i] + (betas[i + 1] - betas[i]) * (-d0) / rise;
    }
  }
  return best;
}

struct PseudoCritical {
  int size = 0;
  double beta = 0.0;  // grid point maximizing the connected susceptibility
  double chi_connected = 0.0;
};

struct BetaCEstimate {
  std::string method;  // "binder", "chi-peak" or "tree-recursion"
  double estimate = 0.0;
  double uncertainty = 0.0;
  std::vector<int> sizes;
  std::vector<double> betas;
  std::vector<SweepPoint> table;  // size-major
  std::vector<BinderCrossing> crossings;
  std::vector<PseudoCritical> peaks;
  std::optional<double> tree_oracle;
};

inline std::vector<PseudoCritical> susceptibility_peaks(std::span<const SweepPoint> table, std::span<const int> sizes,
                                                        std::size_t n_betas) {
  std::vector<PseudoCritical> out;
  for (std::size_t si = 0; si < sizes.size(); ++si) {
    PseudoCritical p{sizes[si], 0.0, -1.0};
    for (std::size_t bi = 0; bi < n_betas; ++bi) {
      const auto& m = table[si * n_betas + bi].moments;
      if (m.chi_connected.value > p.chi_connected) p = {sizes[si], m.beta, m.chi_connected.value};
    }
    out.push_back(p);
  }
  return out;
}

inline std::vector<BinderCrossing> binder_crossings(std::span<const SweepPoint> table, std::span<const int> sizes,
                                                    std::span<const double> betas) {
  std::vector<BinderCrossing> out;
  const std::size_t nb = betas.size();
  for (std::size_t si = 0; si + 1 < sizes.size(); ++si) {
    std::vector<double> us, ul;
    for (std::size_t bi = 0; bi < nb; ++bi) {
      us.push_back(table[si * nb + bi].moments.binder.value);
      ul.push_back(table[(si + 1) * nb + bi].moments.binder.value);
    }
    if (const auto c = binder_crossing(betas, us, ul)) out.push_back({sizes[si], sizes[si + 1], *c});
  }
  return out;
}

/**
 * Critical point estimate for a family over increasing sizes.
 *
 * Lattices (torus, box) use Binder-cumulant crossings of consecutive sizes,
 * and throw AdvisoryFailure if no pair crosses on the grid. Trees report the
 * recursion threshold as the estimate (crossings, if any, are kept for
 * comparison). Lamplighter balls have no reliable crossing, so the estimate
 * is the connected-susceptibility peak of the largest ball, uncertain to one
 * grid step.
 */
inline BetaCEstimate estimate_beta_c(const FamilySpec& family, std::span<const int> sizes_in,
                                     std::span<const double> betas, const Couplings& j, std::uint64_t budget,
                                     std::uint64_t master_seed, std::size_t jobs = 1) {
  if (sizes_in.size() < 3) throw std::invalid_argument("estimate_beta_c: need at least 3 sizes");
  if (betas.size() < 5) throw std::invalid_argument("estimate_beta_c: need at least 5 grid points");
  for (std::size_t i = 1; i < betas.size(); ++i)
    if (!(betas[i] > betas[i - 1])) throw std::invalid_argument("estimate_beta_c: β grid must increase");
  std::vector<int> sizes(sizes_in.begin(), sizes_in.end());
  std::sort(sizes.begin(), sizes.end());

  BetaCEstimate r;
  r.sizes = sizes;
  r.betas.assign(betas.begin(), betas.end());
  r.table = moment_sweep(family, sizes, betas, j, budget, master_seed, jobs);
  r.crossings = binder_crossings(r.table, sizes, betas);
  r.peaks = susceptibility_peaks(r.table, sizes, betas.size());

  double spacing = betas[1] - betas[0];
  for (std::size_t i = 2; i < betas.size(); ++i) spacing = std::max(spacing, betas[i] - betas[i - 1]);

  if (family.name == "tree" && j.nearest_neighbor_only()) {
    r.tree_oracle = tree_threshold(family.degree, j.values().begin()->second);
    r.method = "tree-recursion";
    r.estimate = *r.tree_oracle;
    r.uncertainty = 0.0;
    return r;
  }
  if (family.name == "lamplighter") {
    r.method = "chi-peak";
    r.estimate = r.peaks.back().beta;
    r.uncertainty = spacing;
    return r;
  }
  if (r.crossings.empty())
    throw AdvisoryFailure("estimate_beta_c: no Binder crossing on the grid [" + std::to_string(betas.front()) + ", " +
                          std::to_string(betas.back()) + "]");
  double lo = r.crossings.front().beta, hi = lo, sum = 0.0;
  for (const auto& c : r.crossings) {
    lo = std::min(lo, c.beta);
    hi = std::max(hi, c.beta);
    sum += c.beta;
  }
  r.method = "binder";
  r.estimate = sum / static_cast<double>(r.crossings.size());
  r.uncertainty = std::max(0.5 * spacing, 0.5 * (hi - lo));
  return r;
}

}  // namespace isingg
