#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "isingg/generators.hpp"
#include "isingg/two_point.hpp"

namespace isingg {

struct KappaEntry {
  int n = 0;
  double value = 0.0;  // exact value, or min of Monte Carlo means
  double lo = 0.0;     // min of lower 95% bounds
  double hi = 0.0;     // min of upper 95% bounds
  Vertex argmin = 0;   // lowest id among minimizers
  std::size_t ball_size = 0;
  double partial_susceptibility = 0.0;  // Σ_{y ∈ Λ_n(x)} ⟨σ_xσ_y⟩
};

/// κ_β(n) = min { ⟨σ_xσ_y⟩ : y ∈ Λ_n(x) } for n = 0..n_max, free boundary.
struct KappaSeries {
  double beta = 0.0;
  Vertex origin = 0;
  Provenance provenance = Provenance::Exact;
  std::vector<KappaEntry> entries;

  int n_max() const { return static_cast<int>(entries.size()) - 1; }
  double operator[](int n) const { return entries.at(n).value; }
};

inline KappaSeries kappa(const Graph& g, const Couplings& j, double beta, Vertex x, int n_max,
                         const EngineOptions& opt = {}) {
  if (n_max < 0) throw std::invalid_argument("kappa: n_max must be >= 0");
  require_unsaturated(g, x, n_max, "kappa");
  const auto dist = bfs_distances(g, x, n_max);
  std::vector<Vertex> targets;
  for (std::size_t v = 0; v < dist.size(); ++v)
    if (dist[v] != kUnreached) targets.push_back(static_cast<Vertex>(v));
  const auto values = two_point_from(g, j, beta, x, targets, opt);

  // Bucket by distance so each κ(n) extends κ(n-1) by one sphere.
  std::vector<std::vector<std::size_t>> layers(n_max + 1);
  for (std::size_t k = 0; k < targets.size(); ++k) layers[dist[targets[k]]].push_back(k);

  KappaSeries s;
  s.beta = beta;
  s.origin = x;
  s.provenance = opt.engine == Engine::MonteCarlo ? Provenance::MonteCarlo : Provenance::Exact;
  KappaEntry cur;
  cur.value = cur.lo = cur.hi = std::numeric_limits<double>::infinity();
  cur.argmin = std::numeric_limits<Vertex>::max();
  for (int n = 0; n <= n_max; ++n) {
    for (std::size_t k : layers[n]) {
      const auto& v = values[k];
      const Vertex y = targets[k];
      if (v.value < cur.value || (v.value == cur.value && y < cur.argmin)) {
        cur.value = v.value;
        cur.argmin = y;
      }
      cur.lo = std::min(cur.lo, v.lo);
      cur.hi = std::min(cur.hi, v.hi);
      cur.partial_susceptibility += v.value;
      ++cur.ball_size;
    }
    cur.n = n;
    if (n == 0) cur.value = cur.lo = cur.hi = 1.0;  // σ_x² = 1
    s.entries.push_back(cur);
  }
  return s;
}

struct SupermultiplicativityViolation {
  int m = 0;
  int n = 0;
  double lhs = 0.0;  // κ(m+n)
  double rhs = 0.0;  // κ(m)κ(n)
  double magnitude = 0.0;
};

struct SupermultiplicativityReport {
  bool advisory = false;  // Monte Carlo input: compared with interval slack
  std::vector<SupermultiplicativityViolation> violations;
  bool passed() const { return violations.empty(); }
};

/// Tests κ(m+n) >= κ(m)κ(n) for all m, n >= 1 with m + n <= n_max. For Monte
/// Carlo series a violation requires hi(m+n) < lo(m)·lo(n).
inline SupermultiplicativityReport check_supermultiplicative(const KappaSeries& s, double tol = 1e-12) {
  SupermultiplicativityReport r;
  r.advisory = s.provenance == Provenance::MonteCarlo;
  const int top = s.n_max();
  for (int m = 1; m <= top; ++m) {
    for (int n = m; m + n <= top; ++n) {
      const auto& a = s.entries[m];
      const auto& b = s.entries[n];
      const auto& c = s.entries[m + n];
      const double lhs = r.advisory ? c.hi : c.value;
      const double rhs = r.advisory ? a.lo * b.lo : a.value * b.value;
      if (lhs < rhs - tol) r.violations.push_back({m, n, lhs, rhs, rhs - lhs});
    }
  }
  return r;
}

struct FeketeReport {
  std::vector<double> roots;        // κ(n)^{1/n}, n = 1..n_max
  std::vector<double> running_sup;
  double sup = 0.0;
  double limit = 0.0;  // tail value κ(n_max)^{1/n_max}
};

inline FeketeReport fekete_limit(std::span<const double> kappa_values) {
  if (kappa_values.size() < 4) throw std::invalid_argument("fekete_limit: need n_max >= 3");
  FeketeReport r;
  double best = 0.0;
  for (std::size_t n = 1; n < kappa_values.size(); ++n) {
    const double root = std::pow(std::max(kappa_values[n], 0.0), 1.0 / static_cast<double>(n));
    best = std::max(best, root);
    r.roots.push_back(root);
    r.running_sup.push_back(best);
  }
  r.sup = best;
  r.limit = r.roots.back();
  return r;
}

inline FeketeReport fekete_limit(const KappaSeries& s) {
  std::vector<double> v;
  for (const auto& e : s.entries) v.push_back(e.value);
  return fekete_limit(v);
}

struct GrowthBoundRecord {
  int n = 0;
  std::size_t ball_size = 0;
  double kappa = 0.0;
  double kappa_times_volume = 0.0;
  double partial_susceptibility = 0.0;
  bool holds = true;  // κ(n)·|Λ_n| <= Σ_{y ∈ Λ_n} ⟨σ_xσ_y⟩
};

struct GrowthBoundReport {
  std::vector<GrowthBoundRecord> records;
  bool all_hold = true;
  // Geometric-tail probe of the partial susceptibility.
  double last_increment_ratio = 0.0;
  bool appears_bounded = false;
  double extrapolated_limit = std::numeric_limits<double>::infinity();
};

inline GrowthBoundReport growth_bound_report(const KappaSeries& s, double tol = 1e-12) {
  GrowthBoundReport r;
  for (const auto& e : s.entries) {
    GrowthBoundRecord rec;
    rec.n = e.n;
    rec.ball_size = e.ball_size;
    rec.kappa = e.value;
    rec.kappa_times_volume = e.value * static_cast<double>(e.ball_size);
    rec.partial_susceptibility = e.partial_susceptibility;
    rec.holds = rec.kappa_times_volume <= rec.partial_susceptibility + tol * std::max(1.0, rec.partial_susceptibility);
    r.all_hold = r.all_hold && rec.holds;
    r.records.push_back(rec);
  }
  const auto& rec = r.records;
  if (rec.size() >= 3) {
    const std::size_t m = rec.size() - 1;
    const double d1 = rec[m].partial_susceptibility - rec[m - 1].partial_susceptibility;
    const double d0 = rec[m - 1].partial_susceptibility - rec[m - 2].partial_susceptibility;
    if (d1 == 0.0) {
      r.last_increment_ratio = 0.0;
      r.appears_bounded = true;
      r.extrapolated_limit = rec[m].partial_susceptibility;
    } else if (d0 > 0.0) {
      r.last_increment_ratio = d1 / d0;
      r.appears_bounded = r.last_increment_ratio < 1.0;
      if (r.appears_bounded)
        r.extrapolated_limit = rec[m].partial_susceptibility + d1 * r.last_increment_ratio / (1.0 - r.last_increment_ratio);
    }
  }
  return r;
}

inline GrowthBoundReport growth_bound_check(const Graph& g, const Couplings& j, double beta, Vertex x, int n_max,
                                            const EngineOptions& opt = {}) {
  return growth_bound_report(kappa(g, j, beta, x, n_max, opt));
}

struct RhoBound {
  std::vector<double> betas;
  std::vector<double> sups;  // sup_n κ_β(n)^{1/n} per β
  double max = 0.0;
};

inline RhoBound rho_bound(const Graph& g, const Couplings& j, Vertex x, std::span<const double> betas, int n_max,
                          const EngineOptions& opt = {}) {
  RhoBound r;
  for (double b : betas) {
    const auto f = fekete_limit(kappa(g, j, b, x, n_max, opt));
    r.betas.push_back(b);
    r.sups.push_back(f.sup);
    r.max = std::max(r.max, f.sup);
  }
  return r;
}

/// A finite volume with the two endpoints of the tracked pair.
struct NestedVolume {
  Graph graph;
  Vertex x = 0;
  Vertex y = 0;
};

/// Odd-sided boxes centred on a common point; the pair is the centre and the
/// vertex `separation` steps along the first axis.
inline std::vector<NestedVolume> nested_boxes(int d, std::span<const int> sides, int separation) {
  std::vector<NestedVolume> out;
  for (int side : sides) {
    if (side % 2 == 0) throw std::invalid_argument("nested_boxes: sides must be odd so centres coincide");
    if (2 * separation >= side + 1) throw std::invalid_argument("nested_boxes: pair does not fit in the box");
    NestedVolume v{build_box(d, side), 0, 0};
    v.x = v.graph.origin;
    v.y = v.graph.origin + separation;
    out.push_back(std::move(v));
  }
  return out;
}

struct MonotonicityViolation {
  bool along_volume = false;
  std::size_t volume = 0;
  std::size_t beta_index = 0;
  double drop = 0.0;
};

struct MonotonicityProfile {
  std::vector<double> betas;
  std::vector<std::vector<double>> values;  // [volume][beta]
  std::vector<MonotonicityViolation> violations;
};

/// ⟨σ_xσ_y⟩ over nested volumes × β grid, checked nondecreasing along both axes.
inline MonotonicityProfile monotonicity_profile(std::span<const NestedVolume> volumes, const Couplings& j,
                                                std::span<const double> betas, double tol = 1e-12,
                                                const ExactOptions& opt = {}) {
  for (std::size_t v = 1; v < volumes.size(); ++v)
    if (volumes[v].graph.vertex_count() <= volumes[v - 1].graph.vertex_count())
      throw std::invalid_argument("monotonicity_profile: volumes must be strictly growing");
  for (std::size_t b = 1; b < betas.size(); ++b)
    if (!(betas[b] > betas[b - 1])) throw std::invalid_argument("monotonicity_profile: β grid must increase");
  MonotonicityProfile p;
  p.betas.assign(betas.begin(), betas.end());
  for (const auto& vol : volumes) {
    std::vector<double> row;
    for (double b : betas) row.push_back(correlation(vol.graph, j, GibbsParams(b), vol.x, vol.y, opt));
    p.values.push_back(std::move(row));
  }
  for (std::size_t v = 0; v < p.values.size(); ++v) {
    for (std::size_t b = 0; b < betas.size(); ++b) {
      if (b > 0 && p.values[v][b] < p.values[v][b - 1] - tol)
        p.violations.push_back({false, v, b, p.values[v][b - 1] - p.values[v][b]});
      if (v > 0 && p.values[v][b] < p.values[v - 1][b] - tol)
        p.violations.push_back({true, v, b, p.values[v - 1][b] - p.values[v][b]});
    }
  }
  return p;
}

}  // namespace isingg
