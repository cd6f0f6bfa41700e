#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "isingg/two_point.hpp"

namespace isingg {

/// C2(K) = |K|⁻² Σ_{x,y ∈ K} ⟨σ_xσ_y⟩ over ordered pairs, diagonal included.
struct C2Value {
  double value = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  double std_error = 0.0;
  Provenance provenance = Provenance::Exact;
};

namespace detail {

// C2 of every prefix K_n = {v_0..v_{n-1}} in one Swendsen–Wang run.
inline std::vector<C2Value> c2_prefixes_mc(const Graph& g, const Couplings& j, double beta,
                                           const std::vector<Vertex>& members, std::uint64_t budget,
                                           std::uint64_t seed) {
  const std::size_t m = members.size();
  std::vector<BinningAccumulator> acc(m);
  std::vector<Vertex> roots(m);
  run_swendsen_wang(g, j, beta, budget, seed, [&](detail::UnionFind& clusters, const SpinConfiguration&) {
    for (std::size_t i = 0; i < m; ++i) roots[i] = clusters.find(members[i]);
    double off_diagonal = 0.0;
    for (std::size_t n = 1; n <= m; ++n) {
      for (std::size_t i = 0; i + 1 < n; ++i) off_diagonal += roots[i] == roots[n - 1] ? 2.0 : 0.0;
      const double size = static_cast<double>(n);
      acc[n - 1].add((size + off_diagonal) / (size * size));
    }
  });
  std::vector<C2Value> out;
  for (auto& a : acc) {
    const auto e = a.result("fk");
    out.push_back({e.mean, e.lower95(), e.upper95(), e.std_error, Provenance::MonteCarlo});
  }
  return out;
}

inline std::vector<C2Value> c2_prefixes_exact(const Graph& g, const Couplings& j, double beta,
                                              const std::vector<Vertex>& members, const EngineOptions& opt) {
  std::vector<VertexPair> pairs;
  for (std::size_t a = 0; a < members.size(); ++a)
    for (std::size_t b = a + 1; b < members.size(); ++b) pairs.emplace_back(members[a], members[b]);
  const auto values = two_point(g, j, beta, pairs, opt);
  std::vector<C2Value> out;
  double off_diagonal = 0.0;
  std::size_t k = 0;
  std::vector<std::vector<double>> corr(members.size(), std::vector<double>(members.size(), 1.0));
  for (std::size_t a = 0; a < members.size(); ++a)
    for (std::size_t b = a + 1; b < members.size(); ++b) corr[a][b] = corr[b][a] = values[k++].value;
  for (std::size_t n = 1; n <= members.size(); ++n) {
    for (std::size_t i = 0; i + 1 < n; ++i) off_diagonal += 2.0 * corr[i][n - 1];
    const double size = static_cast<double>(n);
    const double v = (size + off_diagonal) / (size * size);
    out.push_back({v, v, v, 0.0, Provenance::Exact});
  }
  return out;
}

}  // namespace detail

inline C2Value c2_functional(const Graph& g, const Couplings& j, double beta, const VertexSet& k,
                             const EngineOptions& opt = {}) {
  if (k.empty()) throw std::invalid_argument("c2_functional: K must be nonempty");
  for (Vertex v : k) require_vertex(g, v);
  const std::vector<Vertex> members(k.begin(), k.end());
  if (opt.engine == Engine::MonteCarlo)
    return detail::c2_prefixes_mc(g, j, beta, members, opt.budget, opt.seed).back();
  return detail::c2_prefixes_exact(g, j, beta, members, opt).back();
}

/// Witness family K_n = {x_1..x_n} with d(x_1, x_n) = k^n.
struct C2Report {
  int k = 2;
  double c = 0.0;  // min over edges at x_1 of ⟨σσ⟩
  std::vector<Vertex> witnesses;          // x_1..x_N
  std::vector<int> distances;             // d(x_1, x_n); 0 for x_1
  std::vector<TwoPointValue> witness_two_point;  // ⟨σ_{x_1}σ_{x_n}⟩
  std::vector<C2Value> c2;                // C2(K_n), n = 1..N
  double fitted_c = 0.0;                  // least squares C2(K_n) ≈ C / n
  double relative_residual = 0.0;
  Provenance provenance = Provenance::Exact;
};

inline std::pair<double, double> fit_inverse_n(const std::vector<C2Value>& c2) {
  double num = 0, den = 0, norm = 0;
  for (std::size_t i = 0; i < c2.size(); ++i) {
    const double inv = 1.0 / static_cast<double>(i + 1);
    num += c2[i].value * inv;
    den += inv * inv;
    norm += c2[i].value * c2[i].value;
  }
  const double c = num / den;
  double ss = 0;
  for (std::size_t i = 0; i < c2.size(); ++i) {
    const double e = c2[i].value - c / static_cast<double>(i + 1);
    ss += e * e;
  }
  return {c, norm > 0 ? std::sqrt(ss / norm) : 0.0};
}

/**
 * For n = 2..N picks x_n on the sphere of radius k^n around x_1 minimizing
 * ⟨σ_{x_1}σ_y⟩ (lowest id on ties) and evaluates C2 on every prefix K_n.
 * Monte Carlo mode selects witnesses and estimates C2 from two independent
 * chains so the selection does not bias the reported values.
 */
inline C2Report construct_Kn(const Graph& g, const Couplings& j, double beta, Vertex x1, int k, int big_n,
                             const EngineOptions& opt = {}) {
  if (k < 2) throw std::invalid_argument("construct_Kn: k must be >= 2");
  if (big_n < 1) throw std::invalid_argument("construct_Kn: N must be >= 1");
  require_vertex(g, x1);
  const int reach = faithful_radius(g, x1);
  C2Report r;
  r.k = k;
  r.provenance = opt.engine == Engine::MonteCarlo ? Provenance::MonteCarlo : Provenance::Exact;

  std::vector<int> radii{0};
  for (int n = 2; n <= big_n; ++n) {
    const double d = std::pow(static_cast<double>(k), n);
    if (d > reach)
      throw SaturationError("construct_Kn: n=" + std::to_string(n) + " needs distance " +
                            std::to_string(static_cast<long long>(d)) + " but the faithful radius around vertex " +
                            std::to_string(x1) + " is " + std::to_string(reach));
    radii.push_back(static_cast<int>(d));
  }

  const auto dist = bfs_distances(g, x1, radii.back());
  std::vector<Vertex> candidates(g.adjacency[x1].begin(), g.adjacency[x1].end());
  for (std::size_t v = 0; v < dist.size(); ++v)
    if (dist[v] >= 2 && std::find(radii.begin() + 1, radii.end(), dist[v]) != radii.end())
      candidates.push_back(static_cast<Vertex>(v));

  EngineOptions select = opt;
  if (opt.engine == Engine::MonteCarlo) select.seed = derive_seed(opt.seed, "construct_Kn/select");
  const auto values = two_point_from(g, j, beta, x1, candidates, select);

  const std::size_t degree = g.adjacency[x1].size();
  r.c = degree == 0 ? 0.0 : std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < degree; ++i) r.c = std::min(r.c, values[i].value);

  r.witnesses.push_back(x1);
  r.distances.push_back(0);
  r.witness_two_point.push_back({1.0, 1.0, 1.0, 0.0, r.provenance});
  for (std::size_t n = 1; n < radii.size(); ++n) {
    std::size_t best = values.size();
    for (std::size_t i = degree; i < candidates.size(); ++i) {
      if (dist[candidates[i]] != radii[n]) continue;
      if (best == values.size() || values[i].value < values[best].value ||
          (values[i].value == values[best].value && candidates[i] < candidates[best]))
        best = i;
    }
    if (best == values.size())
      throw SaturationError("construct_Kn: sphere of radius " + std::to_string(radii[n]) + " is empty in " + g.id());
    r.witnesses.push_back(candidates[best]);
    r.distances.push_back(radii[n]);
    r.witness_two_point.push_back(values[best]);
  }

  if (opt.engine == Engine::MonteCarlo)
    r.c2 = detail::c2_prefixes_mc(g, j, beta, r.witnesses, opt.budget, derive_seed(opt.seed, "construct_Kn/c2"));
  else
    r.c2 = detail::c2_prefixes_exact(g, j, beta, r.witnesses, opt);
  std::tie(r.fitted_c, r.relative_residual) = fit_inverse_n(r.c2);
  return r;
}

/// Smallest k >= 2 with c >= ρ^k.
inline int suggest_k(double c, double rho) {
  if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("suggest_k: need 0 < rho < 1");
  if (!(c > 0.0)) throw std::invalid_argument("suggest_k: need c > 0");
  int k = 2;
  while (std::pow(rho, k) > c) ++k;
  return k;
}

}  // namespace isingg
