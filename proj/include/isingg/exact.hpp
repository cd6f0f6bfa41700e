#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "isingg/model.hpp"

namespace isingg {

inline constexpr std::size_t kDefaultEnumerationCap = 24;

struct ExactOptions {
  std::size_t cap = kDefaultEnumerationCap;
};

struct Observables {
  std::vector<VertexPair> pairs;
  std::vector<Vertex> sites;
};

struct ExactResult {
  double log_z = 0.0;
  std::vector<VertexPair> pairs;
  std::vector<double> pair_values;
  std::vector<Vertex> sites;
  std::vector<double> site_values;

  double pair(Vertex x, Vertex y) const {
    for (std::size_t k = 0; k < pairs.size(); ++k)
      if ((pairs[k].first == x && pairs[k].second == y) || (pairs[k].first == y && pairs[k].second == x))
        return pair_values[k];
    throw std::out_of_range("exact result: pair not requested");
  }
  double site(Vertex x) const {
    for (std::size_t k = 0; k < sites.size(); ++k)
      if (sites[k] == x) return site_values[k];
    throw std::out_of_range("exact result: site not requested");
  }
};

// Vertices clamped to +1 under the given boundary condition.
inline std::vector<std::uint8_t> clamped_vertices(const Graph& g, const GibbsParams& p) {
  if (std::holds_alternative<FieldSequence>(p.bc))
    throw std::invalid_argument("field-sequence boundary is evaluated per field; use plus_limit_magnetization");
  if (p.plus_fixed()) return g.frontier;
  return std::vector<std::uint8_t>(g.vertex_count(), 0);
}

/**
 * Exact Gibbs expectations by a Gray-code walk over the free spins.
 *
 * Each step flips one spin and updates, per coupling class, the integer count
 * of unsatisfied bonds, so the energy of every state is formed from exact
 * integers rather than accumulated floating increments. Weights are summed in
 * log space with a running max shift. With h = 0 and no clamped spins the walk
 * fixes one spin and doubles Z; single-site expectations are then exactly 0.
 */
inline ExactResult enumerate(const Graph& g, const Couplings& j, const GibbsParams& params, const Observables& obs,
                             const ExactOptions& opt = {}) {
  const auto clamped = clamped_vertices(g, params);
  const auto inter = resolve(g, j);
  const std::size_t n = g.vertex_count();
  for (const auto& [x, y] : obs.pairs) {
    require_vertex(g, x);
    require_vertex(g, y);
  }
  for (Vertex x : obs.sites) require_vertex(g, x);

  std::vector<Vertex> free;
  bool any_clamped = false;
  for (std::size_t v = 0; v < n; ++v) {
    if (clamped[v])
      any_clamped = true;
    else
      free.push_back(static_cast<Vertex>(v));
  }
  if (free.size() > opt.cap)
    throw CapError("enumerate: " + std::to_string(free.size()) + " free spins exceed the cap of " +
                   std::to_string(opt.cap) + " on " + g.id());

  const bool symmetric = params.h == 0.0 && !any_clamped && !free.empty();
  const std::size_t walk_bits = symmetric ? free.size() - 1 : free.size();
  const double beta = params.beta;
  const double h = params.h;

  const std::size_t classes = inter.class_weights.size();
  std::vector<long> unsatisfied(classes, 0);
  long magnetization = static_cast<long>(n);
  std::vector<int> spin(n, 1);

  auto log_weight = [&] {
    double e = h * static_cast<double>(magnetization);
    for (std::size_t c = 0; c < classes; ++c)
      e += inter.class_weights[c] *
           static_cast<double>(static_cast<long>(inter.class_pair_counts[c]) - 2 * unsatisfied[c]);
    return beta * e;
  };

  ExactResult r;
  r.pairs = obs.pairs;
  r.sites = obs.sites;
  std::vector<Vertex> pa, pb;
  std::vector<std::size_t> pair_slot;
  for (std::size_t k = 0; k < obs.pairs.size(); ++k) {
    if (obs.pairs[k].first == obs.pairs[k].second) continue;
    pa.push_back(obs.pairs[k].first);
    pb.push_back(obs.pairs[k].second);
    pair_slot.push_back(k);
  }
  // Extended-precision sums: 2^24 terms accumulated in double drift by ~1e-11.
  std::vector<long double> pair_acc(pa.size(), 0.0L);
  std::vector<long double> site_acc(obs.sites.size(), 0.0L);

  double shift = log_weight();
  long double z = 0.0L;
  auto accumulate = [&](double lw) {
    if (lw > shift) {
      const long double scale = std::exp(static_cast<long double>(shift) - lw);
      z *= scale;
      for (auto& a : pair_acc) a *= scale;
      for (auto& a : site_acc) a *= scale;
      shift = lw;
    }
    const long double w = std::exp(static_cast<long double>(lw) - shift);
    z += w;
    for (std::size_t k = 0; k < pa.size(); ++k) pair_acc[k] += spin[pa[k]] == spin[pb[k]] ? w : -w;
    for (std::size_t k = 0; k < site_acc.size(); ++k) site_acc[k] += spin[obs.sites[k]] * w;
  };

  accumulate(shift);
  const std::uint64_t states = std::uint64_t{1} << walk_bits;
  for (std::uint64_t i = 1; i < states; ++i) {
    const Vertex v = free[std::countr_zero(i)];
    const int sv = spin[v];
    for (const auto& b : inter.bonds[v]) unsatisfied[b.cls] += spin[b.to] == sv ? 1 : -1;
    spin[v] = -sv;
    magnetization -= 2 * sv;
    accumulate(log_weight());
  }

  r.log_z = shift + static_cast<double>(std::log(z)) + (symmetric ? std::log(2.0) : 0.0);
  r.pair_values.assign(obs.pairs.size(), 1.0);
  for (std::size_t k = 0; k < pa.size(); ++k) r.pair_values[pair_slot[k]] = static_cast<double>(pair_acc[k] / z);
  r.site_values.resize(obs.sites.size());
  for (std::size_t k = 0; k < obs.sites.size(); ++k) {
    if (symmetric)
      r.site_values[k] = 0.0;
    else if (clamped[obs.sites[k]])
      r.site_values[k] = 1.0;
    else
      r.site_values[k] = static_cast<double>(site_acc[k] / z);
  }
  return r;
}

inline double correlation(const Graph& g, const Couplings& j, const GibbsParams& params, Vertex x, Vertex y,
                          const ExactOptions& opt = {}) {
  require_vertex(g, x);
  require_vertex(g, y);
  if (x == y) return 1.0;
  return enumerate(g, j, params, Observables{{{x, y}}, {}}, opt).pair_values[0];
}

/// Two-point functions from x to every vertex in `targets`, in one enumeration.
inline std::vector<double> correlations_from(const Graph& g, const Couplings& j, const GibbsParams& params, Vertex x,
                                             const std::vector<Vertex>& targets, const ExactOptions& opt = {}) {
  Observables obs;
  for (Vertex y : targets) obs.pairs.emplace_back(x, y);
  return enumerate(g, j, params, obs, opt).pair_values;
}

/// Full matrix of ⟨σ_xσ_y⟩ (row-major, n × n).
inline std::vector<double> correlation_matrix(const Graph& g, const Couplings& j, const GibbsParams& params,
                                              const ExactOptions& opt = {}) {
  const auto n = static_cast<Vertex>(g.vertex_count());
  Observables obs;
  for (Vertex x = 0; x < n; ++x)
    for (Vertex y = x + 1; y < n; ++y) obs.pairs.emplace_back(x, y);
  const auto res = enumerate(g, j, params, obs, opt);
  std::vector<double> m(static_cast<std::size_t>(n) * n, 1.0);
  for (std::size_t k = 0; k < obs.pairs.size(); ++k) {
    const auto [x, y] = obs.pairs[k];
    m[static_cast<std::size_t>(x) * n + y] = m[static_cast<std::size_t>(y) * n + x] = res.pair_values[k];
  }
  return m;
}

inline double magnetization(const Graph& g, const Couplings& j, const GibbsParams& params, Vertex x,
                            const ExactOptions& opt = {}) {
  require_vertex(g, x);
  if (params.plus_fixed() && g.frontier[x])
    throw std::invalid_argument("magnetization: vertex " + std::to_string(x) + " is clamped by the plus boundary");
  return enumerate(g, j, params, Observables{{}, {x}}, opt).site_values[0];
}

inline bool is_forest(const Graph& g) {
  std::vector<int> seen(g.vertex_count(), 0);
  std::size_t components = 0;
  for (std::size_t v = 0; v < g.vertex_count(); ++v) {
    if (seen[v]) continue;
    ++components;
    std::vector<Vertex> stack{static_cast<Vertex>(v)};
    seen[v] = 1;
    while (!stack.empty()) {
      const Vertex u = stack.back();
      stack.pop_back();
      for (Vertex w : g.adjacency[u])
        if (!seen[w]) {
          seen[w] = 1;
          stack.push_back(w);
        }
    }
  }
  return g.edge_count() + components == g.vertex_count();
}

/// On an acyclic graph with free boundary and h = 0,
/// ⟨σ_xσ_y⟩ = ∏ tanh(βJ_e) over the unique x–y path (0 across components).
inline std::vector<double> tree_correlations_from(const Graph& g, const Couplings& j, const GibbsParams& params,
                                                  Vertex x) {
  require_vertex(g, x);
  if (!params.free()) throw std::invalid_argument("tree_correlation: requires the free boundary condition");
  if (params.h != 0.0) throw std::invalid_argument("tree_correlation: requires h = 0");
  if (!j.nearest_neighbor_only()) throw std::invalid_argument("tree_correlation: couplings must be nearest-neighbor");
  if (!is_forest(g)) throw std::invalid_argument("tree_correlation: graph " + g.id() + " has a cycle");
  const auto inter = resolve(g, j);
  std::vector<double> value(g.vertex_count(), 0.0);
  std::vector<std::uint8_t> seen(g.vertex_count(), 0);
  std::vector<Vertex> stack{x};
  value[x] = 1.0;
  seen[x] = 1;
  while (!stack.empty()) {
    const Vertex u = stack.back();
    stack.pop_back();
    for (const auto& b : inter.bonds[u]) {
      if (seen[b.to]) continue;
      seen[b.to] = 1;
      value[b.to] = value[u] * std::tanh(params.beta * b.weight);
      stack.push_back(b.to);
    }
  }
  // Vertices behind a zero-weight edge keep tanh(0) = 0.
  return value;
}

inline double tree_correlation(const Graph& g, const Couplings& j, const GibbsParams& params, Vertex x, Vertex y) {
  require_vertex(g, y);
  return tree_correlations_from(g, j, params, x)[y];
}

struct PlusLimit {
  std::vector<double> fields;
  std::vector<double> values;
  double extrapolated = 0.0;  // OLS intercept at h = 0 over the last three fields
  double residual = 0.0;      // RMS residual of that fit
  std::optional<double> plus_fixed;  // frontier clamped to +1, h = 0; absent if x itself is clamped
};

inline PlusLimit plus_limit_magnetization(const Graph& g, const Couplings& j, double beta, const FieldSequence& fields,
                                          Vertex x, const ExactOptions& opt = {}) {
  require_vertex(g, x);
  if (fields.fields().size() < 3) throw std::invalid_argument("plus_limit_magnetization: need at least 3 fields");
  PlusLimit out;
  out.fields = fields.fields();
  for (double h : out.fields) out.values.push_back(magnetization(g, j, GibbsParams(beta, h), x, opt));

  const std::size_t k0 = out.fields.size() - 3;
  double mh = 0, mv = 0;
  for (std::size_t k = k0; k < out.fields.size(); ++k) {
    mh += out.fields[k] / 3.0;
    mv += out.values[k] / 3.0;
  }
  double sxx = 0, sxy = 0;
  for (std::size_t k = k0; k < out.fields.size(); ++k) {
    sxx += (out.fields[k] - mh) * (out.fields[k] - mh);
    sxy += (out.fields[k] - mh) * (out.values[k] - mv);
  }
  const double slope = sxy / sxx;
  out.extrapolated = mv - slope * mh;
  double ss = 0;
  for (std::size_t k = k0; k < out.fields.size(); ++k) {
    const double e = out.values[k] - (out.extrapolated + slope * out.fields[k]);
    ss += e * e;
  }
  out.residual = std::sqrt(ss / 3.0);
  if (!g.frontier[x]) out.plus_fixed = magnetization(g, j, GibbsParams(beta, 0.0, PlusBoundary{}), x, opt);
  return out;
}

}  // namespace isingg
