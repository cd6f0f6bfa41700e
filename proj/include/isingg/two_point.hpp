#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "isingg/exact.hpp"
#include "isingg/mc.hpp"

namespace isingg {

/// Exact picks the tree product on forests with nearest-neighbor couplings and
/// Gray-code enumeration otherwise.
enum class Engine { Exact, Enumeration, Tree, MonteCarlo };

enum class Provenance { Exact, MonteCarlo };

inline const char* to_string(Provenance p) { return p == Provenance::Exact ? "exact" : "mc"; }

inline const char* to_string(Engine e) {
  switch (e) {
    case Engine::Exact: return "exact";
    case Engine::Enumeration: return "enumeration";
    case Engine::Tree: return "tree";
    case Engine::MonteCarlo: return "mc";
  }
  return "?";
}

inline Engine parse_engine(const std::string& s) {
  if (s == "exact") return Engine::Exact;
  if (s == "enumeration") return Engine::Enumeration;
  if (s == "tree") return Engine::Tree;
  if (s == "mc") return Engine::MonteCarlo;
  throw ConfigError("unknown engine '" + s + "' (expected exact, enumeration, tree or mc)");
}

struct EngineOptions {
  Engine engine = Engine::Exact;
  ExactOptions exact;
  std::uint64_t budget = 4000;  // Monte Carlo sweeps
  std::uint64_t seed = 1;       // chain seed for Monte Carlo runs
};

// Free-boundary, h = 0 two-point function with a 95% interval (degenerate when exact).
struct TwoPointValue {
  double value = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  double std_error = 0.0;
  Provenance provenance = Provenance::Exact;
};

inline Engine resolve_engine(const Graph& g, const Couplings& j, Engine e) {
  if (e != Engine::Exact) return e;
  return j.nearest_neighbor_only() && is_forest(g) ? Engine::Tree : Engine::Enumeration;
}

inline std::vector<TwoPointValue> two_point(const Graph& g, const Couplings& j, double beta,
                                            std::span<const VertexPair> pairs, const EngineOptions& opt) {
  std::vector<TwoPointValue> out(pairs.size());
  const GibbsParams params(beta);
  switch (resolve_engine(g, j, opt.engine)) {
    case Engine::Tree: {
      std::map<Vertex, std::vector<double>> rows;
      for (std::size_t k = 0; k < pairs.size(); ++k) {
        const auto [x, y] = pairs[k];
        require_vertex(g, y);
        auto it = rows.find(x);
        if (it == rows.end()) it = rows.emplace(x, tree_correlations_from(g, j, params, x)).first;
        const double v = it->second[y];
        out[k] = {v, v, v, 0.0, Provenance::Exact};
      }
      break;
    }
    case Engine::Enumeration: {
      Observables obs;
      obs.pairs.assign(pairs.begin(), pairs.end());
      const auto res = enumerate(g, j, params, obs, opt.exact);
      for (std::size_t k = 0; k < pairs.size(); ++k) {
        const double v = res.pair_values[k];
        out[k] = {v, v, v, 0.0, Provenance::Exact};
      }
      break;
    }
    case Engine::MonteCarlo: {
      const auto run = fk_two_point(g, j, beta, pairs, opt.budget, opt.seed);
      for (std::size_t k = 0; k < pairs.size(); ++k) {
        const auto& e = run.pairs[k].fk;
        out[k] = {e.mean, std::max(0.0, e.lower95()), std::min(1.0, e.upper95()), e.std_error, Provenance::MonteCarlo};
      }
      break;
    }
    case Engine::Exact:
      break;
  }
  return out;
}

inline std::vector<TwoPointValue> two_point_from(const Graph& g, const Couplings& j, double beta, Vertex x,
                                                 std::span<const Vertex> targets, const EngineOptions& opt) {
  std::vector<VertexPair> pairs;
  pairs.reserve(targets.size());
  for (Vertex y : targets) pairs.emplace_back(x, y);
  return two_point(g, j, beta, pairs, opt);
}

}  // namespace isingg
