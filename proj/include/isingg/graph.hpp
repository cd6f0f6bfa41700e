#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <initializer_list>
#include <limits>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "isingg/errors.hpp"

namespace isingg {

using Vertex = std::int32_t;
using VertexPair = std::pair<Vertex, Vertex>;

/**
 * A finite graph standing in for a ball of an infinite (quasi-)transitive graph.
 *
 * `radius` is the faithful radius around `origin`: every ball Λ_n(origin) with
 * n <= radius coincides with the corresponding ball of the infinite graph.
 * `frontier[v]` marks vertices that are missing neighbors of the infinite graph
 * (the inner boundary of the generated region); the plus boundary condition
 * clamps exactly these. On a finite homogeneous host (the torus) every vertex
 * may serve as a centre, so the faithful radius does not shrink away from origin.
 */
struct Graph {
  std::string family = "custom";
  std::string params;
  std::vector<std::vector<Vertex>> adjacency;
  // Edge orbit tag per adjacency entry (generator type, lattice axis, ...).
  std::vector<std::vector<int>> edge_tags;
  std::vector<int> labels;
  std::vector<std::uint8_t> frontier;
  Vertex origin = 0;
  int radius = 0;
  bool homogeneous = false;

  std::size_t vertex_count() const { return adjacency.size(); }
  int degree(Vertex v) const { return static_cast<int>(adjacency[v].size()); }
  bool valid(Vertex v) const { return v >= 0 && static_cast<std::size_t>(v) < adjacency.size(); }

  std::size_t edge_count() const {
    std::size_t twice = 0;
    for (const auto& nbrs : adjacency) twice += nbrs.size();
    return twice / 2;
  }

  std::string id() const { return params.empty() ? family : family + "(" + params + ")"; }
};

// Strictly sorted list of vertex ids.
class VertexSet {
 public:
  VertexSet() = default;
  explicit VertexSet(std::vector<Vertex> ids) : ids_(std::move(ids)) {
    std::sort(ids_.begin(), ids_.end());
    ids_.erase(std::unique(ids_.begin(), ids_.end()), ids_.end());
  }
  VertexSet(std::initializer_list<Vertex> ids) : VertexSet(std::vector<Vertex>(ids)) {}

  std::size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }
  bool contains(Vertex v) const { return std::binary_search(ids_.begin(), ids_.end(), v); }
  auto begin() const { return ids_.begin(); }
  auto end() const { return ids_.end(); }
  Vertex operator[](std::size_t i) const { return ids_[i]; }
  const std::vector<Vertex>& ids() const { return ids_; }

  friend bool operator==(const VertexSet&, const VertexSet&) = default;

 private:
  std::vector<Vertex> ids_;
};

inline void require_vertex(const Graph& g, Vertex v) {
  if (!g.valid(v)) throw std::out_of_range("vertex " + std::to_string(v) + " out of range");
}

// Throws std::logic_error describing the first broken structural invariant.
inline void validate(const Graph& g) {
  const auto n = g.vertex_count();
  if (g.edge_tags.size() != n || g.labels.size() != n || g.frontier.size() != n)
    throw std::logic_error("graph: per-vertex arrays disagree in length");
  if (n > 0 && !g.valid(g.origin)) throw std::logic_error("graph: origin out of range");
  for (std::size_t v = 0; v < n; ++v) {
    const auto& nbrs = g.adjacency[v];
    if (g.edge_tags[v].size() != nbrs.size()) throw std::logic_error("graph: edge tag length mismatch");
    for (std::size_t i = 0; i < nbrs.size(); ++i) {
      const Vertex w = nbrs[i];
      if (!g.valid(w)) throw std::logic_error("graph: neighbor id out of range");
      if (w == static_cast<Vertex>(v)) throw std::logic_error("graph: self-loop at " + std::to_string(v));
      if (i > 0 && nbrs[i - 1] >= w) throw std::logic_error("graph: neighbors not strictly sorted");
      const auto& back = g.adjacency[w];
      if (!std::binary_search(back.begin(), back.end(), static_cast<Vertex>(v)))
        throw std::logic_error("graph: asymmetric adjacency");
    }
  }
}

/// Assembles a graph from an undirected edge list. Each edge is {u, v, tag}.
/// Vertices whose degree falls below `bulk_degree` are marked as frontier.
struct TaggedEdge {
  Vertex u;
  Vertex v;
  int tag = 0;
};

inline Graph from_edges(std::size_t vertex_count, std::span<const TaggedEdge> edges, int bulk_degree = 0) {
  Graph g;
  std::vector<std::vector<std::pair<Vertex, int>>> tmp(vertex_count);
  for (const auto& e : edges) {
    if (e.u < 0 || e.v < 0 || static_cast<std::size_t>(e.u) >= vertex_count ||
        static_cast<std::size_t>(e.v) >= vertex_count)
      throw std::invalid_argument("from_edges: vertex id out of range");
    if (e.u == e.v) throw std::invalid_argument("from_edges: self-loop");
    tmp[e.u].emplace_back(e.v, e.tag);
    tmp[e.v].emplace_back(e.u, e.tag);
  }
  g.adjacency.resize(vertex_count);
  g.edge_tags.resize(vertex_count);
  for (std::size_t v = 0; v < vertex_count; ++v) {
    auto& list = tmp[v];
    std::sort(list.begin(), list.end());
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (i > 0 && list[i].first == list[i - 1].first) throw std::invalid_argument("from_edges: duplicate edge");
      g.adjacency[v].push_back(list[i].first);
      g.edge_tags[v].push_back(list[i].second);
    }
  }
  g.labels.assign(vertex_count, 0);
  g.frontier.assign(vertex_count, 0);
  for (std::size_t v = 0; v < vertex_count; ++v)
    g.frontier[v] = g.degree(static_cast<Vertex>(v)) < bulk_degree ? 1 : 0;
  return g;
}

inline constexpr int kUnreached = -1;

// Breadth-first distances from x, optionally truncated at `max_depth`.
inline std::vector<int> bfs_distances(const Graph& g, Vertex x, int max_depth = std::numeric_limits<int>::max()) {
  require_vertex(g, x);
  std::vector<int> dist(g.vertex_count(), kUnreached);
  std::deque<Vertex> queue{x};
  dist[x] = 0;
  while (!queue.empty()) {
    const Vertex v = queue.front();
    queue.pop_front();
    if (dist[v] >= max_depth) continue;
    for (Vertex w : g.adjacency[v]) {
      if (dist[w] == kUnreached) {
        dist[w] = dist[v] + 1;
        queue.push_back(w);
      }
    }
  }
  return dist;
}

inline int distance(const Graph& g, Vertex x, Vertex y) {
  require_vertex(g, y);
  return bfs_distances(g, x)[y];
}

// Λ_n(x): all vertices within graph distance n of x.
inline VertexSet ball(const Graph& g, Vertex x, int n) {
  if (n < 0) throw std::invalid_argument("ball: negative radius");
  const auto dist = bfs_distances(g, x, n);
  std::vector<Vertex> ids;
  for (std::size_t v = 0; v < dist.size(); ++v)
    if (dist[v] != kUnreached) ids.push_back(static_cast<Vertex>(v));
  return VertexSet(std::move(ids));
}

inline VertexSet sphere(const Graph& g, Vertex x, int n) {
  if (n < 0) throw std::invalid_argument("sphere: negative radius");
  const auto dist = bfs_distances(g, x, n);
  std::vector<Vertex> ids;
  for (std::size_t v = 0; v < dist.size(); ++v)
    if (dist[v] == n) ids.push_back(static_cast<Vertex>(v));
  return VertexSet(std::move(ids));
}

// Inner vertex boundary: members of A with at least one neighbor outside A.
inline VertexSet boundary(const Graph& g, const VertexSet& a) {
  std::vector<Vertex> out;
  for (Vertex x : a) {
    require_vertex(g, x);
    for (Vertex y : g.adjacency[x]) {
      if (!a.contains(y)) {
        out.push_back(x);
        break;
      }
    }
  }
  return VertexSet(std::move(out));
}

inline VertexSet all_vertices(const Graph& g) {
  std::vector<Vertex> ids(g.vertex_count());
  for (std::size_t v = 0; v < ids.size(); ++v) ids[v] = static_cast<Vertex>(v);
  return VertexSet(std::move(ids));
}

inline VertexSet frontier_set(const Graph& g) {
  std::vector<Vertex> ids;
  for (std::size_t v = 0; v < g.vertex_count(); ++v)
    if (g.frontier[v]) ids.push_back(static_cast<Vertex>(v));
  return VertexSet(std::move(ids));
}

// Largest n such that Λ_n(x) agrees with the infinite graph.
inline int faithful_radius(const Graph& g, Vertex x) {
  require_vertex(g, x);
  if (g.homogeneous || x == g.origin) return g.radius;
  const int d = distance(g, g.origin, x);
  return d == kUnreached ? -1 : g.radius - d;
}

inline void require_unsaturated(const Graph& g, Vertex x, int n, const std::string& what) {
  const int r = faithful_radius(g, x);
  if (n > r)
    throw SaturationError(what + ": radius " + std::to_string(n) + " around vertex " + std::to_string(x) +
                          " exceeds the faithful radius " + std::to_string(r) + " of " + g.id());
}

struct GrowthProfile {
  std::vector<std::size_t> ball_sizes;  // index n = 0..n_max
  std::vector<double> rate;             // index n-1: |Λ_n|^{1/n}
  std::vector<double> running_min;      // liminf surrogate
};

inline GrowthProfile growth_rate_estimate(const Graph& g, Vertex x, int n_max) {
  if (n_max < 1) throw std::invalid_argument("growth_rate_estimate: n_max must be >= 1");
  require_unsaturated(g, x, n_max, "growth_rate_estimate");
  const auto dist = bfs_distances(g, x, n_max);
  GrowthProfile p;
  p.ball_sizes.assign(n_max + 1, 0);
  for (int d : dist)
    if (d != kUnreached) ++p.ball_sizes[d];
  for (int n = 1; n <= n_max; ++n) p.ball_sizes[n] += p.ball_sizes[n - 1];
  double lowest = std::numeric_limits<double>::infinity();
  for (int n = 1; n <= n_max; ++n) {
    const double r = std::pow(static_cast<double>(p.ball_sizes[n]), 1.0 / n);
    lowest = std::min(lowest, r);
    p.rate.push_back(r);
    p.running_min.push_back(lowest);
  }
  return p;
}

struct CheegerEstimate {
  double ratio = 0.0;          // min |∂A|/|A|, an upper bound on the true infimum
  std::size_t best_index = 0;  // index of the minimizing candidate
  std::vector<double> ratios;
};

inline CheegerEstimate cheeger_estimate(const Graph& g, std::span<const VertexSet> candidates) {
  if (candidates.empty()) throw std::invalid_argument("cheeger_estimate: no candidate sets");
  CheegerEstimate est;
  est.ratio = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& a = candidates[i];
    if (a.empty()) throw std::invalid_argument("cheeger_estimate: empty candidate set");
    const double r = static_cast<double>(boundary(g, a).size()) / static_cast<double>(a.size());
    est.ratios.push_back(r);
    if (r < est.ratio) {
      est.ratio = r;
      est.best_index = i;
    }
  }
  return est;
}

// Balls Λ_1..Λ_{R-1}(origin), whose boundaries inside g match the infinite graph.
inline std::vector<VertexSet> default_cheeger_candidates(const Graph& g) {
  std::vector<VertexSet> out;
  for (int n = 1; n < g.radius; ++n) out.push_back(ball(g, g.origin, n));
  if (out.empty()) out.push_back(VertexSet{g.origin});
  return out;
}

inline CheegerEstimate cheeger_estimate(const Graph& g) {
  const auto c = default_cheeger_candidates(g);
  return cheeger_estimate(g, std::span<const VertexSet>(c));
}

struct Subgraph {
  Graph graph;
  std::vector<Vertex> to_parent;  // new id -> id in the host graph
  std::vector<Vertex> from_parent;  // host id -> new id, or -1
};

// Subgraph induced on `keep`; ids are renumbered in increasing host order.
inline Subgraph induced_subgraph(const Graph& g, const VertexSet& keep) {
  Subgraph s;
  s.from_parent.assign(g.vertex_count(), -1);
  for (Vertex v : keep) {
    require_vertex(g, v);
    s.from_parent[v] = static_cast<Vertex>(s.to_parent.size());
    s.to_parent.push_back(v);
  }
  auto& h = s.graph;
  h.family = g.family;
  h.params = g.params + (g.params.empty() ? "" : ",") + "induced=" + std::to_string(keep.size());
  const auto n = keep.size();
  h.adjacency.resize(n);
  h.edge_tags.resize(n);
  h.labels.resize(n);
  h.frontier.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const Vertex v = s.to_parent[i];
    h.labels[i] = g.labels[v];
    for (std::size_t k = 0; k < g.adjacency[v].size(); ++k) {
      const Vertex w = s.from_parent[g.adjacency[v][k]];
      if (w >= 0) {
        h.adjacency[i].push_back(w);
        h.edge_tags[i].push_back(g.edge_tags[v][k]);
      } else {
        h.frontier[i] = 1;
      }
    }
    if (g.frontier[v]) h.frontier[i] = 1;
  }
  h.origin = s.from_parent[g.origin] >= 0 ? s.from_parent[g.origin] : 0;
  h.radius = 0;
  return s;
}

// ---------------------------------------------------------------------------
// Text serialization: `graph <family> <params> <n>` then `id label deg n1 n2 ...`.

inline std::string serialize(const Graph& g) {
  std::ostringstream os;
  os << "graph " << g.family << ' ' << (g.params.empty() ? "-" : g.params) << ' ' << g.vertex_count() << '\n';
  for (std::size_t v = 0; v < g.vertex_count(); ++v) {
    os << v << ' ' << g.labels[v] << ' ' << g.adjacency[v].size();
    for (Vertex w : g.adjacency[v]) os << ' ' << w;
    os << '\n';
  }
  return os.str();
}

// Inverse of serialize(). Edge tags are not part of the format and come back as 0.
inline Graph parse_graph(const std::string& text) {
  std::istringstream is(text);
  std::string word, family, params;
  std::size_t n = 0;
  if (!(is >> word >> family >> params >> n) || word != "graph")
    throw std::invalid_argument("parse_graph: malformed header");
  Graph g;
  g.family = family;
  g.params = params == "-" ? "" : params;
  g.adjacency.resize(n);
  g.edge_tags.resize(n);
  g.labels.resize(n);
  g.frontier.assign(n, 0);
  for (std::size_t v = 0; v < n; ++v) {
    std::size_t id = 0, deg = 0;
    int label = 0;
    if (!(is >> id >> label >> deg) || id != v) throw std::invalid_argument("parse_graph: bad vertex line " + std::to_string(v));
    g.labels[v] = label;
    g.adjacency[v].resize(deg);
    g.edge_tags[v].assign(deg, 0);
    for (auto& w : g.adjacency[v])
      if (!(is >> w)) throw std::invalid_argument("parse_graph: truncated neighbor list at " + std::to_string(v));
  }
  validate(g);
  return g;
}

}  // namespace isingg
