#pragma once

#include <cstdint>
#include <deque>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "isingg/graph.hpp"

namespace isingg {

namespace detail {

inline std::size_t checked_power(int base, int exp) {
  std::size_t n = 1;
  for (int i = 0; i < exp; ++i) {
    n *= static_cast<std::size_t>(base);
    if (n > (std::size_t{1} << 28)) throw std::invalid_argument("lattice too large");
  }
  return n;
}

inline Graph lattice(int d, int side, bool periodic) {
  const std::size_t n = checked_power(side, d);
  std::vector<TaggedEdge> edges;
  std::size_t stride = 1;
  for (int axis = 0; axis < d; ++axis) {
    for (std::size_t v = 0; v < n; ++v) {
      const auto coord = static_cast<int>((v / stride) % side);
      if (coord + 1 < side) {
        edges.push_back({static_cast<Vertex>(v), static_cast<Vertex>(v + stride), axis});
      } else if (periodic) {
        edges.push_back({static_cast<Vertex>(v), static_cast<Vertex>(v - (side - 1) * stride), axis});
      }
    }
    stride *= side;
  }
  return from_edges(n, edges, 2 * d);
}

}  // namespace detail

/// Periodic d-dimensional torus of side L. Rejects L < 3, where wrap-around
/// edges would coincide and the degree would no longer be 2d.
inline Graph build_torus(int d, int side) {
  if (d < 1 || d > 3) throw std::invalid_argument("build_torus: dimension must be 1, 2 or 3");
  if (side < 3) throw std::invalid_argument("build_torus: side length must be >= 3");
  Graph g = detail::lattice(d, side, true);
  g.family = "torus";
  g.params = "d=" + std::to_string(d) + ",L=" + std::to_string(side);
  g.origin = 0;
  g.radius = (side - 1) / 2;
  g.homogeneous = true;
  return g;
}

/// Open-boundary box [0, L)^d; origin is the (lower) centre vertex.
inline Graph build_box(int d, int side) {
  if (d < 1) throw std::invalid_argument("build_box: dimension must be >= 1");
  if (side < 1) throw std::invalid_argument("build_box: side length must be >= 1");
  Graph g = detail::lattice(d, side, false);
  g.family = "box";
  g.params = "d=" + std::to_string(d) + ",L=" + std::to_string(side);
  const int c = (side - 1) / 2;
  std::size_t id = 0, stride = 1;
  for (int axis = 0; axis < d; ++axis) {
    id += static_cast<std::size_t>(c) * stride;
    stride *= side;
  }
  g.origin = static_cast<Vertex>(id);
  g.radius = c;
  return g;
}

/// Ball of the given radius in the infinite degree-regular tree, ids in BFS order.
inline Graph build_tree_ball(int degree, int radius) {
  if (degree < 3) throw std::invalid_argument("build_tree_ball: degree must be >= 3");
  if (radius < 0) throw std::invalid_argument("build_tree_ball: radius must be >= 0");
  std::vector<TaggedEdge> edges;
  std::vector<Vertex> layer{0};
  Vertex next = 1;
  for (int depth = 0; depth < radius; ++depth) {
    std::vector<Vertex> children;
    for (Vertex parent : layer) {
      const int count = depth == 0 ? degree : degree - 1;
      for (int c = 0; c < count; ++c) {
        edges.push_back({parent, next, 0});
        children.push_back(next++);
        if (next > (1 << 26)) throw std::invalid_argument("build_tree_ball: ball too large");
      }
    }
    layer = std::move(children);
  }
  Graph g = from_edges(static_cast<std::size_t>(next), edges, degree);
  g.family = "tree";
  g.params = "degree=" + std::to_string(degree) + ",r=" + std::to_string(radius);
  g.origin = 0;
  g.radius = radius;
  return g;
}

inline constexpr int kLamplighterDefaultCap = 20;
inline constexpr int kLamplighterHardCap = 28;

enum LamplighterGenerator : int { kTranslate = 0, kToggle = 1 };

/**
 * Ball around the identity in the Cayley graph of Z_2 wr Z with generators
 * {t, t^-1, a}: t moves the marker, a toggles the lamp under the marker.
 * An element is (lamp bitset over [-radius, radius], marker position); a lamp
 * reachable in r steps lies within distance r of the start, so the window
 * never truncates. Edge tags distinguish translation and toggle edges.
 */
inline Graph build_lamplighter_ball(int radius, int cap = kLamplighterDefaultCap) {
  if (radius < 0) throw std::invalid_argument("build_lamplighter_ball: radius must be >= 0");
  if (radius > std::min(cap, kLamplighterHardCap))
    throw std::invalid_argument("build_lamplighter_ball: radius " + std::to_string(radius) + " exceeds cap " +
                                std::to_string(std::min(cap, kLamplighterHardCap)));
  const int offset = radius;
  auto key = [](std::uint64_t lamps, int slot) { return (lamps << 6) | static_cast<std::uint64_t>(slot); };

  struct Element {
    std::uint64_t lamps;
    int slot;  // marker position + offset
  };
  std::vector<Element> elements{{0, offset}};
  std::vector<int> depth{0};
  std::unordered_map<std::uint64_t, Vertex> index{{key(0, offset), 0}};
  std::vector<TaggedEdge> edges;

  auto apply = [](const Element& e, int gen) {
    switch (gen) {
      case 0: return Element{e.lamps, e.slot + 1};
      case 1: return Element{e.lamps, e.slot - 1};
      default: return Element{e.lamps ^ (std::uint64_t{1} << e.slot), e.slot};
    }
  };

  for (std::size_t head = 0; head < elements.size(); ++head) {
    if (depth[head] == radius) continue;
    for (int gen = 0; gen < 3; ++gen) {
      const Element nxt = apply(elements[head], gen);
      const auto k = key(nxt.lamps, nxt.slot);
      if (index.contains(k)) continue;
      index.emplace(k, static_cast<Vertex>(elements.size()));
      elements.push_back(nxt);
      depth.push_back(depth[head] + 1);
    }
  }
  // Second pass: t-edges once from their left end, toggle edges once from the smaller id.
  for (std::size_t u = 0; u < elements.size(); ++u) {
    for (int gen : {0, 2}) {
      const Element nxt = apply(elements[u], gen);
      if (nxt.slot < 0 || nxt.slot > 2 * offset) continue;
      const auto it = index.find(key(nxt.lamps, nxt.slot));
      if (it == index.end()) continue;
      const Vertex v = it->second;
      if (gen == 2 && static_cast<Vertex>(u) > v) continue;
      edges.push_back({static_cast<Vertex>(u), v, gen == 2 ? kToggle : kTranslate});
    }
  }
  Graph g = from_edges(elements.size(), edges, 3);
  g.family = "lamplighter";
  g.params = "r=" + std::to_string(radius);
  g.origin = 0;
  g.radius = radius;
  return g;
}

}  // namespace isingg
