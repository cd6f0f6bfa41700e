#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "isingg/graph.hpp"

namespace isingg {

/**
 * Ferromagnetic couplings, declared per distance class or per edge orbit so
 * that J is automorphism-invariant by construction. The lookup never sees
 * raw vertex ids: only graph distances or generator-assigned edge tags.
 */
class Couplings {
 public:
  enum class Mode { ByDistance, ByEdgeOrbit };

  Couplings() : Couplings(Mode::ByDistance, {{1, 1.0}}) {}

  static Couplings nearest_neighbor(double j = 1.0) { return Couplings(Mode::ByDistance, {{1, j}}); }
  static Couplings by_distance(std::map<int, double> values) { return Couplings(Mode::ByDistance, std::move(values)); }
  static Couplings by_edge_orbit(std::map<int, double> values) { return Couplings(Mode::ByEdgeOrbit, std::move(values)); }

  Mode mode() const { return mode_; }
  const std::map<int, double>& values() const { return values_; }

  int range() const { return mode_ == Mode::ByEdgeOrbit ? 1 : values_.rbegin()->first; }
  bool nearest_neighbor_only() const { return range() == 1; }

  friend bool operator==(const Couplings&, const Couplings&) = default;

 private:
  Couplings(Mode mode, std::map<int, double> values) : mode_(mode), values_(std::move(values)) {
    if (values_.empty()) throw std::invalid_argument("couplings: empty map");
    for (const auto& [key, j] : values_) {
      if (!(j >= 0.0) || !std::isfinite(j)) throw std::invalid_argument("couplings: values must be finite and >= 0");
      if (mode_ == Mode::ByDistance && key < 1) throw std::invalid_argument("couplings: distances must be >= 1");
      if (mode_ == Mode::ByEdgeOrbit && key < 0) throw std::invalid_argument("couplings: orbit tags must be >= 0");
    }
  }

  Mode mode_;
  std::map<int, double> values_;
};

struct Bond {
  Vertex to;
  double weight;
  int cls;  // index into Interactions::class_weights
};

/// Couplings resolved on a concrete graph: per-vertex bond lists (each
/// unordered pair appears in both endpoint lists) grouped into weight classes.
struct Interactions {
  std::vector<std::vector<Bond>> bonds;
  std::vector<double> class_weights;
  std::vector<std::size_t> class_pair_counts;

  std::size_t vertex_count() const { return bonds.size(); }
  double total_weight() const {
    double s = 0;
    for (std::size_t c = 0; c < class_weights.size(); ++c) s += class_weights[c] * class_pair_counts[c];
    return s;
  }
};

inline Interactions resolve(const Graph& g, const Couplings& j) {
  Interactions out;
  out.bonds.resize(g.vertex_count());
  std::map<int, int> class_of;  // coupling key -> class index
  auto class_index = [&](int key, double w) {
    auto [it, inserted] = class_of.emplace(key, static_cast<int>(out.class_weights.size()));
    if (inserted) {
      out.class_weights.push_back(w);
      out.class_pair_counts.push_back(0);
    }
    return it->second;
  };
  if (j.mode() == Couplings::Mode::ByEdgeOrbit) {
    for (std::size_t v = 0; v < g.vertex_count(); ++v) {
      for (std::size_t k = 0; k < g.adjacency[v].size(); ++k) {
        const int tag = g.edge_tags[v][k];
        const auto it = j.values().find(tag);
        if (it == j.values().end())
          throw std::invalid_argument("couplings: no value for edge orbit " + std::to_string(tag));
        if (it->second == 0.0) continue;
        const int c = class_index(tag, it->second);
        out.bonds[v].push_back({g.adjacency[v][k], it->second, c});
      }
    }
  } else {
    const int range = j.range();
    for (std::size_t v = 0; v < g.vertex_count(); ++v) {
      if (range == 1) {
        const double w = j.values().begin()->second;
        if (w == 0.0) continue;
        const int c = class_index(1, w);
        for (Vertex y : g.adjacency[v]) out.bonds[v].push_back({y, w, c});
        continue;
      }
      const auto dist = bfs_distances(g, static_cast<Vertex>(v), range);
      for (std::size_t y = 0; y < dist.size(); ++y) {
        if (dist[y] < 1) continue;
        const auto it = j.values().find(dist[y]);
        if (it == j.values().end() || it->second == 0.0) continue;
        const int c = class_index(it->first, it->second);
        out.bonds[v].push_back({static_cast<Vertex>(y), it->second, c});
      }
    }
  }
  for (const auto& list : out.bonds)
    for (const auto& b : list) ++out.class_pair_counts[b.cls];
  for (auto& n : out.class_pair_counts) n /= 2;
  return out;
}

struct FreeBoundary {};
struct PlusBoundary {};

/// Strictly decreasing positive fields h_1 > h_2 > ... approaching 0+.
class FieldSequence {
 public:
  explicit FieldSequence(std::vector<double> fields) : fields_(std::move(fields)) {
    if (fields_.empty()) throw std::invalid_argument("field sequence: empty");
    for (std::size_t i = 0; i < fields_.size(); ++i) {
      if (!(fields_[i] > 0.0)) throw std::invalid_argument("field sequence: fields must be > 0");
      if (i > 0 && !(fields_[i] < fields_[i - 1]))
        throw std::invalid_argument("field sequence: fields must be strictly decreasing");
    }
  }
  const std::vector<double>& fields() const { return fields_; }
  friend bool operator==(const FieldSequence&, const FieldSequence&) = default;

 private:
  std::vector<double> fields_;
};

using BoundaryCondition = std::variant<FreeBoundary, PlusBoundary, FieldSequence>;

inline bool operator==(FreeBoundary, FreeBoundary) { return true; }
inline bool operator==(PlusBoundary, PlusBoundary) { return true; }

struct GibbsParams {
  double beta = 0.0;
  double h = 0.0;
  BoundaryCondition bc = FreeBoundary{};

  GibbsParams() = default;
  GibbsParams(double beta_, double h_ = 0.0, BoundaryCondition bc_ = FreeBoundary{})
      : beta(beta_), h(h_), bc(std::move(bc_)) {
    if (!(beta >= 0.0) || !std::isfinite(beta)) throw std::invalid_argument("gibbs params: beta must be finite and >= 0");
    if (!std::isfinite(h)) throw std::invalid_argument("gibbs params: h must be finite");
  }

  bool free() const { return std::holds_alternative<FreeBoundary>(bc); }
  bool plus_fixed() const { return std::holds_alternative<PlusBoundary>(bc); }
};

/// σ ∈ {−1,+1}^V as a bit vector; a set bit means spin −1.
class SpinConfiguration {
 public:
  SpinConfiguration() = default;
  explicit SpinConfiguration(std::size_t n) : size_(n), words_((n + 63) / 64, 0) {}

  std::size_t size() const { return size_; }
  int spin(Vertex v) const { return (words_[v >> 6] >> (v & 63)) & 1 ? -1 : 1; }
  void flip(Vertex v) { words_[v >> 6] ^= std::uint64_t{1} << (v & 63); }
  void set(Vertex v, int s) {
    if ((spin(v) > 0) != (s > 0)) flip(v);
  }
  SpinConfiguration flipped_all() const {
    SpinConfiguration c = *this;
    for (auto& w : c.words_) w = ~w;
    if (size_ % 64) c.words_.back() &= (std::uint64_t{1} << (size_ % 64)) - 1;
    return c;
  }
  long magnetization() const {
    long down = 0;
    for (auto w : words_) down += std::popcount(w);
    return static_cast<long>(size_) - 2 * down;
  }

  friend bool operator==(const SpinConfiguration&, const SpinConfiguration&) = default;

 private:
  std::size_t size_ = 0;
  std::vector<std::uint64_t> words_;
};

/// H = −Σ_{x<y} J_xy σ_x σ_y − h Σ_x σ_x over unordered distinct pairs.
inline double hamiltonian(const Interactions& inter, double h, const SpinConfiguration& s) {
  if (s.size() != inter.vertex_count()) throw std::invalid_argument("hamiltonian: configuration size mismatch");
  double pair = 0.0, field = 0.0;
  for (std::size_t x = 0; x < inter.bonds.size(); ++x) {
    const int sx = s.spin(static_cast<Vertex>(x));
    field += sx;
    for (const auto& b : inter.bonds[x])
      if (b.to > static_cast<Vertex>(x)) pair += b.weight * sx * s.spin(b.to);
  }
  return -pair - h * field;
}

inline double hamiltonian(const Graph& g, const Couplings& j, double h, const SpinConfiguration& s) {
  return hamiltonian(resolve(g, j), h, s);
}

/// H(σ^x) − H(σ) in O(deg x).
inline double delta_energy(const Interactions& inter, double h, const SpinConfiguration& s, Vertex x) {
  if (s.size() != inter.vertex_count()) throw std::invalid_argument("delta_energy: configuration size mismatch");
  if (x < 0 || static_cast<std::size_t>(x) >= inter.vertex_count())
    throw std::out_of_range("delta_energy: vertex out of range");
  double local = h;
  for (const auto& b : inter.bonds[x]) local += b.weight * s.spin(b.to);
  return 2.0 * s.spin(x) * local;
}

inline double delta_energy(const Graph& g, const Couplings& j, double h, const SpinConfiguration& s, Vertex x) {
  return delta_energy(resolve(g, j), h, s, x);
}

}  // namespace isingg
