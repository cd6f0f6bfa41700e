#pragma once

#include <string>

#include "isingg/errors.hpp"
#include "isingg/generators.hpp"

namespace isingg {

/// A named graph family plus its parameters. `size` is the side length for
/// torus/box and the radius for tree/lamplighter balls.
struct FamilySpec {
  std::string name;
  int d = 2;
  int degree = 3;
  int size = 0;
  int lamplighter_cap = kLamplighterDefaultCap;

  friend bool operator==(const FamilySpec&, const FamilySpec&) = default;
};

inline bool is_known_family(const std::string& name) {
  return name == "torus" || name == "box" || name == "tree" || name == "lamplighter";
}

inline Graph build_family(const FamilySpec& f, int size) {
  if (f.name == "torus") return build_torus(f.d, size);
  if (f.name == "box") return build_box(f.d, size);
  if (f.name == "tree") return build_tree_ball(f.degree, size);
  if (f.name == "lamplighter") return build_lamplighter_ball(size, f.lamplighter_cap);
  throw ConfigError("unknown graph family '" + f.name + "' (expected torus, box, tree or lamplighter)");
}

inline Graph build_family(const FamilySpec& f) { return build_family(f, f.size); }

}  // namespace isingg
