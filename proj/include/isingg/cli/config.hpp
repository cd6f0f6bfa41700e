#pragma once

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "isingg/errors.hpp"
#include "isingg/exact.hpp"
#include "isingg/family.hpp"
#include "isingg/model.hpp"
#include "isingg/rng.hpp"
#include "isingg/two_point.hpp"

namespace isingg::cli {

using nlohmann::json;

inline constexpr const char* kOutDirEnv = "ISING_GRAPHS_OUT";

/// Fully resolved experiment configuration. Every field has a value after
/// parsing; emit() writes the canonical form that parse() accepts back.
struct ExperimentConfig {
  FamilySpec family;
  Couplings couplings;
  std::optional<double> beta;
  std::vector<double> betas;
  double h = 0.0;
  std::string bc = "free";  // "free" | "plus" | "fields"
  std::vector<double> fields;
  Engine engine = Engine::Exact;
  std::size_t enumeration_cap = kDefaultEnumerationCap;
  std::uint64_t budget = 4000;
  std::uint64_t seed = 1;
  std::size_t jobs = 1;
  std::string out = "out";
  std::optional<int> n_max;
  std::optional<Vertex> x;
  int k = 2;
  int big_n = 4;
  std::vector<int> sizes;
  bool plot = false;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;

  EngineOptions engine_options() const {
    EngineOptions o;
    o.engine = engine;
    o.exact.cap = enumeration_cap;
    o.budget = budget;
    o.seed = seed;
    return o;
  }
};

namespace detail {

inline std::string where(const std::string& path) { return "config key '" + path + "'"; }

template <typename T>
T get_as(const json& j, const std::string& path) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where(path) + ": expected " + (std::is_same_v<T, std::string> ? "a string"
                                                     : std::is_same_v<T, bool>      ? "a boolean"
                                                     : std::is_floating_point_v<T>  ? "a number"
                                                                                    : "an integer") +
                      ", got " + j.dump());
  }
}

inline void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& prefix) {
  for (const auto& [key, value] : obj.items())
    if (!allowed.contains(key)) throw ConfigError("unknown " + where(prefix + key));
}

inline int positive_int(const json& j, const std::string& path, int minimum) {
  if (!j.is_number_integer()) throw ConfigError(where(path) + ": expected an integer, got " + j.dump());
  const auto v = j.get<long long>();
  if (v < minimum) throw ConfigError(where(path) + ": must be >= " + std::to_string(minimum));
  return static_cast<int>(v);
}

inline std::map<int, double> coupling_map(const json& j, const std::string& path) {
  if (!j.is_object() || j.empty()) throw ConfigError(where(path) + ": expected a nonempty object like {\"1\": 1.0}");
  std::map<int, double> out;
  for (const auto& [key, value] : j.items()) {
    int k = 0;
    try {
      std::size_t used = 0;
      k = std::stoi(key, &used);
      if (used != key.size()) throw std::invalid_argument(key);
    } catch (const std::exception&) {
      throw ConfigError(where(path + "." + key) + ": keys must be integers");
    }
    if (!value.is_number()) throw ConfigError(where(path + "." + key) + ": expected a number");
    out[k] = value.get<double>();
  }
  return out;
}

}  // namespace detail

inline const std::set<std::string>& config_keys() {
  static const std::set<std::string> keys{"family", "J",    "J_orbit", "beta",  "betas", "h",    "bc",
                                          "engine", "enumeration_cap", "budget", "seed", "jobs", "out",
                                          "n_max",  "x",    "k",       "N",     "sizes", "plot"};
  return keys;
}

/// Parses and validates a configuration object; unknown keys are rejected.
inline ExperimentConfig parse_config(const json& j) {
  using namespace detail;
  if (!j.is_object()) throw ConfigError("config: top level must be a JSON object");
  reject_unknown(j, config_keys(), "");
  ExperimentConfig c;
  if (const char* env = std::getenv(kOutDirEnv); env && *env) c.out = env;

  if (!j.contains("family")) throw ConfigError("missing " + where("family"));
  const auto& fam = j.at("family");
  if (!fam.is_object()) throw ConfigError(where("family") + ": expected an object");
  if (!fam.contains("name")) throw ConfigError("missing " + where("family.name"));
  c.family.name = get_as<std::string>(fam.at("name"), "family.name");
  if (!is_known_family(c.family.name))
    throw ConfigError(where("family.name") + ": unknown graph family '" + c.family.name +
                      "' (expected torus, box, tree or lamplighter)");
  const bool lattice = c.family.name == "torus" || c.family.name == "box";
  if (lattice) {
    reject_unknown(fam, {"name", "d", "L"}, "family.");
    c.family.d = fam.contains("d") ? positive_int(fam.at("d"), "family.d", 1) : 2;
    if (!fam.contains("L")) throw ConfigError("missing " + where("family.L"));
    c.family.size = positive_int(fam.at("L"), "family.L", 1);
  } else {
    reject_unknown(fam, {"name", "degree", "radius", "cap"}, "family.");
    if (c.family.name == "tree") c.family.degree = fam.contains("degree") ? positive_int(fam.at("degree"), "family.degree", 3) : 3;
    else if (fam.contains("degree")) throw ConfigError(where("family.degree") + ": only valid for trees");
    if (fam.contains("cap")) {
      if (c.family.name != "lamplighter") throw ConfigError(where("family.cap") + ": only valid for lamplighter");
      c.family.lamplighter_cap = positive_int(fam.at("cap"), "family.cap", 0);
    }
    if (!fam.contains("radius")) throw ConfigError("missing " + where("family.radius"));
    c.family.size = positive_int(fam.at("radius"), "family.radius", 0);
  }

  if (j.contains("J") && j.contains("J_orbit")) throw ConfigError("config: give either 'J' or 'J_orbit', not both");
  try {
    if (j.contains("J")) c.couplings = Couplings::by_distance(coupling_map(j.at("J"), "J"));
    if (j.contains("J_orbit")) c.couplings = Couplings::by_edge_orbit(coupling_map(j.at("J_orbit"), "J_orbit"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config couplings: ") + e.what());
  }

  auto nonneg = [](const json& v, const std::string& path) {
    const double b = get_as<double>(v, path);
    if (!(b >= 0.0)) throw ConfigError(where(path) + ": must be >= 0");
    return b;
  };
  if (j.contains("beta")) c.beta = nonneg(j.at("beta"), "beta");
  if (j.contains("betas")) {
    if (!j.at("betas").is_array() || j.at("betas").empty()) throw ConfigError(where("betas") + ": expected a nonempty array");
    for (std::size_t i = 0; i < j.at("betas").size(); ++i) {
      c.betas.push_back(nonneg(j.at("betas")[i], "betas[" + std::to_string(i) + "]"));
      if (i > 0 && !(c.betas[i] > c.betas[i - 1])) throw ConfigError(where("betas") + ": must be strictly increasing");
    }
  }
  if (j.contains("h")) c.h = get_as<double>(j.at("h"), "h");
  if (j.contains("bc")) {
    const auto& bc = j.at("bc");
    if (bc.is_string()) {
      c.bc = bc.get<std::string>();
      if (c.bc != "free" && c.bc != "plus") throw ConfigError(where("bc") + ": expected \"free\", \"plus\" or {\"fields\": [...]}");
    } else if (bc.is_object()) {
      reject_unknown(bc, {"fields"}, "bc.");
      if (!bc.contains("fields") || !bc.at("fields").is_array()) throw ConfigError(where("bc.fields") + ": expected an array");
      for (const auto& f : bc.at("fields")) c.fields.push_back(get_as<double>(f, "bc.fields"));
      try {
        FieldSequence check(c.fields);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(where("bc.fields") + ": " + e.what());
      }
      c.bc = "fields";
    } else {
      throw ConfigError(where("bc") + ": expected a string or object");
    }
  }
  if (j.contains("engine")) c.engine = parse_engine(get_as<std::string>(j.at("engine"), "engine"));
  if (j.contains("enumeration_cap")) c.enumeration_cap = static_cast<std::size_t>(positive_int(j.at("enumeration_cap"), "enumeration_cap", 1));
  if (j.contains("budget")) c.budget = static_cast<std::uint64_t>(positive_int(j.at("budget"), "budget", 1));
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_integer() || j.at("seed").get<std::int64_t>() < 0) throw ConfigError(where("seed") + ": expected a nonnegative integer");
    c.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("jobs")) c.jobs = static_cast<std::size_t>(positive_int(j.at("jobs"), "jobs", 1));
  if (j.contains("out")) c.out = get_as<std::string>(j.at("out"), "out");
  if (j.contains("n_max")) c.n_max = positive_int(j.at("n_max"), "n_max", 0);
  if (j.contains("x")) c.x = positive_int(j.at("x"), "x", 0);
  if (j.contains("k")) c.k = positive_int(j.at("k"), "k", 2);
  if (j.contains("N")) c.big_n = positive_int(j.at("N"), "N", 1);
  if (j.contains("sizes")) {
    if (!j.at("sizes").is_array() || j.at("sizes").empty()) throw ConfigError(where("sizes") + ": expected a nonempty array");
    for (std::size_t i = 0; i < j.at("sizes").size(); ++i)
      c.sizes.push_back(positive_int(j.at("sizes")[i], "sizes[" + std::to_string(i) + "]", 0));
  }
  if (j.contains("plot")) c.plot = get_as<bool>(j.at("plot"), "plot");
  return c;
}

inline json emit_config(const ExperimentConfig& c) {
  json j;
  json fam{{"name", c.family.name}};
  if (c.family.name == "torus" || c.family.name == "box") {
    fam["d"] = c.family.d;
    fam["L"] = c.family.size;
  } else {
    fam["radius"] = c.family.size;
    if (c.family.name == "tree") fam["degree"] = c.family.degree;
    if (c.family.name == "lamplighter") fam["cap"] = c.family.lamplighter_cap;
  }
  j["family"] = fam;
  json jm = json::object();
  for (const auto& [k, v] : c.couplings.values()) jm[std::to_string(k)] = v;
  j[c.couplings.mode() == Couplings::Mode::ByDistance ? "J" : "J_orbit"] = jm;
  if (c.beta) j["beta"] = *c.beta;
  if (!c.betas.empty()) j["betas"] = c.betas;
  j["h"] = c.h;
  if (c.bc == "fields")
    j["bc"] = json{{"fields", c.fields}};
  else
    j["bc"] = c.bc;
  j["engine"] = to_string(c.engine);
  j["enumeration_cap"] = c.enumeration_cap;
  j["budget"] = c.budget;
  j["seed"] = c.seed;
  j["jobs"] = c.jobs;
  j["out"] = c.out;
  if (c.n_max) j["n_max"] = *c.n_max;
  if (c.x) j["x"] = *c.x;
  j["k"] = c.k;
  j["N"] = c.big_n;
  if (!c.sizes.empty()) j["sizes"] = c.sizes;
  j["plot"] = c.plot;
  return j;
}

/// Hash of the result-relevant configuration (jobs and out excluded).
inline std::string config_hash(const ExperimentConfig& c) {
  auto j = emit_config(c);
  j.erase("jobs");
  j.erase("out");
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(j.dump())));
  return buf;
}

/// Reads a config file, or the config embedded in a run manifest.
inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path + "': " + e.what());
  }
  if (j.is_object() && j.contains("manifest_version")) {
    if (!j.contains("config")) throw ConfigError("manifest '" + path + "' has no embedded config");
    return parse_config(j.at("config"));
  }
  return parse_config(j);
}

}  // namespace isingg::cli
