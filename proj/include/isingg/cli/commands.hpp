#pragma once

#include <chrono>
#include <string>
#include <vector>

#include <json.hpp>

#include "isingg/cli/config.hpp"
#include "isingg/cli/output.hpp"
#include "isingg/construction.hpp"
#include "isingg/critical.hpp"
#include "isingg/kappa.hpp"
#include "isingg/parallel.hpp"

namespace isingg::cli {

inline constexpr const char* kToolName = "ising-graphs";
inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kManifestVersion = 1;

struct SeedRecord {
  std::string task;
  std::uint64_t seed = 0;
};

/// Result files of one command plus the seeds it consumed. Nothing is on disk yet.
struct CommandOutput {
  OutputSet files;
  std::vector<SeedRecord> seeds;
};

namespace detail {

inline void require_free_zero_field(const ExperimentConfig& c, const char* cmd) {
  if (c.bc != "free" || c.h != 0.0)
    throw ConfigError(std::string(cmd) + ": two-point quantities are defined for bc \"free\" and h = 0");
}

inline std::vector<double> beta_list(const ExperimentConfig& c, const char* cmd) {
  if (!c.betas.empty()) return c.betas;
  if (c.beta) return {*c.beta};
  throw ConfigError(std::string(cmd) + ": config needs 'beta' or 'betas'");
}

inline double single_beta(const ExperimentConfig& c, const char* cmd) {
  if (!c.beta) throw ConfigError(std::string(cmd) + ": config needs 'beta'");
  return *c.beta;
}

inline Vertex start_vertex(const ExperimentConfig& c, const Graph& g) {
  const Vertex x = c.x.value_or(g.origin);
  if (static_cast<std::size_t>(x) >= g.vertex_count())
    throw ConfigError("config key 'x': vertex " + std::to_string(x) + " not in " + g.id());
  return x;
}

inline std::string beta_key(double b) { return "beta=" + fmt17(b); }

inline nlohmann::json couplings_json(const Couplings& j) {
  nlohmann::json m = nlohmann::json::object();
  for (const auto& [k, v] : j.values()) m[std::to_string(k)] = v;
  return {{j.mode() == Couplings::Mode::ByDistance ? "J" : "J_orbit", m}};
}

inline nlohmann::json estimate_json(const EstimateWithCI& e) {
  return {{"mean", e.mean},
          {"std_error", e.std_error},
          {"tau", e.autocorrelation_time},
          {"n_samples", e.n_samples},
          {"method", e.method}};
}

inline void sweep_table(CsvWriter& csv, nlohmann::json& rows, const std::vector<SweepPoint>& table) {
  for (const auto& p : table) {
    const auto& m = p.moments;
    csv.row(p.size, m.beta, m.vertex_count, m.m_abs.mean, m.m_abs.std_error, m.m2.mean, m.m2.std_error, m.m4.mean,
            m.m4.std_error, m.binder.value, m.binder.std_error, m.chi, m.chi_connected.value,
            m.chi_connected.std_error, m.m2.autocorrelation_time, m.seed);
    rows.push_back({{"size", p.size},
                    {"beta", m.beta},
                    {"vertices", m.vertex_count},
                    {"m_abs", estimate_json(m.m_abs)},
                    {"m2", estimate_json(m.m2)},
                    {"m4", estimate_json(m.m4)},
                    {"binder", {{"value", m.binder.value}, {"std_error", m.binder.std_error}}},
                    {"chi", m.chi},
                    {"chi_connected", {{"value", m.chi_connected.value}, {"std_error", m.chi_connected.std_error}}},
                    {"seed", m.seed},
                    {"method", "wolff"}});
  }
}

inline CsvWriter sweep_csv() {
  return CsvWriter({"size", "beta", "vertices", "m_abs", "m_abs_err", "m2", "m2_err", "m4", "m4_err", "binder",
                    "binder_err", "chi", "chi_conn", "chi_conn_err", "tau_m2", "seed"});
}

inline std::vector<SeedRecord> sweep_seeds(const std::vector<SweepPoint>& table, const FamilySpec& family) {
  std::vector<SeedRecord> out;
  for (const auto& p : table)
    out.push_back({sweep_task_key(build_family(family, p.size), p.moments.beta), p.moments.seed});
  return out;
}

}  // namespace detail

/// graph.txt (serialized ball), growth.csv, graph.json.
/// growth.csv: n, ball_size, growth_rate = |Λ_n|^{1/n}, running_min, cheeger_ratio = |∂Λ_n|/|Λ_n|
/// (empty where Λ_n touches the frontier).
inline CommandOutput cmd_graph(const ExperimentConfig& c) {
  const Graph g = build_family(c.family);
  CommandOutput out{OutputSet(c.out), {}};
  out.files.add("graph.txt", serialize(g));
  const Vertex x = detail::start_vertex(c, g);
  const int reach = faithful_radius(g, x);
  const int n_max = c.n_max.value_or(reach);
  require_unsaturated(g, x, n_max, "graph");

  CsvWriter csv({"n", "ball_size", "growth_rate", "running_min", "cheeger_ratio"});
  nlohmann::json rows = nlohmann::json::array();
  if (n_max >= 1) {
    const auto prof = growth_rate_estimate(g, x, n_max);
    for (int n = 1; n <= n_max; ++n) {
      std::string cheeger;
      nlohmann::json cj = nullptr;
      if (n < reach) {
        const auto b = ball(g, x, n);
        const double r = static_cast<double>(boundary(g, b).size()) / static_cast<double>(b.size());
        cheeger = fmt17(r);
        cj = r;
      }
      csv.row(n, prof.ball_sizes[n], prof.rate[n - 1], prof.running_min[n - 1], cheeger);
      rows.push_back({{"n", n},
                      {"ball_size", prof.ball_sizes[n]},
                      {"growth_rate", prof.rate[n - 1]},
                      {"running_min", prof.running_min[n - 1]},
                      {"cheeger_ratio", cj}});
    }
  }
  out.files.add("growth.csv", csv.str());
  nlohmann::json report{{"graph", g.id()},
                        {"family", g.family},
                        {"vertices", g.vertex_count()},
                        {"edges", g.edge_count()},
                        {"radius", g.radius},
                        {"homogeneous", g.homogeneous},
                        {"x", x},
                        {"frontier_size", frontier_set(g).size()},
                        {"growth", rows}};
  if (g.radius >= 2) {
    const auto ch = cheeger_estimate(g);
    report["cheeger_upper_bound"] = ch.ratio;
    report["cheeger_best_ball"] = ch.best_index + 1;
  }
  out.files.add_json("graph.json", report);
  return out;
}

/// kappa.csv: beta, n, value, lo, hi, argmin_vertex, provenance (lo = hi = value when exact).
/// kappa.json adds supermultiplicativity, Fekete roots, the growth bound and, over a β list, ρ.
inline CommandOutput cmd_kappa(const ExperimentConfig& c) {
  detail::require_free_zero_field(c, "kappa");
  const Graph g = build_family(c.family);
  const Vertex x = detail::start_vertex(c, g);
  const int n_max = c.n_max.value_or(faithful_radius(g, x));
  const auto betas = detail::beta_list(c, "kappa");
  CommandOutput out{OutputSet(c.out), {}};

  std::vector<std::uint64_t> seeds;
  for (double b : betas) {
    const std::string task = "kappa|" + g.id() + "|" + detail::beta_key(b);
    seeds.push_back(derive_seed(c.seed, task));
    if (c.engine == Engine::MonteCarlo) out.seeds.push_back({task, seeds.back()});
  }
  const auto series = parallel_map(betas.size(), c.jobs, [&](std::size_t i) {
    auto opt = c.engine_options();
    opt.seed = seeds[i];
    return kappa(g, c.couplings, betas[i], x, n_max, opt);
  });

  CsvWriter csv({"beta", "n", "value", "lo", "hi", "argmin_vertex", "provenance"});
  nlohmann::json js = nlohmann::json::array();
  RhoBound rho;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : s.entries) {
      csv.row(s.beta, e.n, e.value, e.lo, e.hi, e.argmin, to_string(s.provenance));
      entries.push_back({{"n", e.n},
                         {"value", e.value},
                         {"lo", e.lo},
                         {"hi", e.hi},
                         {"argmin_vertex", e.argmin},
                         {"ball_size", e.ball_size},
                         {"partial_susceptibility", e.partial_susceptibility}});
    }
    const auto sm = check_supermultiplicative(s);
    nlohmann::json viol = nlohmann::json::array();
    for (const auto& v : sm.violations)
      viol.push_back({{"m", v.m}, {"n", v.n}, {"lhs", v.lhs}, {"rhs", v.rhs}, {"magnitude", v.magnitude}});
    const auto gb = growth_bound_report(s);
    nlohmann::json rec{{"beta", s.beta},
                       {"provenance", to_string(s.provenance)},
                       {"entries", entries},
                       {"supermultiplicativity", {{"advisory", sm.advisory}, {"violations", viol}}},
                       {"growth_bound",
                        {{"all_hold", gb.all_hold},
                         {"last_increment_ratio", gb.last_increment_ratio},
                         {"appears_bounded", gb.appears_bounded},
                         {"extrapolated_limit", gb.appears_bounded ? nlohmann::json(gb.extrapolated_limit)
                                                                   : nlohmann::json(nullptr)}}}};
    if (c.engine == Engine::MonteCarlo) rec["seed"] = seeds[i];
    if (n_max >= 3) {
      const auto f = fekete_limit(s);
      rec["fekete"] = {{"roots", f.roots}, {"running_sup", f.running_sup}, {"sup", f.sup}, {"limit", f.limit}};
      rho.betas.push_back(s.beta);
      rho.sups.push_back(f.sup);
      rho.max = std::max(rho.max, f.sup);
      if (c.plot) {
        std::vector<double> ns;
        for (int n = 1; n <= n_max; ++n) ns.push_back(n);
        const std::string name = series.size() == 1 ? "kappa.svg" : "kappa_" + std::to_string(i) + ".svg";
        out.files.add(name, svg_polyline("kappa(n)^(1/n), beta=" + fmt17(s.beta), "n", "kappa(n)^(1/n)", ns, f.roots));
      }
    }
    js.push_back(rec);
  }
  out.files.add("kappa.csv", csv.str());
  nlohmann::json report{{"graph", g.id()},
                        {"x", x},
                        {"n_max", n_max},
                        {"engine", to_string(c.engine)},
                        {"couplings", detail::couplings_json(c.couplings)},
                        {"series", js}};
  if (!rho.betas.empty()) report["rho"] = {{"betas", rho.betas}, {"sups", rho.sups}, {"max", rho.max}};
  out.files.add_json("kappa.json", report);
  return out;
}

/// c2.csv: n, distance, witness, value, lo, hi, std_error, two_point, provenance.
inline CommandOutput cmd_c2(const ExperimentConfig& c) {
  detail::require_free_zero_field(c, "c2");
  const Graph g = build_family(c.family);
  const Vertex x = detail::start_vertex(c, g);
  const double beta = detail::single_beta(c, "c2");
  auto opt = c.engine_options();
  const std::string task = "c2|" + g.id() + "|" + detail::beta_key(beta);
  opt.seed = derive_seed(c.seed, task);
  CommandOutput out{OutputSet(c.out), {}};
  if (c.engine == Engine::MonteCarlo) out.seeds.push_back({task, opt.seed});
  const auto r = construct_Kn(g, c.couplings, beta, x, c.k, c.big_n, opt);

  CsvWriter csv({"n", "distance", "witness", "value", "lo", "hi", "std_error", "two_point", "provenance"});
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < r.c2.size(); ++i) {
    const auto& v = r.c2[i];
    csv.row(i + 1, r.distances[i], r.witnesses[i], v.value, v.lo, v.hi, v.std_error, r.witness_two_point[i].value,
            to_string(v.provenance));
    rows.push_back({{"n", i + 1},
                    {"distance", r.distances[i]},
                    {"witness", r.witnesses[i]},
                    {"value", v.value},
                    {"lo", v.lo},
                    {"hi", v.hi},
                    {"std_error", v.std_error},
                    {"two_point", r.witness_two_point[i].value}});
  }
  out.files.add("c2.csv", csv.str());
  out.files.add_json("c2.json", {{"graph", g.id()},
                                 {"beta", beta},
                                 {"x1", x},
                                 {"k", r.k},
                                 {"N", c.big_n},
                                 {"c", r.c},
                                 {"fitted_C", r.fitted_c},
                                 {"relative_residual", r.relative_residual},
                                 {"provenance", to_string(r.provenance)},
                                 {"couplings", detail::couplings_json(c.couplings)},
                                 {"rows", rows}});
  return out;
}

/// Wolff magnetization moments on every (size, β) cell. sweep.csv rows are
/// sorted by size then β; sweep.json adds Binder crossings and χ peaks.
inline CommandOutput cmd_sweep(const ExperimentConfig& c) {
  detail::require_free_zero_field(c, "sweep");
  auto sizes = c.sizes.empty() ? std::vector<int>{c.family.size} : c.sizes;
  std::sort(sizes.begin(), sizes.end());
  sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());
  auto betas = detail::beta_list(c, "sweep");
  const auto table = moment_sweep(c.family, sizes, betas, c.couplings, c.budget, c.seed, c.jobs);
  CommandOutput out{OutputSet(c.out), detail::sweep_seeds(table, c.family)};
  auto csv = detail::sweep_csv();
  nlohmann::json rows = nlohmann::json::array();
  detail::sweep_table(csv, rows, table);
  out.files.add("sweep.csv", csv.str());
  nlohmann::json crossings = nlohmann::json::array();
  for (const auto& x : binder_crossings(table, sizes, betas))
    crossings.push_back({{"size_small", x.size_small}, {"size_large", x.size_large}, {"beta", x.beta}});
  nlohmann::json peaks = nlohmann::json::array();
  for (const auto& p : susceptibility_peaks(table, sizes, betas.size()))
    peaks.push_back({{"size", p.size}, {"beta", p.beta}, {"chi_connected", p.chi_connected}});
  out.files.add_json("sweep.json", {{"family", c.family.name},
                                    {"sizes", sizes},
                                    {"betas", betas},
                                    {"budget", c.budget},
                                    {"rows", rows},
                                    {"binder_crossings", crossings},
                                    {"chi_peaks", peaks}});
  return out;
}

/// betac.json (method, estimate, uncertainty, crossings, peaks) plus the sweep table as betac.csv.
inline CommandOutput cmd_betac(const ExperimentConfig& c) {
  detail::require_free_zero_field(c, "betac");
  if (c.sizes.size() < 3) throw ConfigError("betac: config key 'sizes' needs at least 3 sizes");
  if (c.betas.size() < 5) throw ConfigError("betac: config key 'betas' needs at least 5 grid points");
  const auto r = estimate_beta_c(c.family, c.sizes, c.betas, c.couplings, c.budget, c.seed, c.jobs);
  CommandOutput out{OutputSet(c.out), detail::sweep_seeds(r.table, c.family)};
  auto csv = detail::sweep_csv();
  nlohmann::json rows = nlohmann::json::array();
  detail::sweep_table(csv, rows, r.table);
  out.files.add("betac.csv", csv.str());
  nlohmann::json crossings = nlohmann::json::array();
  for (const auto& x : r.crossings)
    crossings.push_back({{"size_small", x.size_small}, {"size_large", x.size_large}, {"beta", x.beta}});
  nlohmann::json peaks = nlohmann::json::array();
  for (const auto& p : r.peaks) peaks.push_back({{"size", p.size}, {"beta", p.beta}, {"chi_connected", p.chi_connected}});
  nlohmann::json report{{"family", c.family.name},
                        {"method", r.method},
                        {"estimate", r.estimate},
                        {"uncertainty", r.uncertainty},
                        {"sizes", r.sizes},
                        {"betas", r.betas},
                        {"binder_crossings", crossings},
                        {"chi_peaks", peaks}};
  if (r.tree_oracle) report["tree_oracle"] = *r.tree_oracle;
  out.files.add_json("betac.json", report);
  return out;
}

inline bool is_command(const std::string& name) {
  return name == "graph" || name == "kappa" || name == "c2" || name == "sweep" || name == "betac";
}

inline CommandOutput dispatch(const std::string& name, const ExperimentConfig& c) {
  if (name == "graph") return cmd_graph(c);
  if (name == "kappa") return cmd_kappa(c);
  if (name == "c2") return cmd_c2(c);
  if (name == "sweep") return cmd_sweep(c);
  if (name == "betac") return cmd_betac(c);
  throw ConfigError("unknown command '" + name + "'");
}

/// Runs a command, writes its files, config.json and manifest.json, and returns the manifest.
inline nlohmann::json run_command(const std::string& name, const ExperimentConfig& c) {
  const auto start = std::chrono::steady_clock::now();
  auto result = dispatch(name, c);
  result.files.add_json("config.json", emit_config(c));
  auto listing = result.files.write();
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  nlohmann::json seeds = nlohmann::json::array();
  for (const auto& s : result.seeds) seeds.push_back({{"task", s.task}, {"seed", s.seed}});
  nlohmann::json manifest{{"manifest_version", kManifestVersion},
                          {"tool", kToolName},
                          {"version", kToolVersion},
                          {"command", name},
                          {"config_hash", config_hash(c)},
                          {"config", emit_config(c)},
                          {"master_seed", c.seed},
                          {"seeds", seeds},
                          {"timing_seconds", seconds},
                          {"outputs", listing}};
  OutputSet m(c.out);
  m.add_json("manifest.json", manifest);
  m.write();
  return manifest;
}

}  // namespace isingg::cli
