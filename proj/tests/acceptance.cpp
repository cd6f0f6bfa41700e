// Acceptance suite: one PASS/FAIL line per criterion, exit status 0 iff all pass.
// usage: acceptance <path to ising-graphs> <scratch dir>

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "isingg/construction.hpp"
#include "isingg/critical.hpp"
#include "isingg/kappa.hpp"

using namespace isingg;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const Couplings nn = Couplings::nearest_neighbor();

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, const std::string& name, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!o.pass) ++failures;
  std::printf("[%s] criterion %2d: %s | %s | %.1f s\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str(),
              secs);
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

double elapsed_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

EngineOptions engine(Engine e, std::uint64_t budget = 4000, std::uint64_t seed = 1) {
  EngineOptions o;
  o.engine = e;
  o.budget = budget;
  o.seed = seed;
  return o;
}

// Every exact series produced below is also run through the growth-bound check (criterion 5).
std::vector<KappaSeries> all_series;

KappaSeries record(KappaSeries s) {
  all_series.push_back(s);
  return s;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::fprintf(stderr, "usage: acceptance <ising-graphs binary> <scratch dir>\n");
    return 2;
  }
  const std::string tool = argv[1];
  const fs::path scratch = argv[2];
  fs::remove_all(scratch);
  fs::create_directories(scratch);
  const auto suite_start = std::chrono::steady_clock::now();

  criterion(1, "enumeration == tree product, 3-regular tree ball r=3, all pairs from root", [] {
    const auto t0 = std::chrono::steady_clock::now();
    const auto g = build_tree_ball(3, 3);
    std::vector<Vertex> targets;
    for (std::size_t v = 0; v < g.vertex_count(); ++v) targets.push_back(static_cast<Vertex>(v));
    double worst = 0.0;
    for (double beta : {0.2, 0.5, 1.0}) {
      const auto e = correlations_from(g, nn, GibbsParams(beta), g.origin, targets);
      const auto t = tree_correlations_from(g, nn, GibbsParams(beta), g.origin);
      for (std::size_t k = 0; k < targets.size(); ++k) worst = std::max(worst, std::abs(e[k] - t[targets[k]]));
    }
    const double secs = elapsed_since(t0);
    return Outcome{g.vertex_count() == 22 && worst < 1e-10 && secs <= 60.0,
                   fmt("|V|=22, max |diff| = %.3g (< 1e-10), %.2f s (<= 60 s)", worst, secs)};
  });

  criterion(2, "Griffiths pair and triple inequalities on 4x4 torus and 3x3 box", [] {
    long checks = 0, violations = 0;
    double worst = 0.0;
    for (const auto& g : {build_torus(2, 4), build_box(2, 3)})
      for (double beta : {0.2, 0.44, 0.8}) {
        const auto m = correlation_matrix(g, nn, GibbsParams(beta));
        const std::size_t n = g.vertex_count();
        for (std::size_t x = 0; x < n; ++x)
          for (std::size_t y = 0; y < n; ++y) {
            ++checks;
            if (m[x * n + y] < -1e-12) ++violations;
            worst = std::min(worst, m[x * n + y]);
            for (std::size_t z = 0; z < n; ++z) {
              const double slack = m[x * n + y] - m[x * n + z] * m[z * n + y];
              ++checks;
              worst = std::min(worst, slack);
              if (slack < -1e-12) ++violations;
            }
          }
      }
    return Outcome{violations == 0, fmt("%.0f inequalities, %.0f violations, most negative slack %.3g", checks,
                                         violations, worst)};
  });

  criterion(3, "tree kappa series = tanh(bJ)^n and supermultiplicative", [] {
    double worst = 0.0;
    std::size_t violations = 0, series = 0;
    auto check = [&](const Graph& g, double beta, Engine e) {
      const auto s = record(kappa(g, nn, beta, g.origin, g.radius, engine(e)));
      for (int n = 0; n <= s.n_max(); ++n) worst = std::max(worst, std::abs(s[n] - std::pow(std::tanh(beta), n)));
      violations += check_supermultiplicative(s).violations.size();
      ++series;
    };
    for (double beta : {0.1, 0.3, 0.5493, 0.8, 1.5}) {
      check(build_tree_ball(3, 12), beta, Engine::Tree);
      check(build_tree_ball(3, 3), beta, Engine::Enumeration);
      check(build_tree_ball(4, 6), beta, Engine::Tree);
    }
    return Outcome{worst < 1e-10 && violations == 0,
                   fmt("%.0f series, max |kappa - tanh^n| = %.3g (< 1e-10), %.0f violations", series, worst,
                       violations)};
  });

  criterion(4, "monotonicity in volume and beta, nested d=1 boxes 3,5,7,9, beta 0..1", [] {
    const std::vector<int> sides{3, 5, 7, 9};
    std::vector<double> betas;
    for (int i = 0; i <= 10; ++i) betas.push_back(0.1 * i);
    const auto p = monotonicity_profile(nested_boxes(1, sides, 1), nn, betas, 1e-12);
    return Outcome{p.violations.empty() && p.values.size() == 4 && p.values[0].size() == 11,
                   fmt("4 volumes x 11 betas, %.0f violations beyond 1e-12", p.violations.size())};
  });

  criterion(5, "kappa(n)|Lambda_n| <= partial susceptibility; tree d=3 bJ=0.3 within 1% of limit by n=12", [] {
    const auto g = build_tree_ball(3, 12);
    const auto s = record(kappa(g, nn, 0.3, g.origin, 12));
    for (double beta : {0.2, 0.44}) record(kappa(build_lamplighter_ball(3), nn, beta, 0, 2, engine(Engine::Enumeration)));
    record(kappa(build_box(1, 21), nn, 0.9, build_box(1, 21).origin, 10));
    std::size_t failing = 0, records = 0;
    for (const auto& series : all_series) {
      const auto rep = growth_bound_report(series, 1e-12);
      records += rep.records.size();
      for (const auto& r : rep.records)
        if (r.kappa_times_volume > r.partial_susceptibility + 1e-12) ++failing;
    }
    const double t = std::tanh(0.3);
    const double limit = 1.0 + 3.0 * t / (1.0 - 2.0 * t);
    const double chi12 = s.entries[12].partial_susceptibility;
    const double rel = std::abs(chi12 - limit) / limit;
    return Outcome{failing == 0 && rel < 0.01,
                   fmt("%.0f records over all series, %.0f failing; chi_12 = %.6f vs limit %.6f ",
                       records, failing, chi12, limit) +
                       fmt(" (rel %.3g < 0.01)", rel)};
  });

  criterion(6, "beta = 0 identities", [] {
    bool ok = true;
    std::string where;
    for (const auto& g : {build_torus(2, 4), build_box(2, 4), build_tree_ball(3, 3), build_lamplighter_ball(3)}) {
      const auto r = enumerate(g, nn, GibbsParams(0.0), {});
      if (std::abs(r.log_z - static_cast<double>(g.vertex_count()) * std::log(2.0)) > 1e-12) {
        ok = false;
        where += " logZ:" + g.id();
      }
      const auto s = (kappa(g, nn, 0.0, g.origin, std::min(g.radius, 3), engine(Engine::Enumeration)));
      for (int n = 1; n <= s.n_max(); ++n)
        if (s[n] != 0.0) {
          ok = false;
          where += " kappa:" + g.id();
        }
    }
    const auto tree = build_tree_ball(3, 16);
    const auto kn = construct_Kn(tree, nn, 0.0, tree.origin, 2, 4);
    for (std::size_t n = 0; n < kn.c2.size(); ++n)
      if (kn.c2[n].value != 1.0 / static_cast<double>(n + 1)) {
        ok = false;
        where += " C2(K_" + std::to_string(n + 1) + ")";
      }
    const auto torus = build_torus(2, 4);
    if (c2_functional(torus, nn, 0.0, VertexSet{0, 1, 2, 5, 10, 15}).value != 1.0 / 6) {
      ok = false;
      where += " C2 torus";
    }
    return Outcome{ok, ok ? "log Z = |V| ln 2 (1e-12), kappa(n>=1) = 0, C2(K_n) = 1/n exactly" : "failed:" + where};
  });

  criterion(7, "MC calibration on all generated graphs with <= 16 vertices (FK and Wolff), 3 sigma", [] {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<Graph> graphs;
    for (int l = 3; l <= 16; ++l) graphs.push_back(build_torus(1, l));
    for (int l = 2; l <= 16; ++l) graphs.push_back(build_box(1, l));
    graphs.push_back(build_torus(2, 3));
    graphs.push_back(build_torus(2, 4));
    for (int l = 2; l <= 4; ++l) graphs.push_back(build_box(2, l));
    graphs.push_back(build_box(3, 2));
    for (int deg = 3; deg <= 15; ++deg) graphs.push_back(build_tree_ball(deg, 1));
    graphs.push_back(build_tree_ball(3, 2));
    graphs.push_back(build_lamplighter_ball(1));
    graphs.push_back(build_lamplighter_ball(2));
    long fk_cells = 0, fk_ok = 0, wolff_cells = 0, wolff_ok = 0;
    for (const auto& g : graphs)
      for (double beta : {0.2, 0.44, 0.8}) {
        std::vector<VertexPair> pairs;
        const auto n = static_cast<Vertex>(g.vertex_count());
        for (Vertex x = 0; x < n; ++x)
          for (Vertex y = x + 1; y < n; ++y) pairs.emplace_back(x, y);
        const auto key = sweep_task_key(g, beta);
        const auto exact = two_point(g, nn, beta, pairs, engine(Engine::Enumeration));
        const auto fk = fk_two_point(g, nn, beta, pairs, 4000, derive_seed(7, "fk|" + key));
        const auto wolff = wolff_two_point(g, nn, beta, pairs, 4000, derive_seed(7, "wolff|" + key));
        for (std::size_t k = 0; k < pairs.size(); ++k) {
          const double truth = exact[k].value;
          ++fk_cells;
          ++wolff_cells;
          if (std::abs(fk.pairs[k].fk.mean - truth) <= 3.0 * fk.pairs[k].fk.std_error + 1e-12) ++fk_ok;
          if (std::abs(wolff[k].mean - truth) <= 3.0 * wolff[k].std_error + 1e-12) ++wolff_ok;
        }
      }
    const double secs = elapsed_since(t0);
    const double fk_rate = static_cast<double>(fk_ok) / fk_cells;
    const double wolff_rate = static_cast<double>(wolff_ok) / wolff_cells;
    return Outcome{fk_rate >= 0.95 && wolff_rate >= 0.95 && secs <= 600.0,
                   fmt("%.0f graphs; FK %.4f, Wolff %.4f of cells within 3 se (>= 0.95); %.1f s (<= 600 s)",
                       graphs.size(), fk_rate, wolff_rate, secs) +
                       " [" + std::to_string(fk_cells) + " cells each]"};
  });

  double lamplighter_pc = 0.0;
  criterion(8, "beta_c: tree recursion to 1e-6; Z^2 Binder crossing L=8,16,32 within 0.02 of 0.4407", [&] {
    const std::vector<double> tree_grid{0.3, 0.4, 0.5, 0.6, 0.7};
    double tree_err = 0.0;
    for (int degree : {3, 4, 5}) {
      const std::vector<int> sizes{2, 3, 4};
      const auto r = estimate_beta_c(FamilySpec{"tree", 2, degree, 4}, sizes, tree_grid, nn, 200, 1);
      tree_err = std::max(tree_err, std::abs(r.estimate - std::atanh(1.0 / (degree - 1))));
    }
    std::vector<double> grid;
    for (int i = 0; i <= 12; ++i) grid.push_back(0.38 + 0.01 * i);
    const std::vector<int> sizes{8, 16, 32};
    const auto z2 = estimate_beta_c(FamilySpec{"torus", 2, 3, 0}, sizes, grid, nn, 4000, 2024);
    const double onsager = 0.5 * std::log(1.0 + std::sqrt(2.0));
    const double err = std::abs(z2.estimate - onsager);
    std::string crossings;
    for (const auto& c : z2.crossings)
      crossings += " " + std::to_string(c.size_small) + "/" + std::to_string(c.size_large) + "@" + fmt("%.4f", c.beta);
    return Outcome{tree_err < 1e-6 && z2.method == "binder" && err < 0.02,
                   fmt("tree max err %.2g (< 1e-6); Z^2 estimate %.4f +- %.4f vs %.4f", tree_err, z2.estimate,
                       z2.uncertainty, onsager) +
                       fmt(" (|diff| %.4f < 0.02); crossings", err) + crossings};
  });

  criterion(9, "K_n construction: tree exact; lamplighter MC 10-20% below pseudo-critical point", [&] {
    const auto tree = build_tree_ball(3, 16);
    const auto t = construct_Kn(tree, nn, 0.3, tree.origin, 2, 4);
    bool tree_ok = t.relative_residual < 0.1;
    for (std::size_t n = 1; n < t.c2.size(); ++n) tree_ok = tree_ok && t.c2[n].value < t.c2[n - 1].value;

    std::vector<double> grid;
    for (int i = 0; i <= 14; ++i) grid.push_back(0.3 + 0.05 * i);
    const std::vector<int> radii{8, 12, 16};
    const auto pc = estimate_beta_c(FamilySpec{"lamplighter", 2, 3, 0}, radii, grid, nn, 1000, 99);
    lamplighter_pc = pc.estimate;
    const double beta = 0.85 * pc.estimate;
    const auto lamp = build_lamplighter_ball(16);
    const auto r = construct_Kn(lamp, nn, beta, lamp.origin, 2, 4, engine(Engine::MonteCarlo, 2000, 5));
    bool decreasing = true;
    for (std::size_t n = 1; n < r.c2.size(); ++n) decreasing = decreasing && r.c2[n].value < r.c2[n - 1].value;
    const bool separated = r.c2[3].hi < r.c2[1].lo;
    std::string peaks;
    for (const auto& p : pc.peaks) peaks += " r" + std::to_string(p.size) + "@" + fmt("%.2f", p.beta);
    return Outcome{tree_ok && decreasing && separated,
                   fmt("tree C2 = %.4f %.4f %.4f, fit residual %.4f;", t.c2[1].value, t.c2[2].value, t.c2[3].value,
                       t.relative_residual) +
                       " lamplighter chi peaks" + peaks + fmt("; beta = 0.85 x %.2f = %.4f on |V|=%.0f;",
                                                              pc.estimate, beta, lamp.vertex_count()) +
                       fmt(" C2(K_2) [%.4f, %.4f], C2(K_4) [%.4f, %.4f]", r.c2[1].lo, r.c2[1].hi, r.c2[3].lo,
                           r.c2[3].hi)};
  });

  criterion(10, "CLI: re-run from manifest byte-identical; --jobs 1 vs 8 identical outputs", [&] {
    const std::vector<std::pair<std::string, json>> runs{
        {"graph", {{"family", {{"name", "lamplighter"}, {"radius", 8}}}}},
        {"kappa",
         {{"family", {{"name", "tree"}, {"degree", 3}, {"radius", 6}}},
          {"betas", {0.2, 0.3, 0.4}},
          {"engine", "mc"},
          {"budget", 500},
          {"plot", true}}},
        {"c2",
         {{"family", {{"name", "lamplighter"}, {"radius", 9}}},
          {"beta", 0.4},
          {"engine", "mc"},
          {"budget", 500},
          {"k", 2},
          {"N", 3}}},
        {"sweep", {{"family", {{"name", "torus"}, {"d", 2}, {"L", 4}}}, {"betas", {0.3, 0.44, 0.6}}, {"sizes", {4, 8}}, {"budget", 300}}},
        {"betac",
         {{"family", {{"name", "torus"}, {"d", 2}, {"L", 4}}},
          {"betas", {0.36, 0.40, 0.44, 0.48, 0.52}},
          {"sizes", {4, 6, 8}},
          {"budget", 500}}}};
    int mismatches = 0, compared = 0;
    std::string notes;
    auto run = [&](const std::string& args) {
      const int status = std::system((tool + " " + args + " >/dev/null 2>&1").c_str());
      return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    };
    for (const auto& [cmd, cfg] : runs) {
      const auto base = scratch / ("cli_" + cmd);
      fs::create_directories(base);
      const auto cfg_path = base / "in.json";
      std::ofstream(cfg_path) << cfg.dump(2);
      const auto d1 = base / "jobs1", d8 = base / "jobs8", keep = base / "jobs1_first";
      if (run(cmd + " --config " + cfg_path.string() + " --seed 17 --jobs 1 --out " + d1.string()) != 0 ||
          run(cmd + " --config " + cfg_path.string() + " --seed 17 --jobs 8 --out " + d8.string()) != 0) {
        ++mismatches;
        notes += " " + cmd + ":run-failed";
        continue;
      }
      fs::copy(d1, keep, fs::copy_options::recursive);
      // Re-run purely from the manifest: same command, same output directory.
      if (run(cmd + " --config " + (keep / "manifest.json").string()) != 0) {
        ++mismatches;
        notes += " " + cmd + ":rerun-failed";
        continue;
      }
      for (const auto& entry : fs::directory_iterator(keep)) {
        const auto name = entry.path().filename().string();
        if (name == "manifest.json") {
          auto a = json::parse(slurp(entry.path())), b = json::parse(slurp(d1 / name));
          a.erase("timing_seconds");
          b.erase("timing_seconds");
          ++compared;
          if (a != b) ++mismatches, notes += " " + cmd + ":manifest";
          continue;
        }
        ++compared;
        if (slurp(entry.path()) != slurp(d1 / name)) ++mismatches, notes += " " + cmd + ":rerun:" + name;
        if (name == "config.json") continue;  // records jobs and out by design
        ++compared;
        if (slurp(entry.path()) != slurp(d8 / name)) ++mismatches, notes += " " + cmd + ":jobs:" + name;
      }
    }
    return Outcome{mismatches == 0 && compared > 0,
                   std::to_string(runs.size()) + " commands, " + std::to_string(compared) + " file comparisons, " +
                       std::to_string(mismatches) + " mismatches" + notes};
  });

  std::printf("acceptance: %d failing criteria, total %.1f s\n", failures, elapsed_since(suite_start));
  return failures == 0 ? 0 : 1;
}
