#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>
#include <stdexcept>
#include <vector>

#include "isingg/exact.hpp"
#include "isingg/generators.hpp"
#include "isingg/mc.hpp"
#include "isingg/parallel.hpp"
#include "isingg/stats.hpp"

using namespace isingg;

namespace {

void expect_within_3se(const EstimateWithCI& e, double exact, const std::string& what = "") {
  EXPECT_LE(std::abs(e.mean - exact), 3.0 * e.std_error + 1e-12)
      << what << " mean=" << e.mean << " se=" << e.std_error << " exact=" << exact;
}

}  // namespace

TEST(Rng, SeedDerivation) {
  EXPECT_EQ(derive_seed(7, "a"), derive_seed(7, "a"));
  EXPECT_NE(derive_seed(7, "a"), derive_seed(7, "b"));
  EXPECT_NE(derive_seed(7, "a"), derive_seed(8, "a"));
  Xoshiro256 r(42), s(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(r(), s());
  for (int i = 0; i < 10000; ++i) {
    const double u = r.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    EXPECT_LT(r.below(7), 7u);
  }
}

TEST(Binning, IidSignsMatchSamplingLaw) {
  Xoshiro256 rng(1);
  std::vector<double> x(1 << 16);
  for (auto& v : x) v = (rng() >> 63) ? 1.0 : -1.0;
  const auto e = binning_stats(x);
  const double expected = 1.0 / std::sqrt(static_cast<double>(x.size()));
  EXPECT_NEAR(e.std_error, expected, 0.2 * expected);
  EXPECT_EQ(e.n_samples, x.size());
}

TEST(Binning, ConstantSeriesHasZeroError) {
  const std::vector<double> x(5000, 0.375);
  const auto e = binning_stats(x);
  EXPECT_EQ(e.mean, 0.375);
  EXPECT_EQ(e.std_error, 0.0);
}

TEST(Binning, TwoValuedFloor) {
  BinningAccumulator never(0.0, 1.0), rare(-1.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    never.add(0.0);
    rare.add(i % 500 == 7 ? -1.0 : 1.0);
  }
  const double p0 = 0.5 / 1001.0, p2 = 2.5 / 1001.0;
  EXPECT_NEAR(never.result().std_error, std::sqrt(p0 * (1 - p0) / 1000), 1e-15);
  EXPECT_GE(rare.result().std_error, 2.0 * std::sqrt(p2 * (1 - p2) / 1000) - 1e-15);
  BinningAccumulator plain;
  for (int i = 0; i < 1000; ++i) plain.add(0.0);
  EXPECT_EQ(plain.result().std_error, 0.0);
}

TEST(Binning, AutoregressiveAutocorrelationTime) {
  const double phi = 0.9;
  Xoshiro256 rng(2024);
  std::normal_distribution<double> gauss;
  BinningAccumulator acc;
  double v = 0.0;
  for (std::size_t i = 0; i < (std::size_t{1} << 22); ++i) {
    v = phi * v + gauss(rng);
    acc.add(v);
  }
  const auto e = acc.result();
  const double tau = (1 + phi) / (1 - phi);
  EXPECT_NEAR(e.autocorrelation_time, tau, 0.3 * tau);
}

TEST(Jackknife, RatioOfMeans) {
  std::vector<double> a(3200), b(3200);
  Xoshiro256 rng(3);
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = 1.0 + rng.uniform();
    b[i] = 2.0 + rng.uniform();
  }
  const auto r = jackknife(a, b, [](double p, double q) { return p / q; });
  EXPECT_NEAR(r.value, 1.5 / 2.5, 0.01);
  EXPECT_GT(r.std_error, 0.0);
  EXPECT_LT(r.std_error, 0.01);
}

TEST(Wolff, BetaZeroFlipsSingleSites) {
  const auto g = build_torus(2, 4);
  const auto inter = resolve(g, Couplings::nearest_neighbor());
  ChainState state(g.vertex_count(), 9);
  for (int i = 0; i < 200; ++i) EXPECT_EQ(wolff_sweep(state, inter, 0.0), 1u);
  EXPECT_THROW(wolff_sweep(state, inter, 0.3, 0.1), std::invalid_argument);
}

TEST(Wolff, StrongCouplingEngulfsCycle) {
  const auto g = build_torus(1, 16);
  const auto inter = resolve(g, Couplings::nearest_neighbor());
  ChainState state(g.vertex_count(), 10);
  double total = 0.0;
  const int n = 2000;
  for (int i = 0; i < n; ++i) total += static_cast<double>(wolff_sweep(state, inter, 3.0));
  EXPECT_GE(total / n, 0.9 * 16);
  // Cross-check against the exact nearest-neighbor correlation, which is ≈ 1 here.
  const std::vector<VertexPair> pair{{0, 1}};
  const auto est = wolff_two_point(g, Couplings::nearest_neighbor(), 3.0, pair, 2000, 11)[0];
  const double exact = correlation(g, Couplings::nearest_neighbor(), GibbsParams(3.0), 0, 1);
  EXPECT_GT(exact, 0.99);
  EXPECT_NEAR(est.mean, exact, 0.02);
}

TEST(Wolff, SingleEdgeTwoPoint) {
  const auto g = build_box(1, 2);
  const std::vector<VertexPair> pair{{0, 1}};
  const auto e = wolff_two_point(g, Couplings::nearest_neighbor(), 0.5, pair, 20000, 5)[0];
  expect_within_3se(e, std::tanh(0.5));
}

TEST(Metropolis, BetaZeroUniformSpins) {
  const auto g = build_box(2, 3);
  const auto e = metropolis_magnetization(g, Couplings::nearest_neighbor(), 0.0, 0.0, 4, 20000, 6);
  expect_within_3se(e, 0.0);
  const auto inter = resolve(g, Couplings::nearest_neighbor());
  ChainState state(g.vertex_count(), 1);
  EXPECT_EQ(metropolis_sweep(state, inter, 0.0, 0.0), g.vertex_count());  // every proposal accepted
}

TEST(Metropolis, SingleVertexField) {
  const auto g = build_tree_ball(3, 0);
  const auto e = metropolis_magnetization(g, Couplings::nearest_neighbor(), 0.8, 0.5, 0, 20000, 7);
  expect_within_3se(e, std::tanh(0.4));
}

TEST(Metropolis, BoxWithFieldMatchesEnumeration) {
  const auto g = build_box(2, 3);
  const auto j = Couplings::nearest_neighbor();
  for (Vertex x : {0, 1, 4}) {
    const auto e = metropolis_magnetization(g, j, 0.3, 0.2, x, 40000, 8 + x);
    expect_within_3se(e, magnetization(g, j, GibbsParams(0.3, 0.2), x), "x=" + std::to_string(x));
  }
}

TEST(FkTwoPoint, BetaZeroAndDiagonal) {
  const auto g = build_torus(2, 4);
  const std::vector<VertexPair> pairs{{0, 1}, {0, 5}, {3, 3}};
  const auto run = fk_two_point(g, Couplings::nearest_neighbor(), 0.0, pairs, 500, 1);
  // Never connected: the error is the half-count binomial floor, not zero.
  const double n = 500.0 - static_cast<double>(discard_count(500));
  const double p = 0.5 / (n + 1.0);
  EXPECT_EQ(run.pairs[0].fk.mean, 0.0);
  EXPECT_NEAR(run.pairs[0].fk.std_error, std::sqrt(p * (1 - p) / n), 1e-15);
  EXPECT_EQ(run.pairs[1].fk.mean, 0.0);
  EXPECT_EQ(run.pairs[2].fk.mean, 1.0);
  EXPECT_NEAR(run.pairs[2].fk.std_error, std::sqrt(p * (1 - p) / n), 1e-15);
  EXPECT_EQ(run.generator, std::string("xoshiro256**"));
}

TEST(FkTwoPoint, SingleEdge) {
  const auto g = build_box(1, 2);
  const std::vector<VertexPair> pairs{{0, 1}};
  const auto run = fk_two_point(g, Couplings::nearest_neighbor(), 0.5, pairs, 20000, 12);
  expect_within_3se(run.pairs[0].fk, std::tanh(0.5));
  EXPECT_TRUE(run.pairs[0].flagged);
}

TEST(FkTwoPoint, EstimatorsAgreeAndStayInUnitInterval) {
  const auto g = build_torus(2, 4);
  std::vector<VertexPair> pairs;
  for (Vertex y = 1; y < 16; ++y) pairs.emplace_back(0, y);
  const auto run = fk_two_point(g, Couplings::nearest_neighbor(), 0.44, pairs, 8000, 13);
  int disagree = 0;
  for (const auto& p : run.pairs) {
    EXPECT_GE(p.fk.mean, 0.0);
    EXPECT_LE(p.fk.mean, 1.0);
    const double joint = std::hypot(p.fk.std_error, p.spin.std_error);
    if (std::abs(p.fk.mean - p.spin.mean) > 3.0 * joint) ++disagree;
  }
  EXPECT_LE(disagree, 1);
}

TEST(FkTwoPoint, DeterministicForFixedSeed) {
  const auto g = build_lamplighter_ball(4);
  const std::vector<VertexPair> pairs{{0, 5}, {0, 17}};
  const auto a = fk_two_point(g, Couplings::nearest_neighbor(), 0.6, pairs, 1000, 99);
  const auto b = fk_two_point(g, Couplings::nearest_neighbor(), 0.6, pairs, 1000, 99);
  const auto c = fk_two_point(g, Couplings::nearest_neighbor(), 0.6, pairs, 1000, 100);
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    EXPECT_EQ(a.pairs[k].fk.mean, b.pairs[k].fk.mean);
    EXPECT_EQ(a.pairs[k].fk.std_error, b.pairs[k].fk.std_error);
  }
  EXPECT_NE(a.pairs[1].fk.mean, c.pairs[1].fk.mean);
}

TEST(FkTwoPoint, BudgetGuard) {
  const auto g = build_box(1, 2);
  const std::vector<VertexPair> pairs{{0, 1}};
  EXPECT_THROW(fk_two_point(g, Couplings::nearest_neighbor(), 0.5, pairs, 50, 1), std::invalid_argument);
}

TEST(PlusMagnetization, BetaZero) {
  const auto g = build_box(2, 5);
  expect_within_3se(estimate_magnetization_plus(g, Couplings::nearest_neighbor(), 0.0, g.origin, 20000, 14), 0.0);
}

TEST(PlusMagnetization, StarCentre) {
  const auto g = build_tree_ball(3, 1);  // centre plus three clamped leaves
  for (double beta : {0.2, 0.5}) {
    const auto e = estimate_magnetization_plus(g, Couplings::nearest_neighbor(), beta, g.origin, 40000, 15);
    expect_within_3se(e, std::tanh(3.0 * beta));
  }
}

TEST(PlusMagnetization, MonotoneInBeta) {
  const auto g = build_box(2, 5);
  const auto lo = estimate_magnetization_plus(g, Couplings::nearest_neighbor(), 0.3, g.origin, 20000, 16);
  const auto hi = estimate_magnetization_plus(g, Couplings::nearest_neighbor(), 1.0, g.origin, 20000, 17);
  EXPECT_GT(hi.mean - lo.mean, 3.0 * std::hypot(hi.std_error, lo.std_error));
}

TEST(Calibration, SmallGraphsWithinThreeSigma) {
  int cells = 0, ok = 0;
  for (const auto& g : {build_torus(2, 4), build_tree_ball(3, 2), build_lamplighter_ball(2)})
    for (double beta : {0.2, 0.44, 0.8}) {
      std::vector<VertexPair> pairs;
      std::vector<Vertex> targets;
      for (Vertex y = 1; y < static_cast<Vertex>(g.vertex_count()); ++y) {
        pairs.emplace_back(0, y);
        targets.push_back(y);
      }
      const auto run = fk_two_point(g, Couplings::nearest_neighbor(), beta, pairs, 4000, derive_seed(3, g.id()));
      const auto exact = correlations_from(g, Couplings::nearest_neighbor(), GibbsParams(beta), 0, targets);
      for (std::size_t k = 0; k < pairs.size(); ++k) {
        ++cells;
        if (std::abs(run.pairs[k].fk.mean - exact[k]) <= 3.0 * run.pairs[k].fk.std_error + 1e-12) ++ok;
      }
    }
  EXPECT_GE(static_cast<double>(ok) / cells, 0.95) << ok << "/" << cells;
}

TEST(Moments, DeterministicAndSane) {
  const auto g = build_torus(2, 6);
  const auto a = sample_moments(g, Couplings::nearest_neighbor(), 0.3, 2000, 21);
  const auto b = sample_moments(g, Couplings::nearest_neighbor(), 0.3, 2000, 21);
  EXPECT_EQ(a.m2.mean, b.m2.mean);
  EXPECT_EQ(a.binder.value, b.binder.value);
  EXPECT_GT(a.m2.mean, 0.0);
  EXPECT_LE(a.m4.mean, a.m2.mean);
  const auto cold = sample_moments(g, Couplings::nearest_neighbor(), 1.0, 2000, 22);
  EXPECT_NEAR(cold.binder.value, 2.0 / 3.0, 0.01);
}

TEST(Parallel, OrderedResultsAndErrors) {
  for (std::size_t jobs : {1u, 3u, 8u}) {
    const auto r = parallel_map(50, jobs, [](std::size_t i) { return static_cast<int>(i * i); });
    for (std::size_t i = 0; i < 50; ++i) EXPECT_EQ(r[i], static_cast<int>(i * i));
  }
  EXPECT_THROW(parallel_map(10, 4,
                            [](std::size_t i) {
                              if (i == 7) throw std::runtime_error("boom");
                              return 0;
                            }),
               std::runtime_error);
}
