#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace isingg {

struct EstimateWithCI {
  double mean = 0.0;
  double std_error = 0.0;
  std::uint64_t n_samples = 0;
  double autocorrelation_time = 0.0;  // (σ_binned / σ_naive)², i.e. 1 + 2 Σ_t ρ(t)
  std::string method;

  double lower95() const { return mean - 1.96 * std_error; }
  double upper95() const { return mean + 1.96 * std_error; }
};

inline constexpr std::uint64_t kMinBinningSamples = 16;

/**
 * Online logarithmic binning. Level l holds means of consecutive blocks of
 * 2^l samples; the error is read off the deepest level that still has
 * enough blocks (the plateau), with block length capped at 1024 once the
 * series is long enough to afford it.
 */
class BinningAccumulator {
 public:
  BinningAccumulator() = default;
  // Declares that every sample is `a` or `b`. The reported error is then floored at the
  // binomial error with a half-count correction, so a run that never sees the rarer value
  // does not report zero uncertainty.
  BinningAccumulator(double a, double b) : two_valued_(true), a_(a), b_(b) {}

  void add(double x) {
    ++count_;
    lo_ = std::min(lo_, x);
    hi_ = std::max(hi_, x);
    push(0, x);
  }

  std::uint64_t count() const { return count_; }
  double mean() const { return levels_.empty() ? 0.0 : levels_[0].mean; }

  EstimateWithCI result(std::string method = "binning") const {
    if (count_ < kMinBinningSamples)
      throw std::invalid_argument("binning: need at least " + std::to_string(kMinBinningSamples) + " samples");
    EstimateWithCI e;
    e.method = std::move(method);
    e.n_samples = count_;
    e.mean = levels_[0].mean;
    if (lo_ == hi_) {
      e.mean = lo_;
      e.std_error = two_point_floor();
      return e;
    }
    const std::uint64_t min_bins = std::max<std::uint64_t>({kMinBinningSamples, std::min<std::uint64_t>(128, count_ / 16),
                                                           count_ / 1024});
    std::size_t plateau = 0;
    for (std::size_t l = 0; l < levels_.size(); ++l)
      if (levels_[l].bins >= min_bins) plateau = l;
    const double naive = level_error(0);
    e.std_error = std::max(level_error(plateau), 0.0);
    e.autocorrelation_time = naive > 0 ? (e.std_error / naive) * (e.std_error / naive) : 0.0;
    e.std_error = std::max(e.std_error, two_point_floor());
    return e;
  }

  // Standard error at each level (for diagnostics and plots).
  std::vector<double> level_errors() const {
    std::vector<double> out;
    for (std::size_t l = 0; l < levels_.size(); ++l)
      if (levels_[l].bins >= 2) out.push_back(level_error(l));
    return out;
  }

 private:
  double two_point_floor() const {
    if (!two_valued_ || count_ == 0) return 0.0;
    const double n = static_cast<double>(count_);
    const double hits = std::round(n * (levels_[0].mean - a_) / (b_ - a_));
    const double p = (std::min(hits, n - hits) + 0.5) / (n + 1.0);
    return std::abs(b_ - a_) * std::sqrt(p * (1.0 - p) / n);
  }

  bool two_valued_ = false;
  double a_ = 0.0, b_ = 1.0;

  struct Level {
    std::uint64_t bins = 0;
    double mean = 0.0;
    double m2 = 0.0;
    double carry = 0.0;
    bool has_carry = false;
  };

  void push(std::size_t l, double x) {
    if (levels_.size() <= l) levels_.emplace_back();
    auto& lv = levels_[l];
    ++lv.bins;
    const double delta = x - lv.mean;
    lv.mean += delta / static_cast<double>(lv.bins);
    lv.m2 += delta * (x - lv.mean);
    if (lv.has_carry) {
      const double pair = 0.5 * (lv.carry + x);
      lv.has_carry = false;
      push(l + 1, pair);
    } else {
      lv.carry = x;
      lv.has_carry = true;
    }
  }

  double level_error(std::size_t l) const {
    const auto& lv = levels_[l];
    if (lv.bins < 2) return 0.0;
    const double var = std::max(lv.m2, 0.0) / static_cast<double>(lv.bins - 1);
    return std::sqrt(var / static_cast<double>(lv.bins));
  }

  std::uint64_t count_ = 0;
  double lo_ = std::numeric_limits<double>::infinity();
  double hi_ = -std::numeric_limits<double>::infinity();
  std::vector<Level> levels_;
};

inline EstimateWithCI binning_stats(std::span<const double> samples, std::string method = "binning") {
  BinningAccumulator acc;
  for (double x : samples) acc.add(x);
  return acc.result(std::move(method));
}

struct JackknifeEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// Block jackknife of f(⟨a⟩, ⟨b⟩) over equally sized contiguous blocks.
inline JackknifeEstimate jackknife(std::span<const double> a, std::span<const double> b,
                                   const std::function<double(double, double)>& f, std::size_t blocks = 32) {
  if (a.size() != b.size() || a.size() < blocks) throw std::invalid_argument("jackknife: series too short");
  const std::size_t len = a.size() / blocks;
  std::vector<double> sa(blocks, 0.0), sb(blocks, 0.0);
  double ta = 0, tb = 0;
  for (std::size_t k = 0; k < blocks; ++k) {
    for (std::size_t i = k * len; i < (k + 1) * len; ++i) {
      sa[k] += a[i];
      sb[k] += b[i];
    }
    ta += sa[k];
    tb += sb[k];
  }
  const double used = static_cast<double>(blocks * len);
  JackknifeEstimate out;
  out.value = f(ta / used, tb / used);
  const double rest = used - static_cast<double>(len);
  std::vector<double> loo(blocks);
  double mean_loo = 0;
  for (std::size_t k = 0; k < blocks; ++k) {
    loo[k] = f((ta - sa[k]) / rest, (tb - sb[k]) / rest);
    mean_loo += loo[k] / static_cast<double>(blocks);
  }
  double ss = 0;
  for (double v : loo) ss += (v - mean_loo) * (v - mean_loo);
  out.std_error = std::sqrt(ss * static_cast<double>(blocks - 1) / static_cast<double>(blocks));
  return out;
}

}  // namespace isingg
