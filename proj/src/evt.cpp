#include "pairlab/evt.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "pairlab/error.hpp"
#include "pairlab/parallel.hpp"
#include "pairlab/rng.hpp"
#include "pairlab/trainer.hpp"

namespace pairlab {

namespace {

constexpr std::uint64_t kTrialStream = fnv1a64("mc-trial");

// Fixed-size trial chunks; partial sums are merged in chunk order, so the
// result does not depend on the worker count.
constexpr std::int64_t kChunk = 16384;

struct ChunkSums {
  double max_sum = 0.0;
  double max_sq = 0.0;
  double min_sum = 0.0;
  double min_sq = 0.0;
};

}  // namespace

PredictedExtremes predicted_extremes(double mu, double sigma, std::int64_t n) {
  if (n < 1) throw DataError("predicted_extremes: n must be >= 1");
  if (!(sigma >= 0.0)) throw DataError("predicted_extremes: sigma must be >= 0");
  const double spread = sigma * std::sqrt(2.0 * std::log(static_cast<double>(n)));
  return {mu + spread, mu - spread};
}

double predicted_margin(double sigma, std::int64_t n) {
  const PredictedExtremes e = predicted_extremes(0.0, sigma, n);
  return e.e_max - e.e_min;
}

std::vector<SaturationPoint> saturation_curve(
    double sigma, std::span<const std::int64_t> n_values) {
  return scaled_saturation_curve(sigma, 1.0, n_values);
}

std::vector<SaturationPoint> scaled_saturation_curve(
    double sigma, double beta, std::span<const std::int64_t> n_values) {
  if (n_values.empty()) throw DataError("saturation_curve: empty n grid");
  if (!(beta > 0.0)) throw DataError("saturation_curve: beta must be > 0");
  std::vector<SaturationPoint> curve;
  curve.reserve(n_values.size());
  for (std::int64_t n : n_values) {
    curve.push_back({n, log_sigmoid(beta * predicted_margin(sigma, n))});
  }
  return curve;
}

McExtremes mc_extremes(double mu, double sigma, std::int64_t n,
                       std::int64_t trials, std::uint64_t seed, int threads) {
  if (n < 1) throw DataError("mc_extremes: n must be >= 1");
  if (trials < 1000) throw DataError("mc_extremes: trials must be >= 1000");

  const std::int64_t chunks = (trials + kChunk - 1) / kChunk;
  std::vector<ChunkSums> partial(static_cast<std::size_t>(chunks));

  parallel_for(static_cast<std::size_t>(chunks), threads, [&](std::size_t c) {
    const std::int64_t begin = static_cast<std::int64_t>(c) * kChunk;
    const std::int64_t end = std::min(begin + kChunk, trials);
    ChunkSums sums;
    for (std::int64_t trial = begin; trial < end; ++trial) {
      Xoshiro256pp rng(derive_seed(derive_seed(seed, kTrialStream),
                                   static_cast<std::uint64_t>(trial)));
      double hi = rng.normal(mu, sigma);
      double lo = hi;
      for (std::int64_t j = 1; j < n; ++j) {
        const double x = rng.normal(mu, sigma);
        hi = std::max(hi, x);
        lo = std::min(lo, x);
      }
      sums.max_sum += hi;
      sums.max_sq += hi * hi;
      sums.min_sum += lo;
      sums.min_sq += lo * lo;
    }
    partial[c] = sums;
  });

  ChunkSums total;
  for (const ChunkSums& sums : partial) {
    total.max_sum += sums.max_sum;
    total.max_sq += sums.max_sq;
    total.min_sum += sums.min_sum;
    total.min_sq += sums.min_sq;
  }

  const double t = static_cast<double>(trials);
  McExtremes out;
  out.mc_max = total.max_sum / t;
  out.mc_min = total.min_sum / t;
  const double var_max =
      std::max(0.0, (total.max_sq - t * out.mc_max * out.mc_max) / (t - 1.0));
  const double var_min =
      std::max(0.0, (total.min_sq - t * out.mc_min * out.mc_min) / (t - 1.0));
  out.mc_max_se = std::sqrt(var_max / t);
  out.mc_min_se = std::sqrt(var_min / t);
  return out;
}

std::vector<GapPoint> asymptotic_gap(std::span<const std::int64_t> n_values,
                                     double sigma, std::int64_t trials,
                                     std::uint64_t seed, int threads) {
  std::vector<GapPoint> gaps;
  gaps.reserve(n_values.size());
  for (std::int64_t n : n_values) {
    if (n < 2) throw DataError("asymptotic_gap: n must be >= 2");
    const double predicted = predicted_extremes(0.0, sigma, n).e_max;
    const McExtremes mc = mc_extremes(0.0, sigma, n, trials, seed, threads);
    gaps.push_back({n, mc.mc_max / predicted});
  }
  return gaps;
}

std::vector<EvtRow> build_evt_report(double mu, double sigma,
                                     std::span<const std::int64_t> n_values,
                                     std::int64_t trials, std::uint64_t seed,
                                     int threads) {
  std::vector<EvtRow> rows;
  rows.reserve(n_values.size());
  for (std::int64_t n : n_values) {
    EvtRow row;
    row.n = n;
    const PredictedExtremes e = predicted_extremes(mu, sigma, n);
    row.predicted_max = e.e_max;
    row.predicted_min = e.e_min;
    // Taken from the row's own extremes so the identity
    // predicted_max - predicted_min == predicted_margin is exact for any mu.
    row.predicted_margin = e.e_max - e.e_min;
    row.saturated_term = log_sigmoid(row.predicted_margin);
    const McExtremes mc = mc_extremes(mu, sigma, n, trials, seed, threads);
    row.mc_max = mc.mc_max;
    row.mc_max_se = mc.mc_max_se;
    row.mc_min = mc.mc_min;
    row.mc_min_se = mc.mc_min_se;
    row.trials = trials;
    rows.push_back(row);
  }
  return rows;
}

std::string format_double(double value) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc{}) throw NumericError("format_double: conversion failed");
  return std::string(buf, end);
}

std::string evt_report_csv(std::span<const EvtRow> rows,
                           const std::string& header_comment) {
  std::ostringstream out;
  if (!header_comment.empty()) out << "# " << header_comment << '\n';
  out << "n,predicted_max,predicted_min,predicted_margin,saturated_term,"
         "mc_max,mc_max_se,mc_min,mc_min_se\n";
  for (const EvtRow& row : rows) {
    out << row.n << ',' << format_double(row.predicted_max) << ','
        << format_double(row.predicted_min) << ','
        << format_double(row.predicted_margin) << ','
        << format_double(row.saturated_term) << ','
        << format_double(row.mc_max) << ',' << format_double(row.mc_max_se)
        << ',' << format_double(row.mc_min) << ','
        << format_double(row.mc_min_se) << '\n';
  }
  return out.str();
}

std::vector<TopKPoint> top_k_mean_curve(std::span<const PromptGroup> groups,
                                        int k,
                                        std::span<const std::int64_t> n_grid) {
  if (groups.empty()) throw DataError("top_k_mean_curve: no prompts");
  if (k < 1) throw DataError("top_k_mean_curve: k must be >= 1");
  if (n_grid.empty()) throw DataError("top_k_mean_curve: empty n grid");

  std::vector<TopKPoint> curve;
  curve.reserve(n_grid.size());
  std::vector<double> rewards;
  for (std::int64_t n : n_grid) {
    if (n < k) {
      throw DataError("top_k_mean_curve: k=" + std::to_string(k) +
                      " exceeds n=" + std::to_string(n));
    }
    double prompt_sum = 0.0;
    for (const PromptGroup& group : groups) {
      if (n > group.size()) {
        throw DataError("top_k_mean_curve: n=" + std::to_string(n) +
                        " exceeds the samples of prompt '" + group.prompt_id +
                        "'");
      }
      rewards.clear();
      for (std::int64_t j = 0; j < n; ++j) {
        rewards.push_back(group.samples[static_cast<std::size_t>(j)].reward);
      }
      std::partial_sort(rewards.begin(), rewards.begin() + k, rewards.end(),
                        std::greater<>());
      double top = 0.0;
      for (int j = 0; j < k; ++j) top += rewards[static_cast<std::size_t>(j)];
      prompt_sum += top / k;
    }
    curve.push_back({n, prompt_sum / static_cast<double>(groups.size())});
  }
  return curve;
}

std::string top_k_curve_csv(std::span<const TopKPoint> curve,
                            const std::string& header_comment) {
  std::ostringstream out;
  if (!header_comment.empty()) out << "# " << header_comment << '\n';
  out << "n,topk_mean\n";
  for (const TopKPoint& point : curve) {
    out << point.n << ',' << format_double(point.topk_mean) << '\n';
  }
  return out.str();
}

}  // namespace pairlab
