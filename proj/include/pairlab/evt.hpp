#ifndef PAIRLAB_EVT_HPP_
#define PAIRLAB_EVT_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pairlab/records.hpp"

// Extreme-value analysis of Gaussian reward populations.
//
// The closed forms use the leading-order estimate E[max of n] ~ mu +
// sigma*sqrt(2 ln n) ("log" read as the natural logarithm, the EVT
// convention). The estimate is an upper asymptote, not a good point estimate
// at small n: at n = 5 it overshoots the true expectation by roughly 54%
// (1.794 vs 1.163), which is why validation asserts bracketing and monotone
// approach rather than closeness. The Monte Carlo side is the oracle.
//
// Naming: sigma always means the standard deviation here; the logistic
// sigmoid (which the source material also writes as sigma) appears only as
// log_sigmoid.

namespace pairlab {

struct PredictedExtremes {
  double e_max = 0.0;
  double e_min = 0.0;
};

// mu +- sigma*sqrt(2 ln n); n = 1 collapses both onto mu. n = 0 is a domain
// error.
PredictedExtremes predicted_extremes(double mu, double sigma, std::int64_t n);

// 2*sigma*sqrt(2 ln n) == e_max - e_min exactly.
double predicted_margin(double sigma, std::int64_t n);

struct SaturationPoint {
  std::int64_t n = 0;
  double value = 0.0;  // log sigmoid(2*sigma*sqrt(2 ln n)), in (-ln 2, 0]
};

// Strictly increasing toward 0 in n for sigma > 0; stable for margins up to
// 1e4 and beyond (underflows gracefully to -0).
std::vector<SaturationPoint> saturation_curve(double sigma,
                                              std::span<const std::int64_t> n_values);

// Same curve with the margin scaled by beta, log sigmoid(beta * 2*sigma*
// sqrt(2 ln n)): the shape the toy trainer's loss floor follows, for
// cross-checking against training runs. beta = 1 recovers saturation_curve.
std::vector<SaturationPoint> scaled_saturation_curve(
    double sigma, double beta, std::span<const std::int64_t> n_values);

struct McExtremes {
  double mc_max = 0.0;
  double mc_max_se = 0.0;
  double mc_min = 0.0;
  double mc_min_se = 0.0;
};

// Means of per-trial max/min of n draws from N(mu, sigma^2), with standard
// errors from the per-trial sample variance. Each trial runs on its own
// derived stream, so the estimate is deterministic under `seed` and
// independent of how trials are partitioned across threads.
McExtremes mc_extremes(double mu, double sigma, std::int64_t n,
                       std::int64_t trials, std::uint64_t seed,
                       int threads = 0);

struct GapPoint {
  std::int64_t n = 0;
  double ratio = 0.0;  // mc_max / predicted_max, centered case mu = 0
};

std::vector<GapPoint> asymptotic_gap(std::span<const std::int64_t> n_values,
                                     double sigma, std::int64_t trials,
                                     std::uint64_t seed, int threads = 0);

struct EvtRow {
  std::int64_t n = 0;
  double predicted_max = 0.0;
  double predicted_min = 0.0;
  double predicted_margin = 0.0;
  double saturated_term = 0.0;
  double mc_max = 0.0;
  double mc_max_se = 0.0;
  double mc_min = 0.0;
  double mc_min_se = 0.0;
  std::int64_t trials = 0;
};

std::vector<EvtRow> build_evt_report(double mu, double sigma,
                                     std::span<const std::int64_t> n_values,
                                     std::int64_t trials, std::uint64_t seed,
                                     int threads = 0);

// CSV: n,predicted_max,predicted_min,predicted_margin,saturated_term,
// mc_max,mc_max_se,mc_min,mc_min_se. An optional "# ..." header comment
// carries the resolved configuration.
std::string evt_report_csv(std::span<const EvtRow> rows,
                           const std::string& header_comment = {});

struct TopKPoint {
  std::int64_t n = 0;
  double topk_mean = 0.0;
};

// For each n in the grid: mean over prompts of the mean of the k largest
// rewards among the first n samples. Requires k <= n <= available samples.
std::vector<TopKPoint> top_k_mean_curve(std::span<const PromptGroup> groups,
                                        int k,
                                        std::span<const std::int64_t> n_grid);

// CSV: n,topk_mean.
std::string top_k_curve_csv(std::span<const TopKPoint> curve,
                            const std::string& header_comment = {});

// Shortest decimal representation that round-trips; used by all CSV output so
// reports are byte-stable.
std::string format_double(double value);

}  // namespace pairlab

#endif  // PAIRLAB_EVT_HPP_
