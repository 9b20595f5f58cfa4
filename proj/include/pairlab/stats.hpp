#ifndef PAIRLAB_STATS_HPP_
#define PAIRLAB_STATS_HPP_

#include <map>
#include <span>
#include <string>
#include <vector>

#include "pairlab/records.hpp"

// Per-prompt reward statistics and sigma-anchored sample selection.
//
// The canonical anchor set has seven points, {min, mu-2s, mu-1s, mu, mu+1s,
// mu+2s, max}; the extended set adds mu+-3s and mu+-4s for eleven. Anchors
// are totally ordered MIN < SIGMA(-4) < ... < SIGMA(+4) < MAX; sigma targets
// beyond the observed reward range are not clamped, nearest-sample selection
// collapses them onto the extremes on its own.

namespace pairlab {

struct RewardStats {
  std::string prompt_id;
  int n = 0;
  double mu = 0.0;
  double sigma = 0.0;  // Bessel-corrected, divisor n-1
  double min_reward = 0.0;
  double max_reward = 0.0;
};

struct Anchor {
  enum class Kind { Min, Sigma, Max };

  Kind kind = Kind::Sigma;
  int level = 0;  // only meaningful for Kind::Sigma, in [-4, +4]

  static Anchor min() { return {Kind::Min, 0}; }
  static Anchor max() { return {Kind::Max, 0}; }
  static Anchor sigma(int level);

  // Position in the MIN < SIGMA(-4) < ... < SIGMA(+4) < MAX order.
  int rank() const {
    switch (kind) {
      case Kind::Min:
        return 0;
      case Kind::Sigma:
        return 5 + level;
      case Kind::Max:
        return 10;
    }
    return 0;
  }

  bool operator==(const Anchor& other) const {
    return kind == other.kind && (kind != Kind::Sigma || level == other.level);
  }
  bool operator<(const Anchor& other) const { return rank() < other.rank(); }
};

// CLI/JSON spelling: "min", "mu-4s" .. "mu-1s", "mu", "mu+1s" .. "mu+4s",
// "max".
std::string to_string(const Anchor& anchor);
Anchor anchor_from_string(const std::string& text);

struct AnchorSelection {
  Anchor anchor;
  int sample_id = 0;
  double reward = 0.0;
  double target_value = 0.0;  // mu + level*sigma, or the min/max reward
};

using AnchorSet = std::map<Anchor, AnchorSelection>;

// The canonical seven anchors (extended=false) or eleven (extended=true), in
// anchor order.
std::vector<Anchor> anchor_points(bool extended);

// Mean, Bessel-corrected std, min, max. Requires a non-empty single-prompt
// span with n >= 2 (sigma needs two points).
RewardStats compute_stats(std::span<const ScoredSample> samples);

// MIN/MAX return the sample holding the extreme reward; SIGMA(level) the
// sample minimizing |reward - (mu + level*sigma)|. Ties break to the lowest
// sample_id, so the result is independent of input order.
AnchorSelection select_anchor(std::span<const ScoredSample> samples,
                              const RewardStats& stats, const Anchor& anchor);

AnchorSet select_anchor_set(std::span<const ScoredSample> samples,
                            bool extended = false);

// 20-bin reward histogram, for eyeballing distribution shape only.
std::vector<int> reward_histogram(std::span<const ScoredSample> samples,
                                  int bins = 20);

}  // namespace pairlab

#endif  // PAIRLAB_STATS_HPP_
