#include "pairlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "pairlab/error.hpp"

namespace pairlab {

Anchor Anchor::sigma(int level) {
  if (level < -4 || level > 4) {
    throw DataError("sigma anchor level must be in [-4, +4], got " +
                    std::to_string(level));
  }
  return {Kind::Sigma, level};
}

std::string to_string(const Anchor& anchor) {
  switch (anchor.kind) {
    case Anchor::Kind::Min:
      return "min";
    case Anchor::Kind::Max:
      return "max";
    case Anchor::Kind::Sigma:
      if (anchor.level == 0) return "mu";
      return std::string("mu") + (anchor.level > 0 ? "+" : "-") +
             std::to_string(std::abs(anchor.level)) + "s";
  }
  return "mu";
}

Anchor anchor_from_string(const std::string& text) {
  if (text == "min") return Anchor::min();
  if (text == "max") return Anchor::max();
  if (text == "mu") return Anchor::sigma(0);
  if (text.size() == 5 && text.compare(0, 2, "mu") == 0 && text[4] == 's' &&
      (text[2] == '+' || text[2] == '-') && text[3] >= '1' && text[3] <= '4') {
    const int magnitude = text[3] - '0';
    return Anchor::sigma(text[2] == '+' ? magnitude : -magnitude);
  }
  throw DataError("unknown anchor spelling '" + text +
                  "' (expected min, mu-4s..mu-1s, mu, mu+1s..mu+4s, max)");
}

std::vector<Anchor> anchor_points(bool extended) {
  std::vector<Anchor> anchors;
  anchors.push_back(Anchor::min());
  const int span = extended ? 4 : 2;
  for (int level = -span; level <= span; ++level) {
    anchors.push_back(Anchor::sigma(level));
  }
  anchors.push_back(Anchor::max());
  return anchors;
}

RewardStats compute_stats(std::span<const ScoredSample> samples) {
  if (samples.empty()) throw DataError("compute_stats: empty sample set");
  const std::string& prompt_id = samples.front().prompt_id;
  for (const auto& sample : samples) {
    if (sample.prompt_id != prompt_id) {
      throw DataError("compute_stats: mixed prompt_ids ('" + prompt_id +
                      "' and '" + sample.prompt_id + "')");
    }
  }
  const int n = static_cast<int>(samples.size());
  if (n < 2) {
    throw DataError("prompt '" + prompt_id +
                    "' has fewer than 2 samples; sigma is undefined");
  }

  double sum = 0.0;
  double min_reward = samples.front().reward;
  double max_reward = samples.front().reward;
  for (const auto& sample : samples) {
    sum += sample.reward;
    min_reward = std::min(min_reward, sample.reward);
    max_reward = std::max(max_reward, sample.reward);
  }
  const double mu = sum / n;

  double ss = 0.0;
  for (const auto& sample : samples) {
    const double d = sample.reward - mu;
    ss += d * d;
  }

  RewardStats stats;
  stats.prompt_id = prompt_id;
  stats.n = n;
  stats.mu = mu;
  stats.sigma = std::sqrt(ss / (n - 1));
  stats.min_reward = min_reward;
  stats.max_reward = max_reward;
  return stats;
}

namespace {

// Scan for the sample nearest to target; ties go to the lowest sample_id so
// the choice does not depend on input order.
AnchorSelection nearest_to(std::span<const ScoredSample> samples, double target,
                           const Anchor& anchor) {
  const ScoredSample* best = &samples.front();
  double best_dist = std::abs(best->reward - target);
  for (const auto& sample : samples.subspan(1)) {
    const double dist = std::abs(sample.reward - target);
    if (dist < best_dist ||
        (dist == best_dist && sample.sample_id < best->sample_id)) {
      best = &sample;
      best_dist = dist;
    }
  }
  return {anchor, best->sample_id, best->reward, target};
}

AnchorSelection extreme(std::span<const ScoredSample> samples, bool want_max,
                        const Anchor& anchor) {
  const ScoredSample* best = &samples.front();
  for (const auto& sample : samples.subspan(1)) {
    const bool better = want_max ? sample.reward > best->reward
                                 : sample.reward < best->reward;
    if (better ||
        (sample.reward == best->reward && sample.sample_id < best->sample_id)) {
      best = &sample;
    }
  }
  return {anchor, best->sample_id, best->reward, best->reward};
}

}  // namespace

AnchorSelection select_anchor(std::span<const ScoredSample> samples,
                              const RewardStats& stats, const Anchor& anchor) {
  if (samples.empty()) throw DataError("select_anchor: empty sample set");
  switch (anchor.kind) {
    case Anchor::Kind::Min:
      return extreme(samples, false, anchor);
    case Anchor::Kind::Max:
      return extreme(samples, true, anchor);
    case Anchor::Kind::Sigma:
      return nearest_to(samples, stats.mu + anchor.level * stats.sigma, anchor);
  }
  throw DataError("select_anchor: bad anchor kind");
}

AnchorSet select_anchor_set(std::span<const ScoredSample> samples,
                            bool extended) {
  const RewardStats stats = compute_stats(samples);
  AnchorSet set;
  for (const Anchor& anchor : anchor_points(extended)) {
    set.emplace(anchor, select_anchor(samples, stats, anchor));
  }
  return set;
}

std::vector<int> reward_histogram(std::span<const ScoredSample> samples,
                                  int bins) {
  std::vector<int> counts(static_cast<std::size_t>(bins), 0);
  if (samples.empty()) return counts;
  double lo = samples.front().reward, hi = samples.front().reward;
  for (const auto& sample : samples) {
    lo = std::min(lo, sample.reward);
    hi = std::max(hi, sample.reward);
  }
  const double width = hi - lo;
  for (const auto& sample : samples) {
    int bin = 0;
    if (width > 0.0) {
      bin = static_cast<int>((sample.reward - lo) / width * bins);
      bin = std::min(bin, bins - 1);
    }
    ++counts[static_cast<std::size_t>(bin)];
  }
  return counts;
}

}  // namespace pairlab
