#include "pairlab/pairs.hpp"

#include <cstdlib>

#include "pairlab/error.hpp"

namespace pairlab {

std::string strategy_tag(const StrategySpec& strategy) {
  if (const auto* anchor = std::get_if<AnchorPairStrategy>(&strategy)) {
    return "anchor:" + to_string(anchor->chosen) + "/" +
           to_string(anchor->rejected);
  }
  if (const auto* conv = std::get_if<ConventionalStrategy>(&strategy)) {
    return "conventional:n=" + std::to_string(conv->n);
  }
  const auto& scalable = std::get<ScalableStrategy>(strategy);
  return "scalable:pool=" + std::to_string(scalable.rejected_pool) +
         ",n=" + std::to_string(scalable.n);
}

void validate_strategy(const StrategySpec& strategy) {
  if (const auto* anchor = std::get_if<AnchorPairStrategy>(&strategy)) {
    if (!(anchor->rejected < anchor->chosen)) {
      throw DataError("anchor strategy: chosen anchor '" +
                      to_string(anchor->chosen) +
                      "' must be strictly above rejected anchor '" +
                      to_string(anchor->rejected) + "'");
    }
    return;
  }
  if (const auto* conv = std::get_if<ConventionalStrategy>(&strategy)) {
    if (conv->n < 1) throw DataError("conventional strategy: n must be >= 1");
    return;
  }
  const auto& scalable = std::get<ScalableStrategy>(strategy);
  if (scalable.rejected_pool < 1) {
    throw DataError("scalable strategy: rejected_pool must be >= 1");
  }
  if (scalable.rejected_pool > scalable.n) {
    throw DataError("scalable strategy: rejected_pool (" +
                    std::to_string(scalable.rejected_pool) +
                    ") must not exceed n (" + std::to_string(scalable.n) + ")");
  }
}

namespace {

PairResult assemble(const std::string& prompt_id, int chosen_id,
                    double chosen_reward, int rejected_id,
                    double rejected_reward, std::string tag) {
  if (chosen_id == rejected_id) return DropReason::SameSample;
  if (!(chosen_reward > rejected_reward)) return DropReason::NonPositiveMargin;
  PreferencePair pair;
  pair.prompt_id = prompt_id;
  pair.chosen_id = chosen_id;
  pair.rejected_id = rejected_id;
  pair.chosen_reward = chosen_reward;
  pair.rejected_reward = rejected_reward;
  pair.margin = chosen_reward - rejected_reward;
  pair.strategy_tag = std::move(tag);
  return pair;
}

// argmax/argmin over the first n samples; ties keep the lowest sample_id.
std::pair<const ScoredSample*, const ScoredSample*> extremes_over_prefix(
    std::span<const ScoredSample> samples, int n) {
  if (n > static_cast<int>(samples.size())) {
    throw DataError("budget n=" + std::to_string(n) + " exceeds the " +
                    std::to_string(samples.size()) +
                    " available samples for prompt '" +
                    samples.front().prompt_id + "'");
  }
  const ScoredSample* lo = &samples[0];
  const ScoredSample* hi = &samples[0];
  for (int i = 1; i < n; ++i) {
    if (samples[i].reward < lo->reward) lo = &samples[i];
    if (samples[i].reward > hi->reward) hi = &samples[i];
  }
  return {hi, lo};
}

}  // namespace

PairResult build_anchor_pair(const AnchorSet& anchor_set, const Anchor& chosen,
                             const Anchor& rejected,
                             const std::string& prompt_id) {
  const auto chosen_it = anchor_set.find(chosen);
  const auto rejected_it = anchor_set.find(rejected);
  if (chosen_it == anchor_set.end() || rejected_it == anchor_set.end()) {
    throw DataError("anchor set for prompt '" + prompt_id +
                    "' is missing a requested anchor");
  }
  const AnchorSelection& w = chosen_it->second;
  const AnchorSelection& l = rejected_it->second;
  return assemble(prompt_id, w.sample_id, w.reward, l.sample_id, l.reward,
                  "anchor:" + to_string(chosen) + "/" + to_string(rejected));
}

std::map<std::pair<Anchor, Anchor>, PairResult> build_all_21(
    const AnchorSet& anchor_set, const std::string& prompt_id) {
  const std::vector<Anchor> anchors = anchor_points(false);
  std::map<std::pair<Anchor, Anchor>, PairResult> out;
  for (std::size_t c = 1; c < anchors.size(); ++c) {
    for (std::size_t r = 0; r < c; ++r) {
      out.emplace(std::make_pair(anchors[c], anchors[r]),
                  build_anchor_pair(anchor_set, anchors[c], anchors[r],
                                    prompt_id));
    }
  }
  return out;
}

PairResult build_conventional(std::span<const ScoredSample> samples, int n) {
  if (samples.empty()) throw DataError("build_conventional: empty sample set");
  const auto [hi, lo] = extremes_over_prefix(samples, n);
  return assemble(samples.front().prompt_id, hi->sample_id, hi->reward,
                  lo->sample_id, lo->reward,
                  strategy_tag(ConventionalStrategy{n}));
}

PairResult build_scalable(std::span<const ScoredSample> samples, int n,
                          int rejected_pool) {
  if (samples.empty()) throw DataError("build_scalable: empty sample set");
  validate_strategy(ScalableStrategy{rejected_pool, n});
  const ScoredSample* lo = extremes_over_prefix(samples, rejected_pool).second;
  const ScoredSample* hi = extremes_over_prefix(samples, n).first;
  return assemble(samples.front().prompt_id, hi->sample_id, hi->reward,
                  lo->sample_id, lo->reward,
                  strategy_tag(ScalableStrategy{rejected_pool, n}));
}

DatasetResult build_dataset(std::span<const PromptGroup> groups,
                            const StrategySpec& strategy) {
  validate_strategy(strategy);
  DatasetResult result;
  result.pairs.reserve(groups.size());
  for (const PromptGroup& group : groups) {
    PairResult one = DropReason::SameSample;
    if (const auto* anchor = std::get_if<AnchorPairStrategy>(&strategy)) {
      const bool extended = std::abs(anchor->chosen.level) > 2 ||
                            std::abs(anchor->rejected.level) > 2;
      const AnchorSet set = select_anchor_set(group.samples, extended);
      one = build_anchor_pair(set, anchor->chosen, anchor->rejected,
                              group.prompt_id);
    } else if (const auto* conv = std::get_if<ConventionalStrategy>(&strategy)) {
      one = build_conventional(group.samples, conv->n);
    } else {
      const auto& scalable = std::get<ScalableStrategy>(strategy);
      one = build_scalable(group.samples, scalable.n, scalable.rejected_pool);
    }
    if (const auto* pair = std::get_if<PreferencePair>(&one)) {
      result.pairs.push_back(*pair);
    } else {
      result.drops.count(std::get<DropReason>(one));
    }
  }
  return result;
}

}  // namespace pairlab
