#ifndef PAIRLAB_PAIRS_HPP_
#define PAIRLAB_PAIRS_HPP_

#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "pairlab/records.hpp"
#include "pairlab/stats.hpp"

// Preference-pair construction. Three strategy families:
//   - anchor pairs: one (chosen, rejected) anchor combination per dataset,
//     21 combinations over the canonical seven anchors;
//   - conventional: chosen = argmax reward, rejected = argmin reward over the
//     first n samples;
//   - scalable: rejected = argmin over a fixed pool of the first 5 samples,
//     chosen = argmax over the first n. Identical to conventional at n = 5.
//
// A prompt where the construction degenerates (same sample on both sides, or
// zero margin) is dropped, not an error; datasets simply exclude it. Budgets
// are prefixes by sample_id, so sweeps over n are nested and comparable.

namespace pairlab {

enum class DropReason { SameSample, NonPositiveMargin };

// A pair or the reason the prompt was dropped.
using PairResult = std::variant<PreferencePair, DropReason>;

inline bool is_drop(const PairResult& result) {
  return std::holds_alternative<DropReason>(result);
}

struct DropReport {
  std::int64_t same_sample = 0;
  std::int64_t non_positive_margin = 0;

  std::int64_t total() const { return same_sample + non_positive_margin; }
  void count(DropReason reason) {
    if (reason == DropReason::SameSample) {
      ++same_sample;
    } else {
      ++non_positive_margin;
    }
  }
};

struct AnchorPairStrategy {
  Anchor chosen;
  Anchor rejected;
};

struct ConventionalStrategy {
  int n = 5;
};

struct ScalableStrategy {
  int rejected_pool = 5;
  int n = 5;
};

using StrategySpec =
    std::variant<AnchorPairStrategy, ConventionalStrategy, ScalableStrategy>;

// "anchor:<chosen>/<rejected>", "conventional:n=<n>",
// "scalable:pool=<pool>,n=<n>" -- written into every emitted pair.
std::string strategy_tag(const StrategySpec& strategy);

// Throws DataError on invalid specs (chosen anchor not strictly above the
// rejected one, pool exceeding n, non-positive budgets).
void validate_strategy(const StrategySpec& strategy);

PairResult build_anchor_pair(const AnchorSet& anchor_set, const Anchor& chosen,
                             const Anchor& rejected,
                             const std::string& prompt_id);

// All 21 ordered combinations of the canonical seven anchors, keyed by
// (chosen, rejected) with chosen above rejected in anchor order.
std::map<std::pair<Anchor, Anchor>, PairResult> build_all_21(
    const AnchorSet& anchor_set, const std::string& prompt_id);

PairResult build_conventional(std::span<const ScoredSample> samples, int n);

PairResult build_scalable(std::span<const ScoredSample> samples, int n,
                          int rejected_pool = 5);

struct DatasetResult {
  std::vector<PreferencePair> pairs;  // one per non-dropped prompt, in order
  DropReport drops;
};

DatasetResult build_dataset(std::span<const PromptGroup> groups,
                            const StrategySpec& strategy);

}  // namespace pairlab

#endif  // PAIRLAB_PAIRS_HPP_
