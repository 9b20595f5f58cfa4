#ifndef PAIRLAB_RECORDS_HPP_
#define PAIRLAB_RECORDS_HPP_

#include <cstdint>
#include <string>
#include <vector>

namespace pairlab {

// One scored generation. sample_id equals generation order within the prompt
// and is contiguous 0..n-1; the scalable strategy's "first 5 samples"
// semantics depend on that ordering.
struct ScoredSample {
  std::string prompt_id;
  int sample_id = 0;
  double reward = 0.0;
  std::string text;  // carried through, never interpreted

  bool operator==(const ScoredSample&) const = default;
};

// All samples of one prompt, ordered by sample_id.
struct PromptGroup {
  std::string prompt_id;
  std::vector<ScoredSample> samples;

  int size() const { return static_cast<int>(samples.size()); }
};

// A (chosen, rejected) training unit. Invariants enforced at construction
// and again on write: margin > 0, margin == chosen_reward - rejected_reward
// exactly as stored, chosen_id != rejected_id.
struct PreferencePair {
  std::string prompt_id;
  int chosen_id = 0;
  int rejected_id = 0;
  double chosen_reward = 0.0;
  double rejected_reward = 0.0;
  double margin = 0.0;
  std::string strategy_tag;

  bool operator==(const PreferencePair&) const = default;
};

struct DatasetManifest {
  std::int64_t record_count = 0;
  std::int64_t dropped_prompt_count = 0;
  std::string strategy_tag;
  std::uint64_t seed = 0;
  std::string source_path;
};

// Throws DataError when a pair violates its invariants.
void validate_pair(const PreferencePair& pair);

}  // namespace pairlab

#endif  // PAIRLAB_RECORDS_HPP_
