#ifndef PAIRLAB_SYNTH_HPP_
#define PAIRLAB_SYNTH_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "pairlab/records.hpp"

// Seeded generator of per-prompt Gaussian reward populations.
//
// Stream layout: every prompt gets its own generator seeded with
// derive_seed(root, fnv1a64(prompt_id)), so prompts are independent,
// reorder-invariant, and safe to generate in parallel. Rewards are drawn
// sequentially from the prompt stream (one 64-bit word per draw), which makes
// budgets prefix-stable: the first m rewards for budget n equal the full
// output for budget m.

namespace pairlab {

struct PromptProfile {
  std::string prompt_id;
  double mu = 0.0;
  double sigma = 1.0;  // > 0
};

struct GeneratorConfig {
  int prompt_count = 100;
  int samples_per_prompt = 200;
  double mu_min = -1.0;
  double mu_max = 1.0;
  double sigma_min = 0.5;
  double sigma_max = 1.5;
  std::uint64_t seed = 0;
};

// Throws DataError on an invalid configuration (empty intervals, sigma <= 0,
// non-positive counts).
void validate_generator_config(const GeneratorConfig& config);

// Exactly prompt_count profiles; mu and sigma drawn uniformly from their
// ranges, fully determined by (seed, prompt_id).
std::vector<PromptProfile> make_profiles(const GeneratorConfig& config);

// n i.i.d. draws from N(mu, sigma^2) under the prompt's derived stream,
// with sample_id 0..n-1. Pure function of (profile, n, seed).
std::vector<ScoredSample> sample_rewards(const PromptProfile& profile, int n,
                                         std::uint64_t seed);

// make_profiles + sample_rewards for the whole corpus. Per-prompt work is
// split across `threads` workers (0 = hardware concurrency); the result is
// identical for any thread count.
std::vector<PromptGroup> generate_corpus(const GeneratorConfig& config,
                                         int threads = 0);

}  // namespace pairlab

#endif  // PAIRLAB_SYNTH_HPP_
