#include "pairlab/synth.hpp"

#include <cstdio>

#include "pairlab/error.hpp"
#include "pairlab/parallel.hpp"
#include "pairlab/rng.hpp"

namespace pairlab {

namespace {

// Tags separating the profile stream from the reward stream of a prompt.
constexpr std::uint64_t kProfileStream = fnv1a64("profile");
constexpr std::uint64_t kRewardStream = fnv1a64("rewards");

std::string prompt_name(int index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "p%06d", index);
  return buf;
}

}  // namespace

void validate_generator_config(const GeneratorConfig& config) {
  if (config.prompt_count < 1) {
    throw DataError("generator: prompt_count must be >= 1");
  }
  if (config.samples_per_prompt < 1) {
    throw DataError("generator: samples_per_prompt must be >= 1");
  }
  if (!(config.mu_min <= config.mu_max)) {
    throw DataError("generator: empty mu_range");
  }
  if (!(config.sigma_min <= config.sigma_max)) {
    throw DataError("generator: empty sigma_range");
  }
  if (!(config.sigma_min > 0.0)) {
    throw DataError("generator: sigma_range lower bound must be > 0");
  }
}

std::vector<PromptProfile> make_profiles(const GeneratorConfig& config) {
  validate_generator_config(config);
  std::vector<PromptProfile> profiles;
  profiles.reserve(static_cast<std::size_t>(config.prompt_count));
  for (int i = 0; i < config.prompt_count; ++i) {
    PromptProfile profile;
    profile.prompt_id = prompt_name(i);
    Xoshiro256pp rng(derive_seed(derive_seed(config.seed, kProfileStream),
                                 fnv1a64(profile.prompt_id)));
    profile.mu = rng.uniform(config.mu_min, config.mu_max);
    profile.sigma = rng.uniform(config.sigma_min, config.sigma_max);
    profiles.push_back(std::move(profile));
  }
  return profiles;
}

std::vector<ScoredSample> sample_rewards(const PromptProfile& profile, int n,
                                         std::uint64_t seed) {
  if (n < 1) throw DataError("sample_rewards: n must be >= 1");
  if (!(profile.sigma > 0.0)) {
    throw DataError("sample_rewards: profile sigma must be > 0");
  }
  Xoshiro256pp rng(derive_seed(derive_seed(seed, kRewardStream),
                               fnv1a64(profile.prompt_id)));
  std::vector<ScoredSample> samples;
  samples.reserve(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    ScoredSample sample;
    sample.prompt_id = profile.prompt_id;
    sample.sample_id = j;
    sample.reward = rng.normal(profile.mu, profile.sigma);
    samples.push_back(std::move(sample));
  }
  return samples;
}

std::vector<PromptGroup> generate_corpus(const GeneratorConfig& config,
                                         int threads) {
  const std::vector<PromptProfile> profiles = make_profiles(config);
  std::vector<PromptGroup> groups(profiles.size());
  parallel_for(profiles.size(), threads, [&](std::size_t i) {
    groups[i].prompt_id = profiles[i].prompt_id;
    groups[i].samples =
        sample_rewards(profiles[i], config.samples_per_prompt, config.seed);
  });
  return groups;
}

}  // namespace pairlab
