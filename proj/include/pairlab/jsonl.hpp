#ifndef PAIRLAB_JSONL_HPP_
#define PAIRLAB_JSONL_HPP_

#include <string>
#include <vector>

#include "pairlab/records.hpp"

// JSONL read/write layer. One JSON object per line, UTF-8. Numbers are
// serialized with the shortest decimal representation that round-trips, so
// read(write(S)) == S bit-for-bit on every numeric field.

namespace pairlab {

// Reads scored samples grouped by prompt_id. Groups appear in order of first
// appearance; samples within a group are sorted by sample_id and must form a
// contiguous 0..n-1 range. Errors name the offending line or prompt.
std::vector<PromptGroup> read_scored_samples(const std::string& path);

void write_scored_samples(const std::string& path,
                          const std::vector<PromptGroup>& groups);

struct ManifestInfo {
  std::string strategy_tag;
  std::uint64_t seed = 0;
  std::string source_path;
  std::int64_t dropped_prompt_count = 0;
};

// Writes pairs one per line, in input order. Every pair is re-validated;
// a pair violating its invariants raises DataError before anything is
// written.
DatasetManifest write_preference_dataset(const std::string& path,
                                         const std::vector<PreferencePair>& pairs,
                                         const ManifestInfo& info = {});

std::vector<PreferencePair> read_preference_dataset(const std::string& path);

void write_manifest(const std::string& path, const DatasetManifest& manifest,
                    const std::string& resolved_config_json);

}  // namespace pairlab

#endif  // PAIRLAB_JSONL_HPP_
