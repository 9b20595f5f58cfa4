#ifndef PAIRLAB_CONFIG_JSON_HPP_
#define PAIRLAB_CONFIG_JSON_HPP_

#include <optional>
#include <string>

#include "pairlab/harness.hpp"

// Run configuration as a JSON document. Parsing is strict: unknown keys are
// rejected at every level to catch typos. Precedence is flags > file >
// defaults; the resolved config (defaults filled in) can be re-serialized and
// is embedded in every output for reproducibility.

namespace pairlab {

enum class SweepMode { Grid, Grid21, Scaling, Overfit };

std::string to_string(SweepMode mode);
SweepMode sweep_mode_from_string(const std::string& text);

struct RunConfig {
  std::uint64_t seed = 0;  // top-level seed; generator/trainer derive from it
  SweepMode mode = SweepMode::Grid;
  SweepConfig sweep;
  std::string input_path;   // optional: external ScoredSample JSONL
  std::string output_path;  // optional: report destination
};

// Parses a RunConfig document. Sections and fields are optional; absent ones
// keep defaults. Unknown keys -> DataError naming the key and section.
RunConfig parse_run_config(const std::string& json_text);

RunConfig load_run_config(const std::string& path);

// Resolved (defaults filled) single-line JSON, for output headers.
std::string run_config_json(const RunConfig& config);

std::string generator_config_json(const GeneratorConfig& config);
std::string dpo_config_json(const DpoConfig& config);

}  // namespace pairlab

#endif  // PAIRLAB_CONFIG_JSON_HPP_
