#include "pairlab/jsonl.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "pairlab/error.hpp"

namespace pairlab {

using nlohmann::json;

void validate_pair(const PreferencePair& pair) {
  if (pair.chosen_id == pair.rejected_id) {
    throw DataError("pair for prompt '" + pair.prompt_id +
                    "' has chosen_id == rejected_id");
  }
  if (!(pair.chosen_reward > pair.rejected_reward)) {
    throw DataError("pair for prompt '" + pair.prompt_id +
                    "' has non-positive reward margin");
  }
  if (pair.margin != pair.chosen_reward - pair.rejected_reward) {
    throw DataError("pair for prompt '" + pair.prompt_id +
                    "' has margin inconsistent with its rewards");
  }
}

namespace {

std::string line_err(const std::string& path, std::size_t line_no,
                     const std::string& what) {
  return path + ":" + std::to_string(line_no) + ": " + what;
}

json parse_line(const std::string& path, std::size_t line_no,
                const std::string& line) {
  json obj = json::parse(line, nullptr, false);
  if (obj.is_discarded() || !obj.is_object()) {
    throw DataError(line_err(path, line_no, "malformed JSON object"));
  }
  return obj;
}

double require_finite_number(const json& obj, const char* key,
                             const std::string& path, std::size_t line_no) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_number()) {
    throw DataError(line_err(path, line_no,
                             std::string("missing or non-numeric '") + key + "'"));
  }
  const double value = it->get<double>();
  if (!std::isfinite(value)) {
    throw DataError(line_err(path, line_no,
                             std::string("non-finite value for '") + key + "'"));
  }
  return value;
}

std::string require_string(const json& obj, const char* key,
                           const std::string& path, std::size_t line_no) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    throw DataError(line_err(path, line_no,
                             std::string("missing or non-string '") + key + "'"));
  }
  return it->get<std::string>();
}

int require_int(const json& obj, const char* key, const std::string& path,
                std::size_t line_no) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_number_integer()) {
    throw DataError(line_err(path, line_no,
                             std::string("missing or non-integer '") + key + "'"));
  }
  return it->get<int>();
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open input file: " + path);
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open output file: " + path);
  return out;
}

}  // namespace

std::vector<PromptGroup> read_scored_samples(const std::string& path) {
  std::ifstream in = open_input(path);

  std::vector<PromptGroup> groups;
  std::unordered_map<std::string, std::size_t> group_index;
  std::unordered_set<std::string> seen_keys;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const json obj = parse_line(path, line_no, line);

    ScoredSample sample;
    sample.prompt_id = require_string(obj, "prompt_id", path, line_no);
    sample.sample_id = require_int(obj, "sample_id", path, line_no);
    sample.reward = require_finite_number(obj, "reward", path, line_no);
    if (auto it = obj.find("text"); it != obj.end() && it->is_string()) {
      sample.text = it->get<std::string>();
    }
    if (sample.sample_id < 0) {
      throw DataError(line_err(path, line_no, "negative sample_id"));
    }

    const std::string key =
        sample.prompt_id + "\x1f" + std::to_string(sample.sample_id);
    if (!seen_keys.insert(key).second) {
      throw DataError(line_err(path, line_no,
                               "duplicate (prompt_id, sample_id): (" +
                                   sample.prompt_id + ", " +
                                   std::to_string(sample.sample_id) + ")"));
    }

    auto [it, inserted] = group_index.try_emplace(sample.prompt_id, groups.size());
    if (inserted) groups.push_back(PromptGroup{sample.prompt_id, {}});
    groups[it->second].samples.push_back(std::move(sample));
  }

  for (auto& group : groups) {
    std::sort(group.samples.begin(), group.samples.end(),
              [](const ScoredSample& a, const ScoredSample& b) {
                return a.sample_id < b.sample_id;
              });
    for (int i = 0; i < group.size(); ++i) {
      if (group.samples[i].sample_id != i) {
        throw DataError("prompt '" + group.prompt_id +
                        "' has non-contiguous sample_id range (expected " +
                        std::to_string(i) + ", found " +
                        std::to_string(group.samples[i].sample_id) + ")");
      }
    }
  }
  return groups;
}

void write_scored_samples(const std::string& path,
                          const std::vector<PromptGroup>& groups) {
  std::ofstream out = open_output(path);
  for (const auto& group : groups) {
    for (const auto& sample : group.samples) {
      json obj{{"prompt_id", sample.prompt_id},
               {"sample_id", sample.sample_id},
               {"reward", sample.reward}};
      if (!sample.text.empty()) obj["text"] = sample.text;
      out << obj.dump() << '\n';
    }
  }
  if (!out) throw DataError("write failed: " + path);
}

DatasetManifest write_preference_dataset(const std::string& path,
                                         const std::vector<PreferencePair>& pairs,
                                         const ManifestInfo& info) {
  for (const auto& pair : pairs) validate_pair(pair);

  std::ofstream out = open_output(path);
  for (const auto& pair : pairs) {
    const json obj{{"prompt_id", pair.prompt_id},
                   {"chosen_id", pair.chosen_id},
                   {"rejected_id", pair.rejected_id},
                   {"chosen_reward", pair.chosen_reward},
                   {"rejected_reward", pair.rejected_reward},
                   {"margin", pair.margin},
                   {"strategy_tag", pair.strategy_tag}};
    out << obj.dump() << '\n';
  }
  if (!out) throw DataError("write failed: " + path);

  DatasetManifest manifest;
  manifest.record_count = static_cast<std::int64_t>(pairs.size());
  manifest.dropped_prompt_count = info.dropped_prompt_count;
  manifest.strategy_tag = info.strategy_tag;
  manifest.seed = info.seed;
  manifest.source_path = info.source_path;
  return manifest;
}

std::vector<PreferencePair> read_preference_dataset(const std::string& path) {
  std::ifstream in = open_input(path);

  std::vector<PreferencePair> pairs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const json obj = parse_line(path, line_no, line);

    PreferencePair pair;
    pair.prompt_id = require_string(obj, "prompt_id", path, line_no);
    pair.chosen_id = require_int(obj, "chosen_id", path, line_no);
    pair.rejected_id = require_int(obj, "rejected_id", path, line_no);
    pair.chosen_reward = require_finite_number(obj, "chosen_reward", path, line_no);
    pair.rejected_reward =
        require_finite_number(obj, "rejected_reward", path, line_no);
    pair.margin = require_finite_number(obj, "margin", path, line_no);
    pair.strategy_tag = require_string(obj, "strategy_tag", path, line_no);
    try {
      validate_pair(pair);
    } catch (const DataError& e) {
      throw DataError(line_err(path, line_no, e.what()));
    }
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

void write_manifest(const std::string& path, const DatasetManifest& manifest,
                    const std::string& resolved_config_json) {
  json obj{{"record_count", manifest.record_count},
           {"dropped_prompt_count", manifest.dropped_prompt_count},
           {"strategy_tag", manifest.strategy_tag},
           {"seed", manifest.seed},
           {"source_path", manifest.source_path}};
  if (!resolved_config_json.empty()) {
    obj["config"] = json::parse(resolved_config_json);
  }
  std::ofstream out = open_output(path);
  out << obj.dump(2) << '\n';
  if (!out) throw DataError("write failed: " + path);
}

}  // namespace pairlab
