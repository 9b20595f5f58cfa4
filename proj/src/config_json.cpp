#include "pairlab/config_json.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "pairlab/error.hpp"
#include "pairlab/rng.hpp"

namespace pairlab {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& obj, const std::string& section,
                         std::initializer_list<const char*> known) {
  for (const auto& item : obj.items()) {
    bool found = false;
    for (const char* key : known) {
      if (item.key() == key) {
        found = true;
        break;
      }
    }
    if (!found) {
      throw DataError("config: unknown key '" + item.key() + "' in " + section);
    }
  }
}

const json* maybe(const json& obj, const char* key) {
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

template <typename T>
void read_into(const json& obj, const char* key, T& target,
               const std::string& section) {
  if (const json* v = maybe(obj, key)) {
    try {
      target = v->get<T>();
    } catch (const json::exception&) {
      throw DataError("config: bad value for '" + std::string(key) + "' in " +
                      section);
    }
  }
}

void parse_interval(const json& obj, const char* key, double& lo, double& hi,
                    const std::string& section) {
  if (const json* v = maybe(obj, key)) {
    if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number() ||
        !(*v)[1].is_number()) {
      throw DataError("config: '" + std::string(key) + "' in " + section +
                      " must be a [lo, hi] pair");
    }
    lo = (*v)[0].get<double>();
    hi = (*v)[1].get<double>();
  }
}

GeneratorConfig parse_generator(const json& obj) {
  reject_unknown_keys(obj, "generator",
                      {"prompt_count", "samples_per_prompt", "mu_range",
                       "sigma_range", "seed"});
  GeneratorConfig config;
  read_into(obj, "prompt_count", config.prompt_count, "generator");
  read_into(obj, "samples_per_prompt", config.samples_per_prompt, "generator");
  parse_interval(obj, "mu_range", config.mu_min, config.mu_max, "generator");
  parse_interval(obj, "sigma_range", config.sigma_min, config.sigma_max,
                 "generator");
  read_into(obj, "seed", config.seed, "generator");
  return config;
}

DpoConfig parse_trainer(const json& obj) {
  reject_unknown_keys(obj, "trainer",
                      {"beta", "learning_rate", "steps", "batch_size",
                       "trace_every", "seed"});
  DpoConfig config;
  read_into(obj, "beta", config.beta, "trainer");
  read_into(obj, "learning_rate", config.learning_rate, "trainer");
  read_into(obj, "steps", config.steps, "trainer");
  read_into(obj, "batch_size", config.batch_size, "trainer");
  read_into(obj, "trace_every", config.trace_every, "trainer");
  read_into(obj, "seed", config.seed, "trainer");
  return config;
}

StrategySpec parse_strategy(const json& obj) {
  if (!obj.is_object()) throw DataError("config: strategy must be an object");
  std::string kind;
  read_into(obj, "kind", kind, "strategy");
  if (kind == "anchor") {
    reject_unknown_keys(obj, "strategy", {"kind", "chosen", "rejected"});
    std::string chosen, rejected;
    read_into(obj, "chosen", chosen, "strategy");
    read_into(obj, "rejected", rejected, "strategy");
    if (chosen.empty() || rejected.empty()) {
      throw DataError("config: anchor strategy needs 'chosen' and 'rejected'");
    }
    AnchorPairStrategy strategy{anchor_from_string(chosen),
                                anchor_from_string(rejected)};
    validate_strategy(StrategySpec{strategy});
    return strategy;
  }
  if (kind == "conventional") {
    reject_unknown_keys(obj, "strategy", {"kind", "n"});
    ConventionalStrategy strategy;
    read_into(obj, "n", strategy.n, "strategy");
    validate_strategy(StrategySpec{strategy});
    return strategy;
  }
  if (kind == "scalable") {
    reject_unknown_keys(obj, "strategy", {"kind", "n", "pool"});
    ScalableStrategy strategy;
    read_into(obj, "n", strategy.n, "strategy");
    read_into(obj, "pool", strategy.rejected_pool, "strategy");
    validate_strategy(StrategySpec{strategy});
    return strategy;
  }
  throw DataError("config: unknown strategy kind '" + kind +
                  "' (expected anchor, conventional or scalable)");
}

json strategy_to_json(const StrategySpec& strategy) {
  if (const auto* anchor = std::get_if<AnchorPairStrategy>(&strategy)) {
    return json{{"kind", "anchor"},
                {"chosen", to_string(anchor->chosen)},
                {"rejected", to_string(anchor->rejected)}};
  }
  if (const auto* conv = std::get_if<ConventionalStrategy>(&strategy)) {
    return json{{"kind", "conventional"}, {"n", conv->n}};
  }
  const auto& scalable = std::get<ScalableStrategy>(strategy);
  return json{{"kind", "scalable"},
              {"n", scalable.n},
              {"pool", scalable.rejected_pool}};
}

}  // namespace

std::string to_string(SweepMode mode) {
  switch (mode) {
    case SweepMode::Grid:
      return "grid";
    case SweepMode::Grid21:
      return "grid21";
    case SweepMode::Scaling:
      return "scaling";
    case SweepMode::Overfit:
      return "overfit";
  }
  return "grid";
}

SweepMode sweep_mode_from_string(const std::string& text) {
  if (text == "grid") return SweepMode::Grid;
  if (text == "grid21") return SweepMode::Grid21;
  if (text == "scaling") return SweepMode::Scaling;
  if (text == "overfit") return SweepMode::Overfit;
  throw DataError("config: unknown mode '" + text +
                  "' (expected grid, grid21, scaling or overfit)");
}

RunConfig parse_run_config(const std::string& json_text) {
  json root = json::parse(json_text, nullptr, false);
  if (root.is_discarded() || !root.is_object()) {
    throw DataError("config: document is not a JSON object");
  }
  reject_unknown_keys(root, "top level",
                      {"seed", "mode", "generator", "trainer", "sweep",
                       "input", "output"});

  RunConfig config;
  read_into(root, "seed", config.seed, "top level");
  if (const json* v = maybe(root, "mode")) {
    config.mode = sweep_mode_from_string(v->get<std::string>());
  }
  read_into(root, "input", config.input_path, "top level");
  read_into(root, "output", config.output_path, "top level");

  // Generator and trainer sub-seeds default to derivations of the top seed.
  config.sweep.generator.seed = derive_seed(config.seed, fnv1a64("generator"));
  config.sweep.trainer.seed = derive_seed(config.seed, fnv1a64("trainer"));

  if (const json* v = maybe(root, "generator")) {
    const std::uint64_t derived = config.sweep.generator.seed;
    config.sweep.generator = parse_generator(*v);
    if (!maybe(*v, "seed")) config.sweep.generator.seed = derived;
  }
  if (const json* v = maybe(root, "trainer")) {
    const std::uint64_t derived = config.sweep.trainer.seed;
    config.sweep.trainer = parse_trainer(*v);
    if (!maybe(*v, "seed")) config.sweep.trainer.seed = derived;
  }
  if (const json* v = maybe(root, "sweep")) {
    reject_unknown_keys(*v, "sweep",
                        {"n_grid", "strategies", "replicate_seeds"});
    read_into(*v, "n_grid", config.sweep.n_grid, "sweep");
    read_into(*v, "replicate_seeds", config.sweep.replicate_seeds, "sweep");
    if (const json* strategies = maybe(*v, "strategies")) {
      if (!strategies->is_array()) {
        throw DataError("config: 'strategies' must be an array");
      }
      config.sweep.strategies.clear();
      for (const json& item : *strategies) {
        config.sweep.strategies.push_back(parse_strategy(item));
      }
    }
  }
  return config;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_run_config(buffer.str());
}

std::string generator_config_json(const GeneratorConfig& config) {
  return json{{"prompt_count", config.prompt_count},
              {"samples_per_prompt", config.samples_per_prompt},
              {"mu_range", {config.mu_min, config.mu_max}},
              {"sigma_range", {config.sigma_min, config.sigma_max}},
              {"seed", config.seed}}
      .dump();
}

std::string dpo_config_json(const DpoConfig& config) {
  return json{{"beta", config.beta},
              {"learning_rate", config.learning_rate},
              {"steps", config.steps},
              {"batch_size", config.batch_size},
              {"trace_every", config.trace_every},
              {"seed", config.seed}}
      .dump();
}

std::string run_config_json(const RunConfig& config) {
  json strategies = json::array();
  for (const StrategySpec& strategy : config.sweep.strategies) {
    strategies.push_back(strategy_to_json(strategy));
  }
  json root{{"seed", config.seed},
            {"mode", to_string(config.mode)},
            {"generator", json::parse(generator_config_json(config.sweep.generator))},
            {"trainer", json::parse(dpo_config_json(config.sweep.trainer))},
            {"sweep",
             {{"n_grid", config.sweep.n_grid},
              {"strategies", strategies},
              {"replicate_seeds", config.sweep.replicate_seeds}}}};
  if (!config.input_path.empty()) root["input"] = config.input_path;
  if (!config.output_path.empty()) root["output"] = config.output_path;
  return root.dump();
}

}  // namespace pairlab
