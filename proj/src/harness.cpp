#include "pairlab/harness.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

#include "pairlab/error.hpp"
#include "pairlab/evt.hpp"
#include "pairlab/parallel.hpp"
#include "pairlab/rng.hpp"

namespace pairlab {

namespace {

// Trainer seeds are decoupled from generator seeds so that changing the
// batch shuffle cannot alias with the reward draws.
constexpr std::uint64_t kTrainerStream = fnv1a64("trainer");

std::vector<PromptGroup> budgeted(const std::vector<PromptGroup>& groups,
                                  int n) {
  std::vector<PromptGroup> out;
  out.reserve(groups.size());
  for (const PromptGroup& group : groups) {
    if (n > group.size()) {
      throw DataError("budget n=" + std::to_string(n) +
                      " exceeds generated samples for prompt '" +
                      group.prompt_id + "'");
    }
    out.push_back(PromptGroup{
        group.prompt_id,
        {group.samples.begin(), group.samples.begin() + n}});
  }
  return out;
}

double mean_margin(std::span<const PreferencePair> pairs) {
  if (pairs.empty()) return 0.0;
  double sum = 0.0;
  for (const PreferencePair& pair : pairs) sum += pair.margin;
  return sum / static_cast<double>(pairs.size());
}

std::vector<StrategySpec> all_21_strategies() {
  const std::vector<Anchor> anchors = anchor_points(false);
  std::vector<StrategySpec> strategies;
  for (std::size_t c = 1; c < anchors.size(); ++c) {
    for (std::size_t r = 0; r < c; ++r) {
      strategies.push_back(AnchorPairStrategy{anchors[c], anchors[r]});
    }
  }
  return strategies;
}

SweepReport run_cells(const std::vector<StrategySpec>& strategies,
                      const std::vector<int>& n_values,
                      const SweepConfig& config, int threads) {
  struct Cell {
    const StrategySpec* strategy;
    int n;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (const StrategySpec& strategy : strategies) {
    for (int n : n_values) {
      for (std::uint64_t seed : config.replicate_seeds) {
        cells.push_back({&strategy, n, seed});
      }
    }
  }

  SweepReport report(cells.size());
  parallel_for(cells.size(), threads, [&](std::size_t i) {
    report[i] = run_cell(*cells[i].strategy, cells[i].n, cells[i].seed, config);
  });
  return report;
}

}  // namespace

void validate_sweep_config(const SweepConfig& config) {
  validate_generator_config(config.generator);
  validate_dpo_config(config.trainer);
  if (config.replicate_seeds.empty()) {
    throw DataError("sweep: replicate_seeds must be non-empty");
  }
  if (config.n_grid.empty()) throw DataError("sweep: n_grid must be non-empty");
  for (std::size_t i = 1; i < config.n_grid.size(); ++i) {
    if (config.n_grid[i] <= config.n_grid[i - 1]) {
      throw DataError("sweep: n_grid must be strictly increasing");
    }
  }
  if (config.n_grid.back() > config.generator.samples_per_prompt) {
    throw DataError("sweep: max(n_grid) exceeds generator samples_per_prompt");
  }
}

namespace {

// The cell budget overrides a budgeted strategy's own n, so one strategy
// entry sweeps cleanly across the whole n_grid.
StrategySpec with_budget(const StrategySpec& strategy, int n) {
  if (std::holds_alternative<ConventionalStrategy>(strategy)) {
    return ConventionalStrategy{n};
  }
  if (const auto* scalable = std::get_if<ScalableStrategy>(&strategy)) {
    return ScalableStrategy{scalable->rejected_pool, n};
  }
  return strategy;
}

}  // namespace

SweepRow run_cell(const StrategySpec& strategy, int n, std::uint64_t seed,
                  const SweepConfig& config) {
  GeneratorConfig gen = config.generator;
  gen.seed = seed;
  const std::vector<PromptGroup> corpus = generate_corpus(gen, 1);
  const std::vector<PromptGroup> groups = budgeted(corpus, n);

  const StrategySpec cell_strategy = with_budget(strategy, n);
  const DatasetResult dataset = build_dataset(groups, cell_strategy);

  SweepRow row;
  row.strategy_tag = strategy_tag(cell_strategy);
  row.n = n;
  row.seed = seed;
  row.mean_margin = mean_margin(dataset.pairs);
  row.drops = dataset.drops.total();

  const ToyPolicy reference = ToyPolicy::uniform_over(groups);
  row.pre_reward = expected_policy_reward(reference, groups);
  if (dataset.pairs.empty()) {
    // Nothing to train on (every prompt dropped); report the untouched policy.
    row.final_loss = std::numeric_limits<double>::quiet_NaN();
    row.post_reward = row.pre_reward;
    return row;
  }

  DpoConfig trainer = config.trainer;
  trainer.seed = derive_seed(seed, kTrainerStream);
  const TrainTrace trace = train(reference, reference, dataset.pairs, trainer);
  row.final_loss = trace.final_loss;
  row.post_reward = expected_policy_reward(trace.final_policy, groups);
  return row;
}

SweepReport run_strategy_grid(const SweepConfig& config, int threads) {
  validate_sweep_config(config);
  if (config.strategies.empty()) {
    throw DataError("sweep: no strategies configured");
  }
  for (const StrategySpec& strategy : config.strategies) {
    validate_strategy(strategy);
  }
  return run_cells(config.strategies, config.n_grid, config, threads);
}

SweepReport run_grid_21(const SweepConfig& config, int threads) {
  validate_sweep_config(config);
  const int n = config.generator.samples_per_prompt;
  return run_cells(all_21_strategies(), {n}, config, threads);
}

SweepReport run_scaling(const SweepConfig& config, int threads) {
  validate_sweep_config(config);
  struct Cell {
    StrategySpec strategy;
    int n;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (int n : config.n_grid) {
    for (std::uint64_t seed : config.replicate_seeds) {
      cells.push_back({ConventionalStrategy{n}, n, seed});
    }
  }
  for (int n : config.n_grid) {
    for (std::uint64_t seed : config.replicate_seeds) {
      cells.push_back({ScalableStrategy{5, n}, n, seed});
    }
  }
  SweepReport report(cells.size());
  parallel_for(cells.size(), threads, [&](std::size_t i) {
    report[i] = run_cell(cells[i].strategy, cells[i].n, cells[i].seed, config);
  });
  return report;
}

OverfitReport run_overfit_probe(const SweepConfig& config, int threads) {
  validate_sweep_config(config);
  for (int required : {5, 50, 400}) {
    if (std::find(config.n_grid.begin(), config.n_grid.end(), required) ==
        config.n_grid.end()) {
      throw DataError("overfit probe: n_grid must include " +
                      std::to_string(required));
    }
  }
  if (config.generator.samples_per_prompt < 400) {
    throw DataError("overfit probe: generator budget must be >= 400");
  }

  OverfitReport out;
  std::vector<StrategySpec> strategies;
  struct Cell {
    StrategySpec strategy;
    int n;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (int n : config.n_grid) {
    for (std::uint64_t seed : config.replicate_seeds) {
      cells.push_back({ConventionalStrategy{n}, n, seed});
    }
  }
  out.rows.resize(cells.size());
  parallel_for(cells.size(), threads, [&](std::size_t i) {
    out.rows[i] =
        run_cell(cells[i].strategy, cells[i].n, cells[i].seed, config);
  });

  // Mean per-prompt sample sigma at the full budget, under the first
  // replicate seed, anchors the EVT margin column.
  GeneratorConfig gen = config.generator;
  gen.seed = config.replicate_seeds.front();
  const std::vector<PromptGroup> corpus = generate_corpus(gen, threads);
  double sigma_sum = 0.0;
  for (const PromptGroup& group : corpus) {
    sigma_sum += compute_stats(group.samples).sigma;
  }
  const double sigma_bar = sigma_sum / static_cast<double>(corpus.size());
  for (int n : config.n_grid) {
    out.predicted_margins.emplace_back(n, predicted_margin(sigma_bar, n));
  }
  return out;
}

std::string sweep_report_csv(std::span<const SweepRow> rows,
                             std::span<const std::string> header_comments) {
  std::ostringstream out;
  for (const std::string& comment : header_comments) {
    out << "# " << comment << '\n';
  }
  out << "strategy_tag,n,seed,final_loss,mean_margin,drops,pre_reward,"
         "post_reward\n";
  for (const SweepRow& row : rows) {
    out << row.strategy_tag << ',' << row.n << ',' << row.seed << ','
        << format_double(row.final_loss) << ','
        << format_double(row.mean_margin) << ',' << row.drops << ','
        << format_double(row.pre_reward) << ','
        << format_double(row.post_reward) << '\n';
  }
  return out.str();
}

}  // namespace pairlab
