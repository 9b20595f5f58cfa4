#ifndef PAIRLAB_HARNESS_HPP_
#define PAIRLAB_HARNESS_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pairlab/pairs.hpp"
#include "pairlab/synth.hpp"
#include "pairlab/trainer.hpp"

// Desk-scale experiment orchestration: strategy sweeps over n, the 21-dataset
// anchor grid, and the overfitting probe. A report is a pure function of its
// config; cells are independent and may run in parallel, the report is
// assembled in config order regardless of completion order.
//
// The quality metric in reports, pre_reward/post_reward, is the mean over
// prompts of E_{y~pi_theta}[r(y)] -- a toy stand-in for a win rate, not a win
// rate. Report headers say so.

namespace pairlab {

struct SweepConfig {
  std::vector<int> n_grid{5, 10, 20, 50, 100, 200};
  std::vector<StrategySpec> strategies;
  GeneratorConfig generator;
  DpoConfig trainer;
  std::vector<std::uint64_t> replicate_seeds{1, 2, 3, 4, 5};
};

struct SweepRow {
  std::string strategy_tag;
  int n = 0;
  std::uint64_t seed = 0;
  double final_loss = 0.0;
  double mean_margin = 0.0;
  std::int64_t drops = 0;
  double pre_reward = 0.0;
  double post_reward = 0.0;
};

using SweepReport = std::vector<SweepRow>;

void validate_sweep_config(const SweepConfig& config);

// One training run: corpus regenerated under the replicate seed, budget n
// applied as a sample prefix, dataset built, fresh uniform policy trained.
SweepRow run_cell(const StrategySpec& strategy, int n, std::uint64_t seed,
                  const SweepConfig& config);

// strategies x n_grid x replicate_seeds, in config order.
SweepReport run_strategy_grid(const SweepConfig& config, int threads = 0);

// All 21 anchor-pair datasets at the full generator budget; 21 x |seeds|
// rows. config.strategies is ignored.
SweepReport run_grid_21(const SweepConfig& config, int threads = 0);

// CONVENTIONAL(n) vs SCALABLE(pool=5, n) across n_grid.
SweepReport run_scaling(const SweepConfig& config, int threads = 0);

struct OverfitReport {
  SweepReport rows;  // CONVENTIONAL(n) across n_grid
  // Per n: 2*sigma*sqrt(2 ln n) with sigma = mean per-prompt sample std at
  // the full budget.
  std::vector<std::pair<int, double>> predicted_margins;
};

// Requires n_grid to cover at least {5, 50, 400} and a generator budget of at
// least 400.
OverfitReport run_overfit_probe(const SweepConfig& config, int threads = 0);

// CSV: strategy_tag,n,seed,final_loss,mean_margin,drops,pre_reward,
// post_reward. Optional "# ..." comment lines first (resolved config,
// metric note).
std::string sweep_report_csv(std::span<const SweepRow> rows,
                             std::span<const std::string> header_comments = {});

}  // namespace pairlab

#endif  // PAIRLAB_HARNESS_HPP_
