#include "pairlab/harness.hpp"

#include <algorithm>
#include <cmath>

#include <doctest.h>

#include "pairlab/config_json.hpp"
#include "pairlab/error.hpp"
#include "pairlab/rng.hpp"

using namespace pairlab;

namespace {

// Small, fast sweep configuration shared by most cases.
SweepConfig small_config() {
  SweepConfig config;
  config.generator.prompt_count = 30;
  config.generator.samples_per_prompt = 50;
  config.trainer.beta = 0.1;
  config.trainer.learning_rate = 1.2;
  config.trainer.steps = 60;
  config.trainer.batch_size = 30;
  config.n_grid = {5, 10, 50};
  config.replicate_seeds = {1, 2};
  return config;
}

}  // namespace

TEST_CASE("strategy grid cardinality: strategies x n x seeds") {
  SweepConfig config = small_config();
  config.strategies = {ConventionalStrategy{5}, ScalableStrategy{5, 5}};
  const SweepReport report = run_strategy_grid(config, 2);
  CHECK(report.size() == 2 * 3 * 2);
}

TEST_CASE("reports are deterministic and independent of the thread count") {
  SweepConfig config = small_config();
  config.strategies = {AnchorPairStrategy{Anchor::max(), Anchor::min()}};
  const SweepReport a = run_strategy_grid(config, 1);
  const SweepReport b = run_strategy_grid(config, 4);
  const std::string csv_a = sweep_report_csv(a);
  const std::string csv_b = sweep_report_csv(b);
  CHECK(csv_a == csv_b);
}

TEST_CASE("cell independence: removing a strategy changes no other cell") {
  SweepConfig config = small_config();
  config.strategies = {ConventionalStrategy{5},
                       AnchorPairStrategy{Anchor::max(), Anchor::min()}};
  const SweepReport both = run_strategy_grid(config, 2);

  SweepConfig solo = config;
  solo.strategies = {ConventionalStrategy{5}};
  const SweepReport alone = run_strategy_grid(solo, 2);

  REQUIRE(alone.size() * 2 == both.size());
  for (std::size_t i = 0; i < alone.size(); ++i) {
    CHECK(alone[i].final_loss == both[i].final_loss);
    CHECK(alone[i].mean_margin == both[i].mean_margin);
    CHECK(alone[i].post_reward == both[i].post_reward);
  }
}

TEST_CASE("grid21 emits 21 rows per seed with ordered margins") {
  SweepConfig config = small_config();
  config.generator.samples_per_prompt = 200;
  config.generator.prompt_count = 60;
  config.n_grid = {5, 200};
  config.trainer.steps = 40;
  config.replicate_seeds = {1};
  const SweepReport report = run_grid_21(config, 0);
  CHECK(report.size() == 21);

  const auto row_margin = [&](const std::string& tag) {
    for (const SweepRow& row : report) {
      if (row.strategy_tag == tag) return row.mean_margin;
    }
    FAIL("missing row " << tag);
    return 0.0;
  };
  CHECK(row_margin("anchor:mu+2s/mu-2s") > row_margin("anchor:mu+1s/mu-1s"));

  SUBCASE("no cell degrades the expected policy reward") {
    for (const SweepRow& row : report) {
      CHECK(row.post_reward >= row.pre_reward);
      CHECK(row.n == 200);
    }
  }
}

TEST_CASE("scaling sweep properties") {
  SweepConfig config = small_config();
  config.generator.prompt_count = 80;
  config.generator.samples_per_prompt = 200;
  config.n_grid = {5, 20, 200};
  config.trainer.steps = 30;
  config.replicate_seeds = {3};
  const SweepReport report = run_scaling(config, 0);
  REQUIRE(report.size() == 6);

  const auto find_row = [&](const std::string& tag) -> const SweepRow& {
    for (const SweepRow& row : report) {
      if (row.strategy_tag == tag) return row;
    }
    FAIL("missing row " << tag);
    return report.front();
  };

  // Conventional margins stretch with n (both extremes widen).
  CHECK(find_row("conventional:n=200").mean_margin >
        find_row("conventional:n=5").mean_margin);
  // Scalable and conventional coincide at n=5 on the same corpus.
  CHECK(find_row("scalable:pool=5,n=5").mean_margin ==
        find_row("conventional:n=5").mean_margin);
  // Scalable margins grow because the chosen side improves.
  CHECK(find_row("scalable:pool=5,n=200").mean_margin >
        find_row("scalable:pool=5,n=5").mean_margin);
}

TEST_CASE("overfit probe requires the 5/50/400 grid and a 400 budget") {
  SweepConfig config = small_config();
  config.n_grid = {5, 50};
  CHECK_THROWS_AS(run_overfit_probe(config, 1), DataError);

  config.n_grid = {5, 50, 400};
  config.generator.samples_per_prompt = 200;
  CHECK_THROWS_AS(run_overfit_probe(config, 1), DataError);
}

TEST_CASE("overfit probe reports EVT margins alongside losses") {
  SweepConfig config = small_config();
  config.generator.prompt_count = 20;
  config.generator.samples_per_prompt = 400;
  config.generator.sigma_min = 0.999;
  config.generator.sigma_max = 1.001;
  config.n_grid = {5, 50, 400};
  config.trainer.steps = 30;
  config.replicate_seeds = {1};
  const OverfitReport report = run_overfit_probe(config, 0);
  CHECK(report.rows.size() == 3);
  REQUIRE(report.predicted_margins.size() == 3);
  // 2 sigma sqrt(2 ln n) with sigma ~ 1.
  CHECK(report.predicted_margins[0].second ==
        doctest::Approx(2.0 * std::sqrt(2.0 * std::log(5.0))).epsilon(0.05));
  CHECK(report.predicted_margins[2].second ==
        doctest::Approx(6.9232735304091415).epsilon(0.05));
}

TEST_CASE("sweep config validation") {
  SweepConfig config = small_config();
  config.n_grid = {5, 5};
  CHECK_THROWS_AS(validate_sweep_config(config), DataError);
  config.n_grid = {5, 500};
  CHECK_THROWS_AS(validate_sweep_config(config), DataError);
  config.n_grid = {5};
  config.replicate_seeds.clear();
  CHECK_THROWS_AS(validate_sweep_config(config), DataError);

  SweepConfig grid = small_config();
  grid.strategies.clear();
  CHECK_THROWS_AS(run_strategy_grid(grid, 1), DataError);
}

TEST_CASE("run config JSON: strict parsing and precedence") {
  const std::string text = R"({
    "seed": 9,
    "mode": "scaling",
    "generator": {"prompt_count": 12, "samples_per_prompt": 30},
    "trainer": {"beta": 0.1, "steps": 20},
    "sweep": {"n_grid": [5, 30], "replicate_seeds": [4]}
  })";
  const RunConfig config = parse_run_config(text);
  CHECK(config.seed == 9);
  CHECK(config.mode == SweepMode::Scaling);
  CHECK(config.sweep.generator.prompt_count == 12);
  CHECK(config.sweep.trainer.beta == 0.1);
  CHECK(config.sweep.n_grid == std::vector<int>{5, 30});
  // Sub-seeds are derived from the top-level seed when absent.
  CHECK(config.sweep.generator.seed == derive_seed(9, fnv1a64("generator")));
  CHECK(config.sweep.trainer.seed == derive_seed(9, fnv1a64("trainer")));

  SUBCASE("unknown keys are rejected at every level") {
    CHECK_THROWS_WITH_AS(parse_run_config(R"({"sead": 1})"),
                         doctest::Contains("sead"), DataError);
    CHECK_THROWS_WITH_AS(
        parse_run_config(R"({"generator": {"prompt_cout": 5}})"),
        doctest::Contains("prompt_cout"), DataError);
    CHECK_THROWS_WITH_AS(
        parse_run_config(R"({"trainer": {"lr": 5}})"),
        doctest::Contains("lr"), DataError);
    CHECK_THROWS_WITH_AS(
        parse_run_config(
            R"({"sweep": {"strategies": [{"kind": "anchor", "chosen": "max", "rejected": "min", "x": 1}]}})"),
        doctest::Contains("x"), DataError);
  }

  SUBCASE("strategy parsing") {
    const RunConfig parsed = parse_run_config(R"({
      "sweep": {"strategies": [
        {"kind": "anchor", "chosen": "mu+2s", "rejected": "mu-2s"},
        {"kind": "conventional", "n": 7},
        {"kind": "scalable", "n": 30, "pool": 5}
      ]}})");
    REQUIRE(parsed.sweep.strategies.size() == 3);
    CHECK(strategy_tag(parsed.sweep.strategies[0]) == "anchor:mu+2s/mu-2s");
    CHECK(strategy_tag(parsed.sweep.strategies[1]) == "conventional:n=7");
    CHECK(strategy_tag(parsed.sweep.strategies[2]) == "scalable:pool=5,n=30");
  }

  SUBCASE("invalid anchor ordering is rejected at parse time") {
    CHECK_THROWS_AS(
        parse_run_config(
            R"({"sweep": {"strategies": [{"kind": "anchor", "chosen": "min", "rejected": "max"}]}})"),
        DataError);
  }

  SUBCASE("resolved config re-serializes and re-parses") {
    const std::string resolved = run_config_json(config);
    const RunConfig reparsed = parse_run_config(resolved);
    CHECK(reparsed.seed == config.seed);
    CHECK(reparsed.sweep.generator.prompt_count ==
          config.sweep.generator.prompt_count);
    CHECK(run_config_json(reparsed) == resolved);
  }
}
