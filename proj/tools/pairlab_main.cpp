// pairlab: distribution-aware preference-pair construction for DPO, with a
// synthetic reward lab, a toy trainer and an extreme-value analyzer.
//
// Subcommands: gen, stats, pairs, train, evt, sweep.
// Exit codes: 0 success, 1 usage, 2 data error, 3 numerical divergence.
//
// Every output embeds the resolved configuration: CSV files carry it as a
// leading "# config: ..." comment line, JSONL files get a sidecar
// <out>.manifest.json. Reruns with the same flags are byte-identical.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "pairlab/config_json.hpp"
#include "pairlab/error.hpp"
#include "pairlab/evt.hpp"
#include "pairlab/harness.hpp"
#include "pairlab/jsonl.hpp"
#include "pairlab/pairs.hpp"
#include "pairlab/rng.hpp"
#include "pairlab/stats.hpp"
#include "pairlab/synth.hpp"
#include "pairlab/trainer.hpp"

namespace {

using nlohmann::json;

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw pairlab::DataError("cannot open output file: " + path);
  out << text;
  if (!out) throw pairlab::DataError("write failed: " + path);
}

std::vector<std::int64_t> parse_n_list(const std::string& text) {
  std::vector<std::int64_t> values;
  std::stringstream ss(text);
  std::string token;
  while (std::getline(ss, token, ',')) {
    try {
      values.push_back(std::stoll(token));
    } catch (const std::exception&) {
      throw pairlab::UsageError("bad value '" + token + "' in --n list");
    }
  }
  if (values.empty()) throw pairlab::UsageError("--n list is empty");
  return values;
}

// --- gen ---------------------------------------------------------------

struct GenArgs {
  pairlab::GeneratorConfig config;
  std::string out;
  int threads = 0;
};

void run_gen(const GenArgs& args) {
  pairlab::validate_generator_config(args.config);
  const std::string config_json = pairlab::generator_config_json(args.config);
  std::cout << "resolved config: " << config_json << "\n";

  const auto corpus = pairlab::generate_corpus(args.config, args.threads);
  pairlab::write_scored_samples(args.out, corpus);

  pairlab::DatasetManifest manifest;
  manifest.record_count = static_cast<std::int64_t>(args.config.prompt_count) *
                          args.config.samples_per_prompt;
  manifest.strategy_tag = "gen";
  manifest.seed = args.config.seed;
  manifest.source_path = args.out;
  pairlab::write_manifest(args.out + ".manifest.json", manifest, config_json);

  std::cout << "wrote " << manifest.record_count << " samples for "
            << args.config.prompt_count << " prompts to " << args.out << "\n";
}

// --- stats -------------------------------------------------------------

void run_stats(const std::string& in, bool extended, const std::string& out) {
  const auto groups = pairlab::read_scored_samples(in);
  std::ostringstream lines;
  for (const auto& group : groups) {
    const pairlab::RewardStats stats = pairlab::compute_stats(group.samples);
    const pairlab::AnchorSet set =
        pairlab::select_anchor_set(group.samples, extended);
    json anchors = json::object();
    for (const auto& [anchor, selection] : set) {
      anchors[pairlab::to_string(anchor)] =
          json{{"sample_id", selection.sample_id},
               {"reward", selection.reward},
               {"target", selection.target_value}};
    }
    const json line{{"prompt_id", stats.prompt_id},
                    {"n", stats.n},
                    {"mu", stats.mu},
                    {"sigma", stats.sigma},
                    {"min_reward", stats.min_reward},
                    {"max_reward", stats.max_reward},
                    {"anchors", anchors},
                    {"histogram", pairlab::reward_histogram(group.samples)}};
    lines << line.dump() << '\n';
  }
  write_text_file(out, lines.str());

  pairlab::DatasetManifest manifest;
  manifest.record_count = static_cast<std::int64_t>(groups.size());
  manifest.strategy_tag = extended ? "stats:extended" : "stats";
  manifest.source_path = in;
  pairlab::write_manifest(
      out + ".manifest.json", manifest,
      json{{"input", in}, {"extended", extended}}.dump());
  std::cout << "wrote stats for " << groups.size() << " prompts ("
            << (extended ? 11 : 7) << " anchors each) to " << out << "\n";
}

// --- pairs -------------------------------------------------------------

struct PairsArgs {
  std::string in;
  std::string out;
  std::string strategy = "anchor";
  std::string chosen = "mu+2s";
  std::string rejected = "mu-2s";
  int n = 5;
  int pool = 5;
  std::uint64_t seed = 0;
};

void run_pairs(const PairsArgs& args) {
  pairlab::StrategySpec strategy = [&]() -> pairlab::StrategySpec {
    if (args.strategy == "anchor") {
      return pairlab::AnchorPairStrategy{
          pairlab::anchor_from_string(args.chosen),
          pairlab::anchor_from_string(args.rejected)};
    }
    if (args.strategy == "conventional") {
      return pairlab::ConventionalStrategy{args.n};
    }
    if (args.strategy == "scalable") {
      return pairlab::ScalableStrategy{args.pool, args.n};
    }
    throw pairlab::UsageError("unknown --strategy '" + args.strategy +
                              "' (expected anchor, conventional or scalable)");
  }();
  try {
    pairlab::validate_strategy(strategy);
  } catch (const pairlab::DataError& e) {
    // Bad flag combinations are usage errors at the CLI boundary.
    throw pairlab::UsageError(e.what());
  }

  const auto groups = pairlab::read_scored_samples(args.in);
  const pairlab::DatasetResult result =
      pairlab::build_dataset(groups, strategy);

  pairlab::ManifestInfo info;
  info.strategy_tag = pairlab::strategy_tag(strategy);
  info.seed = args.seed;
  info.source_path = args.in;
  info.dropped_prompt_count = result.drops.total();
  const pairlab::DatasetManifest manifest =
      pairlab::write_preference_dataset(args.out, result.pairs, info);
  pairlab::write_manifest(
      args.out + ".manifest.json", manifest,
      json{{"input", args.in}, {"strategy", info.strategy_tag}}.dump());

  std::cout << "strategy " << info.strategy_tag << ": " << manifest.record_count
            << " pairs, " << result.drops.total() << " dropped prompts ("
            << result.drops.same_sample << " same-sample, "
            << result.drops.non_positive_margin << " non-positive margin)\n";
}

// --- train -------------------------------------------------------------

struct TrainArgs {
  std::string pairs_path;
  std::string samples_path;
  std::string out;
  pairlab::DpoConfig config;
};

void run_train(const TrainArgs& args) {
  const auto pairs = pairlab::read_preference_dataset(args.pairs_path);
  const auto groups = pairlab::read_scored_samples(args.samples_path);
  if (pairs.empty()) throw pairlab::DataError("no pairs in " + args.pairs_path);

  const auto reference = pairlab::ToyPolicy::uniform_over(groups);
  const json resolved{{"trainer", json::parse(pairlab::dpo_config_json(args.config))},
                      {"pairs", args.pairs_path},
                      {"samples", args.samples_path}};
  const std::string config_json = resolved.dump();
  std::cout << "resolved config: " << config_json << "\n";

  const pairlab::TrainTrace trace =
      pairlab::train(reference, reference, pairs, args.config);

  std::ostringstream csv;
  csv << "# config: " << config_json << '\n';
  csv << "step,loss\n";
  for (const auto& [step, loss] : trace.entries) {
    csv << step << ',' << pairlab::format_double(loss) << '\n';
  }
  write_text_file(args.out, csv.str());
  std::cout << "final loss " << pairlab::format_double(trace.final_loss)
            << " after " << args.config.steps << " steps; trace in "
            << args.out << "\n";
}

// --- evt ---------------------------------------------------------------

struct EvtArgs {
  double mu = 0.0;
  double sigma = 1.0;
  std::string n_list = "5,100,400";
  std::int64_t trials = 100000;
  std::uint64_t seed = 0;
  int threads = 0;
  int k = 3;
  std::string samples_path;  // switches to the top-k curve when set
  std::string out;
};

void run_evt(const EvtArgs& args) {
  const std::vector<std::int64_t> n_values = parse_n_list(args.n_list);
  if (!args.samples_path.empty()) {
    const auto groups = pairlab::read_scored_samples(args.samples_path);
    const auto curve = pairlab::top_k_mean_curve(groups, args.k, n_values);
    const json config{{"samples", args.samples_path},
                      {"k", args.k},
                      {"n", n_values}};
    write_text_file(args.out,
                    pairlab::top_k_curve_csv(curve, "config: " + config.dump()));
    std::cout << "wrote top-" << args.k << " curve (" << curve.size()
              << " rows) to " << args.out << "\n";
    return;
  }

  const json config{{"mu", args.mu},       {"sigma", args.sigma},
                    {"n", n_values},       {"trials", args.trials},
                    {"seed", args.seed}};
  std::cout << "resolved config: " << config.dump() << "\n";
  const auto rows =
      pairlab::build_evt_report(args.mu, args.sigma, n_values, args.trials,
                                args.seed, args.threads);
  write_text_file(args.out,
                  pairlab::evt_report_csv(rows, "config: " + config.dump()));
  std::cout << "wrote EVT report (" << rows.size() << " rows) to " << args.out
            << "\n";
}

// --- sweep -------------------------------------------------------------

struct SweepArgs {
  std::string config_path;
  std::string out;
  std::string mode_override;
  std::optional<std::uint64_t> seed_override;
  int threads = 0;
};

void run_sweep(const SweepArgs& args) {
  pairlab::RunConfig config = pairlab::load_run_config(args.config_path);
  if (args.seed_override) {
    // Flags win over the file; re-derive the sub-seeds from the new root.
    config.seed = *args.seed_override;
    config.sweep.generator.seed =
        pairlab::derive_seed(config.seed, pairlab::fnv1a64("generator"));
    config.sweep.trainer.seed =
        pairlab::derive_seed(config.seed, pairlab::fnv1a64("trainer"));
  }
  if (!args.mode_override.empty()) {
    config.mode = pairlab::sweep_mode_from_string(args.mode_override);
  }
  std::string out_path = args.out;
  if (out_path.empty()) out_path = config.output_path;
  if (out_path.empty()) {
    throw pairlab::UsageError("no output path (--out flag or 'output' key)");
  }

  const std::string resolved = pairlab::run_config_json(config);
  std::cout << "resolved config (flags > file > defaults): " << resolved
            << "\n";

  std::vector<std::string> comments{
      "config: " + resolved,
      "pre_reward/post_reward are mean expected policy rewards "
      "E[r(y)], a toy metric, not win rates"};

  pairlab::SweepReport report;
  switch (config.mode) {
    case pairlab::SweepMode::Grid:
      report = pairlab::run_strategy_grid(config.sweep, args.threads);
      break;
    case pairlab::SweepMode::Grid21:
      report = pairlab::run_grid_21(config.sweep, args.threads);
      break;
    case pairlab::SweepMode::Scaling:
      report = pairlab::run_scaling(config.sweep, args.threads);
      break;
    case pairlab::SweepMode::Overfit: {
      const pairlab::OverfitReport overfit =
          pairlab::run_overfit_probe(config.sweep, args.threads);
      report = overfit.rows;
      for (const auto& [n, margin] : overfit.predicted_margins) {
        comments.push_back("evt predicted margin at n=" + std::to_string(n) +
                           ": " + pairlab::format_double(margin));
      }
      break;
    }
  }

  write_text_file(out_path, pairlab::sweep_report_csv(report, comments));
  std::cout << "wrote sweep report (" << report.size() << " rows) to "
            << out_path << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"distribution-aware preference pairs for DPO, desk-scale lab"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "generate a synthetic scored corpus");
  gen_cmd->add_option("--prompts", gen.config.prompt_count, "prompt count");
  gen_cmd->add_option("--samples", gen.config.samples_per_prompt,
                      "samples per prompt");
  gen_cmd->add_option("--mu-min", gen.config.mu_min, "mu range lower bound");
  gen_cmd->add_option("--mu-max", gen.config.mu_max, "mu range upper bound");
  gen_cmd->add_option("--sigma-min", gen.config.sigma_min,
                      "sigma range lower bound");
  gen_cmd->add_option("--sigma-max", gen.config.sigma_max,
                      "sigma range upper bound");
  gen_cmd->add_option("--seed", gen.config.seed, "root seed");
  gen_cmd->add_option("--threads", gen.threads, "worker cap (0 = all cores)");
  gen_cmd->add_option("--out", gen.out, "output JSONL path")->required();

  std::string stats_in, stats_out;
  bool stats_extended = false;
  auto* stats_cmd =
      app.add_subcommand("stats", "per-prompt reward stats and anchor sets");
  stats_cmd->add_option("--in", stats_in, "scored samples JSONL")->required();
  stats_cmd->add_flag("--extended", stats_extended,
                      "include mu+-3s and mu+-4s anchors (11 instead of 7)");
  stats_cmd->add_option("--out", stats_out, "output JSONL path")->required();

  PairsArgs pairs;
  auto* pairs_cmd =
      app.add_subcommand("pairs", "build a preference dataset from scores");
  pairs_cmd->add_option("--in", pairs.in, "scored samples JSONL")->required();
  pairs_cmd->add_option("--strategy", pairs.strategy,
                        "anchor | conventional | scalable");
  pairs_cmd->add_option("--chosen", pairs.chosen, "chosen anchor (anchor mode)");
  pairs_cmd->add_option("--rejected", pairs.rejected,
                        "rejected anchor (anchor mode)");
  pairs_cmd->add_option("--n", pairs.n, "sample budget");
  pairs_cmd->add_option("--pool", pairs.pool,
                        "rejected pool size (scalable mode)");
  pairs_cmd->add_option("--seed", pairs.seed, "seed recorded in the manifest");
  pairs_cmd->add_option("--out", pairs.out, "output JSONL path")->required();

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "train the toy DPO policy");
  train_cmd->add_option("--pairs", train.pairs_path, "preference pairs JSONL")
      ->required();
  train_cmd
      ->add_option("--samples", train.samples_path,
                   "scored samples JSONL (candidate enumeration)")
      ->required();
  train_cmd->add_option("--beta", train.config.beta, "DPO beta");
  train_cmd->add_option("--lr", train.config.learning_rate, "learning rate");
  train_cmd->add_option("--steps", train.config.steps, "gradient steps");
  train_cmd->add_option("--batch", train.config.batch_size, "batch size");
  train_cmd->add_option("--trace-every", train.config.trace_every,
                        "trace sampling interval in steps");
  train_cmd->add_option("--seed", train.config.seed, "shuffle seed");
  train_cmd->add_option("--out", train.out, "trace CSV path")->required();

  EvtArgs evt;
  auto* evt_cmd =
      app.add_subcommand("evt", "extreme-value report or top-k reward curve");
  evt_cmd->add_option("--mu", evt.mu, "distribution mean");
  evt_cmd->add_option("--sigma", evt.sigma, "distribution std");
  evt_cmd->add_option("--n", evt.n_list, "comma-separated n values");
  evt_cmd->add_option("--trials", evt.trials, "Monte Carlo trials per n");
  evt_cmd->add_option("--seed", evt.seed, "root seed");
  evt_cmd->add_option("--threads", evt.threads, "worker cap (0 = all cores)");
  evt_cmd->add_option("--samples", evt.samples_path,
                      "scored samples JSONL (switches to the top-k curve)");
  evt_cmd->add_option("--k", evt.k, "top-k size for the curve");
  evt_cmd->add_option("--out", evt.out, "output CSV path")->required();

  SweepArgs sweep;
  std::uint64_t sweep_seed_flag = 0;
  auto* sweep_cmd =
      app.add_subcommand("sweep", "run a config-driven experiment sweep");
  sweep_cmd->add_option("config", sweep.config_path, "RunConfig JSON path")
      ->required();
  sweep_cmd->add_option("--out", sweep.out, "report CSV path");
  sweep_cmd->add_option("--mode", sweep.mode_override,
                        "grid | grid21 | scaling | overfit");
  auto* seed_opt =
      sweep_cmd->add_option("--seed", sweep_seed_flag, "override the root seed");
  sweep_cmd->add_option("--threads", sweep.threads, "worker cap (0 = all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << "pairlab: error[usage]: " << e.what() << "\n";
    return 1;
  }

  try {
    if (*gen_cmd) run_gen(gen);
    if (*stats_cmd) run_stats(stats_in, stats_extended, stats_out);
    if (*pairs_cmd) run_pairs(pairs);
    if (*train_cmd) run_train(train);
    if (*evt_cmd) run_evt(evt);
    if (*sweep_cmd) {
      if (seed_opt->count() > 0) sweep.seed_override = sweep_seed_flag;
      run_sweep(sweep);
    }
  } catch (const pairlab::Error& e) {
    std::cerr << "pairlab: error[" << e.class_name() << "]: " << e.what()
              << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "pairlab: error[data]: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
