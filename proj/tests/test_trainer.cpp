#include "pairlab/trainer.hpp"

#include <cmath>
#include <limits>

#include <doctest.h>

#include "pairlab/error.hpp"
#include "pairlab/pairs.hpp"
#include "pairlab/rng.hpp"
#include "pairlab/synth.hpp"

using namespace pairlab;

namespace {

constexpr double kLn2 = 0.6931471805599453;

std::vector<PromptGroup> tiny_corpus(int prompts, int m, std::uint64_t seed) {
  std::vector<PromptGroup> groups;
  Xoshiro256pp rng(seed);
  for (int p = 0; p < prompts; ++p) {
    PromptGroup group;
    group.prompt_id = "p" + std::to_string(p);
    for (int j = 0; j < m; ++j) {
      group.samples.push_back({group.prompt_id, j, rng.normal(0.0, 1.0), ""});
    }
    groups.push_back(std::move(group));
  }
  return groups;
}

PreferencePair make_pair(const std::string& prompt, int w, int l,
                         double rw = 1.0, double rl = 0.0) {
  PreferencePair pair;
  pair.prompt_id = prompt;
  pair.chosen_id = w;
  pair.rejected_id = l;
  pair.chosen_reward = rw;
  pair.rejected_reward = rl;
  pair.margin = rw - rl;
  pair.strategy_tag = "test";
  return pair;
}

// Finite-difference oracle over the mean of pair_loss values.
double fd_loss(const ToyPolicy& policy, const ReferencePolicy& reference,
               const std::vector<PreferencePair>& batch, double beta) {
  double sum = 0.0;
  for (const auto& pair : batch) sum += pair_loss(policy, reference, pair, beta);
  return sum / static_cast<double>(batch.size());
}

}  // namespace

TEST_CASE("implicit reward is zero when policy equals reference") {
  const auto groups = tiny_corpus(3, 4, 1);
  const ToyPolicy policy = ToyPolicy::uniform_over(groups);
  for (const auto& group : groups) {
    for (const auto& sample : group.samples) {
      CHECK(implicit_reward(policy, policy, group.prompt_id, sample.sample_id,
                            0.01) == 0.0);
    }
  }
}

TEST_CASE("implicit reward is linear in beta") {
  const auto groups = tiny_corpus(2, 4, 2);
  const ReferencePolicy reference = ToyPolicy::uniform_over(groups);
  ToyPolicy policy = reference;
  policy.logits(0) = {0.7, -0.3, 0.1, 0.4};
  const double r1 = implicit_reward(policy, reference, "p0", 2, 0.05);
  const double r2 = implicit_reward(policy, reference, "p0", 2, 0.10);
  CHECK(r2 == doctest::Approx(2.0 * r1).epsilon(1e-12));
}

TEST_CASE("implicit reward hand evaluation: logits [1,0,0,0] over m=4") {
  // log pi(y0) = 1 - log(e + 3); reference uniform gives -log 4; the margin
  // is beta * (1 - log(e + 3) + log 4).
  const auto groups = tiny_corpus(1, 4, 3);
  const ReferencePolicy reference = ToyPolicy::uniform_over(groups);
  ToyPolicy policy = reference;
  policy.logits(0) = {1.0, 0.0, 0.0, 0.0};
  const double beta = 0.25;
  const double expected =
      beta * (1.0 - std::log(std::exp(1.0) + 3.0) + std::log(4.0));
  CHECK(implicit_reward(policy, reference, "p0", 0, beta) ==
        doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("implicit reward rejects unknown ids") {
  const auto groups = tiny_corpus(1, 3, 4);
  const ToyPolicy policy = ToyPolicy::uniform_over(groups);
  CHECK_THROWS_AS(implicit_reward(policy, policy, "nope", 0, 0.1), DataError);
  CHECK_THROWS_AS(implicit_reward(policy, policy, "p0", 7, 0.1), DataError);
}

TEST_CASE("pair loss at the uniform start is exactly ln 2") {
  const auto groups = tiny_corpus(2, 5, 5);
  const ToyPolicy policy = ToyPolicy::uniform_over(groups);
  const PreferencePair pair = make_pair("p0", 3, 1);
  CHECK(pair_loss(policy, policy, pair, 0.01) ==
        doctest::Approx(kLn2).epsilon(1e-15));
}

TEST_CASE("pair loss equals softplus of the negated margin") {
  // Margin 10 -> softplus(-10) = 4.539889921686465e-05.
  CHECK(softplus(-10.0) == doctest::Approx(4.539889921686465e-5).epsilon(1e-12));

  const auto groups = tiny_corpus(1, 2, 6);
  const ReferencePolicy reference = ToyPolicy::uniform_over(groups);
  ToyPolicy policy = reference;
  policy.logits(0) = {10.0, 0.0};  // margin = beta * 10 with beta = 1
  const PreferencePair pair = make_pair("p0", 0, 1);
  CHECK(pair_loss(policy, reference, pair, 1.0) ==
        doctest::Approx(4.539889921686465e-5).epsilon(1e-9));
}

TEST_CASE("sigmoid symmetry: exp(-L) + exp(-L') = 1 under swap") {
  const auto groups = tiny_corpus(1, 4, 7);
  const ReferencePolicy reference = ToyPolicy::uniform_over(groups);
  ToyPolicy policy = reference;
  policy.logits(0) = {0.9, -1.4, 0.3, 0.2};
  const PreferencePair fwd = make_pair("p0", 0, 1);
  const PreferencePair rev = make_pair("p0", 1, 0);
  const double l_fwd = pair_loss(policy, reference, fwd, 0.3);
  const double l_rev = pair_loss(policy, reference, rev, 0.3);
  CHECK(std::exp(-l_fwd) + std::exp(-l_rev) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("pair loss is strictly decreasing in the implicit margin") {
  const auto groups = tiny_corpus(1, 2, 8);
  const ReferencePolicy reference = ToyPolicy::uniform_over(groups);
  const PreferencePair pair = make_pair("p0", 0, 1);
  double prev = std::numeric_limits<double>::infinity();
  for (double gap : {-3.0, -1.0, 0.0, 0.5, 2.0, 8.0}) {
    ToyPolicy policy = reference;
    policy.logits(0) = {gap, 0.0};
    const double loss = pair_loss(policy, reference, pair, 0.5);
    CHECK(loss < prev);
    CHECK(loss > 0.0);
    prev = loss;
  }
}

TEST_CASE("analytic gradient matches central finite differences") {
  // The acceptance suite runs the 100-seed version; this is the fast
  // developer loop on a handful of randomized instances.
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Xoshiro256pp rng(derive_seed(100, seed));
    const int prompts = 2 + static_cast<int>(rng.next() % 9);
    const int m = 2 + static_cast<int>(rng.next() % 4);
    const auto groups = tiny_corpus(prompts, m, seed);

    ReferencePolicy reference = ToyPolicy::uniform_over(groups);
    ToyPolicy policy = reference;
    for (int p = 0; p < prompts; ++p) {
      for (int k = 0; k < m; ++k) {
        policy.logits(static_cast<std::size_t>(p))[static_cast<std::size_t>(k)] =
            rng.normal(0.0, 1.0);
        reference.logits(static_cast<std::size_t>(p))[static_cast<std::size_t>(k)] =
            rng.normal(0.0, 0.5);
      }
    }

    std::vector<PreferencePair> batch;
    const int pairs = 1 + static_cast<int>(rng.next() % (prompts * 2));
    for (int i = 0; i < pairs; ++i) {
      const int p = static_cast<int>(rng.next() % prompts);
      const int w = static_cast<int>(rng.next() % m);
      int l = static_cast<int>(rng.next() % m);
      if (l == w) l = (l + 1) % m;
      batch.push_back(make_pair("p" + std::to_string(p), w, l));
    }

    const double beta = 0.05 + 0.5 * rng.uniform01();
    const auto [loss, grad] = batch_loss_and_grad(policy, reference, batch, beta);
    CHECK(loss == doctest::Approx(fd_loss(policy, reference, batch, beta))
                      .epsilon(1e-12));

    const double h = 1e-5;
    for (int p = 0; p < prompts; ++p) {
      for (int k = 0; k < m; ++k) {
        ToyPolicy up = policy;
        ToyPolicy down = policy;
        up.logits(static_cast<std::size_t>(p))[static_cast<std::size_t>(k)] += h;
        down.logits(static_cast<std::size_t>(p))[static_cast<std::size_t>(k)] -= h;
        const double fd = (fd_loss(up, reference, batch, beta) -
                           fd_loss(down, reference, batch, beta)) /
                          (2.0 * h);
        const double analytic =
            grad.values[static_cast<std::size_t>(p)][static_cast<std::size_t>(k)];
        const double scale =
            std::max({1.0, std::abs(analytic), std::abs(fd)});
        CHECK(std::abs(analytic - fd) / scale < 1e-5);
      }
    }
  }
}

TEST_CASE("gradients of prompts outside the batch are exactly zero") {
  const auto groups = tiny_corpus(6, 3, 9);
  const ToyPolicy policy = ToyPolicy::uniform_over(groups);
  const std::vector<PreferencePair> batch{make_pair("p2", 0, 1)};
  const auto [loss, grad] = batch_loss_and_grad(policy, policy, batch, 0.01);
  CHECK(loss == doctest::Approx(kLn2));
  for (std::size_t p = 0; p < grad.values.size(); ++p) {
    for (std::size_t k = 0; k < grad.values[p].size(); ++k) {
      if (p == 2 && (k == 0 || k == 1)) continue;
      CHECK(grad.values[p][k] == 0.0);
    }
  }
  CHECK(grad.values[2][0] != 0.0);
  CHECK(grad.values[2][1] != 0.0);
}

TEST_CASE("empty batch is an error") {
  const auto groups = tiny_corpus(1, 2, 10);
  const ToyPolicy policy = ToyPolicy::uniform_over(groups);
  CHECK_THROWS_AS(
      batch_loss_and_grad(policy, policy, std::vector<PreferencePair>{}, 0.01),
      DataError);
}

TEST_CASE("training starts at ln 2 and is deterministic") {
  const auto groups = tiny_corpus(20, 8, 11);
  const ToyPolicy reference = ToyPolicy::uniform_over(groups);
  const DatasetResult dataset =
      build_dataset(groups, AnchorPairStrategy{Anchor::max(), Anchor::min()});
  REQUIRE(!dataset.pairs.empty());

  DpoConfig config;
  config.beta = 0.1;
  config.learning_rate = 5.0;
  config.steps = 40;
  config.batch_size = 8;
  config.trace_every = 5;
  config.seed = 3;

  const TrainTrace a = train(reference, reference, dataset.pairs, config);
  CHECK(a.entries.front().first == 0);
  CHECK(a.entries.front().second == doctest::Approx(kLn2).epsilon(1e-13));
  CHECK(std::abs(a.entries.front().second - kLn2) < 1e-12);

  for (std::size_t i = 1; i < a.entries.size(); ++i) {
    CHECK(a.entries[i].first > a.entries[i - 1].first);
  }
  CHECK(a.entries.back().first == config.steps);
  CHECK(a.final_loss < kLn2);

  const TrainTrace b = train(reference, reference, dataset.pairs, config);
  REQUIRE(a.entries.size() == b.entries.size());
  for (std::size_t i = 0; i < a.entries.size(); ++i) {
    CHECK(a.entries[i].second == b.entries[i].second);
  }
}

TEST_CASE("divergence guard aborts on a pathological start") {
  const auto groups = tiny_corpus(2, 3, 12);
  const ReferencePolicy reference = ToyPolicy::uniform_over(groups);
  ToyPolicy policy = reference;
  // Policy already inverted hard against the pair: loss ~ beta * 40 >> 10 ln 2.
  policy.logits(0) = {-40.0, 40.0, 0.0};
  const std::vector<PreferencePair> dataset{make_pair("p0", 0, 1)};
  DpoConfig config;
  config.beta = 1.0;
  config.learning_rate = 1.0;
  config.steps = 5;
  config.batch_size = 1;
  CHECK_THROWS_AS(train(policy, reference, dataset, config), NumericError);
}

TEST_CASE("expected policy reward: uniform start is the mean reward") {
  const auto groups = tiny_corpus(5, 6, 13);
  const ToyPolicy policy = ToyPolicy::uniform_over(groups);
  double mean = 0.0;
  for (const auto& group : groups) {
    double sum = 0.0;
    for (const auto& sample : group.samples) sum += sample.reward;
    mean += sum / static_cast<double>(group.samples.size());
  }
  mean /= static_cast<double>(groups.size());
  CHECK(expected_policy_reward(policy, groups) ==
        doctest::Approx(mean).epsilon(1e-12));
}

TEST_CASE("training on max/min pairs raises the expected policy reward") {
  GeneratorConfig gen;
  gen.prompt_count = 40;
  gen.samples_per_prompt = 20;
  gen.seed = 14;
  const auto groups = generate_corpus(gen, 1);
  const ToyPolicy reference = ToyPolicy::uniform_over(groups);
  const DatasetResult dataset =
      build_dataset(groups, AnchorPairStrategy{Anchor::max(), Anchor::min()});

  DpoConfig config;
  config.beta = 0.1;
  config.learning_rate = 2.0;
  config.steps = 200;
  config.batch_size = 40;
  const TrainTrace trace = train(reference, reference, dataset.pairs, config);
  CHECK(expected_policy_reward(trace.final_policy, groups) >
        expected_policy_reward(reference, groups));
}

TEST_CASE("config validation") {
  DpoConfig config;
  config.beta = 0.0;
  CHECK_THROWS_AS(validate_dpo_config(config), DataError);
  config.beta = 0.1;
  config.learning_rate = -1.0;
  CHECK_THROWS_AS(validate_dpo_config(config), DataError);
  config.learning_rate = 1.0;
  config.steps = 0;
  CHECK_THROWS_AS(validate_dpo_config(config), DataError);
  config.steps = 1;
  config.trace_every = 0;
  CHECK_THROWS_AS(validate_dpo_config(config), DataError);
}

TEST_CASE("log_sigmoid is stable for large arguments") {
  CHECK(log_sigmoid(0.0) == doctest::Approx(-kLn2).epsilon(1e-15));
  CHECK(log_sigmoid(1e4) == 0.0);          // underflows gracefully
  CHECK(log_sigmoid(-1e4) == doctest::Approx(-1e4).epsilon(1e-12));
  CHECK(std::isfinite(log_sigmoid(700.0)));
  CHECK(log_sigmoid(700.0) < 0.0);
}
