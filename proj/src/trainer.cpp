#include "pairlab/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pairlab/error.hpp"
#include "pairlab/rng.hpp"

namespace pairlab {

namespace {

constexpr double kLn2 = 0.6931471805599453;

double log_sum_exp(const std::vector<double>& values) {
  double hi = values.front();
  for (double v : values) hi = std::max(hi, v);
  double acc = 0.0;
  for (double v : values) acc += std::exp(v - hi);
  return hi + std::log(acc);
}

}  // namespace

double softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double log_sigmoid(double x) { return -softplus(-x); }

ToyPolicy ToyPolicy::uniform_over(std::span<const PromptGroup> groups) {
  ToyPolicy policy;
  policy.prompt_ids_.reserve(groups.size());
  policy.logits_.reserve(groups.size());
  for (const PromptGroup& group : groups) {
    if (group.samples.empty()) {
      throw DataError("policy: prompt '" + group.prompt_id + "' has no samples");
    }
    policy.index_.emplace(group.prompt_id, policy.prompt_ids_.size());
    policy.prompt_ids_.push_back(group.prompt_id);
    policy.logits_.emplace_back(group.samples.size(), 0.0);
  }
  return policy;
}

std::size_t ToyPolicy::prompt_index(const std::string& prompt_id) const {
  const auto it = index_.find(prompt_id);
  if (it == index_.end()) {
    throw DataError("policy has no prompt '" + prompt_id + "'");
  }
  return it->second;
}

double ToyPolicy::log_prob(std::size_t prompt_index, int response_id) const {
  const std::vector<double>& z = logits_[prompt_index];
  if (response_id < 0 || response_id >= static_cast<int>(z.size())) {
    throw DataError("response id " + std::to_string(response_id) +
                    " out of range for prompt '" + prompt_ids_[prompt_index] +
                    "'");
  }
  return z[static_cast<std::size_t>(response_id)] - log_sum_exp(z);
}

double ToyPolicy::log_prob(const std::string& prompt_id, int response_id) const {
  return log_prob(prompt_index(prompt_id), response_id);
}

PolicyGrad PolicyGrad::zeros_like(const ToyPolicy& policy) {
  PolicyGrad grad;
  grad.values.reserve(policy.prompt_count());
  for (std::size_t i = 0; i < policy.prompt_count(); ++i) {
    grad.values.emplace_back(policy.logits(i).size(), 0.0);
  }
  return grad;
}

void validate_dpo_config(const DpoConfig& config) {
  if (!(config.beta > 0.0)) throw DataError("trainer: beta must be > 0");
  if (!(config.learning_rate > 0.0)) {
    throw DataError("trainer: learning_rate must be > 0");
  }
  if (config.steps < 1) throw DataError("trainer: steps must be >= 1");
  if (config.batch_size < 1) throw DataError("trainer: batch_size must be >= 1");
  if (config.trace_every < 1) {
    throw DataError("trainer: trace_every must be >= 1");
  }
}

double implicit_reward(const ToyPolicy& policy, const ReferencePolicy& reference,
                       const std::string& prompt_id, int response_id,
                       double beta) {
  return beta * (policy.log_prob(prompt_id, response_id) -
                 reference.log_prob(prompt_id, response_id));
}

namespace {

// Implicit-reward margin of a pair; shared by loss and gradient paths.
double pair_margin(const ToyPolicy& policy, const ReferencePolicy& reference,
                   const PreferencePair& pair, double beta,
                   std::size_t prompt_index) {
  const double w = policy.log_prob(prompt_index, pair.chosen_id) -
                   reference.log_prob(prompt_index, pair.chosen_id);
  const double l = policy.log_prob(prompt_index, pair.rejected_id) -
                   reference.log_prob(prompt_index, pair.rejected_id);
  return beta * (w - l);
}

}  // namespace

double pair_loss(const ToyPolicy& policy, const ReferencePolicy& reference,
                 const PreferencePair& pair, double beta) {
  return softplus(
      -pair_margin(policy, reference, pair, beta,
                   policy.prompt_index(pair.prompt_id)));
}

std::pair<double, PolicyGrad> batch_loss_and_grad(
    const ToyPolicy& policy, const ReferencePolicy& reference,
    std::span<const PreferencePair> batch, double beta) {
  if (batch.empty()) throw DataError("batch_loss_and_grad: empty batch");

  PolicyGrad grad = PolicyGrad::zeros_like(policy);
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  double loss = 0.0;
  for (const PreferencePair& pair : batch) {
    const std::size_t p = policy.prompt_index(pair.prompt_id);
    const double h = pair_margin(policy, reference, pair, beta, p);
    loss += softplus(-h) * inv_b;
    // dL/dh = sigmoid(h) - 1; h depends on the two pair logits only, the
    // softmax terms cancel inside the within-prompt difference.
    const double coeff = (-1.0 / (1.0 + std::exp(h))) * beta * inv_b;
    grad.values[p][static_cast<std::size_t>(pair.chosen_id)] += coeff;
    grad.values[p][static_cast<std::size_t>(pair.rejected_id)] -= coeff;
  }
  return {loss, std::move(grad)};
}

double dataset_mean_loss(const ToyPolicy& policy,
                         const ReferencePolicy& reference,
                         std::span<const PreferencePair> dataset, double beta) {
  if (dataset.empty()) throw DataError("dataset_mean_loss: empty dataset");
  double loss = 0.0;
  for (const PreferencePair& pair : dataset) {
    loss += pair_loss(policy, reference, pair, beta);
  }
  return loss / static_cast<double>(dataset.size());
}

TrainTrace train(const ToyPolicy& policy, const ReferencePolicy& reference,
                 std::span<const PreferencePair> dataset,
                 const DpoConfig& config) {
  validate_dpo_config(config);
  if (dataset.empty()) throw DataError("train: empty dataset");

  ToyPolicy current = policy;
  TrainTrace trace;

  const auto record = [&](int step) {
    const double loss = dataset_mean_loss(current, reference, dataset,
                                          config.beta);
    if (!std::isfinite(loss) || loss > 10.0 * kLn2) {
      throw NumericError("training diverged at step " + std::to_string(step) +
                         " (loss " + std::to_string(loss) +
                         "); lower the learning rate");
    }
    trace.entries.emplace_back(step, loss);
    return loss;
  };

  record(0);

  Xoshiro256pp shuffle_rng(derive_seed(config.seed, fnv1a64("train-shuffle")));
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::size_t cursor = order.size();  // forces a shuffle on first use

  std::vector<PreferencePair> batch;
  batch.reserve(static_cast<std::size_t>(config.batch_size));

  double last_loss = trace.entries.back().second;
  for (int step = 1; step <= config.steps; ++step) {
    batch.clear();
    while (batch.size() < static_cast<std::size_t>(config.batch_size) &&
           batch.size() < dataset.size()) {
      if (cursor == order.size()) {
        // Fisher-Yates reshuffle at each epoch boundary.
        for (std::size_t i = order.size() - 1; i > 0; --i) {
          const std::size_t j =
              static_cast<std::size_t>(shuffle_rng.next() % (i + 1));
          std::swap(order[i], order[j]);
        }
        cursor = 0;
      }
      batch.push_back(dataset[order[cursor++]]);
    }

    const auto [batch_loss, grad] =
        batch_loss_and_grad(current, reference, batch, config.beta);
    (void)batch_loss;
    for (std::size_t p = 0; p < current.prompt_count(); ++p) {
      std::vector<double>& z = current.logits(p);
      const std::vector<double>& g = grad.values[p];
      for (std::size_t k = 0; k < z.size(); ++k) {
        z[k] -= config.learning_rate * g[k];
      }
    }

    if (step % config.trace_every == 0 || step == config.steps) {
      last_loss = record(step);
    }
  }

  trace.final_loss = last_loss;
  trace.final_policy = std::move(current);
  return trace;
}

double expected_policy_reward(const ToyPolicy& policy,
                              std::span<const PromptGroup> groups) {
  if (groups.empty()) throw DataError("expected_policy_reward: no prompts");
  double total = 0.0;
  for (const PromptGroup& group : groups) {
    const std::size_t p = policy.prompt_index(group.prompt_id);
    const std::vector<double>& z = policy.logits(p);
    if (z.size() != group.samples.size()) {
      throw DataError("policy enumeration for prompt '" + group.prompt_id +
                      "' does not match the sample count");
    }
    const double lse = [&] {
      double hi = z.front();
      for (double v : z) hi = std::max(hi, v);
      double acc = 0.0;
      for (double v : z) acc += std::exp(v - hi);
      return hi + std::log(acc);
    }();
    double expected = 0.0;
    for (std::size_t k = 0; k < z.size(); ++k) {
      expected += std::exp(z[k] - lse) * group.samples[k].reward;
    }
    total += expected;
  }
  return total / static_cast<double>(groups.size());
}

}  // namespace pairlab
