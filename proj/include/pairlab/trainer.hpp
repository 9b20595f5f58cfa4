#ifndef PAIRLAB_TRAINER_HPP_
#define PAIRLAB_TRAINER_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "pairlab/records.hpp"

// Toy-scale DPO trainer.
//
// The policy is tabular: one logit per enumerated candidate response of each
// prompt (the prompt's scored samples), softmax-normalized per prompt. This
// keeps the exact DPO loss geometry -- implicit rewards are beta-scaled
// policy/reference log-ratios, the pair loss is -log sigmoid of their
// difference -- while gradients stay small enough to check against finite
// differences. The reference policy is the frozen initial policy, so the
// partition-function term cancels exactly and training starts at loss ln 2.
//
// Training is plain gradient descent over seeded shuffled mini-batches; no
// adaptive optimizer state, so a (dataset, config) pair fully determines the
// trace. Note the scale coupling: the loss gradient carries a factor beta, so
// logit movement per step is proportional to learning_rate * beta. At the
// default beta = 0.01 a toy-sized learning rate in the hundreds to thousands
// is the regime where the loss visibly moves within a few hundred steps.

namespace pairlab {

class ToyPolicy {
 public:
  ToyPolicy() = default;

  // Uniform (all-zero) logits over each prompt's samples.
  static ToyPolicy uniform_over(std::span<const PromptGroup> groups);

  std::size_t prompt_count() const { return prompt_ids_.size(); }
  const std::vector<std::string>& prompt_ids() const { return prompt_ids_; }

  std::size_t prompt_index(const std::string& prompt_id) const;
  bool has_prompt(const std::string& prompt_id) const {
    return index_.count(prompt_id) != 0;
  }

  std::vector<double>& logits(std::size_t prompt_index) {
    return logits_[prompt_index];
  }
  const std::vector<double>& logits(std::size_t prompt_index) const {
    return logits_[prompt_index];
  }

  // log softmax(logits)[response_id]; throws on unknown ids.
  double log_prob(const std::string& prompt_id, int response_id) const;
  double log_prob(std::size_t prompt_index, int response_id) const;

 private:
  std::vector<std::string> prompt_ids_;
  std::vector<std::vector<double>> logits_;
  std::unordered_map<std::string, std::size_t> index_;
};

using ReferencePolicy = ToyPolicy;

// Per-prompt gradient accumulator with the same shape as the policy logits.
struct PolicyGrad {
  std::vector<std::vector<double>> values;

  static PolicyGrad zeros_like(const ToyPolicy& policy);
};

struct DpoConfig {
  double beta = 0.01;        // 0.1 is the documented alternative
  double learning_rate = 2000.0;  // toy scale, see the note above
  int steps = 500;
  int batch_size = 64;
  int trace_every = 5;
  std::uint64_t seed = 0;
};

void validate_dpo_config(const DpoConfig& config);

struct TrainTrace {
  std::vector<std::pair<int, double>> entries;  // (step, dataset mean loss)
  double final_loss = 0.0;
  ToyPolicy final_policy;
};

// beta * (log pi_theta(y|x) - log pi_ref(y|x)).
double implicit_reward(const ToyPolicy& policy, const ReferencePolicy& reference,
                       const std::string& prompt_id, int response_id,
                       double beta);

// -log sigmoid(implicit margin) == softplus(-implicit margin); in (0, inf).
double pair_loss(const ToyPolicy& policy, const ReferencePolicy& reference,
                 const PreferencePair& pair, double beta);

// Mean loss over the batch and its analytic gradient with respect to the
// policy logits. Logits of prompts (and candidates) outside the batch get an
// exactly-zero gradient.
std::pair<double, PolicyGrad> batch_loss_and_grad(
    const ToyPolicy& policy, const ReferencePolicy& reference,
    std::span<const PreferencePair> batch, double beta);

double dataset_mean_loss(const ToyPolicy& policy,
                         const ReferencePolicy& reference,
                         std::span<const PreferencePair> dataset, double beta);

// Gradient descent over shuffled mini-batches. The trace records the full
// dataset mean loss after s updates for every s divisible by trace_every,
// plus the final step; entry 0 is ln 2 when policy == reference. Aborts with
// NumericError if the loss exceeds 10*ln 2 (misconfigured learning rate).
TrainTrace train(const ToyPolicy& policy, const ReferencePolicy& reference,
                 std::span<const PreferencePair> dataset,
                 const DpoConfig& config);

// Mean over prompts of E_{y~pi_theta}[r(y)]; the desk-scale stand-in for a
// win rate. `groups` supplies the per-candidate rewards and must match the
// policy's enumeration.
double expected_policy_reward(const ToyPolicy& policy,
                              std::span<const PromptGroup> groups);

// Numerically stable -log sigmoid(-x) building blocks.
double softplus(double x);
double log_sigmoid(double x);

}  // namespace pairlab

#endif  // PAIRLAB_TRAINER_HPP_
