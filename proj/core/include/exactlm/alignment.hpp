#pragma once

// Alignment algebra on exact models: reward-tilted aligned models, secret
// rewards, the KL objective and its decomposition, and the pushed-to-prior
// factorization check for truncation-only adaptors.

#include <vector>

#include "exactlm/adaptors.hpp"
#include "exactlm/lm.hpp"

namespace exactlm {

struct RewardFunction {
  std::unordered_map<std::string, double> values;
  double bound = 0.0;  // declared upper bound; every value must be <= bound

  static RewardFunction create(std::unordered_map<std::string, double> values, double bound);
  // Bound taken as the max value.
  static RewardFunction from_values(std::unordered_map<std::string, double> values);

  double at(const std::string& item) const;
  bool defined_on(const TabularLM& support) const;
};

struct AlignedLM {
  TabularLM prior;
  RewardFunction reward;
  double beta = 1.0;
  double log_z_plus = 0.0;  // log sum_y p(y) exp(r(y)/beta)
  TabularLM aligned;        // p_good(y) = p(y) exp(r(y)/beta) / Z(+)
};

// Reward must cover the whole support; beta > 0.
AlignedLM align(const TabularLM& prior, const RewardFunction& reward, double beta);

struct SecretReward {
  RewardFunction reward;  // values beta * log(q/p); the free additive constant
  double constant = 0.0;  // beta * log Z(+) for the returned values (0 when q is tight)
};

// The reward implied by an aligned/prior pair: aligning `prior` with it at the
// same beta reproduces `q` exactly. Models must share support with p > 0.
SecretReward secret_reward(const TabularLM& q, const TabularLM& prior, double beta);

struct KlReport {
  double kl_to_aligned = 0.0;    // KL(q || p_good)
  double log_z_plus = 0.0;
  double kl_to_prior = 0.0;      // KL(q || p)
  double expected_reward = 0.0;  // E_{y~q} r(y)
  double decomposed() const { return log_z_plus + kl_to_prior - expected_reward_over_beta; }
  double expected_reward_over_beta = 0.0;
};

// Evaluates KL(q || p_good) directly and via the log Z + KL(q||p) - E[r]/beta
// decomposition; the two are verified to agree to 1e-9 before returning.
// Missing absolute continuity yields +inf in both forms.
KlReport kl_objective(const TabularLM& q, const TabularLM& prior, const RewardFunction& reward,
                      double beta);

struct PushedPriorReport {
  bool assumption_holds = false;  // prior and aligned truncation sets agree everywhere
  std::vector<String> violating_contexts;
  // Over strings where both sides are positive: max |log ratio - median log
  // ratio|; the pushed-to-prior factorization asserts this is ~0.
  double max_log_ratio_deviation = 0.0;
  std::size_t strings_compared = 0;
  bool support_mismatch = false;  // sides disagree about which strings survive
};

// Verifies, on the enumerated support, that applying a truncation-only global
// adaptor to the aligned model is proportional to
//   1{survives prior truncation} * p(y) * exp(r(y)/beta)  =  1{...} * q(y).
// `aligned` plays the role of the reward-tilted model (its secret reward is
// implied). Scaling must be identity.
PushedPriorReport pushed_prior_check(const AutoregressiveLM& prior,
                                     const AutoregressiveLM& aligned,
                                     const TransformFunction& tf, int max_len = 25);

}  // namespace exactlm
