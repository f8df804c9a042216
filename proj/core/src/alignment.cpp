#include "exactlm/alignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace exactlm {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNegInf = -kInf;

double logsumexp(std::span<const double> xs) {
  double m = kNegInf;
  for (double x : xs) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : xs) {
    if (x != kNegInf) s += std::exp(x - m);
  }
  return m + std::log(s);
}
}  // namespace

RewardFunction RewardFunction::create(std::unordered_map<std::string, double> values,
                                      double bound) {
  for (const auto& [item, v] : values) {
    if (!std::isfinite(v)) throw InputError("reward values must be finite");
    if (v > bound + 1e-12)
      throw InputError("reward value for '" + item + "' exceeds the declared bound");
  }
  RewardFunction r;
  r.values = std::move(values);
  r.bound = bound;
  return r;
}

RewardFunction RewardFunction::from_values(std::unordered_map<std::string, double> values) {
  double bound = 0.0;
  for (const auto& [_, v] : values) bound = std::max(bound, v);
  return create(std::move(values), bound);
}

double RewardFunction::at(const std::string& item) const {
  auto it = values.find(item);
  if (it == values.end()) throw InputError("reward undefined on item '" + item + "'");
  return it->second;
}

bool RewardFunction::defined_on(const TabularLM& support) const {
  return std::all_of(support.items.begin(), support.items.end(),
                     [&](const std::string& it) { return values.count(it) > 0; });
}

AlignedLM align(const TabularLM& prior, const RewardFunction& reward, double beta) {
  if (!(beta > 0.0)) throw InputError("beta must be positive");
  if (!reward.defined_on(prior)) throw InputError("reward is missing on a support item");
  std::vector<double> tilted(prior.size());
  for (std::size_t i = 0; i < prior.size(); ++i)
    tilted[i] = prior.logprobs[i] + reward.at(prior.items[i]) / beta;
  AlignedLM out;
  out.prior = prior;
  out.reward = reward;
  out.beta = beta;
  out.log_z_plus = logsumexp(tilted);
  for (double& lw : tilted) lw -= out.log_z_plus;
  out.aligned = TabularLM::from_logprobs(prior.items, std::move(tilted));
  return out;
}

SecretReward secret_reward(const TabularLM& q, const TabularLM& prior, double beta) {
  if (!(beta > 0.0)) throw InputError("beta must be positive");
  if (q.size() != prior.size()) throw InputError("models must share support");
  std::unordered_map<std::string, double> values;
  std::vector<double> tilted(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q.items[i] != prior.items[i]) throw InputError("models must share support");
    if (prior.logprobs[i] == kNegInf)
      throw InputError("prior must be positive on the shared support");
    const double r = beta * (q.logprobs[i] - prior.logprobs[i]);
    if (!std::isfinite(r))
      throw InputError("secret reward undefined: q assigns zero probability to '" +
                       q.items[i] + "'");
    values.emplace(q.items[i], r);
    tilted[i] = prior.logprobs[i] + r / beta;
  }
  SecretReward out;
  out.reward = RewardFunction::from_values(std::move(values));
  // log Z(+) of the returned values; identically 0 when q is normalized.
  out.constant = beta * logsumexp(tilted);
  return out;
}

KlReport kl_objective(const TabularLM& q, const TabularLM& prior, const RewardFunction& reward,
                      double beta) {
  if (q.size() != prior.size()) throw InputError("models must share support");
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q.items[i] != prior.items[i]) throw InputError("models must share support");
  }
  AlignedLM good = align(prior, reward, beta);

  KlReport rep;
  rep.log_z_plus = good.log_z_plus;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double lq = q.logprobs[i];
    if (lq == kNegInf) continue;  // 0 log 0 = 0 convention
    const double p = std::exp(lq);
    const double lpg = good.aligned.logprobs[i];
    const double lp = prior.logprobs[i];
    rep.kl_to_aligned += lpg == kNegInf ? kInf : p * (lq - lpg);
    rep.kl_to_prior += lp == kNegInf ? kInf : p * (lq - lp);
    rep.expected_reward += p * reward.at(q.items[i]);
  }
  rep.expected_reward_over_beta = rep.expected_reward / beta;
  if (std::isfinite(rep.kl_to_aligned) && std::isfinite(rep.kl_to_prior)) {
    if (std::abs(rep.kl_to_aligned - rep.decomposed()) > 1e-9)
      throw CertificationError("KL decomposition identity violated beyond 1e-9");
  }
  return rep;
}

PushedPriorReport pushed_prior_check(const AutoregressiveLM& prior,
                                     const AutoregressiveLM& aligned,
                                     const TransformFunction& tf, int max_len) {
  if (tf.scaling.kind != ScalingRule::Kind::identity)
    throw InputError("pushed-to-prior factorization requires identity scaling");

  // Compare truncation sets context by context over the union of reachable
  // contexts of the two models.
  PushedPriorReport rep;
  rep.assumption_holds = true;
  std::set<String> contexts;
  {
    auto add = [&](const AutoregressiveLM& lm) {
      for (const auto& [ctx, _] : lm.table) {
        if (prior.table.count(ctx) && aligned.table.count(ctx)) contexts.insert(ctx);
      }
    };
    add(prior);
    add(aligned);
  }
  for (const auto& ctx : contexts) {
    auto set_p = truncation_set(tf.truncation, prior.row(ctx));
    auto set_q = truncation_set(tf.truncation, aligned.row(ctx));
    if (set_p != set_q) {
      rep.assumption_holds = false;
      rep.violating_contexts.push_back(ctx);
    }
  }

  // LHS: raw global weight of the adaptor applied to the aligned model.
  // RHS: 1{every step survives the PRIOR truncation} * q(y).
  AdaptedModel lhs = make_local_adapted(aligned, tf);
  AdaptedModel prior_trunc = make_local_adapted(prior, tf);
  auto support = enumerate_support(aligned, max_len);

  std::vector<double> log_ratios;
  for (const auto& e : support.entries) {
    const double lw = global_unnorm_logweight(lhs, e.string);
    const bool survives_prior = global_unnorm_logweight(prior_trunc, e.string) != kNegInf;
    const double rhs = survives_prior ? e.logprob : kNegInf;
    const bool lhs_alive = lw != kNegInf;
    const bool rhs_alive = rhs != kNegInf;
    if (lhs_alive != rhs_alive) {
      rep.support_mismatch = true;
      continue;
    }
    if (lhs_alive) log_ratios.push_back(lw - rhs);
  }
  rep.strings_compared = log_ratios.size();
  if (!log_ratios.empty()) {
    std::nth_element(log_ratios.begin(), log_ratios.begin() + static_cast<std::ptrdiff_t>(log_ratios.size() / 2),
                     log_ratios.end());
    const double median = log_ratios[log_ratios.size() / 2];
    for (double lr : log_ratios)
      rep.max_log_ratio_deviation = std::max(rep.max_log_ratio_deviation, std::abs(lr - median));
  }
  return rep;
}

}  // namespace exactlm
