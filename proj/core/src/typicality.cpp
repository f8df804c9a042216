#include "exactlm/typicality.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "exactlm/entropy.hpp"
#include "exactlm/rng.hpp"

namespace exactlm {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

double sample_entropy(std::span<const double> corpus_logq) {
  if (corpus_logq.empty()) throw InputError("corpus must have size >= 1");
  double s = 0.0;
  for (double lq : corpus_logq) {
    if (lq == kNegInf) throw InputError("corpus string outside the model support");
    s += lq;
  }
  return -s / static_cast<double>(corpus_logq.size());
}

TypicalityReport typical_membership(std::span<const double> corpus_logq, double model_entropy,
                                    double epsilon) {
  TypicalityReport rep;
  rep.sample_entropy = sample_entropy(corpus_logq);
  rep.model_entropy = model_entropy;
  rep.epsilon = epsilon;
  rep.deviation = std::abs(model_entropy - rep.sample_entropy);
  rep.member = rep.deviation < epsilon;
  return rep;
}

namespace {

std::vector<double> item_logqs(const ItemCorpus& corpus, const TabularLM& q) {
  std::vector<double> lqs(corpus.items.size());
  for (std::size_t i = 0; i < corpus.items.size(); ++i) {
    const auto idx = corpus.items[i];
    if (idx < 0 || static_cast<std::size_t>(idx) >= q.size())
      throw InputError("corpus item index outside the tabular support");
    lqs[i] = q.logprobs[static_cast<std::size_t>(idx)];
  }
  return lqs;
}

std::vector<double> string_logqs(const Corpus& corpus, const AutoregressiveLM& q) {
  std::vector<double> lqs(corpus.strings.size());
  for (std::size_t i = 0; i < corpus.strings.size(); ++i)
    lqs[i] = string_logprob(q, corpus.strings[i]);
  return lqs;
}

}  // namespace

double sample_entropy(const ItemCorpus& corpus, const TabularLM& q) {
  return sample_entropy(item_logqs(corpus, q));
}

TypicalityReport typical_membership(const ItemCorpus& corpus, const TabularLM& q, double epsilon) {
  return typical_membership(item_logqs(corpus, q), entropy(q), epsilon);
}

double sample_entropy(const Corpus& corpus, const AutoregressiveLM& q) {
  return sample_entropy(string_logqs(corpus, q));
}

TypicalityReport typical_membership(const Corpus& corpus, const AutoregressiveLM& q,
                                    double epsilon) {
  return typical_membership(string_logqs(corpus, q), entropy(q), epsilon);
}

double chebyshev_bound(double varentropy, int64_t n, double epsilon) {
  if (n <= 0) throw InputError("N must be positive");
  if (!(epsilon > 0.0)) throw InputError("epsilon must be positive");
  if (!std::isfinite(varentropy) || varentropy < 0.0)
    throw InputError("varentropy unavailable or invalid");
  const double b = varentropy / (static_cast<double>(n) * epsilon * epsilon);
  return std::clamp(b, 0.0, 1.0);
}

double chebyshev_bound(const TabularLM& q, int64_t n, double epsilon) {
  return chebyshev_bound(varentropy(q), n, epsilon);
}

double chebyshev_bound(const AutoregressiveLM& q, int64_t n, double epsilon) {
  return chebyshev_bound(varentropy(q), n, epsilon);
}

ChernoffRate chernoff_rate_from_gap(double epsilon, const std::function<double(double)>& gap) {
  if (!(epsilon > 0.0)) throw InputError("epsilon must be positive");
  ChernoffRate rate;
  rate.epsilon = epsilon;

  auto objective = [&](double t) { return t * (epsilon - gap(1.0 - t)); };

  // 197-point grid t in {0.01, 0.015, ..., 0.99}.
  double best_t = 0.0, best_s = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 196; ++i) {
    const double t = 0.01 + 0.005 * i;
    const double s = objective(t);
    if (s > best_s) {
      best_s = s;
      best_t = t;
    }
  }
  if (best_s <= 0.0) {
    rate.diagnostic = "infeasible: Renyi gap >= epsilon across the whole t grid";
    return rate;
  }
  // One local refinement by bisection (golden-ish ternary) around the best
  // grid point, clamped to the grid range.
  double lo = std::max(0.01, best_t - 0.005);
  double hi = std::min(0.99, best_t + 0.005);
  for (int iter = 0; iter < 60; ++iter) {
    const double m1 = lo + (hi - lo) / 3.0;
    const double m2 = hi - (hi - lo) / 3.0;
    if (objective(m1) < objective(m2)) {
      lo = m1;
    } else {
      hi = m2;
    }
  }
  const double t_ref = 0.5 * (lo + hi);
  const double s_ref = objective(t_ref);
  if (s_ref > best_s) {
    best_s = s_ref;
    best_t = t_ref;
  }
  rate.t_star = best_t;
  rate.s = best_s;
  return rate;
}

ChernoffRate chernoff_rate(const TabularLM& q, double epsilon) {
  const double h = entropy(q);
  return chernoff_rate_from_gap(
      epsilon, [&](double gamma) { return renyi_entropy(q, gamma) - h; });
}

ChernoffRate chernoff_rate(const AutoregressiveLM& q, double epsilon) {
  if (!q.eos_bounded())
    throw CertificationError(
        "Chernoff rate refused: model is not EOS-bounded (theorem hypotheses unmet)");
  const double h = entropy(q);
  return chernoff_rate_from_gap(
      epsilon, [&](double gamma) { return renyi_entropy(q, gamma) - h; });
}

double chernoff_bound(const ChernoffRate& rate, int64_t n) {
  if (!rate.s)
    throw CertificationError("Chernoff bound unavailable: " + rate.diagnostic);
  if (n <= 0) throw InputError("N must be positive");
  return 2.0 * std::exp(-*rate.s * static_cast<double>(n));
}

TradeoffPoint tradeoff_residual(std::span<const double> corpus_log_prior,
                                std::span<const double> corpus_reward, double beta,
                                double model_entropy, double log_z_plus) {
  if (corpus_log_prior.size() != corpus_reward.size() || corpus_log_prior.empty())
    throw InputError("corpus log-prior / reward size mismatch");
  if (!(beta > 0.0)) throw InputError("beta must be positive");
  const auto n = static_cast<double>(corpus_log_prior.size());
  TradeoffPoint pt;
  for (std::size_t i = 0; i < corpus_log_prior.size(); ++i) {
    if (corpus_log_prior[i] == kNegInf)
      throw InputError("corpus string outside the prior support");
    pt.avg_log_prior += corpus_log_prior[i];
    pt.avg_reward += corpus_reward[i];
  }
  pt.avg_log_prior /= n;
  pt.avg_reward /= n;
  pt.constant = model_entropy - log_z_plus;
  pt.residual = std::abs(pt.constant + pt.avg_log_prior + pt.avg_reward / beta);

  // Substitution identity: log q_good = log p + r/beta - log Z(+), so the
  // residual equals |H + (1/N) log q_good(Y)| up to rounding.
  double avg_log_qgood = pt.avg_log_prior + pt.avg_reward / beta - log_z_plus;
  const double direct = std::abs(model_entropy + avg_log_qgood);
  if (std::abs(direct - pt.residual) > 1e-8)
    throw CertificationError("trade-off residual identity violated beyond 1e-8");
  return pt;
}

namespace {

template <typename SampleEntropyFn>
std::vector<ExceedanceCell> exceedance_impl(double model_entropy, double model_varentropy,
                                            std::optional<ChernoffRate> rate,
                                            std::span<const int64_t> n_grid, double epsilon,
                                            int trials, uint64_t seed,
                                            SampleEntropyFn&& trial_sample_entropy) {
  if (trials <= 0) throw InputError("trials must be positive");
  std::vector<ExceedanceCell> cells;
  for (std::size_t gi = 0; gi < n_grid.size(); ++gi) {
    const int64_t n = n_grid[gi];
    int outside = 0;
    for (int t = 0; t < trials; ++t) {
      Rng rng(derive_seed(seed, {gi, static_cast<uint64_t>(t)}));
      const double h_hat = trial_sample_entropy(rng, n);
      if (std::abs(model_entropy - h_hat) >= epsilon) ++outside;
    }
    ExceedanceCell cell;
    cell.n = n;
    cell.epsilon = epsilon;
    cell.empirical = static_cast<double>(outside) / static_cast<double>(trials);
    cell.chebyshev = chebyshev_bound(model_varentropy, n, epsilon);
    if (rate && rate->s) cell.chernoff = chernoff_bound(*rate, n);
    cell.seed = seed;
    cells.push_back(cell);
  }
  return cells;
}

}  // namespace

std::vector<ExceedanceCell> exceedance_experiment(const TabularLM& q,
                                                  std::span<const int64_t> n_grid, double epsilon,
                                                  int trials, uint64_t seed) {
  std::vector<double> probs(q.size());
  for (std::size_t i = 0; i < q.size(); ++i)
    probs[i] = q.logprobs[i] == kNegInf ? 0.0 : std::exp(q.logprobs[i]);
  auto cdf = cdf_from_probs(probs);
  const double h = entropy(q);
  const double v = varentropy(q);
  auto rate = chernoff_rate(q, epsilon);
  auto trial = [&](Rng& rng, int64_t n) {
    double acc = 0.0;
    for (int64_t i = 0; i < n; ++i)
      acc += q.logprobs[sample_cdf(cdf, rng.uniform())];
    return -acc / static_cast<double>(n);
  };
  return exceedance_impl(h, v, rate, n_grid, epsilon, trials, seed, trial);
}

std::vector<ExceedanceCell> exceedance_experiment(const AutoregressiveLM& q,
                                                  std::span<const int64_t> n_grid, double epsilon,
                                                  int trials, uint64_t seed) {
  const double h = entropy(q);
  const double v = varentropy(q);
  std::optional<ChernoffRate> rate;
  if (q.eos_bounded()) rate = chernoff_rate(q, epsilon);
  auto trial = [&](Rng& rng, int64_t n) {
    double acc = 0.0;
    for (int64_t i = 0; i < n; ++i) {
      DrawnString s = sample_string(q, rng);
      if (s.capped) throw CappedSampleError("exceedance trial draw hit the length cap");
      acc += s.logprob;
    }
    return -acc / static_cast<double>(n);
  };
  return exceedance_impl(h, v, rate, n_grid, epsilon, trials, seed, trial);
}

}  // namespace exactlm
