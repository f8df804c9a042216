#pragma once

// Typical sets and concentration bounds: sample entropy, Chebyshev and
// Chernoff exceedance bounds, and the trade-off residual that ties a corpus's
// average log-prior and average reward to a model constant.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "exactlm/lm.hpp"

namespace exactlm {

struct TypicalityReport {
  double sample_entropy = 0.0;  // -(1/N) sum log q(y), nats
  double model_entropy = 0.0;   // H, nats
  double epsilon = 0.0;
  double deviation = 0.0;       // |H + (1/N) log q(Y)|
  bool member = false;          // deviation < epsilon
};

struct TradeoffPoint {
  double avg_log_prior = 0.0;   // (1/N) log p(Y), nats
  double avg_reward = 0.0;      // (1/N) r(Y), reward units
  double constant = 0.0;        // C = H - log Z(+)
  double residual = 0.0;        // |C + avg_log_prior + avg_reward / beta|
};

struct ChernoffRate {
  double epsilon = 0.0;
  std::optional<double> t_star;  // maximizer in (0, 1), absent when infeasible
  std::optional<double> s;       // s = t (eps - gap(1-t)) > 0 at t_star
  std::string diagnostic;
};

// Core numeric forms over per-string log-probabilities.
double sample_entropy(std::span<const double> corpus_logq);
TypicalityReport typical_membership(std::span<const double> corpus_logq, double model_entropy,
                                    double epsilon);

// Model-typed convenience wrappers. q must be positive on every corpus item.
double sample_entropy(const ItemCorpus& corpus, const TabularLM& q);
TypicalityReport typical_membership(const ItemCorpus& corpus, const TabularLM& q, double epsilon);
double sample_entropy(const Corpus& corpus, const AutoregressiveLM& q);
TypicalityReport typical_membership(const Corpus& corpus, const AutoregressiveLM& q,
                                    double epsilon);

// P(corpus outside the typical set) <= V(I) / (N eps^2), clipped to [0, 1].
double chebyshev_bound(double varentropy, int64_t n, double epsilon);
double chebyshev_bound(const TabularLM& q, int64_t n, double epsilon);
double chebyshev_bound(const AutoregressiveLM& q, int64_t n, double epsilon);

// Maximizes t (eps - gap(1-t)) over the fixed grid t in {0.01, 0.015, ...,
// 0.99}, then refines once around the best grid point. The gap callback is
// gamma -> Renyi gap in nats.
ChernoffRate chernoff_rate_from_gap(double epsilon, const std::function<double(double)>& gap);
ChernoffRate chernoff_rate(const TabularLM& q, double epsilon);
// Requires an EOS-bounded model (theorem hypothesis); otherwise refuses.
ChernoffRate chernoff_rate(const AutoregressiveLM& q, double epsilon);

// 2 exp(-s N); infeasible rates are a CertificationError.
double chernoff_bound(const ChernoffRate& rate, int64_t n);

// Residual of Prop-style trade-off: |C + avg_log_prior + avg_reward/beta|
// with C = H - log Z(+). Also verifies the substitution identity
// residual == |H + (1/N) sum log q_good(y)| to 1e-8 using
// log q_good = log p + r/beta - log Z(+).
TradeoffPoint tradeoff_residual(std::span<const double> corpus_log_prior,
                                std::span<const double> corpus_reward, double beta,
                                double model_entropy, double log_z_plus);

struct ExceedanceCell {
  int64_t n = 0;
  double epsilon = 0.0;
  double empirical = 0.0;                 // fraction of trials outside the typical set
  double chebyshev = 0.0;
  std::optional<double> chernoff;         // absent when s(eps) infeasible / refused
  uint64_t seed = 0;
};

// Monte-Carlo exceedance of the (N, eps)-typical set, per N in the grid;
// trials use per-trial derived seeds. Entropy/varentropy are computed from
// the model once.
std::vector<ExceedanceCell> exceedance_experiment(const TabularLM& q,
                                                  std::span<const int64_t> n_grid, double epsilon,
                                                  int trials, uint64_t seed);
std::vector<ExceedanceCell> exceedance_experiment(const AutoregressiveLM& q,
                                                  std::span<const int64_t> n_grid, double epsilon,
                                                  int trials, uint64_t seed);

}  // namespace exactlm
