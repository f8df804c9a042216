#pragma once

// Independent Metropolis-Hastings sampling from globally normalized adapted
// models, with locally normalized proposals; plus the bootstrap-resampling
// variant that filters an existing corpus through the same accept/reject
// rule.
//
// Per step: propose y' from the proposal, accept iff
//   a(y, y') = w~(y') p..(y) / (w~(y) p..(y')) > u,  u ~ U(0,1)
// (strict inequality, fresh u each step, unnormalized target weights -- the
// normalizer cancels).

#include <cstdint>
#include <vector>

#include "exactlm/adaptors.hpp"
#include "exactlm/lm.hpp"

namespace exactlm {

struct ImhaConfig {
  int64_t steps = 0;       // N, number of retained samples before burn-in drop
  uint64_t seed = 0;
  int64_t burn_in = 0;     // must be < steps
  int max_sample_len = 512;
};

struct ChainStep {
  int64_t index = 0;
  int32_t sample = 0;  // index into Chain::pool
  double target_logweight = 0.0;
  double proposal_logprob = 0.0;
  double ratio = 0.0;
  bool accepted = false;
};

struct Chain {
  std::vector<String> pool;          // distinct strings, in first-seen order
  std::vector<int32_t> samples;      // retained chain after burn-in, as pool ids
  std::vector<uint8_t> accepted;     // parallel to samples
  std::vector<ChainStep> records;    // every step, including burn-in
  double acceptance_rate = 0.0;      // mean of `accepted`

  const String& sample_string(std::size_t i) const {
    return pool[static_cast<std::size_t>(samples[i])];
  }
};

// exp of the log-space ratio above. Proposal zero on either string is an
// InputError (an independent proposal must cover both).
double acceptance_ratio(double target_logw_y, double target_logw_yprime,
                        double proposal_logp_y, double proposal_logp_yprime);

// Chain targeting the globally normalized adapted model, proposing from the
// locally normalized one. Deterministic given the config. A capped proposal
// draw (no EOS before max_sample_len) is a CappedSampleError since the
// proposal density would be wrong.
Chain imha_run(const AutoregressiveLM& base, const TransformFunction& tf, const ImhaConfig& cfg);

// Same kernel on explicit tabular weights: target given as unnormalized log
// weights aligned with `proposal`'s support.
Chain imha_run_tabular(std::span<const double> target_logweights, const TabularLM& proposal,
                       const ImhaConfig& cfg);

struct BootstrapResult {
  Corpus corpus;               // resampled corpus, size N
  double acceptance_rate = 0.0;
  std::vector<int32_t> chain;  // indices into the source corpus
};

// Resamples `corpus` uniformly with replacement N times, accepting and
// rejecting with the IMH ratio against the globally normalized target; the
// proposal density entering the ratio is the locally normalized model the
// corpus was drawn from.
BootstrapResult imha_bootstrap(const Corpus& corpus, const AutoregressiveLM& base,
                               const TransformFunction& tf, int64_t n, uint64_t seed);

// Same filter over precomputed per-entry densities (entry i of the source
// corpus has target log-weight and proposal log-probability i). The returned
// corpus is left empty; `chain` carries source indices.
BootstrapResult imha_bootstrap_weights(std::span<const double> target_logweights,
                                       std::span<const double> proposal_logprobs, int64_t n,
                                       uint64_t seed);

// Cramer's V of consecutive samples; the convergence diagnostic.
double convergence_diagnostic(const Chain& chain);

// Chain dump, one CSV record per step:
// index,string,target_logweight,proposal_logprob,ratio,accepted
std::string chain_to_csv(const Chain& chain, const Alphabet& alphabet);

}  // namespace exactlm
