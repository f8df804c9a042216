#include "exactlm/imha.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "exactlm/rng.hpp"
#include "exactlm/stats.hpp"

namespace exactlm {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct Proposal {
  int32_t id = 0;  // pool index
  double target_logw = 0.0;
  double proposal_logp = 0.0;
};

// Shared accept/reject loop; `draw` produces independent proposals.
Chain run_core(const ImhaConfig& cfg, Rng& rng, const std::function<Proposal(Rng&)>& draw) {
  if (cfg.steps <= 0) throw InputError("chain needs steps > 0");
  if (cfg.burn_in < 0 || cfg.burn_in >= cfg.steps)
    throw InputError("burn-in must lie in [0, steps)");

  Chain chain;
  Proposal current = draw(rng);
  int64_t accepted_count = 0;
  for (int64_t n = 0; n < cfg.steps; ++n) {
    Proposal candidate = draw(rng);
    const double ratio = acceptance_ratio(current.target_logw, candidate.target_logw,
                                          current.proposal_logp, candidate.proposal_logp);
    const double u = rng.uniform();
    const bool accept = ratio > u;
    if (accept) current = candidate;

    chain.records.push_back({n, current.id, current.target_logw, current.proposal_logp,
                             ratio, accept});
    if (n >= cfg.burn_in) {
      chain.samples.push_back(current.id);
      chain.accepted.push_back(accept ? 1 : 0);
      if (accept) ++accepted_count;
    }
  }
  chain.acceptance_rate =
      static_cast<double>(accepted_count) / static_cast<double>(chain.samples.size());
  return chain;
}

}  // namespace

double acceptance_ratio(double target_logw_y, double target_logw_yprime,
                        double proposal_logp_y, double proposal_logp_yprime) {
  if (proposal_logp_y == kNegInf || proposal_logp_yprime == kNegInf)
    throw InputError("proposal assigns zero probability to a chain state");
  if (target_logw_yprime == kNegInf) return 0.0;
  return std::exp((target_logw_yprime + proposal_logp_y) -
                  (target_logw_y + proposal_logp_yprime));
}

Chain imha_run(const AutoregressiveLM& base, const TransformFunction& tf, const ImhaConfig& cfg) {
  AdaptedModel local = make_local_adapted(base, tf);
  Rng rng(cfg.seed);

  std::vector<String> pool;
  std::unordered_map<String, int32_t, StringHash> ids;
  auto draw = [&](Rng& r) {
    LocalSample s = sample_local(local, r, cfg.max_sample_len);
    if (s.capped)
      throw CappedSampleError("proposal draw hit the length cap; chain would be inexact");
    auto [it, inserted] = ids.emplace(s.string, static_cast<int32_t>(pool.size()));
    if (inserted) pool.push_back(std::move(s.string));
    return Proposal{it->second, s.global_logweight, s.local_logprob};
  };
  Chain chain = run_core(cfg, rng, draw);
  chain.pool = std::move(pool);
  return chain;
}

Chain imha_run_tabular(std::span<const double> target_logweights, const TabularLM& proposal,
                       const ImhaConfig& cfg) {
  if (target_logweights.size() != proposal.size())
    throw InputError("target/proposal support size mismatch");
  Rng rng(cfg.seed);
  std::vector<double> probs(proposal.size());
  for (std::size_t i = 0; i < proposal.size(); ++i) probs[i] = std::exp(proposal.logprobs[i]);
  auto cdf = cdf_from_probs(probs);

  auto draw = [&](Rng& r) {
    auto idx = static_cast<int32_t>(sample_cdf(cdf, r.uniform()));
    return Proposal{idx, target_logweights[static_cast<std::size_t>(idx)],
                    proposal.logprobs[static_cast<std::size_t>(idx)]};
  };
  Chain run = run_core(cfg, rng, draw);
  run.pool.reserve(proposal.size());
  for (std::size_t i = 0; i < proposal.size(); ++i)
    run.pool.push_back(String{static_cast<SymbolId>(i)});
  return run;
}

BootstrapResult imha_bootstrap(const Corpus& corpus, const AutoregressiveLM& base,
                               const TransformFunction& tf, int64_t n, uint64_t seed) {
  if (corpus.strings.empty()) throw InputError("bootstrap needs a non-empty corpus");
  AdaptedModel local = make_local_adapted(base, tf);

  // Deduplicate density evaluations across repeated corpus strings.
  std::unordered_map<String, std::pair<double, double>, StringHash> cache;
  std::vector<double> target_logw(corpus.strings.size());
  std::vector<double> proposal_logp(corpus.strings.size());
  for (std::size_t i = 0; i < corpus.strings.size(); ++i) {
    auto it = cache.find(corpus.strings[i]);
    if (it == cache.end()) {
      const double lw = global_unnorm_logweight(local, corpus.strings[i]);
      const double lp = local_logprob(local, corpus.strings[i]);
      if (lp == kNegInf)
        throw InputError("corpus string outside the adapted support");
      it = cache.emplace(corpus.strings[i], std::make_pair(lw, lp)).first;
    }
    target_logw[i] = it->second.first;
    proposal_logp[i] = it->second.second;
  }

  BootstrapResult out = imha_bootstrap_weights(target_logw, proposal_logp, n, seed);
  out.corpus.strings.reserve(out.chain.size());
  for (int32_t idx : out.chain)
    out.corpus.strings.push_back(corpus.strings[static_cast<std::size_t>(idx)]);
  return out;
}

BootstrapResult imha_bootstrap_weights(std::span<const double> target_logweights,
                                       std::span<const double> proposal_logprobs, int64_t n,
                                       uint64_t seed) {
  if (target_logweights.empty() || target_logweights.size() != proposal_logprobs.size())
    throw InputError("bootstrap weights must be non-empty and aligned");
  Rng rng(seed);
  ImhaConfig cfg;
  cfg.steps = n;
  cfg.seed = seed;
  auto draw = [&](Rng& r) {
    auto idx = static_cast<int32_t>(r.below(target_logweights.size()));
    return Proposal{idx, target_logweights[static_cast<std::size_t>(idx)],
                    proposal_logprobs[static_cast<std::size_t>(idx)]};
  };
  Chain run = run_core(cfg, rng, draw);
  BootstrapResult out;
  out.acceptance_rate = run.acceptance_rate;
  out.chain = std::move(run.samples);
  return out;
}

double convergence_diagnostic(const Chain& chain) {
  return cramers_v_consecutive(chain.samples);
}

std::string chain_to_csv(const Chain& chain, const Alphabet& alphabet) {
  std::ostringstream out;
  out << "index,string,target_logweight,proposal_logprob,ratio,accepted\n";
  char buf[64];
  for (const auto& rec : chain.records) {
    out << rec.index << ',' << alphabet.format_string(chain.pool[static_cast<std::size_t>(rec.sample)]);
    std::snprintf(buf, sizeof(buf), ",%.12g", rec.target_logweight);
    out << buf;
    std::snprintf(buf, sizeof(buf), ",%.12g", rec.proposal_logprob);
    out << buf;
    std::snprintf(buf, sizeof(buf), ",%.12g", rec.ratio);
    out << buf;
    out << ',' << (rec.accepted ? 1 : 0) << '\n';
  }
  return out.str();
}

}  // namespace exactlm
