#include "exactlm/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "exactlm/entropy.hpp"
#include "exactlm/imha.hpp"
#include "exactlm/rng.hpp"
#include "exactlm/stats.hpp"
#include "exactlm/transfer.hpp"

namespace exactlm {

namespace {

double logsumexp(std::span<const double> xs) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : xs) m = std::max(m, x);
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

std::string item_name(int i) { return "item-" + std::to_string(i); }

}  // namespace

ToyWorld build_toy_world(const ToyConfig& cfg) {
  if (cfg.domain_size < 2) throw InputError("domain size must be >= 2");
  if (!(cfg.dirichlet_alpha > 0.0) || !(cfg.tau > 0.0) || !(cfg.kappa >= 0.0) ||
      !(cfg.beta > 0.0))
    throw InputError("toy parameters must be positive");

  const auto n = static_cast<std::size_t>(cfg.domain_size);
  std::vector<std::string> items(n);
  for (std::size_t i = 0; i < n; ++i) items[i] = item_name(static_cast<int>(i));

  // p_good ~ Dirichlet(alpha): normalized Gamma(alpha) draws, kept in log
  // space (alpha = 0.1 produces very small coordinates).
  Rng rng_gamma(derive_seed(cfg.seed, {0}));
  std::vector<double> log_g(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double boost = rng_gamma.gamma(cfg.dirichlet_alpha + 1.0);
    const double u = 1.0 - rng_gamma.uniform();
    log_g[i] = std::log(boost) + std::log(u) / cfg.dirichlet_alpha;
  }
  const double log_z = logsumexp(log_g);
  std::vector<double> log_pgood(n);
  for (std::size_t i = 0; i < n; ++i) log_pgood[i] = log_g[i] - log_z;

  // prior = softmax(p_good^(1/tau) + eps), eps iid U(-kappa, kappa).
  Rng rng_noise(derive_seed(cfg.seed, {1}));
  std::vector<double> scores(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double p = std::exp(log_pgood[i]);
    scores[i] = std::pow(p, 1.0 / cfg.tau) + rng_noise.uniform(-cfg.kappa, cfg.kappa);
  }

  ToyWorld world;
  world.p_good = TabularLM::from_logprobs(items, log_pgood);
  world.prior = TabularLM::from_unnormalized(items, scores);
  world.beta = cfg.beta;
  world.reward_by_index.resize(n);
  std::unordered_map<std::string, double> reward_values;
  for (std::size_t i = 0; i < n; ++i) {
    world.reward_by_index[i] = world.p_good.logprobs[i] - world.prior.logprobs[i];
    reward_values.emplace(items[i], world.reward_by_index[i]);
  }
  world.reward = RewardFunction::from_values(std::move(reward_values));
  world.entropy_pgood = entropy(world.p_good);
  world.varentropy_pgood = varentropy(world.p_good);
  return world;
}

namespace {

// Exponentially tilted aligned model: q_delta(i) proportional to
// p_good(i)^(1+delta).
std::vector<double> tilted_probs(const ToyWorld& world, double delta) {
  const std::size_t n = world.p_good.size();
  std::vector<double> lw(n);
  for (std::size_t i = 0; i < n; ++i) lw[i] = (1.0 + delta) * world.p_good.logprobs[i];
  const double z = logsumexp(lw);
  std::vector<double> probs(n);
  for (std::size_t i = 0; i < n; ++i) probs[i] = std::exp(lw[i] - z);
  return probs;
}

double tilted_mean_log_prior(const ToyWorld& world, double delta) {
  auto probs = tilted_probs(world, delta);
  double m = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) m += probs[i] * world.prior.logprobs[i];
  return m;
}

}  // namespace

BandedCorpora causal_bootstrap_corpora(const ToyWorld& world, int n_corpora, int corpus_size,
                                       uint64_t seed, double band_depth_nats, int retry_budget) {
  if (n_corpora < 1) throw InputError("need at least one corpus");
  if (corpus_size < 100) throw InputError("corpus size must be >= 100");

  constexpr int kBands = 10;
  BandedCorpora out;

  // Tilt range sized so edge bands sit band_depth_nats away from typicality
  // in expected sample entropy; delta * V(I) is that displacement to first
  // order.
  const double v = std::max(world.varentropy_pgood, 1e-9);
  const double delta_edge = band_depth_nats / v;
  const double x_lo = tilted_mean_log_prior(world, -delta_edge);
  const double x_hi = tilted_mean_log_prior(world, +delta_edge);
  const double lo = std::min(x_lo, x_hi), hi = std::max(x_lo, x_hi);
  if (!(hi - lo > 1e-12)) {
    out.complete = false;
    out.diagnostic = "degenerate band range: tilting does not move the average log-prior";
    return out;
  }
  const double width = (hi - lo) / kBands;
  for (int b = 0; b < kBands; ++b)
    out.band_edges.emplace_back(lo + b * width, lo + (b + 1) * width);

  // Per band, bisect the tilt so the exact tilted mean hits the band center.
  for (int b = 0; b < kBands; ++b) {
    const double target = lo + (b + 0.5) * width;
    double d_lo = -delta_edge, d_hi = delta_edge;
    double f_lo = tilted_mean_log_prior(world, d_lo) - target;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (d_lo + d_hi);
      const double f_mid = tilted_mean_log_prior(world, mid) - target;
      if ((f_mid <= 0.0) == (f_lo <= 0.0)) {
        d_lo = mid;
        f_lo = f_mid;
      } else {
        d_hi = mid;
      }
    }
    out.tilt_by_band.push_back(0.5 * (d_lo + d_hi));
  }

  out.occupancy.assign(kBands, 0);
  std::ostringstream diag;
  for (int b = 0; b < kBands; ++b) {
    auto probs = tilted_probs(world, out.tilt_by_band[static_cast<std::size_t>(b)]);
    auto cdf = cdf_from_probs(probs);
    const int target_count = n_corpora / kBands + (b < n_corpora % kBands ? 1 : 0);
    const auto [band_lo, band_hi] = out.band_edges[static_cast<std::size_t>(b)];
    for (int c = 0; c < target_count; ++c) {
      bool placed = false;
      for (int attempt = 0; attempt < retry_budget && !placed; ++attempt) {
        Rng rng(derive_seed(seed, {static_cast<uint64_t>(b), static_cast<uint64_t>(c),
                                   static_cast<uint64_t>(attempt)}));
        BandedCorpus corpus;
        corpus.band = b;
        corpus.items.items.resize(static_cast<std::size_t>(corpus_size));
        double sum_prior = 0.0, sum_reward = 0.0, sum_qgood = 0.0;
        for (int i = 0; i < corpus_size; ++i) {
          const auto idx = static_cast<int32_t>(sample_cdf(cdf, rng.uniform()));
          corpus.items.items[static_cast<std::size_t>(i)] = idx;
          sum_prior += world.prior.logprobs[static_cast<std::size_t>(idx)];
          sum_reward += world.reward_by_index[static_cast<std::size_t>(idx)];
          sum_qgood += world.p_good.logprobs[static_cast<std::size_t>(idx)];
        }
        corpus.avg_log_prior = sum_prior / corpus_size;
        corpus.avg_reward = sum_reward / corpus_size;
        corpus.log_qgood = sum_qgood;
        corpus.sample_entropy = -sum_qgood / corpus_size;
        const bool in_band = corpus.avg_log_prior >= band_lo &&
                             (corpus.avg_log_prior < band_hi ||
                              (b == kBands - 1 && corpus.avg_log_prior <= band_hi));
        if (in_band) {
          out.corpora.push_back(std::move(corpus));
          ++out.occupancy[static_cast<std::size_t>(b)];
          placed = true;
        }
      }
      if (!placed) {
        out.complete = false;
        diag << "band " << b << " unreachable within retry budget; ";
      }
    }
  }
  out.diagnostic = diag.str();
  return out;
}

CorrelationReport correlation_report(const ToyWorld& world, const BandedCorpora& corpora,
                                     double epsilon) {
  if (corpora.corpora.size() < 2) throw InputError("need at least two corpora");
  CorrelationReport rep;
  rep.epsilon = epsilon;

  // String level, pooled over every sampled occurrence.
  std::vector<double> xs, ys;
  for (const auto& c : corpora.corpora) {
    for (int32_t idx : c.items.items) {
      xs.push_back(world.prior.logprobs[static_cast<std::size_t>(idx)]);
      ys.push_back(world.reward_by_index[static_cast<std::size_t>(idx)]);
    }
  }
  PairedSeries strings = PairedSeries::create(std::move(xs), std::move(ys));
  rep.string_pearson = pearson(strings);
  rep.string_spearman = spearman(strings);

  // Corpus level.
  std::vector<double> cx, cy, tx, ty;
  for (const auto& c : corpora.corpora) {
    cx.push_back(c.avg_log_prior);
    cy.push_back(c.avg_reward);
    if (std::abs(world.entropy_pgood - c.sample_entropy) < epsilon) {
      tx.push_back(c.avg_log_prior);
      ty.push_back(c.avg_reward);
    }
  }
  PairedSeries corpus_series = PairedSeries::create(std::move(cx), std::move(cy));
  rep.corpus_pearson = pearson(corpus_series);
  rep.corpus_spearman = spearman(corpus_series);

  rep.typical_count = static_cast<int>(tx.size());
  if (tx.size() >= 2) {
    try {
      rep.typical_pearson = pearson(PairedSeries::create(std::move(tx), std::move(ty)));
      rep.typical_defined = true;
    } catch (const InputError&) {
      rep.typical_defined = false;
    }
  }
  return rep;
}

SimpsonsSummary simpsons_check(const CorrelationReport& report) {
  SimpsonsSummary s;
  std::ostringstream text;
  if (!report.typical_defined) {
    s.verdict = SimpsonsVerdict::inconclusive;
    text << "inconclusive: typical-subset correlation undefined (" << report.typical_count
         << " member corpora)";
  } else if (report.string_spearman > 0.0 && report.typical_pearson < 0.0) {
    s.verdict = SimpsonsVerdict::reversal;
    s.reversal = true;
    text << "reversal: string-level Spearman " << report.string_spearman
         << " > 0 while typical corpus-level Pearson " << report.typical_pearson << " < 0";
  } else {
    s.verdict = SimpsonsVerdict::no_reversal;
    text << "no reversal: string-level Spearman " << report.string_spearman
         << ", typical corpus-level Pearson " << report.typical_pearson;
  }
  s.summary = text.str();
  return s;
}

ToyRun run_toy_pipeline(const ToyConfig& cfg, int n_corpora, int corpus_size, double epsilon) {
  ToyRun run{build_toy_world(cfg), {}, {}, {}};
  run.corpora = causal_bootstrap_corpora(run.world, n_corpora, corpus_size,
                                         derive_seed(cfg.seed, {2}));
  run.report = correlation_report(run.world, run.corpora, epsilon);
  run.simpsons = simpsons_check(run.report);
  return run;
}

// ---------------------------------------------------------------------------
// Sweep world and pipeline.

SweepWorld make_sweep_world(const SweepWorldConfig& cfg) {
  if (cfg.interior_symbols < 2 || cfg.interior_symbols > 7)
    throw InputError("sweep world expects 2..7 interior symbols");
  std::vector<std::string> names;
  for (int i = 0; i < cfg.interior_symbols; ++i) names.emplace_back(1, static_cast<char>('a' + i));
  names.emplace_back("<eos>");
  Alphabet alphabet = Alphabet::create(names, cfg.interior_symbols);

  Rng rng(derive_seed(cfg.seed, {0}));
  const auto m = static_cast<std::size_t>(cfg.interior_symbols);

  std::vector<String> contexts;
  contexts.push_back({});
  for (int i = 0; i < cfg.interior_symbols; ++i) contexts.push_back({static_cast<SymbolId>(i)});

  std::unordered_map<String, std::vector<double>, StringHash> prior_rows, aligned_rows;
  for (const auto& ctx : contexts) {
    // Prior row: Dirichlet(1) interior scaled under an EOS share.
    std::vector<double> w(m);
    double total = 0.0;
    for (auto& x : w) {
      x = rng.gamma(1.0);
      total += x;
    }
    const double p_eos = cfg.eos_base + 0.15 * rng.uniform();
    std::vector<double> prior_row(m + 1);
    for (std::size_t i = 0; i < m; ++i) prior_row[i] = (1.0 - p_eos) * w[i] / total;
    prior_row[m] = p_eos;

    // Aligned row: prior^tilt with a log-normal perturbation on the interior,
    // EOS tied to the unperturbed tilt.
    std::vector<double> q_row(m + 1);
    double qz = 0.0;
    for (std::size_t i = 0; i <= m; ++i) {
      double lw = cfg.tilt * std::log(prior_row[i]);
      if (i < m) lw += cfg.perturb * rng.normal();
      q_row[i] = std::exp(lw);
      qz += q_row[i];
    }
    for (auto& x : q_row) x /= qz;

    prior_rows.emplace(ctx, std::move(prior_row));
    aligned_rows.emplace(ctx, std::move(q_row));
  }

  SweepWorld world;
  world.prior = AutoregressiveLM::create(alphabet, 1, std::move(prior_rows));
  world.aligned = AutoregressiveLM::create(alphabet, 1, std::move(aligned_rows));
  world.beta = 1.0;
  return world;
}

SweepWorld default_sweep_world() {
  SweepWorldConfig cfg;
  cfg.interior_symbols = 4;
  cfg.seed = 138u;  // construction seed vetted against the sweep trend suite
  cfg.tilt = 0.5;
  cfg.perturb = 0.6;
  cfg.eos_base = 0.2;
  return make_sweep_world(cfg);
}

std::vector<std::string> default_sweep_adaptors() {
  return {"topk:k=2", "topk:k=3", "nucleus:pi=0.90", "nucleus:pi=0.95", "eta:eps=0.01"};
}

std::vector<double> default_sweep_temperatures() { return {0.5, 0.75, 1.0, 1.25, 1.5}; }

namespace {

TransformFunction with_temperature(const TransformFunction& base, double tau) {
  TransformFunction tf = base;
  tf.scaling = tau == 1.0 ? ScalingRule::identity() : ScalingRule::temperature(tau);
  return tf;
}

SweepRow sweep_cell(const SweepWorld& world, const std::string& label,
                    const TransformFunction& tf, double tau, int corpus_size, int resamples,
                    uint64_t cell_seed) {
  AdaptedModel proposal = make_local_adapted(world.aligned, tf);

  // Base corpus from the locally adapted aligned model. Proposal and target
  // densities fall out of the draw itself; prior/reward values are cached per
  // distinct string and reused across every bootstrap replicate.
  Rng rng(derive_seed(cell_seed, {0}));
  const auto n = static_cast<std::size_t>(corpus_size);
  std::vector<double> target_logw(n), proposal_logp(n), log_prior(n), reward(n);
  std::unordered_map<String, std::pair<double, double>, StringHash> cache;  // logp, reward
  for (std::size_t i = 0; i < n; ++i) {
    LocalSample s = sample_local(proposal, rng);
    if (s.capped) throw CappedSampleError("sweep base corpus draw hit the length cap");
    target_logw[i] = s.global_logweight;
    proposal_logp[i] = s.local_logprob;
    auto it = cache.find(s.string);
    if (it == cache.end()) {
      const double lp = string_logprob(world.prior, s.string);
      const double lq = string_logprob(world.aligned, s.string);
      it = cache.emplace(std::move(s.string), std::make_pair(lp, world.beta * (lq - lp))).first;
    }
    log_prior[i] = it->second.first;
    reward[i] = it->second.second;
  }

  double sum_lp = 0.0, sum_r = 0.0, sum_acc = 0.0, sum_v = 0.0;
  for (int rep = 0; rep < resamples; ++rep) {
    BootstrapResult boot = imha_bootstrap_weights(
        target_logw, proposal_logp, corpus_size,
        derive_seed(cell_seed, {1, static_cast<uint64_t>(rep)}));
    double lp = 0.0, r = 0.0;
    for (int32_t idx : boot.chain) {
      lp += log_prior[static_cast<std::size_t>(idx)];
      r += reward[static_cast<std::size_t>(idx)];
    }
    sum_lp += lp / corpus_size;
    sum_r += r / corpus_size;
    sum_acc += boot.acceptance_rate;
    sum_v += cramers_v_consecutive(boot.chain);
  }

  SweepRow row;
  row.adaptor = label;
  row.temperature = tau;
  row.avg_log_prior = sum_lp / resamples;
  row.avg_reward = sum_r / resamples;
  row.acceptance_rate = sum_acc / resamples;
  row.cramers_v = sum_v / resamples;
  return row;
}

}  // namespace

SweepResult adaptor_sweep(const SweepWorld& world, const std::vector<std::string>& adaptor_specs,
                          const std::vector<double>& temperatures, int corpus_size, int resamples,
                          uint64_t seed) {
  if (adaptor_specs.empty() || temperatures.empty())
    throw InputError("sweep needs non-empty adaptor and temperature grids");
  if (corpus_size < 1 || resamples < 1)
    throw InputError("sweep needs positive corpus size and resample count");

  SweepResult out;
  out.rows.push_back(sweep_cell(world, "ancestral", ancestral_transform(), 1.0, corpus_size,
                                resamples, derive_seed(seed, {0xa11c})));
  uint64_t cell = 0;
  for (const auto& spec : adaptor_specs) {
    TransformFunction base_tf = parse_adaptor_spec(spec);
    if (base_tf.scaling.kind != ScalingRule::Kind::identity)
      throw InputError("sweep adaptor specs must not carry temp=; use the temperature grid");
    for (double tau : temperatures) {
      out.rows.push_back(sweep_cell(world, format_adaptor_spec(base_tf),
                                    with_temperature(base_tf, tau), tau, corpus_size, resamples,
                                    derive_seed(seed, {cell})));
      ++cell;
    }
  }
  return out;
}

SweepCellExact sweep_cell_exact(const SweepWorld& world, const TransformFunction& tf) {
  auto graph = ContextGraph::build(world.aligned);
  AdaptedModel adapted = make_local_adapted(world.aligned, tf);
  StepMatrix w(graph.size()), f_prior(graph.size()), f_reward(graph.size());
  for (std::size_t c = 0; c < graph.size(); ++c) {
    const auto& ctx = graph.contexts[c];
    w[c] = adapted.step(ctx).weight;
    const auto& p_row = world.prior.row(ctx);
    const auto& q_row = world.aligned.row(ctx);
    f_prior[c].assign(p_row.size(), 0.0);
    f_reward[c].assign(p_row.size(), 0.0);
    for (std::size_t a = 0; a < p_row.size(); ++a) {
      if (w[c][a] > 0.0) {
        if (p_row[a] <= 0.0)
          throw CertificationError("adapted support escapes the prior support");
        f_prior[c][a] = std::log(p_row[a]);
        f_reward[c][a] = world.beta * (std::log(q_row[a]) - std::log(p_row[a]));
      }
    }
  }
  auto mp = transfer_moments(graph, w, f_prior);
  auto mr = transfer_moments(graph, w, f_reward);
  return {mp.mean(), mr.mean()};
}

}  // namespace exactlm
