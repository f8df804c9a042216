#pragma once

// End-to-end reproduction pipelines at desk scale: the tabular toy aligned
// world with banded (causally bootstrapped) corpora and Simpson's-paradox
// detection, and the adaptor/temperature sweep over a small aligned
// autoregressive world resampled through the IMH bootstrap.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "exactlm/adaptors.hpp"
#include "exactlm/alignment.hpp"
#include "exactlm/lm.hpp"

namespace exactlm {

struct ToyConfig {
  int domain_size = 1000;
  double dirichlet_alpha = 0.1;
  double tau = 2.5;    // aligned-to-prior scaling; tuned so the string-level
  double kappa = 0.6;  // rank correlation lands in the target band
  double beta = 1.0;
  uint64_t seed = 20240817u;
};

struct ToyWorld {
  TabularLM p_good;
  TabularLM prior;
  RewardFunction reward;               // log p_good - log prior, pointwise
  std::vector<double> reward_by_index; // aligned with support order
  double entropy_pgood = 0.0;
  double varentropy_pgood = 0.0;
  double beta = 1.0;
};

// Deterministic in the seed: p_good ~ Dirichlet(alpha * 1), prior =
// softmax(p_good^(1/tau) + U(-kappa, kappa) per item).
ToyWorld build_toy_world(const ToyConfig& cfg);

struct BandedCorpus {
  ItemCorpus items;
  int band = 0;
  double avg_log_prior = 0.0;
  double avg_reward = 0.0;
  double log_qgood = 0.0;       // exact sum of log p_good over the corpus
  double sample_entropy = 0.0;  // -log_qgood / N
};

struct BandedCorpora {
  std::vector<std::pair<double, double>> band_edges;  // 10 half-open intervals
  std::vector<double> tilt_by_band;                   // exponential tilt per band
  std::vector<BandedCorpus> corpora;
  std::vector<int> occupancy;
  bool complete = true;
  std::string diagnostic;
};

// Stratified corpus construction: p_good is exponentially tilted to match
// each band's average log-prior target, then rejection keeps corpora whose
// realized average lands in the band. Band width is sized from the model's
// varentropy so both typical and far-from-typical bands are populated.
BandedCorpora causal_bootstrap_corpora(const ToyWorld& world, int n_corpora, int corpus_size,
                                       uint64_t seed, double band_depth_nats = 0.6,
                                       int retry_budget = 500);

struct CorrelationReport {
  double string_pearson = 0.0;
  double string_spearman = 0.0;
  double corpus_pearson = 0.0;
  double corpus_spearman = 0.0;
  double typical_pearson = 0.0;  // corpus-level, restricted to deviation < epsilon
  int typical_count = 0;
  bool typical_defined = false;
  double epsilon = 0.0;
};

CorrelationReport correlation_report(const ToyWorld& world, const BandedCorpora& corpora,
                                     double epsilon);

enum class SimpsonsVerdict { reversal, no_reversal, inconclusive };

struct SimpsonsSummary {
  SimpsonsVerdict verdict = SimpsonsVerdict::inconclusive;
  bool reversal = false;  // string-level Spearman > 0 and typical corpus Pearson < 0
  std::string summary;
};

SimpsonsSummary simpsons_check(const CorrelationReport& report);

struct ToyRun {
  ToyWorld world;
  BandedCorpora corpora;
  CorrelationReport report;
  SimpsonsSummary simpsons;
};

ToyRun run_toy_pipeline(const ToyConfig& cfg, int n_corpora, int corpus_size, double epsilon);

// ---------------------------------------------------------------------------
// Adaptor sweep over an aligned autoregressive world.

struct SweepWorld {
  AutoregressiveLM prior;
  AutoregressiveLM aligned;  // q_good; the reward is its secret reward
  double beta = 1.0;
};

struct SweepWorldConfig {
  int interior_symbols = 4;
  uint64_t seed = 0;
  double tilt = 0.5;     // per-row exponent linking aligned to prior
  double perturb = 0.6;  // log-normal row perturbation strength
  double eos_base = 0.2;
};

SweepWorld make_sweep_world(const SweepWorldConfig& cfg);
// The checked default world for the sweep pipeline (fixed construction seed).
SweepWorld default_sweep_world();

std::vector<std::string> default_sweep_adaptors();
std::vector<double> default_sweep_temperatures();

struct SweepRow {
  std::string adaptor;  // truncation spec; "ancestral" for the baseline row
  double temperature = 1.0;
  double avg_log_prior = 0.0;
  double avg_reward = 0.0;
  double acceptance_rate = 0.0;
  double cramers_v = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;  // ancestral baseline first, then the grid
};

// Per (adaptor, temperature): sample a base corpus from the locally adapted
// aligned model, bootstrap it through the IMH filter toward the globally
// normalized target `resamples` times, and report mean corpus statistics.
SweepResult adaptor_sweep(const SweepWorld& world, const std::vector<std::string>& adaptor_specs,
                          const std::vector<double>& temperatures, int corpus_size, int resamples,
                          uint64_t seed);

// Exact counterpart of one sweep cell via the transfer system: expectations
// of log-prior and reward under the globally normalized adapted aligned
// model. Used as an independent oracle for the Monte-Carlo pipeline.
struct SweepCellExact {
  double avg_log_prior = 0.0;
  double avg_reward = 0.0;
};
SweepCellExact sweep_cell_exact(const SweepWorld& world, const TransformFunction& tf);

}  // namespace exactlm
