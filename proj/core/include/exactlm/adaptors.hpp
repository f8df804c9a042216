#pragma once

// Sampling adaptors as transform functions: a scaling rule composed with a
// truncation rule, applied to each next-symbol distribution.
//
// A transform induces two adapted models from the same base model:
//  - local:  each transformed step vector is renormalized (ordinary top-k /
//    nucleus / eta / locally-typical sampling);
//  - global: the raw transformed step weights multiply into an unnormalized
//    string weight, normalized once by Z over all strings.
//
// Tie-breaking is deterministic everywhere: symbols ordered by (descending
// probability, ascending index); smallest-set rules fill in that order.
// When scaling and truncation are combined, the step distribution is scaled
// first and the truncation set is computed on the scaled, renormalized
// vector (transform_step can evaluate the reverse order for inspection).

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "exactlm/lm.hpp"

namespace exactlm {

class Rng;

struct ScalingRule {
  enum class Kind { identity, temperature };
  Kind kind = Kind::identity;
  double tau = 1.0;  // > 0

  static ScalingRule identity() { return {}; }
  static ScalingRule temperature(double tau);
};

struct TruncationRule {
  enum class Kind { none, top_k, nucleus, eta, locally_typical };
  Kind kind = Kind::none;
  int k = 0;          // top_k: > 0
  double pi = 1.0;    // nucleus / locally_typical: in (0, 1]
  double eps = 0.0;   // eta: > 0

  static TruncationRule none() { return {}; }
  static TruncationRule top_k(int k);
  static TruncationRule nucleus(double pi);
  static TruncationRule eta(double eps);
  static TruncationRule locally_typical(double pi);
};

struct TransformFunction {
  ScalingRule scaling;
  TruncationRule truncation;

  bool is_ancestral() const {
    return scaling.kind == ScalingRule::Kind::identity &&
           truncation.kind == TruncationRule::Kind::none;
  }
};

inline TransformFunction ancestral_transform() { return {}; }

// Adaptor spec grammar (case-insensitive), e.g.
//   topk:k=30,temp=1.25   nucleus:pi=0.95   eta:eps=0.0009
//   typical:pi=0.95       temperature:tau=1.5   ancestral
TransformFunction parse_adaptor_spec(std::string_view spec);
std::string format_adaptor_spec(const TransformFunction& tf);

enum class TransformOrder { scale_then_truncate, truncate_then_scale };

// The defining subset of symbol indices (ascending). `dist` must sum to 1.
std::vector<int32_t> truncation_set(const TruncationRule& rule, std::span<const double> dist);

// Non-negative weight vector kappa(dist) * 1{in truncation set}. Throws
// DegenerateAdaptorError when no weight survives.
std::vector<double> transform_step(const TransformFunction& tf, std::span<const double> dist,
                                   TransformOrder order = TransformOrder::scale_then_truncate);

enum class AdaptMode { local, global };

struct AdaptedStep {
  std::vector<double> weight;     // transformed step weights, alphabet order
  std::vector<double> logweight;  // log of the above (-inf where zero)
  double total = 0.0;             // sum of weights
  double logtotal = 0.0;
};

struct AdaptedModel {
  AutoregressiveLM base;
  TransformFunction transform;
  AdaptMode mode = AdaptMode::local;
  std::optional<double> global_log_normalizer;  // present iff mode == global
  // Transformed rows for every reachable context, precomputed so the model is
  // immutable and shareable after construction.
  std::unordered_map<String, AdaptedStep, StringHash> steps;

  const AdaptedStep& step(const String& context) const;
  const AdaptedStep& step_for_prefix(const String& prefix) const {
    return step(base.context_of(prefix));
  }
};

AdaptedModel make_local_adapted(const AutoregressiveLM& base, const TransformFunction& tf);
AdaptedModel make_global_adapted(const AutoregressiveLM& base, const TransformFunction& tf,
                                 int max_len = 25);

// Product of renormalized transformed step probabilities, EOS step included.
// -inf when the string leaves the truncated support (a valid value, not an
// error).
double local_logprob(const AdaptedModel& m, const String& y);

// Log of the raw transform weight of the string (no per-step normalization).
double global_unnorm_logweight(const AdaptedModel& m, const String& y);
double global_unnorm_logweight(const AutoregressiveLM& base, const TransformFunction& tf,
                               const String& y);

// log p~(y) = unnormalized weight - log Z; requires global mode.
double global_logprob(const AdaptedModel& m, const String& y);

struct GlobalNormalizer {
  double log_z = 0.0;            // adopted value (transfer-system route)
  double enumerated_mass = 0.0;  // route (a): sum of enumerated weights
  double tail_bound = 0.0;       // route (a): certified bound on the rest
  double log_z_transfer = 0.0;   // route (b): exact linear-system solve
  double spectral_bound = 0.0;
};

// Z computed two ways -- depth-limited enumeration with a certified geometric
// tail, and the exact transfer solve -- and cross-checked: the solve must land
// in the enumeration bracket to 1e-8 slack. Throws CertificationError when
// the tail cannot be certified (non-tight adapted model) or the routes
// disagree.
GlobalNormalizer global_normalizer(const AutoregressiveLM& base, const TransformFunction& tf,
                                   int max_len = 25);

struct LocalSample {
  String string;
  double local_logprob = 0.0;      // log p..(y), accumulated during the draw
  double global_logweight = 0.0;   // log of raw transform weight of the draw
  bool capped = false;
};

// Stepwise categorical draw from the renormalized transformed vectors.
// Deterministic given the Rng state; capped draws are flagged, not thrown.
LocalSample sample_local(const AdaptedModel& m, Rng& rng, int max_len = 512);

}  // namespace exactlm
