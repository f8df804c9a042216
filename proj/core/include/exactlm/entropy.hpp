#pragma once

// Entropy, varentropy and Rényi entropy for exactly evaluable models.
//
// All values are in nats except the InfiniteEntropyLM helpers, which follow
// the base-2 closed forms of that construction. Tabular models are summed
// directly. Autoregressive models get two independent routes: exact values
// through the context transfer system, and certified intervals from support
// enumeration with a geometric tail bound; the interval route exists so the
// exact route can be checked against it.

#include <map>
#include <optional>
#include <span>

#include "exactlm/lm.hpp"

namespace exactlm {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double mid() const { return 0.5 * (lo + hi); }
  double width() const { return hi - lo; }
  bool contains(double x) const { return x >= lo && x <= hi; }
};

double entropy(const TabularLM& lm);
double varentropy(const TabularLM& lm);
double renyi_entropy(const TabularLM& lm, double gamma);  // gamma in (0, 1]
double renyi_gap(const TabularLM& lm, double gamma);

// Exact values via the transfer system; CertificationError when convergence
// cannot be certified (e.g. EOS unreachable with positive floor).
double entropy(const AutoregressiveLM& lm);
double varentropy(const AutoregressiveLM& lm);
double renyi_entropy(const AutoregressiveLM& lm, double gamma);
double renyi_gap(const AutoregressiveLM& lm, double gamma);

// Certified enclosures from enumeration to max_len. Requires a positive
// recurring EOS floor; otherwise the tail cannot be bounded and a
// CertificationError is thrown.
Interval entropy_interval(const AutoregressiveLM& lm, int max_len);
Interval varentropy_interval(const AutoregressiveLM& lm, int max_len);

struct EntropyProfile {
  double shannon = 0.0;             // nats
  double varentropy = 0.0;          // nats^2
  std::map<double, double> renyi;   // gamma -> nats
  std::optional<double> eos_lower_bound;
};

EntropyProfile entropy_profile(const TabularLM& lm, std::span<const double> gammas);
EntropyProfile entropy_profile(const AutoregressiveLM& lm, std::span<const double> gammas);

// The gamma grid used by the property suite: 0.1 steps plus both near-ends.
std::vector<double> renyi_gamma_grid();

// Single-symbol model with p(length t) = 1/lg(t+1) - 1/lg(t+2) for t >= 1.
// Tight (the masses telescope to 1) with divergent entropy; partial sums of
// mass and entropy are exactly computable.
struct InfiniteEntropyLM {
  double mass(long t) const;               // probability of the length-t string
  double partial_mass(long n) const;       // = 1 - 1/lg(n+2)
  double partial_entropy_bits(long n) const;
  // Partial sum of the divergent minorant (1/ln 2) * sum_{t>=3} 1/(t lg^2 t);
  // the partial entropy dominates it wherever both are evaluated.
  double entropy_lower_bound_bits(long n) const;
};

inline InfiniteEntropyLM infinite_entropy_lm() { return {}; }

}  // namespace exactlm
