#pragma once

// Linear transfer systems over the finite context set of an AutoregressiveLM.
//
// For a per-context non-negative step-weight matrix w[c][a] (EOS column =
// absorption weight), the total string weight from context c satisfies
//     G(c) = w[c][eos] + sum_a w[c][a] * G(next(c, a)),
// a finite linear system. The same machinery yields first and second moments
// of additive per-step functionals under the induced weighted measure, which
// is how exact normalizers, entropies and adapted expectations are computed.
//
// Convergence is certified before solving: the interior-weight matrix A must
// have spectral radius < 1, established by repeated squaring until some power
// has infinity norm < 1.

#include <vector>

#include "exactlm/lm.hpp"

namespace exactlm {

struct ContextGraph {
  std::vector<String> contexts;  // [0] is the start (empty) context
  std::unordered_map<String, int32_t, StringHash> index;
  // next[c][a]: successor context index, or -1 where p(a | c) = 0 in the base
  // model (the transition cannot carry weight).
  std::vector<std::vector<int32_t>> next;

  static ContextGraph build(const AutoregressiveLM& lm);
  std::size_t size() const { return contexts.size(); }
};

// Per-context step values aligned with graph.contexts; each inner vector is in
// alphabet order (EOS column included).
using StepMatrix = std::vector<std::vector<double>>;

StepMatrix probability_steps(const ContextGraph& g, const AutoregressiveLM& lm);
// f[c][a] = -log(base step prob), the per-step surprisal; entries with zero
// probability are left at 0 (they never carry weight).
StepMatrix surprisal_steps(const ContextGraph& g, const AutoregressiveLM& lm);
StepMatrix power_steps(const ContextGraph& g, const AutoregressiveLM& lm, double gamma);

// Upper bound on the spectral radius of the interior transition matrix
// induced by `w`. Throws CertificationError if the bound cannot be brought
// below 1 (the series may diverge).
double certify_contraction(const ContextGraph& g, const StepMatrix& w);

// G as above, after certification. result[c] = total weight from context c.
std::vector<double> transfer_total(const ContextGraph& g, const StepMatrix& w);

// First and second moments of the additive functional sum_t f(step_t) under
// the measure induced by w, from each context:
//   S1(c) = sum over completions of weight * F,  S2(c) = ... * F^2.
struct TransferMoments {
  std::vector<double> total;   // G
  std::vector<double> first;   // S1
  std::vector<double> second;  // S2
  // Normalized moments at the start context.
  double z() const { return total[0]; }
  double mean() const { return first[0] / total[0]; }
  double mean_square() const { return second[0] / total[0]; }
  double variance() const { return mean_square() - mean() * mean(); }
};

TransferMoments transfer_moments(const ContextGraph& g, const StepMatrix& w,
                                 const StepMatrix& f);

// Depth-limited counterpart: the same sums restricted to strings of length
// <= max_len, aggregated level by level over contexts (so cost is
// O(max_len * |contexts| * |alphabet|) instead of the size of the string
// tree), plus the exact frontier weight per context at depth max_len + 1.
struct TruncatedMoments {
  double z = 0.0;       // sum of w(y) over enumerated strings
  double first = 0.0;   // sum of w(y) F(y)
  double second = 0.0;  // sum of w(y) F(y)^2
  std::vector<double> frontier;  // live prefix weight by context
  double frontier_total = 0.0;
};

TruncatedMoments truncated_moments(const ContextGraph& g, const StepMatrix& w,
                                   const StepMatrix& f, int max_len);

namespace detail {
// Dense Gaussian elimination with partial pivoting; solves (I - A) x = b.
std::vector<double> solve_i_minus_a(std::vector<std::vector<double>> a,
                                    std::vector<double> b);
}  // namespace detail

}  // namespace exactlm
