#include "exactlm/entropy.hpp"

#include <algorithm>
#include <cmath>

#include "exactlm/transfer.hpp"

namespace exactlm {

namespace {

void check_gamma(double gamma) {
  if (!(gamma > 0.0) || gamma > 1.0)
    throw InputError("Renyi order must lie in (0, 1]");
}

}  // namespace

double entropy(const TabularLM& lm) {
  double h = 0.0;
  for (double lp : lm.logprobs) {
    if (lp == -std::numeric_limits<double>::infinity()) continue;
    h -= std::exp(lp) * lp;
  }
  return h;
}

double varentropy(const TabularLM& lm) {
  double h = 0.0, m2 = 0.0;
  for (double lp : lm.logprobs) {
    if (lp == -std::numeric_limits<double>::infinity()) continue;
    const double p = std::exp(lp);
    h -= p * lp;
    m2 += p * lp * lp;
  }
  return std::max(0.0, m2 - h * h);
}

double renyi_entropy(const TabularLM& lm, double gamma) {
  check_gamma(gamma);
  if (gamma == 1.0) return entropy(lm);
  double s = 0.0;
  for (double lp : lm.logprobs) {
    if (lp == -std::numeric_limits<double>::infinity()) continue;
    s += std::exp(gamma * lp);
  }
  return std::log(s) / (1.0 - gamma);
}

double renyi_gap(const TabularLM& lm, double gamma) {
  return renyi_entropy(lm, gamma) - entropy(lm);
}

double entropy(const AutoregressiveLM& lm) {
  auto g = ContextGraph::build(lm);
  auto m = transfer_moments(g, probability_steps(g, lm), surprisal_steps(g, lm));
  return m.mean();
}

double varentropy(const AutoregressiveLM& lm) {
  auto g = ContextGraph::build(lm);
  auto m = transfer_moments(g, probability_steps(g, lm), surprisal_steps(g, lm));
  return std::max(0.0, m.variance());
}

double renyi_entropy(const AutoregressiveLM& lm, double gamma) {
  check_gamma(gamma);
  if (gamma == 1.0) return entropy(lm);
  auto g = ContextGraph::build(lm);
  auto total = transfer_total(g, power_steps(g, lm, gamma));
  return std::log(total[0]) / (1.0 - gamma);
}

double renyi_gap(const AutoregressiveLM& lm, double gamma) {
  return renyi_entropy(lm, gamma) - entropy(lm);
}

namespace {

// Tail majorants for enumeration intervals. Strings of length n > L have
//   slice mass  m_n <= (1-c0) (1-c)^(n-1)   and
//   surprisal   -log p(y) <= (n+1) log(1/rho),
// rho the smallest positive table entry, so the missing entropy contribution
// is at most sum_n m_n (n+1) log(1/rho), and the second moment analogue uses
// the square. Both series are geometric-times-polynomial and summed here
// numerically to convergence.
struct TailBounds {
  double entropy = 0.0;
  double second_moment = 0.0;
};

TailBounds tail_bounds(const AutoregressiveLM& lm, int max_len) {
  if (lm.eos_floor_recurring <= 0.0)
    throw CertificationError(
        "entropy interval unavailable: model is not EOS-bounded beyond the start context");
  const double x = 1.0 - lm.eos_floor_recurring;
  const double scale0 = 1.0 - lm.eos_floor;  // start-step factor
  const double log_inv_rho = -std::log(lm.min_positive_prob);
  TailBounds tb;
  if (x == 0.0 || scale0 == 0.0) return tb;
  double mass = scale0 * std::pow(x, max_len);  // bound on m_{L+1}
  for (long n = max_len + 1; n < max_len + 2000000; ++n) {
    const double cap = (log_inv_rho > 0.0 ? log_inv_rho : 1e-300) * static_cast<double>(n + 1);
    const double te = mass * cap;
    tb.entropy += te;
    tb.second_moment += mass * cap * cap;
    mass *= x;
    if (te < 1e-18 * (tb.entropy + 1e-300)) break;
  }
  return tb;
}

}  // namespace

namespace {

TruncatedMoments truncated_surprisal_moments(const AutoregressiveLM& lm, int max_len) {
  auto g = ContextGraph::build(lm);
  return truncated_moments(g, probability_steps(g, lm), surprisal_steps(g, lm), max_len);
}

}  // namespace

Interval entropy_interval(const AutoregressiveLM& lm, int max_len) {
  auto tb = tail_bounds(lm, max_len);
  auto tm = truncated_surprisal_moments(lm, max_len);
  return {tm.first, tm.first + tb.entropy};
}

Interval varentropy_interval(const AutoregressiveLM& lm, int max_len) {
  auto tb = tail_bounds(lm, max_len);
  auto tm = truncated_surprisal_moments(lm, max_len);
  const Interval hi{tm.first, tm.first + tb.entropy};
  const Interval m2i{tm.second, tm.second + tb.second_moment};
  return {std::max(0.0, m2i.lo - hi.hi * hi.hi), m2i.hi - hi.lo * hi.lo};
}

namespace {

template <typename Model>
EntropyProfile profile_impl(const Model& lm, std::span<const double> gammas,
                            std::optional<double> eos_bound) {
  EntropyProfile p;
  p.shannon = entropy(lm);
  p.varentropy = varentropy(lm);
  for (double g : gammas) p.renyi[g] = renyi_entropy(lm, g);
  p.eos_lower_bound = eos_bound;
  return p;
}

}  // namespace

EntropyProfile entropy_profile(const TabularLM& lm, std::span<const double> gammas) {
  return profile_impl(lm, gammas, std::nullopt);
}

EntropyProfile entropy_profile(const AutoregressiveLM& lm, std::span<const double> gammas) {
  std::optional<double> bound;
  if (lm.eos_bounded()) bound = lm.eos_floor;
  return profile_impl(lm, gammas, bound);
}

std::vector<double> renyi_gamma_grid() {
  std::vector<double> g{0.01};
  for (int i = 1; i <= 10; ++i) g.push_back(0.1 * i);
  g.insert(g.end() - 1, 0.99);
  return g;  // 0.01, 0.1, ..., 0.9, 0.99, 1.0
}

namespace {
inline double lg(double x) { return std::log2(x); }
}  // namespace

double InfiniteEntropyLM::mass(long t) const {
  if (t < 1) throw InputError("length index must be >= 1");
  return 1.0 / lg(static_cast<double>(t + 1)) - 1.0 / lg(static_cast<double>(t + 2));
}

double InfiniteEntropyLM::partial_mass(long n) const {
  if (n < 1) throw InputError("length index must be >= 1");
  // Telescoping sum: 1/lg(2) - 1/lg(n+2).
  return 1.0 - 1.0 / lg(static_cast<double>(n + 2));
}

double InfiniteEntropyLM::partial_entropy_bits(long n) const {
  if (n < 1) throw InputError("length index must be >= 1");
  double h = 0.0;
  for (long t = 1; t <= n; ++t) {
    const double p = mass(t);
    h -= p * lg(p);
  }
  return h;
}

double InfiniteEntropyLM::entropy_lower_bound_bits(long n) const {
  double s = 0.0;
  const double ln2 = std::log(2.0);
  for (long t = 3; t <= n; ++t) {
    const double l = lg(static_cast<double>(t));
    s += 1.0 / (static_cast<double>(t) * l * l);
  }
  return s / ln2;
}

}  // namespace exactlm
