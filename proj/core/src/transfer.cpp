#include "exactlm/transfer.hpp"

#include <cmath>
#include <deque>

namespace exactlm {

ContextGraph ContextGraph::build(const AutoregressiveLM& lm) {
  ContextGraph g;
  const int32_t eos = lm.alphabet.eos_index;
  String start;
  g.contexts.push_back(start);
  g.index.emplace(start, 0);
  std::deque<int32_t> queue{0};
  while (!queue.empty()) {
    const int32_t ci = queue.front();
    queue.pop_front();
    const String ctx = g.contexts[static_cast<std::size_t>(ci)];
    const auto& dist = lm.row(ctx);
    std::vector<int32_t> nxt(static_cast<std::size_t>(lm.alphabet.size()), -1);
    for (int32_t a = 0; a < lm.alphabet.size(); ++a) {
      if (a == eos || dist[static_cast<std::size_t>(a)] <= 0.0) continue;
      String next_ctx = ctx;
      next_ctx.push_back(a);
      if (static_cast<int>(next_ctx.size()) > lm.order)
        next_ctx.erase(next_ctx.begin(), next_ctx.end() - lm.order);
      auto [it, inserted] = g.index.emplace(next_ctx, static_cast<int32_t>(g.contexts.size()));
      if (inserted) {
        g.contexts.push_back(next_ctx);
        g.next.resize(g.contexts.size());  // placeholder; filled when visited
        queue.push_back(it->second);
      }
      nxt[static_cast<std::size_t>(a)] = it->second;
    }
    if (g.next.size() < g.contexts.size()) g.next.resize(g.contexts.size());
    g.next[static_cast<std::size_t>(ci)] = std::move(nxt);
  }
  return g;
}

StepMatrix probability_steps(const ContextGraph& g, const AutoregressiveLM& lm) {
  StepMatrix w(g.size());
  for (std::size_t c = 0; c < g.size(); ++c) w[c] = lm.row(g.contexts[c]);
  return w;
}

StepMatrix surprisal_steps(const ContextGraph& g, const AutoregressiveLM& lm) {
  StepMatrix f(g.size());
  for (std::size_t c = 0; c < g.size(); ++c) {
    const auto& dist = lm.row(g.contexts[c]);
    f[c].assign(dist.size(), 0.0);
    for (std::size_t a = 0; a < dist.size(); ++a) {
      if (dist[a] > 0.0) f[c][a] = -std::log(dist[a]);
    }
  }
  return f;
}

StepMatrix power_steps(const ContextGraph& g, const AutoregressiveLM& lm, double gamma) {
  StepMatrix w(g.size());
  for (std::size_t c = 0; c < g.size(); ++c) {
    const auto& dist = lm.row(g.contexts[c]);
    w[c].assign(dist.size(), 0.0);
    for (std::size_t a = 0; a < dist.size(); ++a) {
      if (dist[a] > 0.0) w[c][a] = std::pow(dist[a], gamma);
    }
  }
  return w;
}

namespace {

std::vector<std::vector<double>> interior_matrix(const ContextGraph& g, const StepMatrix& w) {
  const std::size_t n = g.size();
  std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
  for (std::size_t c = 0; c < n; ++c) {
    const auto& nxt = g.next[c];
    for (std::size_t s = 0; s < nxt.size(); ++s) {
      if (nxt[s] >= 0 && w[c][s] > 0.0)
        a[c][static_cast<std::size_t>(nxt[s])] += w[c][s];
    }
  }
  return a;
}

std::vector<std::vector<double>> mat_mul(const std::vector<std::vector<double>>& x,
                                         const std::vector<std::vector<double>>& y) {
  const std::size_t n = x.size();
  std::vector<std::vector<double>> z(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      const double v = x[i][k];
      if (v == 0.0) continue;
      const auto& row = y[k];
      auto& out = z[i];
      for (std::size_t j = 0; j < n; ++j) out[j] += v * row[j];
    }
  }
  return z;
}

double inf_norm(const std::vector<std::vector<double>>& a) {
  double m = 0.0;
  for (const auto& row : a) {
    double s = 0.0;
    for (double v : row) s += std::abs(v);
    m = std::max(m, s);
  }
  return m;
}

}  // namespace

double certify_contraction(const ContextGraph& g, const StepMatrix& w) {
  auto a = interior_matrix(g, w);
  double norm = inf_norm(a);
  double exponent = 1.0;
  // rho(A) <= ||A^m||^(1/m); square until the power contracts.
  for (int iter = 0; iter < 24; ++iter) {
    if (norm < 1.0) return std::pow(norm, 1.0 / exponent);
    if (norm > 1e12)
      throw CertificationError("transfer series diverges: ||A^m|| grows without bound");
    a = mat_mul(a, a);
    exponent *= 2.0;
    norm = inf_norm(a);
  }
  throw CertificationError("transfer series not certified convergent");
}

namespace detail {

std::vector<double> solve_i_minus_a(std::vector<std::vector<double>> a,
                                    std::vector<double> b) {
  const std::size_t n = b.size();
  // m = I - A
  std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) m[i][j] = (i == j ? 1.0 : 0.0) - a[i][j];
  }
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
    }
    if (std::abs(m[pivot][col]) < 1e-300)
      throw CertificationError("transfer system is singular");
    std::swap(m[col], m[pivot]);
    std::swap(b[col], b[pivot]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col || m[r][col] == 0.0) continue;
      const double factor = m[r][col] / m[col][col];
      for (std::size_t j = col; j < n; ++j) m[r][j] -= factor * m[col][j];
      b[r] -= factor * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / m[i][i];
  return x;
}

}  // namespace detail

std::vector<double> transfer_total(const ContextGraph& g, const StepMatrix& w) {
  certify_contraction(g, w);
  const std::size_t n = g.size();
  auto a = interior_matrix(g, w);
  std::vector<double> b(n, 0.0);
  // EOS column: every symbol slot without a successor is absorbing weight.
  for (std::size_t c = 0; c < n; ++c) {
    const auto& nxt = g.next[c];
    for (std::size_t s = 0; s < nxt.size(); ++s) {
      if (nxt[s] < 0 && w[c][s] > 0.0) b[c] += w[c][s];
    }
  }
  return detail::solve_i_minus_a(std::move(a), std::move(b));
}

TransferMoments transfer_moments(const ContextGraph& g, const StepMatrix& w,
                                 const StepMatrix& f) {
  TransferMoments out;
  out.total = transfer_total(g, w);
  const std::size_t n = g.size();
  auto a = interior_matrix(g, w);

  // S1(c) = sum_s w[c][s] * ( f[c][s] * G(next) + S1(next) ), G/S1 = 1/0 at
  // absorption for the G factor, i.e. absorbing slots contribute w * f.
  std::vector<double> b1(n, 0.0);
  for (std::size_t c = 0; c < n; ++c) {
    const auto& nxt = g.next[c];
    for (std::size_t s = 0; s < nxt.size(); ++s) {
      if (w[c][s] <= 0.0) continue;
      const double g_next = nxt[s] >= 0 ? out.total[static_cast<std::size_t>(nxt[s])] : 1.0;
      b1[c] += w[c][s] * f[c][s] * g_next;
    }
  }
  out.first = detail::solve_i_minus_a(a, b1);

  // S2(c) = sum_s w ( f^2 G(next) + 2 f S1(next) + S2(next) ).
  std::vector<double> b2(n, 0.0);
  for (std::size_t c = 0; c < n; ++c) {
    const auto& nxt = g.next[c];
    for (std::size_t s = 0; s < nxt.size(); ++s) {
      if (w[c][s] <= 0.0) continue;
      double g_next = 1.0, s1_next = 0.0;
      if (nxt[s] >= 0) {
        g_next = out.total[static_cast<std::size_t>(nxt[s])];
        s1_next = out.first[static_cast<std::size_t>(nxt[s])];
      }
      b2[c] += w[c][s] * (f[c][s] * f[c][s] * g_next + 2.0 * f[c][s] * s1_next);
    }
  }
  out.second = detail::solve_i_minus_a(std::move(a), std::move(b2));
  return out;
}

TruncatedMoments truncated_moments(const ContextGraph& g, const StepMatrix& w,
                                   const StepMatrix& f, int max_len) {
  if (max_len < 0) throw InputError("max_len must be >= 0");
  const std::size_t n = g.size();
  // Per-context prefix aggregates: m = sum of prefix weights, s = sum of
  // weight * accumulated-F, q = sum of weight * accumulated-F^2.
  std::vector<double> m(n, 0.0), s(n, 0.0), q(n, 0.0);
  m[0] = 1.0;
  TruncatedMoments out;
  out.frontier.assign(n, 0.0);
  for (int depth = 0; depth <= max_len + 1; ++depth) {
    const bool at_frontier = depth == max_len + 1;
    if (at_frontier) {
      for (std::size_t c = 0; c < n; ++c) {
        out.frontier[c] = m[c];
        out.frontier_total += m[c];
      }
      break;
    }
    // Entries: strings of this exact length end through the EOS column.
    std::vector<double> m2(n, 0.0), s2(n, 0.0), q2(n, 0.0);
    for (std::size_t c = 0; c < n; ++c) {
      if (m[c] == 0.0 && s[c] == 0.0 && q[c] == 0.0) continue;
      const auto& nxt = g.next[c];
      for (std::size_t a = 0; a < nxt.size(); ++a) {
        const double wa = w[c][a];
        if (wa <= 0.0) continue;
        const double fa = f[c][a];
        const double zm = wa * m[c];
        const double zs = wa * (s[c] + fa * m[c]);
        const double zq = wa * (q[c] + 2.0 * fa * s[c] + fa * fa * m[c]);
        if (nxt[a] < 0) {  // absorbing (EOS) column: a finished string
          out.z += zm;
          out.first += zs;
          out.second += zq;
        } else {
          const auto t = static_cast<std::size_t>(nxt[a]);
          m2[t] += zm;
          s2[t] += zs;
          q2[t] += zq;
        }
      }
    }
    m.swap(m2);
    s.swap(s2);
    q.swap(q2);
  }
  return out;
}

}  // namespace exactlm
