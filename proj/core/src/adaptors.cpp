#include "exactlm/adaptors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "exactlm/rng.hpp"
#include "exactlm/transfer.hpp"

namespace exactlm {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double step_entropy(std::span<const double> dist) {
  double h = 0.0;
  for (double p : dist) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

// Indices ordered by (descending probability, ascending index).
std::vector<int32_t> by_probability(std::span<const double> dist) {
  std::vector<int32_t> idx(dist.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int32_t a, int32_t b) {
    if (dist[static_cast<std::size_t>(a)] != dist[static_cast<std::size_t>(b)])
      return dist[static_cast<std::size_t>(a)] > dist[static_cast<std::size_t>(b)];
    return a < b;
  });
  return idx;
}

}  // namespace

ScalingRule ScalingRule::temperature(double tau) {
  if (!(tau > 0.0)) throw InputError("temperature must be positive");
  ScalingRule r;
  r.kind = Kind::temperature;
  r.tau = tau;
  return r;
}

TruncationRule TruncationRule::top_k(int k) {
  if (k <= 0) throw InputError("top-k requires k > 0");
  TruncationRule r;
  r.kind = Kind::top_k;
  r.k = k;
  return r;
}

TruncationRule TruncationRule::nucleus(double pi) {
  if (!(pi > 0.0) || pi > 1.0) throw InputError("nucleus mass must lie in (0, 1]");
  TruncationRule r;
  r.kind = Kind::nucleus;
  r.pi = pi;
  return r;
}

TruncationRule TruncationRule::eta(double eps) {
  if (!(eps > 0.0)) throw InputError("eta threshold must be positive");
  TruncationRule r;
  r.kind = Kind::eta;
  r.eps = eps;
  return r;
}

TruncationRule TruncationRule::locally_typical(double pi) {
  if (!(pi > 0.0) || pi > 1.0) throw InputError("locally-typical mass must lie in (0, 1]");
  TruncationRule r;
  r.kind = Kind::locally_typical;
  r.pi = pi;
  return r;
}

std::vector<int32_t> truncation_set(const TruncationRule& rule, std::span<const double> dist) {
  std::vector<int32_t> keep;
  switch (rule.kind) {
    case TruncationRule::Kind::none: {
      keep.resize(dist.size());
      std::iota(keep.begin(), keep.end(), 0);
      return keep;
    }
    case TruncationRule::Kind::top_k: {
      auto order = by_probability(dist);
      const auto n = std::min<std::size_t>(order.size(), static_cast<std::size_t>(rule.k));
      keep.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n));
      break;
    }
    case TruncationRule::Kind::nucleus: {
      auto order = by_probability(dist);
      double mass = 0.0;
      for (int32_t i : order) {
        keep.push_back(i);
        mass += dist[static_cast<std::size_t>(i)];
        if (mass >= rule.pi) break;
      }
      break;
    }
    case TruncationRule::Kind::eta: {
      const double h = step_entropy(dist);
      const double eta = std::min(rule.eps, std::sqrt(rule.eps) * std::exp(-h));
      for (int32_t i = 0; i < static_cast<int32_t>(dist.size()); ++i) {
        if (dist[static_cast<std::size_t>(i)] > eta) keep.push_back(i);
      }
      break;
    }
    case TruncationRule::Kind::locally_typical: {
      const double h = step_entropy(dist);
      std::vector<int32_t> order(dist.size());
      std::iota(order.begin(), order.end(), 0);
      auto key = [&](int32_t i) {
        const double p = dist[static_cast<std::size_t>(i)];
        return p > 0.0 ? std::abs(h + std::log(p))
                       : std::numeric_limits<double>::infinity();
      };
      std::sort(order.begin(), order.end(), [&](int32_t a, int32_t b) {
        const double ka = key(a), kb = key(b);
        if (ka != kb) return ka < kb;
        return a < b;
      });
      double mass = 0.0;
      for (int32_t i : order) {
        keep.push_back(i);
        mass += dist[static_cast<std::size_t>(i)];
        if (mass >= rule.pi) break;
      }
      break;
    }
  }
  std::sort(keep.begin(), keep.end());
  return keep;
}

std::vector<double> transform_step(const TransformFunction& tf, std::span<const double> dist,
                                   TransformOrder order) {
  std::vector<double> scaled(dist.begin(), dist.end());
  if (tf.scaling.kind == ScalingRule::Kind::temperature) {
    const double inv_tau = 1.0 / tf.scaling.tau;
    for (double& p : scaled) p = p > 0.0 ? std::pow(p, inv_tau) : 0.0;
  }

  std::vector<int32_t> kept;
  if (order == TransformOrder::scale_then_truncate &&
      tf.scaling.kind == ScalingRule::Kind::temperature) {
    double total = std::accumulate(scaled.begin(), scaled.end(), 0.0);
    std::vector<double> renorm(scaled);
    for (double& p : renorm) p /= total;
    kept = truncation_set(tf.truncation, renorm);
  } else {
    kept = truncation_set(tf.truncation, dist);
  }

  std::vector<double> out(dist.size(), 0.0);
  for (int32_t i : kept) out[static_cast<std::size_t>(i)] = scaled[static_cast<std::size_t>(i)];
  if (std::accumulate(out.begin(), out.end(), 0.0) <= 0.0)
    throw DegenerateAdaptorError("truncation emptied the step distribution");
  return out;
}

namespace {

AdaptedStep make_step(const TransformFunction& tf, std::span<const double> dist) {
  AdaptedStep s;
  s.weight = transform_step(tf, dist);
  s.total = std::accumulate(s.weight.begin(), s.weight.end(), 0.0);
  s.logtotal = std::log(s.total);
  s.logweight.resize(s.weight.size());
  for (std::size_t i = 0; i < s.weight.size(); ++i)
    s.logweight[i] = s.weight[i] > 0.0 ? std::log(s.weight[i]) : kNegInf;
  return s;
}

AdaptedModel make_adapted(const AutoregressiveLM& base, const TransformFunction& tf,
                          AdaptMode mode) {
  AdaptedModel m;
  m.base = base;
  m.transform = tf;
  m.mode = mode;
  auto graph = ContextGraph::build(base);
  for (const auto& ctx : graph.contexts) m.steps.emplace(ctx, make_step(tf, base.row(ctx)));
  return m;
}

}  // namespace

const AdaptedStep& AdaptedModel::step(const String& context) const {
  auto it = steps.find(context);
  if (it == steps.end())
    throw InputError("no adapted step for context '" + base.alphabet.format_string(context) + "'");
  return it->second;
}

AdaptedModel make_local_adapted(const AutoregressiveLM& base, const TransformFunction& tf) {
  return make_adapted(base, tf, AdaptMode::local);
}

AdaptedModel make_global_adapted(const AutoregressiveLM& base, const TransformFunction& tf,
                                 int max_len) {
  AdaptedModel m = make_adapted(base, tf, AdaptMode::global);
  m.global_log_normalizer = global_normalizer(base, tf, max_len).log_z;
  return m;
}

namespace {

// Shared walk: sums chosen per-step log weights and, for the local form,
// subtracts the per-step log totals.
struct WeightWalk {
  double logweight = 0.0;
  double logtotal_sum = 0.0;
  bool left_support = false;
};

WeightWalk walk(const AdaptedModel& m, const String& y) {
  WeightWalk w;
  const int32_t eos = m.base.alphabet.eos_index;
  String prefix;
  prefix.reserve(y.size());
  for (SymbolId s : y) {
    if (s < 0 || s >= m.base.alphabet.size() || s == eos)
      throw InputError("string contains an out-of-alphabet symbol");
    const auto& st = m.step_for_prefix(prefix);
    if (st.weight[static_cast<std::size_t>(s)] <= 0.0) {
      w.left_support = true;
      return w;
    }
    w.logweight += st.logweight[static_cast<std::size_t>(s)];
    w.logtotal_sum += st.logtotal;
    prefix.push_back(s);
  }
  const auto& st = m.step_for_prefix(prefix);
  if (st.weight[static_cast<std::size_t>(eos)] <= 0.0) {
    w.left_support = true;
    return w;
  }
  w.logweight += st.logweight[static_cast<std::size_t>(eos)];
  w.logtotal_sum += st.logtotal;
  return w;
}

}  // namespace

double local_logprob(const AdaptedModel& m, const String& y) {
  auto w = walk(m, y);
  if (w.left_support) return kNegInf;
  return w.logweight - w.logtotal_sum;
}

double global_unnorm_logweight(const AdaptedModel& m, const String& y) {
  auto w = walk(m, y);
  if (w.left_support) return kNegInf;
  return w.logweight;
}

double global_unnorm_logweight(const AutoregressiveLM& base, const TransformFunction& tf,
                               const String& y) {
  return global_unnorm_logweight(make_adapted(base, tf, AdaptMode::global), y);
}

double global_logprob(const AdaptedModel& m, const String& y) {
  if (m.mode != AdaptMode::global || !m.global_log_normalizer)
    throw InputError("global_logprob requires a globally normalized adapted model");
  const double lw = global_unnorm_logweight(m, y);
  return lw == kNegInf ? kNegInf : lw - *m.global_log_normalizer;
}

GlobalNormalizer global_normalizer(const AutoregressiveLM& base, const TransformFunction& tf,
                                   int max_len) {
  AdaptedModel m = make_adapted(base, tf, AdaptMode::global);
  auto graph = ContextGraph::build(base);
  StepMatrix w(graph.size());
  for (std::size_t c = 0; c < graph.size(); ++c) w[c] = m.step(graph.contexts[c]).weight;

  // Route (a): depth-limited enumeration of adapted weights, aggregated by
  // context.
  StepMatrix zero_f(graph.size());
  for (std::size_t c = 0; c < graph.size(); ++c) zero_f[c].assign(w[c].size(), 0.0);
  auto tm = truncated_moments(graph, w, zero_f, max_len);

  double tail = 0.0;
  if (tm.frontier_total > 0.0) {
    // Close the frontier contexts under positive-weight transitions, then
    // bound every continuation geometrically within that set.
    std::set<int32_t> reach;
    for (std::size_t c = 0; c < tm.frontier.size(); ++c) {
      if (tm.frontier[c] > 0.0) reach.insert(static_cast<int32_t>(c));
    }
    std::deque<int32_t> queue(reach.begin(), reach.end());
    while (!queue.empty()) {
      int32_t c = queue.front();
      queue.pop_front();
      const auto& step = m.step(graph.contexts[static_cast<std::size_t>(c)]);
      for (std::size_t a = 0; a < step.weight.size(); ++a) {
        const int32_t nx = graph.next[static_cast<std::size_t>(c)][a];
        if (nx >= 0 && step.weight[a] > 0.0 && reach.insert(nx).second) queue.push_back(nx);
      }
    }
    double xi = 0.0, eos_max = 0.0;
    const int32_t eos = base.alphabet.eos_index;
    for (int32_t c : reach) {
      const auto& step = m.step(graph.contexts[static_cast<std::size_t>(c)]);
      double interior = step.total - step.weight[static_cast<std::size_t>(eos)];
      xi = std::max(xi, interior);
      eos_max = std::max(eos_max, step.weight[static_cast<std::size_t>(eos)]);
    }
    if (xi >= 1.0)
      throw CertificationError(
          "global normalizer tail not certified: adapted continuation weight >= 1 "
          "(possibly non-tight adapted model)");
    tail = tm.frontier_total * eos_max / (1.0 - xi);
  }

  // Route (b): exact transfer solve on the transformed step weights.
  GlobalNormalizer out;
  out.spectral_bound = certify_contraction(graph, w);
  out.log_z_transfer = std::log(transfer_total(graph, w)[0]);
  out.enumerated_mass = tm.z;
  out.tail_bound = tail;
  out.log_z = out.log_z_transfer;

  const double z = std::exp(out.log_z_transfer);
  if (z < tm.z - 1e-8 * std::max(1.0, z) || z > tm.z + tail + 1e-8 * std::max(1.0, z))
    throw CertificationError("global normalizer routes disagree beyond tolerance");
  return out;
}

LocalSample sample_local(const AdaptedModel& m, Rng& rng, int max_len) {
  LocalSample out;
  String prefix;
  const int32_t eos = m.base.alphabet.eos_index;
  for (int t = 0; t <= max_len; ++t) {
    const auto& st = m.step_for_prefix(prefix);
    auto cdf = cdf_from_probs(st.weight);
    auto pick = static_cast<int32_t>(sample_cdf(cdf, rng.uniform()));
    out.local_logprob += st.logweight[static_cast<std::size_t>(pick)] - st.logtotal;
    out.global_logweight += st.logweight[static_cast<std::size_t>(pick)];
    if (pick == eos) {
      out.string = std::move(prefix);
      return out;
    }
    prefix.push_back(pick);
  }
  out.string = std::move(prefix);
  out.capped = true;
  return out;
}

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

double parse_number(const std::string& token, const std::string& value) {
  try {
    std::size_t pos = 0;
    double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw InputError("bad adaptor parameter value in '" + token + "'");
  }
}

}  // namespace

TransformFunction parse_adaptor_spec(std::string_view spec) {
  const std::string text = lower(spec);
  std::string name = text;
  std::string params;
  if (auto colon = text.find(':'); colon != std::string::npos) {
    name = text.substr(0, colon);
    params = text.substr(colon + 1);
  }

  std::map<std::string, double> kv;
  if (!params.empty()) {
    std::istringstream in(params);
    std::string item;
    while (std::getline(in, item, ',')) {
      auto eq = item.find('=');
      if (eq == std::string::npos)
        throw InputError("bad adaptor parameter '" + item + "' in spec '" + std::string(spec) + "'");
      kv[item.substr(0, eq)] = parse_number(item, item.substr(eq + 1));
    }
  }

  auto take = [&](const std::string& key) -> std::optional<double> {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    double v = it->second;
    kv.erase(it);
    return v;
  };

  TransformFunction tf;
  if (name == "ancestral") {
    // no parameters
  } else if (name == "temperature" || name == "temp") {
    auto tau = take("tau");
    if (!tau) throw InputError("temperature adaptor requires tau=");
    tf.scaling = ScalingRule::temperature(*tau);
  } else if (name == "topk" || name == "top_k" || name == "top-k") {
    auto k = take("k");
    if (!k) throw InputError("topk adaptor requires k=");
    if (*k != std::floor(*k)) throw InputError("topk k must be an integer");
    tf.truncation = TruncationRule::top_k(static_cast<int>(*k));
  } else if (name == "nucleus" || name == "top_p" || name == "top-p") {
    auto pi = take("pi");
    if (!pi) throw InputError("nucleus adaptor requires pi=");
    tf.truncation = TruncationRule::nucleus(*pi);
  } else if (name == "eta") {
    auto eps = take("eps");
    if (!eps) throw InputError("eta adaptor requires eps=");
    tf.truncation = TruncationRule::eta(*eps);
  } else if (name == "typical") {
    auto pi = take("pi");
    if (!pi) throw InputError("typical adaptor requires pi=");
    tf.truncation = TruncationRule::locally_typical(*pi);
  } else {
    throw InputError("unknown adaptor '" + name + "' in spec '" + std::string(spec) + "'");
  }

  if (auto temp = take("temp")) {
    if (name == "temperature" || name == "ancestral")
      throw InputError("temp= is not valid on '" + name + "'");
    tf.scaling = ScalingRule::temperature(*temp);
  }
  if (!kv.empty())
    throw InputError("unknown adaptor parameter '" + kv.begin()->first + "' in spec '" +
                     std::string(spec) + "'");
  return tf;
}

std::string format_adaptor_spec(const TransformFunction& tf) {
  std::ostringstream out;
  auto num = [](double v) {
    std::ostringstream o;
    o << v;
    return o.str();
  };
  switch (tf.truncation.kind) {
    case TruncationRule::Kind::none:
      if (tf.scaling.kind == ScalingRule::Kind::identity) return "ancestral";
      return "temperature:tau=" + num(tf.scaling.tau);
    case TruncationRule::Kind::top_k:
      out << "topk:k=" << tf.truncation.k;
      break;
    case TruncationRule::Kind::nucleus:
      out << "nucleus:pi=" << num(tf.truncation.pi);
      break;
    case TruncationRule::Kind::eta:
      out << "eta:eps=" << num(tf.truncation.eps);
      break;
    case TruncationRule::Kind::locally_typical:
      out << "typical:pi=" << num(tf.truncation.pi);
      break;
  }
  if (tf.scaling.kind == ScalingRule::Kind::temperature) out << ",temp=" << num(tf.scaling.tau);
  return out.str();
}

}  // namespace exactlm
