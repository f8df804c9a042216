#include "exactlm/lm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <deque>
#include <limits>
#include <set>
#include <sstream>

#include "exactlm/rng.hpp"

namespace exactlm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double logsumexp(std::span<const double> xs) {
  double m = kNegInf;
  for (double x : xs) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : xs) {
    if (x != kNegInf) s += std::exp(x - m);
  }
  return m + std::log(s);
}

}  // namespace

Alphabet Alphabet::create(std::vector<std::string> symbols, int32_t eos_index) {
  if (symbols.empty()) throw InputError("alphabet must be non-empty");
  if (eos_index < 0 || eos_index >= static_cast<int32_t>(symbols.size()))
    throw InputError("eos_index out of range");
  std::set<std::string> seen;
  for (const auto& s : symbols) {
    if (s.empty()) throw InputError("empty symbol identifier");
    if (!seen.insert(s).second) throw InputError("duplicate symbol identifier: " + s);
  }
  Alphabet a;
  a.symbols = std::move(symbols);
  a.eos_index = eos_index;
  return a;
}

std::optional<SymbolId> Alphabet::find(std::string_view name) const {
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    if (symbols[i] == name) return static_cast<SymbolId>(i);
  }
  return std::nullopt;
}

String Alphabet::parse_string(std::string_view text) const {
  bool single_char = true;
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    if (static_cast<int32_t>(i) != eos_index && symbols[i].size() != 1) single_char = false;
  }
  String out;
  auto push = [&](std::string_view tok) {
    auto id = find(tok);
    if (!id) throw InputError("unknown symbol: '" + std::string(tok) + "'");
    if (*id == eos_index) throw InputError("EOS may not appear inside a string");
    out.push_back(*id);
  };
  if (single_char) {
    for (char c : text) {
      if (std::isspace(static_cast<unsigned char>(c))) continue;
      push(std::string_view(&c, 1));
    }
  } else {
    std::istringstream in{std::string(text)};
    std::string tok;
    while (in >> tok) push(tok);
  }
  return out;
}

std::string Alphabet::format_string(const String& s) const {
  bool single_char = true;
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    if (static_cast<int32_t>(i) != eos_index && symbols[i].size() != 1) single_char = false;
  }
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!single_char && i > 0) out += ' ';
    out += symbols[static_cast<std::size_t>(s[i])];
  }
  return out;
}

TabularLM TabularLM::from_probs(std::vector<std::string> items, std::vector<double> probs) {
  std::vector<double> lps(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] < 0.0 || !std::isfinite(probs[i]))
      throw InputError("tabular probability must be finite and non-negative");
    lps[i] = probs[i] > 0.0 ? std::log(probs[i]) : kNegInf;
  }
  return from_logprobs(std::move(items), std::move(lps));
}

TabularLM TabularLM::from_logprobs(std::vector<std::string> items, std::vector<double> logprobs) {
  if (items.empty()) throw InputError("tabular model must have at least one item");
  if (items.size() != logprobs.size()) throw InputError("items/logprobs size mismatch");
  std::set<std::string> seen;
  for (const auto& it : items) {
    if (!seen.insert(it).second) throw InputError("duplicate item id: " + it);
  }
  for (double lp : logprobs) {
    if (std::isnan(lp) || lp == std::numeric_limits<double>::infinity())
      throw InputError("log-probabilities must be finite or -inf");
  }
  double z = logsumexp(logprobs);
  if (std::abs(z) > 1e-10)
    throw InputError("tabular probabilities do not sum to 1 (logsumexp = " + std::to_string(z) + ")");
  TabularLM lm;
  lm.items = std::move(items);
  lm.logprobs = std::move(logprobs);
  return lm;
}

TabularLM TabularLM::from_unnormalized(std::vector<std::string> items, std::vector<double> logweights) {
  double z = logsumexp(logweights);
  if (!std::isfinite(z)) throw InputError("cannot normalize: all weights are zero");
  for (double& lw : logweights) lw -= z;
  return from_logprobs(std::move(items), std::move(logweights));
}

std::optional<std::size_t> TabularLM::find(std::string_view item) const {
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i] == item) return i;
  }
  return std::nullopt;
}

AutoregressiveLM AutoregressiveLM::create(
    Alphabet alphabet, int order,
    std::unordered_map<String, std::vector<double>, StringHash> table) {
  if (order < 0) throw InputError("order must be >= 0");
  AutoregressiveLM lm;
  lm.alphabet = std::move(alphabet);
  lm.order = order;
  lm.table = std::move(table);

  const auto n = static_cast<std::size_t>(lm.alphabet.size());
  for (const auto& [ctx, dist] : lm.table) {
    if (static_cast<int>(ctx.size()) > order)
      throw InputError("table context longer than model order");
    if (dist.size() != n) throw InputError("conditional row has wrong arity");
    double sum = 0.0;
    for (double p : dist) {
      if (!(p >= 0.0) || !std::isfinite(p))
        throw InputError("conditional probabilities must be finite and non-negative");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-10)
      throw InputError("conditional row does not sum to 1");
  }

  // Reachable closure from the start context; every positive transition must
  // land on a context that has a row.
  const int32_t eos = lm.alphabet.eos_index;
  std::set<String> reached;
  std::deque<String> queue;
  String start;
  if (!lm.table.count(start)) throw InputError("missing start-context row");
  reached.insert(start);
  queue.push_back(start);
  while (!queue.empty()) {
    String ctx = queue.front();
    queue.pop_front();
    const auto& dist = lm.table.at(ctx);
    for (int32_t a = 0; a < lm.alphabet.size(); ++a) {
      if (a == eos || dist[static_cast<std::size_t>(a)] <= 0.0) continue;
      String next = ctx;
      next.push_back(a);
      if (static_cast<int>(next.size()) > order)
        next.erase(next.begin(), next.end() - order);
      if (!lm.table.count(next))
        throw InputError("reachable context has no table row: '" +
                         lm.alphabet.format_string(next) + "'");
      if (reached.insert(next).second) queue.push_back(next);
    }
  }

  lm.eos_floor = 1.0;
  lm.eos_floor_recurring = 1.0;
  lm.min_positive_prob = 1.0;
  for (const auto& ctx : reached) {
    const auto& dist = lm.table.at(ctx);
    double pe = dist[static_cast<std::size_t>(eos)];
    lm.eos_floor = std::min(lm.eos_floor, pe);
    if (!ctx.empty() || order == 0) lm.eos_floor_recurring = std::min(lm.eos_floor_recurring, pe);
    for (double p : dist) {
      if (p > 0.0) lm.min_positive_prob = std::min(lm.min_positive_prob, p);
    }
  }
  return lm;
}

String AutoregressiveLM::context_of(const String& prefix) const {
  const auto keep = std::min<std::size_t>(prefix.size(), static_cast<std::size_t>(order));
  return String(prefix.end() - static_cast<std::ptrdiff_t>(keep), prefix.end());
}

const std::vector<double>& AutoregressiveLM::row(const String& context) const {
  auto it = table.find(context);
  if (it == table.end())
    throw InputError("no conditional row for context '" + alphabet.format_string(context) + "'");
  return it->second;
}

double string_logprob(const AutoregressiveLM& lm, const String& y) {
  const int32_t eos = lm.alphabet.eos_index;
  double lp = 0.0;
  String prefix;
  prefix.reserve(y.size());
  for (SymbolId s : y) {
    if (s < 0 || s >= lm.alphabet.size() || s == eos)
      throw InputError("string contains an out-of-alphabet symbol");
    double p = lm.conditional(prefix)[static_cast<std::size_t>(s)];
    if (p <= 0.0) return kNegInf;
    lp += std::log(p);
    prefix.push_back(s);
  }
  double pe = lm.conditional(prefix)[static_cast<std::size_t>(eos)];
  if (pe <= 0.0) return kNegInf;
  return lp + std::log(pe);
}

namespace {

void enumerate_rec(const AutoregressiveLM& lm, const String& prefix, double logw,
                   int max_len, SupportEnumeration& out) {
  const auto& dist = lm.conditional(prefix);
  const int32_t eos = lm.alphabet.eos_index;
  double pe = dist[static_cast<std::size_t>(eos)];
  if (pe > 0.0) out.entries.push_back({prefix, logw + std::log(pe)});
  for (int32_t a = 0; a < lm.alphabet.size(); ++a) {
    if (a == eos) continue;
    double p = dist[static_cast<std::size_t>(a)];
    if (p <= 0.0) continue;
    if (static_cast<int>(prefix.size()) == max_len) {
      out.continuation_mass += std::exp(logw) * p;
      continue;
    }
    String next = prefix;
    next.push_back(a);
    enumerate_rec(lm, next, logw + std::log(p), max_len, out);
  }
}

}  // namespace

SupportEnumeration enumerate_support(const AutoregressiveLM& lm, int max_len,
                                     bool require_certified_tail) {
  if (max_len < 0) throw InputError("max_len must be >= 0");
  if (require_certified_tail && lm.eos_floor_recurring <= 0.0)
    throw CertificationError(
        "no certified tail: model is not EOS-bounded beyond the start context");
  SupportEnumeration out;
  out.max_len = max_len;
  enumerate_rec(lm, {}, 0.0, max_len, out);
  // Depth-first traversal in ascending symbol order, entry before children,
  // yields lexicographic order directly.
  if (lm.eos_floor_recurring > 0.0) {
    double c0 = lm.eos_floor;
    out.tail_bound = (1.0 - c0) * std::pow(1.0 - lm.eos_floor_recurring, max_len);
  }
  return out;
}

DrawnString sample_string(const AutoregressiveLM& lm, Rng& rng, int max_len) {
  DrawnString out;
  const int32_t eos = lm.alphabet.eos_index;
  String prefix;
  for (int t = 0; t <= max_len; ++t) {
    const auto& dist = lm.conditional(prefix);
    auto cdf = cdf_from_probs(dist);
    auto pick = static_cast<int32_t>(sample_cdf(cdf, rng.uniform()));
    out.logprob += std::log(dist[static_cast<std::size_t>(pick)]);
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

}  // namespace exactlm
