#pragma once

// Exactly evaluable language models over finite alphabets.
//
// Two model families:
//  - TabularLM: a finite categorical over an explicit item set, items standing
//    in for whole strings.
//  - AutoregressiveLM: a finite-order conditional table over an alphabet with
//    a designated EOS symbol; string probabilities are exact products of table
//    entries including the terminating EOS factor.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "exactlm/errors.hpp"

namespace exactlm {

using SymbolId = int32_t;
using String = std::vector<SymbolId>;

namespace detail {
inline uint64_t fnv1a64(const void* data, std::size_t n, uint64_t h = 0xcbf29ce484222325ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}
}  // namespace detail

struct StringHash {
  std::size_t operator()(const String& s) const noexcept {
    return static_cast<std::size_t>(
        detail::fnv1a64(s.data(), s.size() * sizeof(SymbolId)));
  }
};

struct Alphabet {
  std::vector<std::string> symbols;  // includes the EOS symbol
  int32_t eos_index = -1;

  static Alphabet create(std::vector<std::string> symbols, int32_t eos_index);

  int32_t size() const { return static_cast<int32_t>(symbols.size()); }
  int32_t interior_size() const { return size() - 1; }

  std::optional<SymbolId> find(std::string_view name) const;

  // Parses text into interior symbols. If every interior symbol is a single
  // character the text is read character by character, otherwise it is split
  // on whitespace. EOS is rejected in string interiors.
  String parse_string(std::string_view text) const;
  std::string format_string(const String& s) const;
};

struct TabularLM {
  std::vector<std::string> items;
  std::vector<double> logprobs;  // nats; logsumexp == 0 within 1e-10

  static TabularLM from_probs(std::vector<std::string> items, std::vector<double> probs);
  static TabularLM from_logprobs(std::vector<std::string> items, std::vector<double> logprobs);
  // Normalizes arbitrary finite log-weights via logsumexp.
  static TabularLM from_unnormalized(std::vector<std::string> items, std::vector<double> logweights);

  std::size_t size() const { return items.size(); }
  double logprob(std::size_t index) const { return logprobs[index]; }
  std::optional<std::size_t> find(std::string_view item) const;
};

struct AutoregressiveLM {
  Alphabet alphabet;
  int order = 0;
  // Context (last <= order interior symbols) -> distribution over the
  // alphabet, in alphabet order. The empty context is the string start.
  std::unordered_map<String, std::vector<double>, StringHash> table;

  // Derived at creation.
  double eos_floor = 0.0;            // min p(EOS | ctx) over reachable contexts
  double eos_floor_recurring = 0.0;  // same, excluding the start context
  double min_positive_prob = 1.0;    // min positive entry over reachable rows

  // Validates row normalization (1e-10) and that every reachable context has
  // a row; computes the floors above over the reachable closure.
  static AutoregressiveLM create(
      Alphabet alphabet, int order,
      std::unordered_map<String, std::vector<double>, StringHash> table);

  String context_of(const String& prefix) const;
  const std::vector<double>& row(const String& context) const;
  const std::vector<double>& conditional(const String& prefix) const {
    return row(context_of(prefix));
  }
  bool eos_bounded() const { return eos_floor > 0.0; }
};

struct Corpus {
  std::vector<String> strings;
  std::size_t size() const { return strings.size(); }
};

struct ItemCorpus {
  std::vector<int32_t> items;  // indices into a TabularLM support
  std::size_t size() const { return items.size(); }
};

struct SupportEnumeration {
  struct Entry {
    String string;
    double logprob;  // nats
  };
  std::vector<Entry> entries;  // lexicographic by symbol index
  int max_len = 0;
  // Exact probability mass of prefixes longer than max_len. Enumerated string
  // mass + continuation_mass == 1 for any row-normalized model.
  double continuation_mass = 0.0;
  // Certified geometric bound (1-c0)*(1-c+)^max_len on the un-enumerated
  // string mass; present iff the recurring EOS floor is positive.
  std::optional<double> tail_bound;
};

// log p(y) = log[ p(EOS|y) * prod_t p(y_t | y_<t) ]; -inf when a factor is 0.
// Symbols outside the alphabet (or EOS in the interior) are input errors at
// parse time; here `y` is already symbol ids.
double string_logprob(const AutoregressiveLM& lm, const String& y);

// All strings of length <= max_len with nonzero probability, in lexicographic
// order, plus the exact continuation mass and (when certifiable) a geometric
// tail bound. With require_certified_tail, a zero recurring EOS floor is a
// CertificationError.
SupportEnumeration enumerate_support(const AutoregressiveLM& lm, int max_len,
                                     bool require_certified_tail = false);

class Rng;

struct DrawnString {
  String string;
  double logprob = 0.0;  // exact log-probability of the draw under the model
  bool capped = false;
};

// Ancestral draw from the base model; stops at EOS or at max_len (capped).
DrawnString sample_string(const AutoregressiveLM& lm, Rng& rng, int max_len = 512);

}  // namespace exactlm
