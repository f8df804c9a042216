#pragma once

// Shared test worlds.

#include <cmath>
#include <vector>

#include "exactlm/lm.hpp"

namespace exactlm::testing {

// Order-1 model over {a, b, c, EOS} whose top-2 local/global probabilities
// reverse the ordering of "aaa" vs "bbb". The published rows only cover the
// start, a and b contexts; context c (reachable with probability 0.1 per
// step) gets a harmless EOS-heavy row so the model is fully specified. None
// of the reversal quantities touch it.
inline AutoregressiveLM reversal_world() {
  Alphabet alphabet = Alphabet::create({"a", "b", "c", "<eos>"}, 3);
  std::unordered_map<String, std::vector<double>, StringHash> table;
  table[{}] = {0.5, 0.5, 0.0, 0.0};
  table[{0}] = {0.4, 0.1, 0.1, 0.4};
  table[{1}] = {0.1, 0.4, 0.2, 0.3};
  table[{2}] = {0.3, 0.2, 0.1, 0.4};
  return AutoregressiveLM::create(alphabet, 1, std::move(table));
}

// Memoryless single-symbol model, p(EOS) = 0.5: geometric lengths.
inline AutoregressiveLM geometric_half() {
  Alphabet alphabet = Alphabet::create({"a", "<eos>"}, 1);
  std::unordered_map<String, std::vector<double>, StringHash> table;
  table[{}] = {0.5, 0.5};
  return AutoregressiveLM::create(alphabet, 0, std::move(table));
}

// Point-mass on "a": p(EOS | start) = 0, forced 'a', then EOS.
inline AutoregressiveLM point_mass_a() {
  Alphabet alphabet = Alphabet::create({"a", "<eos>"}, 1);
  std::unordered_map<String, std::vector<double>, StringHash> table;
  table[{}] = {1.0, 0.0};
  table[{0}] = {0.0, 1.0};
  return AutoregressiveLM::create(alphabet, 1, std::move(table));
}

// EOS-bounded order-1 world over {a, b, EOS} with a positive EOS floor at
// every context including the start.
inline AutoregressiveLM eos_bounded_pair() {
  Alphabet alphabet = Alphabet::create({"a", "b", "<eos>"}, 2);
  std::unordered_map<String, std::vector<double>, StringHash> table;
  table[{}] = {0.45, 0.35, 0.2};
  table[{0}] = {0.5, 0.2, 0.3};
  table[{1}] = {0.15, 0.45, 0.4};
  return AutoregressiveLM::create(alphabet, 1, std::move(table));
}

// EOS-bounded order-1 world where each interior context continues through a
// single symbol (a and b alternate). The branching factor after the start is
// 1, so the power sums behind every Renyi order in (0, 1] stay summable.
inline AutoregressiveLM alternator() {
  Alphabet alphabet = Alphabet::create({"a", "b", "<eos>"}, 2);
  std::unordered_map<String, std::vector<double>, StringHash> table;
  table[{}] = {0.4, 0.35, 0.25};
  table[{0}] = {0.0, 0.6, 0.4};
  table[{1}] = {0.55, 0.0, 0.45};
  return AutoregressiveLM::create(alphabet, 1, std::move(table));
}

inline TabularLM tabular_532() {
  return TabularLM::from_probs({"x", "y", "z"}, {0.5, 0.3, 0.2});
}

inline TabularLM tabular_uniform(int k) {
  std::vector<std::string> items;
  std::vector<double> probs;
  for (int i = 0; i < k; ++i) {
    items.push_back("u" + std::to_string(i));
    probs.push_back(1.0 / k);
  }
  return TabularLM::from_probs(std::move(items), std::move(probs));
}

inline String str(std::initializer_list<SymbolId> ids) { return String(ids); }

}  // namespace exactlm::testing
