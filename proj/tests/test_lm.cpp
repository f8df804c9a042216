#include <doctest.h>

#include <cmath>

#include "exactlm/lm.hpp"
#include "fixtures.hpp"

using namespace exactlm;
using namespace exactlm::testing;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST_SUITE("lm") {

TEST_CASE("alphabet validates and parses") {
  CHECK_THROWS_AS(Alphabet::create({}, 0), InputError);
  CHECK_THROWS_AS(Alphabet::create({"a", "a"}, 0), InputError);
  CHECK_THROWS_AS(Alphabet::create({"a"}, 5), InputError);
  auto al = Alphabet::create({"a", "b", "<eos>"}, 2);
  CHECK(al.parse_string("ab") == str({0, 1}));
  CHECK(al.format_string(str({1, 0})) == "ba");
  CHECK_THROWS_AS(al.parse_string("ax"), InputError);
}

TEST_CASE("tabular normalization invariant") {
  CHECK_THROWS_AS(TabularLM::from_probs({"x", "y"}, {0.5, 0.6}), InputError);
  CHECK_THROWS_AS(TabularLM::from_probs({"x", "x"}, {0.5, 0.5}), InputError);
  auto lm = TabularLM::from_unnormalized({"x", "y"}, {1.0, 3.0});
  double total = std::exp(lm.logprobs[0]) + std::exp(lm.logprobs[1]);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("published order-1 string probabilities") {
  auto lm = reversal_world();
  // p(aaa) = 0.5 * 0.4 * 0.4 * 0.4, p(bbb) = 0.5 * 0.4 * 0.4 * 0.3.
  CHECK(string_logprob(lm, str({0, 0, 0})) == doctest::Approx(std::log(0.032)).epsilon(1e-12));
  CHECK(string_logprob(lm, str({1, 1, 1})) == doctest::Approx(std::log(0.024)).epsilon(1e-12));
  // p(a) from the start row has no EOS mass at t=1... the empty string:
  CHECK(string_logprob(lm, {}) == -kInf);
  CHECK_THROWS_AS(string_logprob(lm, str({3})), InputError);  // EOS interior
}

TEST_CASE("point-mass model gives its single string probability 1") {
  auto lm = point_mass_a();
  CHECK(string_logprob(lm, str({0})) == doctest::Approx(0.0));
  CHECK(string_logprob(lm, {}) == -kInf);
}

TEST_CASE("missing reachable context is rejected") {
  Alphabet alphabet = Alphabet::create({"a", "b", "<eos>"}, 2);
  std::unordered_map<String, std::vector<double>, StringHash> table;
  table[{}] = {0.5, 0.3, 0.2};
  table[{0}] = {0.1, 0.2, 0.7};
  // context b reachable (p=0.3) but has no row
  CHECK_THROWS_AS(AutoregressiveLM::create(alphabet, 1, std::move(table)), InputError);
}

TEST_CASE("enumeration matches hand counts on the order-1 world") {
  auto lm = reversal_world();
  auto e = enumerate_support(lm, 1);
  // Length-0 has zero mass (no EOS at the start row); length-1: "a", "b".
  REQUIRE(e.entries.size() == 2);
  CHECK(lm.alphabet.format_string(e.entries[0].string) == "a");
  CHECK(std::exp(e.entries[0].logprob) == doctest::Approx(0.5 * 0.4).epsilon(1e-12));
  CHECK(lm.alphabet.format_string(e.entries[1].string) == "b");
  CHECK(std::exp(e.entries[1].logprob) == doctest::Approx(0.5 * 0.3).epsilon(1e-12));
  CHECK(e.continuation_mass == doctest::Approx(1.0 - 0.35).epsilon(1e-12));
  REQUIRE(e.tail_bound.has_value());
  CHECK(*e.tail_bound >= e.continuation_mass);
}

TEST_CASE("enumeration of an immediate-EOS model is the empty string") {
  Alphabet alphabet = Alphabet::create({"a", "<eos>"}, 1);
  std::unordered_map<String, std::vector<double>, StringHash> table;
  table[{}] = {0.0, 1.0};
  auto lm = AutoregressiveLM::create(alphabet, 0, std::move(table));
  auto e = enumerate_support(lm, 5);
  REQUIRE(e.entries.size() == 1);
  CHECK(e.entries[0].string.empty());
  CHECK(std::exp(e.entries[0].logprob) == doctest::Approx(1.0));
  CHECK(*e.tail_bound == doctest::Approx(0.0));
}

TEST_CASE("geometric enumeration masses and tail") {
  auto lm = geometric_half();
  auto e = enumerate_support(lm, 2);
  REQUIRE(e.entries.size() == 3);
  CHECK(std::exp(e.entries[0].logprob) == doctest::Approx(0.5));    // ""
  CHECK(std::exp(e.entries[1].logprob) == doctest::Approx(0.25));   // "a"
  CHECK(std::exp(e.entries[2].logprob) == doctest::Approx(0.125));  // "aa"
  CHECK(*e.tail_bound == doctest::Approx(0.125).epsilon(1e-12));
  CHECK(e.continuation_mass == doctest::Approx(0.125).epsilon(1e-12));
}

TEST_CASE("mass accounting and logprob agreement across suite models") {
  for (const auto& lm : {reversal_world(), geometric_half(), point_mass_a(), eos_bounded_pair()}) {
    auto e = enumerate_support(lm, 12);
    double mass = 0.0;
    for (const auto& entry : e.entries) {
      mass += std::exp(entry.logprob);
      CHECK(string_logprob(lm, entry.string) ==
            doctest::Approx(entry.logprob).epsilon(1e-12));
    }
    CHECK(mass + e.continuation_mass == doctest::Approx(1.0).epsilon(1e-9));
    if (e.tail_bound) CHECK(*e.tail_bound >= e.continuation_mass - 1e-12);
    // Lexicographic ordering.
    for (std::size_t i = 1; i < e.entries.size(); ++i)
      CHECK(e.entries[i - 1].string < e.entries[i].string);
  }
}

TEST_CASE("certified tail is refused without a recurring EOS floor") {
  // Interior cycle a->a with no EOS anywhere after the start.
  Alphabet alphabet = Alphabet::create({"a", "<eos>"}, 1);
  std::unordered_map<String, std::vector<double>, StringHash> table;
  table[{}] = {1.0, 0.0};
  table[{0}] = {1.0, 0.0};
  auto lm = AutoregressiveLM::create(alphabet, 1, std::move(table));
  CHECK_THROWS_AS(enumerate_support(lm, 4, /*require_certified_tail=*/true),
                  CertificationError);
  CHECK_NOTHROW(enumerate_support(lm, 4));
}

TEST_CASE("sampling is deterministic and respects the model") {
  auto lm = reversal_world();
  Rng r1(99), r2(99);
  for (int i = 0; i < 50; ++i) {
    auto s1 = sample_string(lm, r1);
    auto s2 = sample_string(lm, r2);
    CHECK(s1.string == s2.string);
    CHECK(s1.logprob == doctest::Approx(string_logprob(lm, s1.string)).epsilon(1e-12));
  }
}

}  // TEST_SUITE
