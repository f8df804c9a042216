#include <doctest.h>

#include <cmath>

#include "exactlm/entropy.hpp"
#include "exactlm/transfer.hpp"
#include "fixtures.hpp"

using namespace exactlm;
using namespace exactlm::testing;

TEST_SUITE("entropy") {

TEST_CASE("uniform tabular: H = log K, varentropy 0") {
  auto lm = tabular_uniform(4);
  CHECK(entropy(lm) == doctest::Approx(std::log(4.0)).epsilon(1e-12));
  CHECK(varentropy(lm) == doctest::Approx(0.0));
  for (double g : {0.1, 0.5, 0.99, 1.0})
    CHECK(renyi_entropy(lm, g) == doctest::Approx(std::log(4.0)).epsilon(1e-10));
}

TEST_CASE("three-item tabular against direct-summation oracles") {
  auto lm = tabular_532();
  // Oracles computed termwise, independent of the implementation path.
  const double h_oracle =
      -(0.5 * std::log(0.5) + 0.3 * std::log(0.3) + 0.2 * std::log(0.2));
  const double m2_oracle = 0.5 * std::log(0.5) * std::log(0.5) +
                           0.3 * std::log(0.3) * std::log(0.3) +
                           0.2 * std::log(0.2) * std::log(0.2);
  CHECK(entropy(lm) == doctest::Approx(h_oracle).epsilon(1e-12));
  CHECK(varentropy(lm) == doctest::Approx(m2_oracle - h_oracle * h_oracle).epsilon(1e-12));
  // Renyi at 1/2: 2 log(sqrt(.5) + sqrt(.3) + sqrt(.2)).
  const double r_half = 2.0 * std::log(std::sqrt(0.5) + std::sqrt(0.3) + std::sqrt(0.2));
  CHECK(renyi_entropy(lm, 0.5) == doctest::Approx(r_half).epsilon(1e-12));
  CHECK(renyi_entropy(lm, 1.0) == doctest::Approx(h_oracle).epsilon(1e-12));
  CHECK_THROWS_AS(renyi_entropy(lm, 0.0), InputError);
  CHECK_THROWS_AS(renyi_entropy(lm, 1.5), InputError);
}

TEST_CASE("geometric model has entropy 2 ln 2") {
  auto lm = geometric_half();
  CHECK(entropy(lm) == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-10));
}

TEST_CASE("transfer route agrees with enumeration intervals") {
  for (const auto& lm : {geometric_half(), eos_bounded_pair(), alternator()}) {
    const double h = entropy(lm);
    const double v = varentropy(lm);
    auto hi = entropy_interval(lm, 90);
    auto vi = varentropy_interval(lm, 90);
    CHECK(hi.contains(h));
    CHECK(vi.contains(v));
    CHECK(hi.width() < 1e-6);
  }
}

TEST_CASE("interval mode converges as max_len grows") {
  auto lm = eos_bounded_pair();
  double prev = 1e100;
  for (int len : {6, 10, 16, 24, 36, 60}) {
    auto hi = entropy_interval(lm, len);
    CHECK(hi.width() < prev + 1e-15);
    prev = hi.width();
  }
  CHECK(prev < 1e-4);
}

TEST_CASE("interval mode refuses models without a certified tail") {
  Alphabet alphabet = Alphabet::create({"a", "<eos>"}, 1);
  std::unordered_map<String, std::vector<double>, StringHash> table;
  table[{}] = {1.0, 0.0};
  table[{0}] = {1.0, 0.0};
  auto lm = AutoregressiveLM::create(alphabet, 1, std::move(table));
  CHECK_THROWS_AS(entropy_interval(lm, 10), CertificationError);
}

TEST_CASE("Renyi monotonicity and non-negative gap across suite models") {
  auto grid = renyi_gamma_grid();
  SUBCASE("tabular") {
    for (const auto& lm : {tabular_532(), tabular_uniform(6),
                           TabularLM::from_probs({"a", "b"}, {0.9, 0.1})}) {
      double prev = std::numeric_limits<double>::infinity();
      for (double g : grid) {
        const double h = renyi_entropy(lm, g);
        CHECK(h <= prev + 1e-9);
        prev = h;
        CHECK(renyi_gap(lm, g) >= -1e-9);
      }
    }
  }
  SUBCASE("autoregressive") {
    for (const auto& lm : {geometric_half(), alternator()}) {
      double prev = std::numeric_limits<double>::infinity();
      for (double g : grid) {
        const double h = renyi_entropy(lm, g);
        CHECK(std::isfinite(h));  // finite across the grid for these models
        CHECK(h <= prev + 1e-9);
        prev = h;
        CHECK(renyi_gap(lm, g) >= -1e-9);
      }
    }
  }
  SUBCASE("strict decrease for non-uniform support > 1") {
    auto lm = tabular_532();
    for (std::size_t i = 1; i < grid.size(); ++i)
      CHECK(renyi_entropy(lm, grid[i - 1]) > renyi_entropy(lm, grid[i]) + 1e-12);
  }
}

TEST_CASE("divergent power sums are refused, not fabricated") {
  // Two full-support interior symbols: sum_y p(y)^gamma diverges for small
  // gamma because the level cardinality 2^n beats the per-string decay; the
  // contraction certificate must catch it.
  auto lm = eos_bounded_pair();
  CHECK_THROWS_AS(renyi_entropy(lm, 0.3), CertificationError);
  CHECK(std::isfinite(renyi_entropy(lm, 0.9)));
}

TEST_CASE("Renyi transfer solve matches deep truncated power sums") {
  auto lm = alternator();
  auto g = ContextGraph::build(lm);
  for (double gamma : {0.3, 0.7, 0.95}) {
    auto w = power_steps(g, lm, gamma);
    StepMatrix zero(g.size());
    for (std::size_t c = 0; c < g.size(); ++c) zero[c].assign(w[c].size(), 0.0);
    auto tm = truncated_moments(g, w, zero, 400);
    const double h_enum = std::log(tm.z) / (1.0 - gamma);
    CHECK(renyi_entropy(lm, gamma) == doctest::Approx(h_enum).epsilon(1e-8));
  }
}

TEST_CASE("infinite-entropy model: closed-form masses") {
  auto lm = infinite_entropy_lm();
  // p_1 = 1/lg 2 - 1/lg 3.
  CHECK(lm.mass(1) == doctest::Approx(1.0 - 1.0 / std::log2(3.0)).epsilon(1e-14));
  for (long n : {1L, 10L, 1000L}) {
    // Telescoping against a direct partial sum.
    double direct = 0.0;
    for (long t = 1; t <= n; ++t) direct += lm.mass(t);
    CHECK(lm.partial_mass(n) == doctest::Approx(1.0 - 1.0 / std::log2(n + 2.0)).epsilon(1e-12));
    CHECK(direct == doctest::Approx(lm.partial_mass(n)).epsilon(1e-9));
  }
  CHECK(lm.partial_mass(1000000) < 1.0);
}

TEST_CASE("infinite-entropy model: partial entropies grow past the minorant") {
  auto lm = infinite_entropy_lm();
  double prev = 0.0;
  for (long n : {1000L, 10000L, 100000L, 1000000L}) {
    const double h = lm.partial_entropy_bits(n);
    CHECK(h > prev);
    CHECK(h > lm.entropy_lower_bound_bits(n));
    prev = h;
  }
}

}  // TEST_SUITE
