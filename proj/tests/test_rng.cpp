#include <doctest.h>

#include "exactlm/rng.hpp"

using namespace exactlm;

TEST_SUITE("rng") {

TEST_CASE("streams are deterministic and seed-separated") {
  Rng a(42), b(42), c(43);
  for (int i = 0; i < 100; ++i) {
    const double u = a.uniform();
    CHECK(u == b.uniform());
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  bool any_diff = false;
  for (int i = 0; i < 16; ++i) any_diff |= (a.next_u64() != c.next_u64());
  CHECK(any_diff);
}

TEST_CASE("derive_seed separates paths") {
  const uint64_t root = 7;
  CHECK(derive_seed(root, {0}) != derive_seed(root, {1}));
  CHECK(derive_seed(root, {0, 1}) != derive_seed(root, {1, 0}));
  CHECK(derive_seed(root, {5}) == derive_seed(root, {5}));
}

TEST_CASE("bounded draws are in range") {
  Rng r(1);
  for (int i = 0; i < 1000; ++i) CHECK(r.below(7) < 7);
}

TEST_CASE("gamma moments are roughly right") {
  Rng r(2024);
  const double shape = 0.1;
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) sum += r.gamma(shape);
  // E[Gamma(a,1)] = a; sd of the mean = sqrt(a/n).
  CHECK(std::abs(sum / n - shape) < 5.0 * std::sqrt(shape / n));
}

TEST_CASE("cdf sampling hits every bucket in proportion") {
  std::vector<double> probs{0.5, 0.3, 0.2};
  auto cdf = cdf_from_probs(probs);
  Rng r(3);
  std::vector<int> counts(3, 0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) ++counts[sample_cdf(cdf, r.uniform())];
  for (int i = 0; i < 3; ++i) {
    const double phat = static_cast<double>(counts[i]) / n;
    CHECK(std::abs(phat - probs[i]) < 3.0 * std::sqrt(probs[i] * (1 - probs[i]) / n));
  }
}

}  // TEST_SUITE
