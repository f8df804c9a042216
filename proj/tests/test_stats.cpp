#include <doctest.h>

#include <cmath>

#include "exactlm/rng.hpp"
#include "exactlm/stats.hpp"

using namespace exactlm;

TEST_SUITE("stats") {

TEST_CASE("pearson on exact lines and a hand-computed case") {
  CHECK(pearson(PairedSeries::create({1, 2, 3}, {2, 4, 6})) == doctest::Approx(1.0));
  CHECK(pearson(PairedSeries::create({1, 2, 3}, {3, 2, 1})) == doctest::Approx(-1.0));
  // (1,2,3,4) vs (1,3,2,4): cov 4, var 5 and 5 -> 0.8.
  CHECK(pearson(PairedSeries::create({1, 2, 3, 4}, {1, 3, 2, 4})) ==
        doctest::Approx(0.8).epsilon(1e-12));
  CHECK_THROWS_AS(pearson(PairedSeries::create({1, 1, 1}, {1, 2, 3})), InputError);
  CHECK_THROWS_AS(PairedSeries::create({1}, {2}), InputError);
}

TEST_CASE("spearman handles monotone data and ties") {
  CHECK(spearman(PairedSeries::create({1, 5, 9, 40}, {2, 3, 11, 12})) == doctest::Approx(1.0));
  CHECK(spearman(PairedSeries::create({1, 5, 9, 40}, {12, 11, 3, 2})) == doctest::Approx(-1.0));
  // Average ranks for the tied pair: x-ranks (1, 2.5, 2.5, 4).
  CHECK(spearman(PairedSeries::create({1, 2, 2, 3}, {1, 2, 3, 4})) ==
        doctest::Approx(std::sqrt(0.9)).epsilon(1e-12));
}

TEST_CASE("spearman equals pearson of average ranks") {
  Rng rng(7);
  std::vector<double> xs, ys;
  for (int i = 0; i < 200; ++i) {
    xs.push_back(std::floor(rng.uniform() * 10));  // force ties
    ys.push_back(rng.uniform());
  }
  auto s = PairedSeries::create(xs, ys);
  auto ranked = PairedSeries::create(average_ranks(s.xs), average_ranks(s.ys));
  CHECK(spearman(s) == doctest::Approx(pearson(ranked)).epsilon(1e-14));
}

TEST_CASE("affine invariance of both correlations") {
  Rng rng(8);
  std::vector<double> xs, ys;
  for (int i = 0; i < 100; ++i) {
    xs.push_back(rng.normal());
    ys.push_back(rng.normal() + 0.5 * xs.back());
  }
  auto base = PairedSeries::create(xs, ys);
  std::vector<double> xs2(xs), ys2(ys);
  for (auto& v : xs2) v = 3.5 * v + 11.0;
  for (auto& v : ys2) v = 0.25 * v - 2.0;
  auto scaled = PairedSeries::create(xs2, ys2);
  CHECK(pearson(base) == doctest::Approx(pearson(scaled)).epsilon(1e-12));
  CHECK(spearman(base) == doctest::Approx(spearman(scaled)).epsilon(1e-12));
}

TEST_CASE("cramers v on canonical tables") {
  CHECK(cramers_v({{25, 25}, {25, 25}}) == doctest::Approx(0.0));
  CHECK(cramers_v({{50, 0}, {0, 50}}) == doctest::Approx(1.0));
  // chi^2 = 4 * (10^2 / 20) = 20, n = 80, V = sqrt(20/80) = 0.5.
  CHECK(cramers_v({{30, 10}, {10, 30}}) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("cramers v transpose symmetry and degenerate conventions") {
  std::vector<std::vector<int64_t>> t{{12, 3, 7}, {4, 9, 1}};
  std::vector<std::vector<int64_t>> tt{{12, 4}, {3, 9}, {7, 1}};
  CHECK(cramers_v(t) == doctest::Approx(cramers_v(tt)).epsilon(1e-12));
  CHECK(cramers_v({{5, 0}, {7, 0}}) == doctest::Approx(0.0));  // one positive column
  CHECK(cramers_v({{5, 3}}) == doctest::Approx(0.0));          // one row
}

TEST_CASE("consecutive-pair V matches the dense table") {
  std::vector<int32_t> seq{0, 1, 1, 2, 0, 0, 2, 1, 0, 2, 2, 1, 0, 1, 2, 0};
  // Dense table over the 3 observed categories.
  std::vector<std::vector<int64_t>> table(3, std::vector<int64_t>(3, 0));
  for (std::size_t i = 0; i + 1 < seq.size(); ++i) ++table[seq[i]][seq[i + 1]];
  CHECK(cramers_v_consecutive(seq) == doctest::Approx(cramers_v(table)).epsilon(1e-12));
}

TEST_CASE("alternating chain has V = 1, iid uniform chain near 0") {
  std::vector<int32_t> alt;
  for (int i = 0; i < 1000; ++i) alt.push_back(i % 2);
  CHECK(cramers_v_consecutive(alt) == doctest::Approx(1.0));

  Rng rng(9);
  std::vector<int32_t> iid;
  for (int i = 0; i < 100000; ++i) iid.push_back(static_cast<int32_t>(rng.below(4)));
  CHECK(cramers_v_consecutive(iid) < 0.02);
}

}  // TEST_SUITE
