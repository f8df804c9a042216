#include <doctest.h>

#include <cmath>

#include "exactlm/adaptors.hpp"
#include "exactlm/rng.hpp"
#include "fixtures.hpp"

using namespace exactlm;
using namespace exactlm::testing;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

TransformFunction top2() {
  TransformFunction tf;
  tf.truncation = TruncationRule::top_k(2);
  return tf;
}
}  // namespace

TEST_SUITE("adaptors") {

TEST_CASE("top-2 keeps the two heaviest entries of the published row") {
  std::vector<double> dist{0.4, 0.1, 0.1, 0.4};
  auto w = transform_step(top2(), dist);
  CHECK(w == std::vector<double>{0.4, 0.0, 0.0, 0.4});
}

TEST_CASE("identity-like adaptors pass the distribution through") {
  std::vector<double> dist{0.4, 0.1, 0.1, 0.4};
  TransformFunction nucleus_full;
  nucleus_full.truncation = TruncationRule::nucleus(1.0);
  CHECK(transform_step(nucleus_full, dist) == dist);
  TransformFunction topk_full;
  topk_full.truncation = TruncationRule::top_k(4);
  CHECK(transform_step(topk_full, dist) == dist);
  TransformFunction temp1;
  temp1.scaling = ScalingRule::temperature(1.0);
  auto w = transform_step(temp1, dist);
  for (std::size_t i = 0; i < dist.size(); ++i)
    CHECK(w[i] == doctest::Approx(dist[i]).epsilon(1e-15));
}

TEST_CASE("nucleus smallest-set rule with the stated tie-break") {
  // Ties at 0.4 and at 0.1 resolve toward lower symbol index; cumulative
  // 0.8 < 0.9 forces a third symbol.
  std::vector<double> dist{0.4, 0.1, 0.1, 0.4};
  TransformFunction tf;
  tf.truncation = TruncationRule::nucleus(0.9);
  auto w = transform_step(tf, dist);
  CHECK(w == std::vector<double>{0.4, 0.1, 0.0, 0.4});
}

TEST_CASE("eta truncation set by hand") {
  std::vector<double> dist{0.7, 0.3};
  const double h = -(0.7 * std::log(0.7) + 0.3 * std::log(0.3));
  const double eta = std::min(0.04, std::sqrt(0.04) * std::exp(-h));
  REQUIRE(eta == doctest::Approx(0.04));  // min picks eps here
  auto set = truncation_set(TruncationRule::eta(0.04), dist);
  CHECK(set == std::vector<int32_t>{0, 1});  // both kept since 0.3 > eta
  // A tighter threshold drops the smaller symbol.
  auto set2 = truncation_set(TruncationRule::eta(0.35), dist);
  CHECK(set2 == std::vector<int32_t>{0});
}

TEST_CASE("top-1 tie breaks to the lower index") {
  std::vector<double> dist{0.4, 0.1, 0.1, 0.4};
  auto set = truncation_set(TruncationRule::top_k(1), dist);
  CHECK(set == std::vector<int32_t>{0});
}

TEST_CASE("no truncation keeps the whole alphabet") {
  std::vector<double> dist{0.25, 0.25, 0.25, 0.25};
  auto set = truncation_set(TruncationRule::none(), dist);
  CHECK(set == std::vector<int32_t>{0, 1, 2, 3});
}

TEST_CASE("locally-typical set orders by |H + log p|") {
  std::vector<double> dist{0.6, 0.3, 0.1};
  const double h = -(0.6 * std::log(0.6) + 0.3 * std::log(0.3) + 0.1 * std::log(0.1));
  // Keys: |h + log p|; the closest-to-typical symbol enters first.
  std::vector<double> keys{std::abs(h + std::log(0.6)), std::abs(h + std::log(0.3)),
                           std::abs(h + std::log(0.1))};
  auto set = truncation_set(TruncationRule::locally_typical(0.3), dist);
  // Smallest key is symbol 1 (log 0.3 ~ -1.20 vs h ~ 0.898).
  REQUIRE(keys[1] < keys[0]);
  REQUIRE(keys[1] < keys[2]);
  CHECK(set == std::vector<int32_t>{1});
}

TEST_CASE("degenerate truncation is an error") {
  std::vector<double> dist{0.5, 0.5};
  TransformFunction tf;
  tf.truncation = TruncationRule::eta(2.0);  // eta >= every probability
  CHECK_THROWS_AS(transform_step(tf, dist), DegenerateAdaptorError);
}

TEST_CASE("local top-2 probabilities reproduce the worked example") {
  auto lm = reversal_world();
  auto local = make_local_adapted(lm, top2());
  CHECK(std::exp(local_logprob(local, str({0, 0, 0}))) ==
        doctest::Approx(0.0625).epsilon(1e-12));
  CHECK(std::exp(local_logprob(local, str({1, 1, 1}))) ==
        doctest::Approx(24.0 / 343.0).epsilon(1e-12));
  // 'c' never survives top-2 here.
  CHECK(local_logprob(local, str({2})) == -kInf);
}

TEST_CASE("ancestral transform leaves probabilities unchanged") {
  auto lm = reversal_world();
  auto local = make_local_adapted(lm, ancestral_transform());
  auto e = enumerate_support(lm, 8);
  for (const auto& entry : e.entries) {
    CHECK(local_logprob(local, entry.string) ==
          doctest::Approx(entry.logprob).epsilon(1e-10));
    CHECK(global_unnorm_logweight(local, entry.string) ==
          doctest::Approx(entry.logprob).epsilon(1e-10));
  }
}

TEST_CASE("global top-2 weights equal the raw scores") {
  auto lm = reversal_world();
  auto m = make_local_adapted(lm, top2());
  CHECK(std::exp(global_unnorm_logweight(m, str({0, 0, 0}))) ==
        doctest::Approx(0.032).epsilon(1e-12));
  CHECK(std::exp(global_unnorm_logweight(m, str({1, 1, 1}))) ==
        doctest::Approx(0.024).epsilon(1e-12));
}

TEST_CASE("top-2 normalizer matches the closed form 7/12") {
  // Adapted support is a^n and b^n; the two geometric sums give
  // sum 0.5*0.4^n = 1/3 and sum 0.15*0.4^(n-1) = 1/4.
  auto lm = reversal_world();
  auto z = global_normalizer(lm, top2(), 30);
  CHECK(std::exp(z.log_z) == doctest::Approx(7.0 / 12.0).epsilon(1e-9));
  CHECK(std::exp(z.log_z_transfer) == doctest::Approx(7.0 / 12.0).epsilon(1e-9));
  CHECK(z.enumerated_mass <= 7.0 / 12.0 + 1e-12);
  CHECK(z.enumerated_mass + z.tail_bound >= 7.0 / 12.0 - 1e-12);
}

TEST_CASE("ancestral normalizer is exactly 1") {
  auto lm = reversal_world();
  auto z = global_normalizer(lm, ancestral_transform(), 25);
  CHECK(std::exp(z.log_z) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("global mode is tight and proportional to raw weights") {
  auto lm = reversal_world();
  auto m = make_global_adapted(lm, top2(), 30);
  REQUIRE(m.global_log_normalizer.has_value());
  // Tightness: normalized enumerated mass + normalized tail covers 1.
  double mass = 0.0;
  auto e = enumerate_support(lm, 30);
  for (const auto& entry : e.entries) {
    const double lp = global_logprob(m, entry.string);
    if (lp != -kInf) mass += std::exp(lp);
  }
  CHECK(mass <= 1.0 + 1e-9);
  CHECK(mass >= 1.0 - 1e-6);
  // Ratio of adapted probabilities equals ratio of unnormalized weights.
  const double ratio = std::exp(global_logprob(m, str({0, 0, 0})) -
                                global_logprob(m, str({1, 1, 1})));
  CHECK(ratio == doctest::Approx(0.032 / 0.024).epsilon(1e-10));
}

TEST_CASE("ordering reversal between local and global top-2") {
  auto lm = reversal_world();
  auto m = make_local_adapted(lm, top2());
  const double local_diff =
      local_logprob(m, str({0, 0, 0})) - local_logprob(m, str({1, 1, 1}));
  const double weight_diff =
      global_unnorm_logweight(m, str({0, 0, 0})) - global_unnorm_logweight(m, str({1, 1, 1}));
  CHECK(local_diff < 0.0);
  CHECK(weight_diff > 0.0);
}

TEST_CASE("local steps renormalize to 1") {
  auto lm = reversal_world();
  for (const auto& tf_spec : {"topk:k=2", "nucleus:pi=0.9", "eta:eps=0.05", "typical:pi=0.8",
                              "topk:k=3,temp=1.5"}) {
    auto m = make_local_adapted(lm, parse_adaptor_spec(tf_spec));
    for (const auto& [ctx, step] : m.steps) {
      double total = 0.0;
      for (double w : step.weight) total += w / step.total;
      CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("scale-then-truncate vs truncate-then-scale differ when stated") {
  // tau < 1 sharpens, so the nucleus over the scaled vector can be smaller.
  std::vector<double> dist{0.50, 0.30, 0.15, 0.05};
  TransformFunction tf;
  tf.scaling = ScalingRule::temperature(0.4);
  tf.truncation = TruncationRule::nucleus(0.9);
  auto a = transform_step(tf, dist, TransformOrder::scale_then_truncate);
  auto b = transform_step(tf, dist, TransformOrder::truncate_then_scale);
  int kept_a = 0, kept_b = 0;
  for (double w : a) kept_a += w > 0.0;
  for (double w : b) kept_b += w > 0.0;
  CHECK(kept_a < kept_b);
}

TEST_CASE("sampling: point mass, frequency and determinism") {
  SUBCASE("point mass") {
    auto m = make_local_adapted(point_mass_a(), ancestral_transform());
    Rng rng(5);
    for (int i = 0; i < 20; ++i) CHECK(sample_local(m, rng).string == str({0}));
  }
  SUBCASE("top-2 frequency of aaa matches 0.0625") {
    auto m = make_local_adapted(reversal_world(), top2());
    Rng rng(17);
    const int n = 100000;
    int hits = 0;
    for (int i = 0; i < n; ++i) {
      auto s = sample_local(m, rng);
      REQUIRE(!s.capped);
      if (s.string == str({0, 0, 0})) ++hits;
    }
    const double expect = 0.0625;
    const double sigma = std::sqrt(expect * (1 - expect) / n);
    CHECK(std::abs(static_cast<double>(hits) / n - expect) < 3.0 * sigma);
  }
  SUBCASE("fixed seed reproduces the sample sequence") {
    auto m = make_local_adapted(reversal_world(), top2());
    Rng r1(123), r2(123);
    for (int i = 0; i < 100; ++i) CHECK(sample_local(m, r1).string == sample_local(m, r2).string);
  }
  SUBCASE("draw densities match the model") {
    auto m = make_local_adapted(reversal_world(), top2());
    Rng rng(31);
    for (int i = 0; i < 200; ++i) {
      auto s = sample_local(m, rng);
      CHECK(s.local_logprob == doctest::Approx(local_logprob(m, s.string)).epsilon(1e-10));
      CHECK(s.global_logweight ==
            doctest::Approx(global_unnorm_logweight(m, s.string)).epsilon(1e-10));
    }
  }
}

TEST_CASE("adaptor spec grammar") {
  auto tf = parse_adaptor_spec("TopK:k=30,temp=1.25");
  CHECK(tf.truncation.kind == TruncationRule::Kind::top_k);
  CHECK(tf.truncation.k == 30);
  CHECK(tf.scaling.kind == ScalingRule::Kind::temperature);
  CHECK(tf.scaling.tau == doctest::Approx(1.25));

  CHECK(parse_adaptor_spec("nucleus:pi=0.95").truncation.pi == doctest::Approx(0.95));
  CHECK(parse_adaptor_spec("eta:eps=0.0009").truncation.eps == doctest::Approx(0.0009));
  CHECK(parse_adaptor_spec("typical:pi=0.95").truncation.kind ==
        TruncationRule::Kind::locally_typical);
  CHECK(parse_adaptor_spec("ancestral").is_ancestral());
  CHECK(parse_adaptor_spec("temperature:tau=1.5").scaling.tau == doctest::Approx(1.5));

  CHECK_THROWS_AS(parse_adaptor_spec("nucleus:pi=1.5"), InputError);
  CHECK_THROWS_AS(parse_adaptor_spec("mirostat:tau=3"), InputError);
  CHECK_THROWS_AS(parse_adaptor_spec("topk"), InputError);
  CHECK_THROWS_AS(parse_adaptor_spec("topk:k=2,bogus=1"), InputError);
  CHECK_THROWS_AS(parse_adaptor_spec("ancestral:temp=2"), InputError);

  // Round trip through the canonical form.
  auto back = parse_adaptor_spec(format_adaptor_spec(tf));
  CHECK(back.truncation.k == 30);
  CHECK(back.scaling.tau == doctest::Approx(1.25));
}

}  // TEST_SUITE
