#include <doctest.h>

#include <cmath>
#include <random>

#include "dynimg/attention.hpp"
#include "dynimg/error.hpp"
#include "test_support.hpp"

using namespace dynimg;
using doctest::Approx;

namespace {

double mask_sum(const std::vector<double>& mask) {
  double s = 0.0;
  for (double m : mask) s += m;
  return s;
}


}  // namespace

TEST_CASE("attention widths halve down to one channel") {
  CHECK(attention_widths(8) == std::array<std::size_t, 5>{8, 4, 2, 1, 1});
  CHECK(attention_widths(512) == std::array<std::size_t, 5>{512, 256, 128, 64, 1});
  CHECK(attention_widths(3) == std::array<std::size_t, 5>{3, 1, 1, 1, 1});
  CHECK(attention_widths(1) == std::array<std::size_t, 5>{1, 1, 1, 1, 1});
  const auto p = init_attention_params(16, 1);
  for (std::size_t k = 1; k < 4; ++k) CHECK(p.layers[k].in_channels == p.layers[k - 1].out_channels);
  CHECK(p.layers[3].out_channels == 1);
}

TEST_CASE("parameter initialisation is seeded and bounded") {
  const auto a = init_attention_params(8, 77);
  const auto b = init_attention_params(8, 77);
  const auto c = init_attention_params(8, 78);
  CHECK(a.layers[0].weights == b.layers[0].weights);
  CHECK(a.layers[0].weights != c.layers[0].weights);
  for (const auto& layer : a.layers) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(layer.in_channels));
    for (double w : layer.weights) CHECK(std::abs(w) <= bound);
    for (double w : layer.bias) CHECK(std::abs(w) <= bound);
  }
}

TEST_CASE("attention_forward") {
  SUBCASE("constant input gives a uniform mask") {
    const FeatureMap a(3, 5, 8, std::vector<double>(3 * 5 * 8, 0.7));
    const auto out = attention_forward(a, init_attention_params(8, 3));
    for (double m : out.mask) CHECK(m == Approx(1.0 / 15.0).epsilon(1e-12));
    for (double o : out.output.values()) CHECK(o == Approx(0.7 / 15.0).epsilon(1e-12));
  }
  SUBCASE("a single position gets the whole mask") {
    std::mt19937_64 rng(2);
    const FeatureMap a = testing::random_feature_map(rng, 1, 1, 6);
    const auto out = attention_forward(a, init_attention_params(6, 9));
    REQUIRE(out.mask.size() == 1);
    CHECK(out.mask[0] == 1.0);
    for (std::size_t i = 0; i < 6; ++i) CHECK(out.output.values()[i] == a.values()[i]);
  }
  SUBCASE("random inputs give a normalised positive mask") {
    std::mt19937_64 rng(10);
    const FeatureMap a = testing::random_feature_map(rng, 4, 4, 8);
    const auto out = attention_forward(a, init_attention_params(8, 5));
    CHECK(std::abs(mask_sum(out.mask) - 1.0) <= 1e-6);
  }
  SUBCASE("channel mismatch") {
    const FeatureMap a(2, 2, 4);
    CHECK_THROWS_AS(attention_forward(a, init_attention_params(8, 1)), Error);
  }
}

TEST_CASE("property: mask positivity, normalisation and output bound") {
  std::mt19937_64 rng(1234);
  std::uniform_int_distribution<std::size_t> dim(2, 6), ch(1, 16);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t h = dim(rng), w = dim(rng), c = ch(rng);
    const FeatureMap a = testing::random_feature_map(rng, h, w, c, 5.0);
    const auto out = attention_forward(a, init_attention_params(c, rng()));
    double max_in = 0.0, max_out = 0.0;
    for (double x : a.values()) max_in = std::max(max_in, std::abs(x));
    for (double x : out.output.values()) max_out = std::max(max_out, std::abs(x));
    for (double m : out.mask) {
      REQUIRE(m > 0.0);
      REQUIRE(m < 1.0);
    }
    REQUIRE(std::abs(mask_sum(out.mask) - 1.0) <= 1e-6);
    REQUIRE(max_out <= max_in);
  }
}

TEST_CASE("property: with the mask fixed the output is linear in the input") {
  std::mt19937_64 rng(55);
  const FeatureMap a = testing::random_feature_map(rng, 3, 4, 8);
  const auto mask = attention_forward(a, init_attention_params(8, 4)).mask;
  const FeatureMap b = testing::random_feature_map(rng, 3, 4, 8);
  for (std::size_t p = 0; p < 12; ++p) {
    for (std::size_t c = 0; c < 8; ++c) {
      const double combo = 2.0 * a.values()[p * 8 + c] - 3.0 * b.values()[p * 8 + c];
      const double split = 2.0 * (a.values()[p * 8 + c] * mask[p]) -
                           3.0 * (b.values()[p * 8 + c] * mask[p]);
      CHECK(combo * mask[p] == Approx(split).epsilon(1e-12));
    }
  }
}

TEST_CASE("attention_backward") {
  std::mt19937_64 rng(8);
  SUBCASE("zero upstream gives zero gradients") {
    const FeatureMap a = testing::random_feature_map(rng, 3, 3, 8);
    const auto g = attention_backward(a, init_attention_params(8, 1), FeatureMap(3, 3, 8));
    for (double x : g.d_input.values()) CHECK(x == 0.0);
    for (const auto& layer : g.d_params.layers) {
      for (double x : layer.weights) CHECK(x == 0.0);
      for (double x : layer.bias) CHECK(x == 0.0);
    }
  }
  SUBCASE("a single position passes the upstream gradient through") {
    const FeatureMap a = testing::random_feature_map(rng, 1, 1, 4);
    const FeatureMap up = testing::random_feature_map(rng, 1, 1, 4);
    const auto g = attention_backward(a, init_attention_params(4, 2), up);
    for (std::size_t i = 0; i < 4; ++i) CHECK(g.d_input.values()[i] == up.values()[i]);
  }
  SUBCASE("shape mismatch") {
    const FeatureMap a(2, 2, 4);
    CHECK_THROWS_AS(attention_backward(a, init_attention_params(4, 1), FeatureMap(2, 3, 4)), Error);
  }
  SUBCASE("matches central finite differences") {
    for (int trial = 0; trial < 10; ++trial) {
      const FeatureMap a = testing::random_feature_map(rng, 2 + trial % 3, 2 + trial % 3, 8);
      const FeatureMap up = testing::random_feature_map(rng, a.height(), a.width(), 8);
      const auto r = testing::check_gradients(a, init_attention_params(8, 100 + trial), up);
      INFO("trial " << trial);
      CHECK(r.worst < 1e-3);
      CHECK(r.checked > 0);
    }
  }
}

TEST_CASE("bce_loss") {
  CHECK(bce_loss(0.5, 0) == Approx(0.693147).epsilon(1e-6));
  CHECK(bce_loss(0.5, 1) == Approx(0.693147).epsilon(1e-6));
  CHECK(bce_loss(1.0 - kBceEpsilon, 1) == Approx(kBceEpsilon).epsilon(1e-3));
  CHECK(bce_loss(0.9, 0) == Approx(2.302585).epsilon(1e-6));
  // clamping keeps the extremes finite
  CHECK(std::isfinite(bce_loss(0.0, 1)));
  CHECK(std::isfinite(bce_loss(1.0, 0)));
  CHECK(bce_loss(0.0, 1) == Approx(-std::log(kBceEpsilon)));
  CHECK_THROWS_AS(bce_loss(0.5, 2), Error);
  CHECK_THROWS_AS(bce_loss(0.5, -1), Error);

  double prev1 = INFINITY, prev0 = -INFINITY;
  for (int k = 1; k < 1000; ++k) {
    const double p = k / 1000.0;
    const double l1 = bce_loss(p, 1), l0 = bce_loss(p, 0);
    REQUIRE(l1 >= 0.0);
    REQUIRE(l0 >= 0.0);
    REQUIRE(l1 < prev1);
    REQUIRE(l0 > prev0);
    prev1 = l1;
    prev0 = l0;
  }
}
