#include <gtest/gtest.h>

#include <cmath>

#include "diffc/corruptions.hpp"
#include "diffc/kernels.hpp"
#include "diffc/plasma.hpp"
#include "test_util.hpp"

using namespace diffc;
using diffc::testing::throws_code;

namespace {

Tensor random_image(std::size_t c, std::size_t side, std::uint64_t seed) {
  RngStream rng(seed, 77);
  Tensor t(Shape{c, side, side});
  for (float& v : t.values()) v = static_cast<float>(rng.uniform());
  return t;
}

double param(const CorruptionSpec& spec, const std::string& name) {
  for (const auto& [key, value] : param_values(spec.params()))
    if (key == name) return value;
  ADD_FAILURE() << "no parameter " << name;
  return 0.0;
}

}  // namespace

TEST(Kinds, NamesRoundTrip) {
  const std::vector<std::string> names{"identity", "impulse", "shot",    "glass",          "motion",
                                       "brightness", "fog",   "spatter", "fractal_overlay"};
  ASSERT_EQ(kAllCorruptions.size(), names.size());
  for (std::size_t i = 0; i < names.size(); ++i) {
    EXPECT_EQ(corruption_name(kAllCorruptions[i]), names[i]);
    EXPECT_EQ(parse_corruption(names[i]), kAllCorruptions[i]);
  }
  EXPECT_FALSE(parse_corruption("zoom").has_value());
}

TEST(Kinds, GroupsFollowReportOrder) {
  EXPECT_EQ(corruption_group(CorruptionKind::Identity), "Clear");
  EXPECT_EQ(corruption_group(CorruptionKind::ShotNoise), "Noise");
  EXPECT_EQ(corruption_group(CorruptionKind::MotionBlur), "Blur");
  EXPECT_EQ(corruption_group(CorruptionKind::Fog), "Weather");
  EXPECT_EQ(corruption_group(CorruptionKind::FractalOverlay), "Extra");
}

TEST(Severity, RangeEnforced) {
  EXPECT_TRUE(throws_code([] { Severity(0); }, Errc::Precondition));
  EXPECT_TRUE(throws_code([] { Severity(6); }, Errc::Precondition));
  EXPECT_EQ(Severity(5).level(), 5);
}

TEST(SeverityTable, FixedRows) {
  const auto fog = CorruptionSpec::make(CorruptionKind::Fog, Severity(1));
  EXPECT_EQ(param(fog, "strength"), 1.5);
  EXPECT_EQ(param(fog, "decay"), 2.0);
  EXPECT_EQ(param(CorruptionSpec::make(CorruptionKind::ImpulseNoise, Severity(5)), "fraction"), 0.27);
  EXPECT_TRUE(param_values(CorruptionSpec::make(CorruptionKind::Identity, Severity(3)).params()).empty());

  const double impulse[] = {0.03, 0.06, 0.09, 0.17, 0.27};
  const double shot[] = {60, 25, 12, 5, 3};
  const int motion[] = {5, 7, 9, 11, 13};
  const double fog_s[] = {1.5, 2.0, 2.5, 2.5, 3.0}, fog_d[] = {2.0, 2.0, 1.7, 1.5, 1.4};
  const double beta[] = {0.1, 0.2, 0.3, 0.4, 0.5};
  const double glass_s[] = {0.7, 0.9, 1.0, 1.1, 1.5}, glass_r[] = {1, 2, 2, 3, 4}, glass_i[] = {2, 1, 3, 2, 2};
  const double sp_s[] = {1.0, 1.0, 1.0, 1.5, 1.5}, sp_t[] = {0.65, 0.6, 0.55, 0.5, 0.45},
               sp_w[] = {0.3, 0.35, 0.4, 0.45, 0.5};
  for (int l = 1; l <= 5; ++l) {
    const int i = l - 1;
    EXPECT_EQ(param(CorruptionSpec::make(CorruptionKind::ImpulseNoise, Severity(l)), "fraction"), impulse[i]);
    EXPECT_EQ(param(CorruptionSpec::make(CorruptionKind::ShotNoise, Severity(l)), "photons"), shot[i]);
    EXPECT_EQ(param(CorruptionSpec::make(CorruptionKind::MotionBlur, Severity(l)), "length"), motion[i]);
    EXPECT_EQ(param(CorruptionSpec::make(CorruptionKind::Brightness, Severity(l)), "shift"), beta[i]);
    EXPECT_EQ(param(CorruptionSpec::make(CorruptionKind::FractalOverlay, Severity(l)), "beta"), beta[i]);
    const auto f = CorruptionSpec::make(CorruptionKind::Fog, Severity(l));
    EXPECT_EQ(param(f, "strength"), fog_s[i]);
    EXPECT_EQ(param(f, "decay"), fog_d[i]);
    const auto g = CorruptionSpec::make(CorruptionKind::GlassBlur, Severity(l));
    EXPECT_EQ(param(g, "sigma"), glass_s[i]);
    EXPECT_EQ(param(g, "radius"), glass_r[i]);
    EXPECT_EQ(param(g, "iterations"), glass_i[i]);
    const auto s = CorruptionSpec::make(CorruptionKind::Spatter, Severity(l));
    EXPECT_EQ(param(s, "sigma"), sp_s[i]);
    EXPECT_EQ(param(s, "threshold"), sp_t[i]);
    EXPECT_EQ(param(s, "weight"), sp_w[i]);
  }
}

TEST(DiamondSquare, FlatCornersNormalizeToZero) {
  RngStream rng(1, 0);
  const auto g = diamond_square_from_corners(1, {0.4, 0.4, 0.4, 0.4}, 0.0, 2.0, rng);
  ASSERT_EQ(g.side(), 3u);
  for (double v : g.values()) EXPECT_EQ(v, 0.0);
}

TEST(DiamondSquare, HandTraceK1) {
  RngStream rng(1, 0);
  const auto g = diamond_square_from_corners(1, {0.0, 0.0, 0.0, 1.0}, 0.0, 2.0, rng);
  // Centre: mean of the corners. Edges: mean of two corners and the centre.
  const double expected[3][3] = {{0.0, 0.25 / 3, 0.0}, {0.25 / 3, 0.25, 1.25 / 3}, {0.0, 1.25 / 3, 1.0}};
  for (std::size_t y = 0; y < 3; ++y)
    for (std::size_t x = 0; x < 3; ++x) EXPECT_NEAR(g(y, x), expected[y][x], 1e-12) << y << "," << x;
}

TEST(DiamondSquare, DeterministicAndNormalized) {
  RngStream a(42, 0), b(42, 0);
  const auto ga = diamond_square(8, 1.0, 2.0, a), gb = diamond_square(8, 1.0, 2.0, b);
  EXPECT_EQ(ga, gb);
  EXPECT_EQ(ga.side(), 257u);
  EXPECT_EQ(*std::min_element(ga.values().begin(), ga.values().end()), 0.0);
  EXPECT_EQ(*std::max_element(ga.values().begin(), ga.values().end()), 1.0);
}

TEST(DiamondSquare, DetailLevelBounds) {
  RngStream rng(1, 0);
  EXPECT_TRUE(throws_code([&] { diamond_square(0, 1.0, 2.0, rng); }, Errc::BadDetailLevel));
  EXPECT_TRUE(throws_code([&] { diamond_square(13, 1.0, 2.0, rng); }, Errc::BadDetailLevel));
}

TEST(Plasma, ResampleCoversImage) {
  RngStream rng(3, 0);
  const auto g = diamond_square(plasma_level_for(20), 1.0, 2.0, rng);
  EXPECT_GE(g.side(), 20u);
  const Tensor p = resample_plasma(g, 20, 12);
  EXPECT_EQ(p.shape(), (Shape{1, 20, 12}));
  EXPECT_GE(p.min_value(), 0.0f);
  EXPECT_LE(p.max_value(), 1.0f);
  EXPECT_EQ(p.at(0, 0, 0), static_cast<float>(g(0, 0)));
}

TEST(FogBlend, ZeroPlasmaDarkens) {
  Tensor img(Shape{1, 2, 2}, 0.5f);
  img[0] = 1.0f;
  const Tensor out = fog_blend(img, Tensor(Shape{1, 2, 2}, 0.0f), 1.5);
  EXPECT_NEAR(out[0], 0.4f, 1e-6);
  EXPECT_NEAR(out[1], 0.2f, 1e-6);
}

TEST(FogBlend, BlackImageStaysNearBlack) {
  const Tensor out = fog_blend(Tensor(Shape{1, 3, 3}, 0.0f), Tensor(Shape{1, 3, 3}, 1.0f), 2.0);
  const double expected = 2.0 * 1e-6 / (1e-6 + 2.0);
  for (float v : out.data()) EXPECT_NEAR(v, expected, 1e-9);
}

TEST(FogBlend, RejectsBadInputs) {
  const Tensor img(Shape{1, 3, 3}, 0.5f);
  EXPECT_TRUE(throws_code([&] { fog_blend(img, Tensor(Shape{1, 3, 3}, 0.5f), 0.0); }, Errc::Precondition));
  EXPECT_TRUE(throws_code([&] { fog_blend(img, Tensor(Shape{1, 2, 3}, 0.5f), 1.0); }, Errc::ShapeMismatch));
}

TEST(FogBlend, NeverExceedsOne) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Tensor img = random_image(3, 9, seed);
    RngStream rng(seed, 0);
    const Tensor p = resample_plasma(diamond_square(3, 1.0, 2.0, rng), 9, 9);
    EXPECT_LE(fog_blend(img, p, 0.5).max_value(), 1.0f);
  }
}

TEST(Apply, IdentityIsExact) {
  const Tensor img = random_image(3, 8, 1);
  RngStream rng(0, 0);
  for (int l = 1; l <= 5; ++l) EXPECT_EQ(apply_corruption(img, CorruptionSpec::make(CorruptionKind::Identity, Severity(l)), rng), img);
}

TEST(Apply, ImpulseRateWithinBinomialBound) {
  const Tensor img(Shape{1, 64, 64}, 0.5f);
  RngStream rng(2024, 0);
  const Tensor out = apply_corruption(img, CorruptionSpec::make(CorruptionKind::ImpulseNoise, Severity(1)), rng);
  std::size_t changed = 0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i] != img[i]) {
      ++changed;
      EXPECT_TRUE(out[i] == 0.0f || out[i] == 1.0f);
    }
  }
  const double rate = static_cast<double>(changed) / static_cast<double>(out.size());
  EXPECT_GT(rate, 0.02);
  EXPECT_LT(rate, 0.04);
}

TEST(Apply, ImpulseDistortionMonotoneInSeverity) {
  const Tensor img = random_image(1, 16, 5);
  double previous = 0.0;
  for (int l = 1; l <= 5; ++l) {
    const auto spec = CorruptionSpec::make(CorruptionKind::ImpulseNoise, Severity(l));
    double total = 0.0;
    for (std::uint64_t seed = 0; seed < 120; ++seed) {
      RngStream rng(seed, 9);
      const Tensor out = apply_corruption(img, spec, rng);
      for (std::size_t i = 0; i < out.size(); ++i) total += std::abs(out[i] - img[i]);
    }
    const double mean = total / 120.0;
    EXPECT_GE(mean, previous) << "severity " << l;
    previous = mean;
  }
}

TEST(Apply, LengthOneMotionKernelIsIdentity) {
  const Tensor img = random_image(3, 10, 4);
  EXPECT_EQ(conv2d(img, motion_kernel(1, 0.7), Padding::reflect), img);
}

TEST(Apply, MotionKernelNormalized) {
  for (int length : {3, 5, 13}) {
    const Tensor k = motion_kernel(length, 1.1);
    double sum = 0.0;
    for (float v : k.data()) sum += v;
    EXPECT_NEAR(sum, 1.0, 1e-6);
  }
}

TEST(Apply, GaussianKernelClampedToImage) {
  const Tensor k = gaussian_kernel(1.5, 5);
  EXPECT_EQ(k.shape(), (Shape{5, 5}));
  double sum = 0.0;
  for (float v : k.data()) sum += v;
  EXPECT_NEAR(sum, 1.0, 1e-6);
}

TEST(Apply, RangeClosureAndDeterminismForEveryKind) {
  for (auto kind : kAllCorruptions)
    for (int l = 1; l <= 5; ++l)
      for (std::size_t channels : {1u, 3u}) {
        const Tensor img = random_image(channels, 16, static_cast<std::uint64_t>(l) * 31 + channels);
        const auto spec = CorruptionSpec::make(kind, Severity(l));
        RngStream a(l, 3), b(l, 3);
        const Tensor out = apply_corruption(img, spec, a);
        EXPECT_EQ(out, apply_corruption(img, spec, b)) << corruption_name(kind) << " " << l;
        EXPECT_EQ(out.shape(), img.shape());
        EXPECT_GE(out.min_value(), 0.0f);
        EXPECT_LE(out.max_value(), 1.0f);
      }
}

TEST(Apply, OutOfRangeInputRejected) {
  Tensor img(Shape{1, 4, 4}, 0.5f);
  img[3] = 1.5f;
  RngStream rng(0, 0);
  EXPECT_TRUE(throws_code([&] { apply_corruption(img, CorruptionSpec::make(CorruptionKind::Fog, Severity(1)), rng); },
                          Errc::DomainMismatch));
}

TEST(Apply, BrightnessShiftsAndClamps) {
  const Tensor img(Shape{1, 2, 2}, 0.8f);
  RngStream rng(0, 0);
  const Tensor out = apply_corruption(img, CorruptionSpec::make(CorruptionKind::Brightness, Severity(1)), rng);
  for (float v : out.data()) EXPECT_NEAR(v, 0.9f, 1e-6);
  const Tensor hi = apply_corruption(img, CorruptionSpec::make(CorruptionKind::Brightness, Severity(5)), rng);
  for (float v : hi.data()) EXPECT_EQ(v, 1.0f);
}

TEST(Apply, BatchUsesPerImageStreams) {
  Tensor batch(Shape{3, 1, 8, 8}, 0.5f);
  const auto spec = CorruptionSpec::make(CorruptionKind::ImpulseNoise, Severity(5));
  const RngStream rng(4, 0);
  const Tensor out = apply_corruption_batch(batch, spec, rng);
  EXPECT_EQ(out, apply_corruption_batch(batch, spec, rng));
  RngStream child = rng.split(1);
  EXPECT_EQ(out.row(1), apply_corruption(batch.row(1), spec, child));
  EXPECT_NE(out.row(0), out.row(1));
}
