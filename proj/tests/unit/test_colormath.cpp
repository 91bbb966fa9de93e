#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "cardie/colormath.hpp"
#include "cardie/error.hpp"

using namespace cardie;

namespace {

constexpr double kPi = std::numbers::pi;

Plane plane(int w, int h, std::initializer_list<double> v) {
  Plane p(w, h);
  p.values.assign(v.begin(), v.end());
  return p;
}

}  // namespace

TEST(Luminance, Coefficients) {
  EXPECT_DOUBLE_EQ(luminance(1, 1, 1), 1.0);
  EXPECT_NEAR(luminance(1, 0, 0), 0.299, 1e-15);
  EXPECT_NEAR(luminance(0, 1, 0), 0.587, 1e-15);
  EXPECT_NEAR(luminance(0, 0, 1), 0.114, 1e-15);
}

TEST(Luminance, MapMatchesScalar) {
  RgbImage img(2, 1);
  img.set(0, 0, 0.2, 0.4, 0.6);
  img.set(1, 0, 1, 0, 0);
  const auto l = luminance(img);
  EXPECT_NEAR(l.values[0], 0.363, 1e-15);
  EXPECT_NEAR(l.values[1], 0.299, 1e-15);
}

TEST(Opponent, Examples) {
  RgbImage img(3, 1);
  img.set(0, 0, 0.5, 0.5, 0.5);
  img.set(1, 0, 1, 1, 1);
  img.set(2, 0, 1, 0, 0);
  const auto [o1, o2] = opponent(img);
  EXPECT_DOUBLE_EQ(o1.values[0], 0.0);
  EXPECT_DOUBLE_EQ(o2.values[0], 0.0);
  EXPECT_DOUBLE_EQ(o1.values[1], 1.0);
  EXPECT_DOUBLE_EQ(o2.values[1], 0.0);
  EXPECT_NEAR(o1.values[2], -1.0 / 3.0, 1e-15);
  EXPECT_DOUBLE_EQ(o2.values[2], 1.0);
}

TEST(Hue, UniformRedLandsInOneBin) {
  RgbImage img(4, 4, 1, 0, 0);
  const auto h = hue_histogram(img);
  const double theta = std::atan2(1.0, -1.0 / 3.0);
  EXPECT_NEAR(theta, 1.8925, 1e-4);
  const auto bin = static_cast<std::size_t>(theta / (2 * kPi) * 360);
  EXPECT_DOUBLE_EQ(h.masses[bin], 1.0);
  EXPECT_DOUBLE_EQ(h.total_mass(), 1.0);
  EXPECT_DOUBLE_EQ(h.chroma_excluded_fraction, 0.0);
}

TEST(Hue, GrayIsExcluded) {
  RgbImage img(3, 3, 0.5, 0.5, 0.5);
  const auto h = hue_histogram(img);
  EXPECT_DOUBLE_EQ(h.total_mass(), 0.0);
  EXPECT_DOUBLE_EQ(h.chroma_excluded_fraction, 1.0);
}

TEST(Hue, HalfRedHalfGreen) {
  RgbImage img(2, 2);
  img.set(0, 0, 1, 0, 0);
  img.set(1, 0, 1, 0, 0);
  img.set(0, 1, 0, 1, 0);
  img.set(1, 1, 0, 1, 0);
  const auto h = hue_histogram(img);
  int nonzero = 0;
  for (double m : h.masses) {
    if (m > 0) {
      ++nonzero;
      EXPECT_DOUBLE_EQ(m, 0.5);
    }
  }
  EXPECT_EQ(nonzero, 2);
}

TEST(Hue, StandardModeAnglesAtPrimaryHues) {
  EXPECT_NEAR(hue_of(1, 0, 0, HueMode::standard).theta, 0.0, 1e-12);
  EXPECT_NEAR(hue_of(1, 1, 0, HueMode::standard).theta, kPi / 3, 1e-12);
  EXPECT_NEAR(hue_of(0, 1, 0, HueMode::standard).theta, 2 * kPi / 3, 1e-12);
  EXPECT_NEAR(hue_of(0, 0, 1, HueMode::standard).theta, 4 * kPi / 3, 1e-12);
  EXPECT_NEAR(hue_of(1, 0, 1, HueMode::standard).theta, 5 * kPi / 3, 1e-12);
  EXPECT_LT(hue_of(0.3, 0.3, 0.3, HueMode::standard).chroma, 1e-15);
}

TEST(Hue, HistogramIsOrderFree) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 1);
  RgbImage a(8, 8);
  for (std::size_t i = 0; i < a.pixel_count(); ++i) {
    a.r[i] = u(rng);
    a.g[i] = u(rng);
    a.b[i] = u(rng);
  }
  RgbImage b = a;
  std::reverse(b.r.begin(), b.r.end());
  std::reverse(b.g.begin(), b.g.end());
  std::reverse(b.b.begin(), b.b.end());
  const auto ha = hue_histogram(a), hb = hue_histogram(b);
  for (std::size_t i = 0; i < ha.bins(); ++i) EXPECT_NEAR(ha.masses[i], hb.masses[i], 1e-15);
}

TEST(Hue, RotationShiftsHistogramCircularly) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0, 2 * kPi);
  std::vector<double> angles(500), shifted(500);
  const int shift_bins = 37;
  const double shift = shift_bins * 2 * kPi / 360;
  for (std::size_t i = 0; i < angles.size(); ++i) {
    // centre of a bin, so the shift cannot push a sample across an edge by rounding
    const int bin = static_cast<int>(u(rng) / (2 * kPi) * 360);
    angles[i] = (bin + 0.5) * 2 * kPi / 360;
    shifted[i] = angles[i] + shift;
  }
  const auto h = bin_hue_angles(angles), hs = bin_hue_angles(shifted);
  for (std::size_t i = 0; i < 360; ++i) EXPECT_DOUBLE_EQ(hs.masses[(i + shift_bins) % 360], h.masses[i]);
}

TEST(Hue, MassInCreditsPartialBinsAndWraps) {
  std::vector<double> angles{0.5 * 2 * kPi / 360};  // centre of bin 0
  const auto h = bin_hue_angles(angles);
  const double w = 2 * kPi / 360;
  EXPECT_NEAR(h.mass_in(0.0, w), 0.5, 1e-12);        // covers half of bin 0 and half of bin 359
  EXPECT_NEAR(h.mass_in(w / 2, w), 1.0, 1e-12);      // exactly bin 0
  EXPECT_NEAR(h.mass_in(2 * kPi, 2 * w), 1.0, 1e-12);  // wrapped: bins 359 and 0 fully
  EXPECT_NEAR(h.mass_in(kPi, 10 * w), 0.0, 1e-15);
}

TEST(LocalVariance, ConstantIsZero) {
  Plane p(32, 32, 0.42);
  EXPECT_NEAR(mean_local_variance(p).sigma_bar, 0.0, 1e-20);  // box sums round at the ulp level
}

TEST(LocalVariance, BalancedWindow) {
  Plane p(16, 16);
  for (int y = 8; y < 16; ++y) {
    for (int x = 0; x < 16; ++x) p.at(x, y) = 1.0;
  }
  const auto v = mean_local_variance(p);
  EXPECT_EQ(v.window_count, 1u);
  EXPECT_DOUBLE_EQ(v.sigma_bar, 0.25);
}

TEST(LocalVariance, Checkerboard) {
  Plane p(32, 32);
  for (int y = 0; y < 32; ++y) {
    for (int x = 0; x < 32; ++x) p.at(x, y) = (x + y) % 2;
  }
  const auto v = mean_local_variance(p);
  EXPECT_EQ(v.window_count, 4u);
  EXPECT_DOUBLE_EQ(v.sigma_bar, 0.25);
}

TEST(LocalVariance, PartialWindowsAreIgnored) {
  // 3x2 image, window 2: one full window (left 2x2), the right column is dropped.
  const auto p = plane(3, 2, {0, 1, 5, 1, 0, 5});
  const auto v = mean_local_variance(p, 2);
  EXPECT_EQ(v.window_count, 1u);
  EXPECT_DOUBLE_EQ(v.sigma_bar, 0.25);
}

TEST(LocalVariance, TooSmallImageThrows) {
  Plane p(15, 40);
  EXPECT_THROW(mean_local_variance(p), ArgumentError);
}
