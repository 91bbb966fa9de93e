#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "cardie/descriptor_table.hpp"
#include "cardie/descriptors.hpp"
#include "cardie/error.hpp"
#include "support.hpp"

using namespace cardie;

namespace {

constexpr double kPi = std::numbers::pi;

HueHistogram histogram_with(std::vector<std::pair<double, double>> angle_mass) {
  HueHistogram h = bin_hue_angles(std::vector<double>{}, 360);
  for (auto& m : h.masses) m = 0;
  for (const auto& [angle, mass] : angle_mass) {
    const auto bin = static_cast<std::size_t>(std::floor(angle / (2 * kPi) * 360)) % 360;
    h.masses[bin] += mass;
  }
  return h;
}

}  // namespace

TEST(Percentile, LinearInterpolation) {
  std::vector<double> v(100);
  for (int i = 0; i < 100; ++i) v[static_cast<std::size_t>(i)] = 99 - i;  // unsorted on purpose
  EXPECT_NEAR(percentile(v, 20), 19.8, 1e-12);
  EXPECT_NEAR(percentile(v, 80), 79.2, 1e-12);
  EXPECT_DOUBLE_EQ(percentile(v, 0), 0);
  EXPECT_DOUBLE_EQ(percentile(v, 100), 99);
  EXPECT_DOUBLE_EQ(median(std::vector<double>{3, 1, 2, 4}), 2.5);
}

TEST(Thresholds, IdenticalConstantImages) {
  std::vector<LuminanceMap> maps(4, LuminanceMap(8, 8, 0.5));
  const auto s = thresholds_from_maps(maps);
  EXPECT_DOUBLE_EQ(s.low_threshold, 0.5);
  EXPECT_DOUBLE_EQ(s.high_threshold, 0.5);
}

TEST(Thresholds, TwoConstantImagesAverage) {
  std::vector<LuminanceMap> maps{LuminanceMap(4, 4, 0.2), LuminanceMap(4, 4, 0.8)};
  const auto s = thresholds_from_maps(maps);
  for (double v : s.mean_map.values) EXPECT_DOUBLE_EQ(v, 0.5);
  EXPECT_DOUBLE_EQ(s.low_threshold, 0.5);
  EXPECT_DOUBLE_EQ(s.high_threshold, 0.5);
}

TEST(Thresholds, RampMeanMap) {
  LuminanceMap m(10, 10);
  for (int i = 0; i < 100; ++i) m.values[static_cast<std::size_t>(i)] = i / 99.0;
  const auto s = thresholds_from_maps(std::vector<LuminanceMap>{m});
  EXPECT_NEAR(s.low_threshold, 19.8 / 99, 1e-12);
  EXPECT_NEAR(s.high_threshold, 79.2 / 99, 1e-12);
}

TEST(LuminosityFlag, BoundariesAreAverage) {
  EXPECT_EQ(classify_luminosity(0.2, 0.2, 0.6), Luminosity::average);
  EXPECT_EQ(classify_luminosity(0.6, 0.2, 0.6), Luminosity::average);
  EXPECT_EQ(classify_luminosity(0.05, 0.2, 0.6), Luminosity::low);
  EXPECT_EQ(classify_luminosity(0.7, 0.2, 0.6), Luminosity::high);
  DatasetLuminanceStats s;
  s.low_threshold = 0.3;
  s.high_threshold = 0.6;
  const auto r = luminosity_flag(LuminanceMap(4, 4, 0.3), s);
  EXPECT_EQ(r.level, Luminosity::average);
  EXPECT_DOUBLE_EQ(r.median, 0.3);
}

TEST(DominantColors, AllMassInBlue) {
  const auto a = ColorAnchors::defaults();
  const auto flags = dominant_colors(histogram_with({{4 * kPi / 3, 1.0}}), a);
  EXPECT_EQ(flags, (std::vector<bool>{false, false, false, true, false}));
}

TEST(DominantColors, QuarterSplitFlagsFour) {
  const auto a = ColorAnchors::defaults();
  const auto h = histogram_with({{0.01, 0.25}, {kPi / 3, 0.25}, {2 * kPi / 3, 0.25}, {4 * kPi / 3, 0.25}});
  EXPECT_EQ(dominant_colors(h, a), (std::vector<bool>{true, true, true, true, false}));
}

TEST(DominantColors, BelowOneOverLIsNotFlagged) {
  const auto a = ColorAnchors::defaults();
  const auto h = histogram_with({{kPi / 3, 0.19}, {kPi / 2, 0.81}});  // pi/2 lies between anchors
  EXPECT_EQ(dominant_colors(h, a), (std::vector<bool>(5, false)));
  const auto at = histogram_with({{kPi / 3, 0.2}, {kPi / 2, 0.8}});
  EXPECT_TRUE(dominant_colors(at, a)[1]);
}

TEST(DominantColors, RedIntervalWrapsAroundZero) {
  const auto a = ColorAnchors::defaults();
  const auto h = histogram_with({{2 * kPi - 0.1, 0.15}, {0.1, 0.15}, {kPi, 0.7}});
  EXPECT_TRUE(dominant_colors(h, a)[0]);
}

TEST(DominantColors, MonotoneInAddedMass) {
  const auto a = ColorAnchors::defaults();
  auto h = histogram_with({{4 * kPi / 3, 0.3}, {kPi, 0.7}});
  ASSERT_TRUE(dominant_colors(h, a)[3]);
  for (int step = 0; step < 10; ++step) {
    h.masses[240] += 0.05;  // inside the blue interval
    double total = 0;
    for (double m : h.masses) total += m;
    for (auto& m : h.masses) m /= total;
    EXPECT_TRUE(dominant_colors(h, a)[3]);
  }
}

TEST(DominantColors, AchromaticHasNoFlags) {
  const auto a = ColorAnchors::defaults();
  const auto h = hue_histogram(RgbImage(4, 4, 0.5, 0.5, 0.5));
  EXPECT_EQ(dominant_colors(h, a), (std::vector<bool>(5, false)));
}

TEST(Anchors, ParseAndValidate) {
  const auto a = ColorAnchors::parse("red:0,blue:4.18879", kPi / 6);
  ASSERT_EQ(a.size(), 2u);
  EXPECT_EQ(a.anchors[1].name, "blue");
  EXPECT_NO_THROW(a.validate());
  EXPECT_THROW(ColorAnchors::parse("a:0,b:0.3", kPi / 6).validate(), ConfigError);  // overlap
  EXPECT_THROW(ColorAnchors::parse("a:7", kPi / 6).validate(), ConfigError);
  EXPECT_THROW(ColorAnchors::parse("a0.3", kPi / 6), ConfigError);
  const auto d = ColorAnchors::defaults();
  EXPECT_EQ(ColorAnchors::parse(d.to_spec(), d.delta_theta).anchors.size(), 5u);
  EXPECT_NEAR(d.delta_theta, kPi / 6, 1e-15);
}

TEST(DescribeImage, DarkBlueSky) {
  RgbImage img(16, 16);
  for (int y = 0; y < 16; ++y) {
    for (int x = 0; x < 16; ++x) {
      double r, g, b;
      testing_support::hued_pixel(0.12, 0.08, 4 * kPi / 3, r, g, b);
      img.set(x, y, r, g, b);
    }
  }
  DatasetLuminanceStats s;
  s.low_threshold = 0.3;
  s.high_threshold = 0.7;
  DescriptorOptions opts;
  opts.hue_mode = HueMode::standard;
  const auto v = describe_image("sky", img, s, ColorAnchors::defaults(), opts);
  EXPECT_EQ(v.luminosity, Luminosity::low);
  EXPECT_EQ(v.colors, (std::vector<bool>{false, false, false, true, false}));
}

TEST(DescribeImage, GrayImageHasOnlyLuminosity) {
  DatasetLuminanceStats s;
  s.low_threshold = 0.3;
  s.high_threshold = 0.7;
  const auto v = describe_image("g", RgbImage(8, 8, 0.5, 0.5, 0.5), s, ColorAnchors::defaults());
  EXPECT_EQ(v.luminosity, Luminosity::average);
  EXPECT_EQ(v.colors, (std::vector<bool>(5, false)));
}

TEST(DescriptorTable, ColumnsAndNames) {
  const auto anchors = ColorAnchors::defaults();
  DescriptorVector v{"a", 0.1, Luminosity::low, {true, false, false, true, false}};
  const auto t = to_table({v}, anchors);
  EXPECT_EQ(t.columns.front(), "lum_low");
  EXPECT_EQ(t.columns.size(), 8u);
  std::string name;
  for (std::size_t c = 0; c < t.columns.size(); ++c) {
    if (t.rows[0][c]) name += column_abbreviation(t.columns[c]);
  }
  EXPECT_EQ(name, "DaRB");
  EXPECT_EQ(column_description("lum_low"), "dark lum");
  EXPECT_EQ(column_description("color_blue"), "blue");
}

TEST(DescriptorTable, CsvRoundTrip) {
  const auto anchors = ColorAnchors::defaults();
  std::vector<DescriptorVector> vs{{"a", 0.1, Luminosity::low, {true, false, false, true, false}},
                                   {"b", 0.95, Luminosity::high, {false, false, true, false, false}}};
  const auto t = to_table(vs, anchors);
  const auto back = parse_descriptor_table(descriptor_table_csv(t));
  EXPECT_EQ(back.ids, t.ids);
  EXPECT_EQ(back.columns, t.columns);
  EXPECT_EQ(back.rows, t.rows);
  ASSERT_TRUE(back.median_luminance);
  EXPECT_DOUBLE_EQ((*back.median_luminance)[1], 0.95);
}

TEST(DescriptorTable, RejectsEmptyAndNonBoolean) {
  EXPECT_THROW(parse_descriptor_table("id,lum_low\n"), SchemaError);
  EXPECT_THROW(parse_descriptor_table(""), SchemaError);
  EXPECT_THROW(parse_descriptor_table("id,x\na,2\n"), SchemaError);
  EXPECT_THROW(parse_descriptor_table("id,median_luminance\na,0.5\n"), SchemaError);
  EXPECT_NO_THROW(parse_descriptor_table("id,NH,Nat\na,true,false\n"));
}

TEST(DescriptorTable, FromLabelsOneHot) {
  PairManifest m({{"a", "a.png", {}, {{"loc", "indoor"}, {"time", "day"}}, 0},
                  {"b", "b.png", {}, {{"loc", "outdoor"}, {"time", "day"}}, 0}},
                 "");
  const auto t = table_from_labels(m);
  EXPECT_EQ(t.columns, (std::vector<std::string>{"loc=indoor", "loc=outdoor", "time=day"}));
  EXPECT_EQ(t.rows[1], (BoolRow{0, 1, 1}));
  EXPECT_EQ(column_abbreviation("loc=outdoor"), "outdoor");
}
