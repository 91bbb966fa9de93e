#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cardie/colormath.hpp"
#include "cardie/manifest.hpp"

namespace cardie {

struct ColorAnchor {
  std::string name;
  double angle;  ///< radians in [0, 2 pi)
};

/// Candidate dominant colors and the width of the hue interval credited to each.
struct ColorAnchors {
  std::vector<ColorAnchor> anchors;
  double delta_theta;

  /// red 0, yellow pi/3, green 2pi/3, blue 4pi/3, magenta 5pi/3; delta_theta = pi/6.
  static ColorAnchors defaults();
  /// "name:angle,name:angle,..." with angles in radians.
  static ColorAnchors parse(const std::string& spec, double delta_theta);
  std::string to_spec() const;

  std::size_t size() const noexcept { return anchors.size(); }
  /// Throws ConfigError on out-of-range angles or overlapping intervals.
  void validate() const;
};

enum class Luminosity { low, average, high };
std::string to_string(Luminosity level);

/// Thresholds derived from the per-pixel mean luminance of K sampled images.
struct DatasetLuminanceStats {
  LuminanceMap mean_map;
  double low_threshold = 0.0;   ///< 20th percentile of mean_map
  double high_threshold = 0.0;  ///< 80th percentile of mean_map
  std::size_t k = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> sampled_ids;
};

struct DescriptorVector {
  std::string id;
  double median_luminance = 0.0;
  Luminosity luminosity = Luminosity::average;
  std::vector<bool> colors;  ///< one flag per anchor, in anchor order
};

enum class ImageTarget { input, gt };
ImageTarget parse_image_target(const std::string& text);
std::string to_string(ImageTarget target);

struct DescriptorOptions {
  int resolution = kDefaultAnalysisResolution;
  int hue_bins = kDefaultHueBins;
  double chroma_epsilon = kDefaultChromaEpsilon;
  HueMode hue_mode = HueMode::opponent;
  ImageTarget target = ImageTarget::input;
  unsigned jobs = 1;
  /// Collect per-image failures instead of aborting on the first one.
  bool partial = false;
};

/// Linear interpolation between order statistics (rank q/100 * (n - 1)).
double percentile(std::span<const double> values, double q);
double median(std::span<const double> values);

DatasetLuminanceStats thresholds_from_maps(std::span<const LuminanceMap> maps);

/// Loads K sampled images of the chosen target and computes the mean map and thresholds.
DatasetLuminanceStats dataset_thresholds(const PairManifest& manifest, std::size_t k, std::uint64_t seed,
                                         const DescriptorOptions& options = {});

struct LuminosityResult {
  Luminosity level;
  double median;
};
/// Strictly below low -> low, strictly above high -> high, otherwise average.
LuminosityResult luminosity_flag(const LuminanceMap& lum, const DatasetLuminanceStats& stats);
Luminosity classify_luminosity(double median_luminance, double low, double high);

/// Anchor m is dominant iff the histogram mass within +-delta_theta/2 of it is >= 1/l.
std::vector<bool> dominant_colors(const HueHistogram& hist, const ColorAnchors& anchors);

DescriptorVector describe_image(const std::string& id, const RgbImage& image, const DatasetLuminanceStats& stats,
                                const ColorAnchors& anchors, const DescriptorOptions& options = {});

struct DescriptorFailure {
  std::string id;
  std::string message;
};

struct DescriptorRun {
  std::vector<DescriptorVector> vectors;  ///< manifest order
  std::vector<DescriptorFailure> failures;
};

DescriptorRun build_descriptor_table(const PairManifest& manifest, const DatasetLuminanceStats& stats,
                                     const ColorAnchors& anchors, const DescriptorOptions& options = {});

}  // namespace cardie
