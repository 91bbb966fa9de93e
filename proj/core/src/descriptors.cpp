#include "cardie/descriptors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "cardie/csv.hpp"
#include "cardie/error.hpp"
#include "cardie/parallel.hpp"

namespace cardie {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::filesystem::path image_path(const PairManifest& m, const PairEntry& e, ImageTarget target) {
  if (target == ImageTarget::input) return m.input_of(e);
  auto gt = m.gt_of(e);
  if (!gt) throw PreconditionError("entry '" + e.id + "' has no gt_path");
  return *gt;
}

}  // namespace

ColorAnchors ColorAnchors::defaults() {
  constexpr double pi = std::numbers::pi;
  return {{{"red", 0.0},
           {"yellow", pi / 3.0},
           {"green", 2.0 * pi / 3.0},
           {"blue", 4.0 * pi / 3.0},
           {"magenta", 5.0 * pi / 3.0}},
          pi / 6.0};
}

ColorAnchors ColorAnchors::parse(const std::string& spec, double delta_theta) {
  ColorAnchors out{{}, delta_theta};
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos || colon == 0) {
      throw ConfigError("anchor '" + item + "' must look like name:angle_rad");
    }
    ColorAnchor a{item.substr(0, colon), 0.0};
    try {
      a.angle = csv::parse_double(item.substr(colon + 1));
    } catch (const Error&) {
      throw ConfigError("anchor '" + item + "' has a non-numeric angle");
    }
    out.anchors.push_back(std::move(a));
  }
  out.validate();
  return out;
}

std::string ColorAnchors::to_spec() const {
  std::string s;
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    if (i) s += ",";
    s += anchors[i].name + ":" + csv::format_double(anchors[i].angle);
  }
  return s;
}

void ColorAnchors::validate() const {
  if (anchors.empty()) throw ConfigError("at least one color anchor is required");
  if (!(delta_theta > 0.0) || delta_theta > kTwoPi) throw ConfigError("delta_theta must be in (0, 2pi]");
  for (const auto& a : anchors) {
    if (!(a.angle >= 0.0 && a.angle < kTwoPi)) {
      throw ConfigError("anchor '" + a.name + "' angle outside [0, 2pi)");
    }
  }
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    for (std::size_t j = i + 1; j < anchors.size(); ++j) {
      double d = std::fabs(anchors[i].angle - anchors[j].angle);
      d = std::min(d, kTwoPi - d);
      if (d < delta_theta - 1e-12) {
        throw ConfigError("anchor intervals of '" + anchors[i].name + "' and '" + anchors[j].name + "' overlap");
      }
    }
  }
}

std::string to_string(Luminosity level) {
  switch (level) {
    case Luminosity::low: return "low";
    case Luminosity::average: return "average";
    case Luminosity::high: return "high";
  }
  return "average";
}

ImageTarget parse_image_target(const std::string& text) {
  if (text == "input") return ImageTarget::input;
  if (text == "gt") return ImageTarget::gt;
  throw ConfigError("target must be 'input' or 'gt', got '" + text + "'");
}

std::string to_string(ImageTarget target) { return target == ImageTarget::input ? "input" : "gt"; }

double percentile(std::span<const double> values, double q) {
  if (values.empty()) throw ArgumentError("percentile of an empty set");
  if (q < 0.0 || q > 100.0) throw ArgumentError("percentile rank outside [0, 100]");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double rank = q / 100.0 * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = rank - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double median(std::span<const double> values) { return percentile(values, 50.0); }

DatasetLuminanceStats thresholds_from_maps(std::span<const LuminanceMap> maps) {
  if (maps.empty()) throw ArgumentError("no luminance maps to average");
  DatasetLuminanceStats stats;
  stats.mean_map = LuminanceMap(maps.front().width, maps.front().height);
  for (const auto& m : maps) {
    if (m.width != stats.mean_map.width || m.height != stats.mean_map.height) {
      throw ArgumentError("luminance maps differ in size; resize to a common analysis resolution first");
    }
    for (std::size_t i = 0; i < m.size(); ++i) stats.mean_map.values[i] += m.values[i];
  }
  for (double& v : stats.mean_map.values) v /= static_cast<double>(maps.size());
  stats.low_threshold = percentile(stats.mean_map.values, 20.0);
  stats.high_threshold = percentile(stats.mean_map.values, 80.0);
  stats.k = maps.size();
  return stats;
}

DatasetLuminanceStats dataset_thresholds(const PairManifest& manifest, std::size_t k, std::uint64_t seed,
                                         const DescriptorOptions& options) {
  const auto sample = subsample(manifest, k, seed);
  std::vector<LuminanceMap> maps(sample.size());
  parallel_for(sample.size(), options.jobs, [&](std::size_t i) {
    const auto& e = sample[i];
    maps[i] = luminance(load_image(image_path(sample, e, options.target), options.resolution, e.id));
  });
  auto stats = thresholds_from_maps(maps);
  stats.seed = seed;
  for (const auto& e : sample.entries()) stats.sampled_ids.push_back(e.id);
  return stats;
}

Luminosity classify_luminosity(double median_luminance, double low, double high) {
  if (median_luminance < low) return Luminosity::low;
  if (median_luminance > high) return Luminosity::high;
  return Luminosity::average;
}

LuminosityResult luminosity_flag(const LuminanceMap& lum, const DatasetLuminanceStats& stats) {
  const double med = median(lum.values);
  return {classify_luminosity(med, stats.low_threshold, stats.high_threshold), med};
}

std::vector<bool> dominant_colors(const HueHistogram& hist, const ColorAnchors& anchors) {
  const double threshold = 1.0 / static_cast<double>(anchors.size());
  std::vector<bool> flags(anchors.size(), false);
  for (std::size_t m = 0; m < anchors.size(); ++m) {
    // 1e-12 absorbs summation rounding of masses that sit exactly on the threshold
    flags[m] = hist.mass_in(anchors.anchors[m].angle, anchors.delta_theta) >= threshold - 1e-12;
  }
  return flags;
}

DescriptorVector describe_image(const std::string& id, const RgbImage& image, const DatasetLuminanceStats& stats,
                                const ColorAnchors& anchors, const DescriptorOptions& options) {
  DescriptorVector v;
  v.id = id;
  const auto lum = luminosity_flag(luminance(image), stats);
  v.luminosity = lum.level;
  v.median_luminance = lum.median;
  v.colors = dominant_colors(hue_histogram(image, options.hue_bins, options.chroma_epsilon, options.hue_mode), anchors);
  return v;
}

DescriptorRun build_descriptor_table(const PairManifest& manifest, const DatasetLuminanceStats& stats,
                                     const ColorAnchors& anchors, const DescriptorOptions& options) {
  anchors.validate();
  std::vector<std::optional<DescriptorVector>> slots(manifest.size());
  std::vector<std::string> errors(manifest.size());
  parallel_for(manifest.size(), options.jobs, [&](std::size_t i) {
    const auto& e = manifest[i];
    try {
      const auto image = load_image(image_path(manifest, e, options.target), options.resolution, e.id);
      if (image.width != stats.mean_map.width || image.height != stats.mean_map.height) {
        throw ArgumentError("image '" + e.id + "' not at the threshold analysis resolution");
      }
      slots[i] = describe_image(e.id, image, stats, anchors, options);
    } catch (const Error& err) {
      if (!options.partial) throw;
      errors[i] = err.what();
    }
  });
  DescriptorRun run;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (slots[i]) {
      run.vectors.push_back(std::move(*slots[i]));
    } else {
      run.failures.push_back({manifest[i].id, errors[i]});
    }
  }
  return run;
}

}  // namespace cardie
