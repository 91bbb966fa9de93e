#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "cardie/cluster_report.hpp"
#include "cardie/image.hpp"
#include "cardie/manifest.hpp"
#include "cardie/random.hpp"

namespace cardie {

using Range = std::pair<double, double>;

struct NoiseSpec {
  Range base_a{0.3, 0.5};
  Range base_b{0.1, 0.2};
  Range amplified_a{0.6, 1.0};
  Range amplified_b{0.2, 0.4};
  std::vector<int> amplified_labels;
  std::uint64_t seed = 0;

  void validate() const;
};

/// One draw from Normal(x, variance a x + b), unclamped.
double sample_signal_dependent(double x, double a, double b, Rng& rng);

struct NoisyImage {
  RgbImage image;
  double clamped_fraction = 0.0;  ///< samples that fell outside [0, 1] before clamping
};

/// Independent signal-dependent noise on every sample, pixel-major (r, g, b), then clamped.
NoisyImage noisify(const RgbImage& clean, double a, double b, Rng& rng);

/// The `count` smallest clusters (noise excluded), ties broken by lower label.
std::vector<int> least_represented(const Assignment& assignment, std::size_t count = 2);

struct NoiseRecord {
  std::string id;
  double a = 0.0;
  double b = 0.0;
  double clamped_fraction = 0.0;
};

struct NoisyDataset {
  PairManifest manifest;  ///< input = noisy image, gt = the clean original
  std::vector<NoiseRecord> records;
};

struct NoisifyOptions {
  int resolution = 0;  ///< <= 0 keeps the native size of each ground truth
  unsigned jobs = 1;
};

/// Draws (a, b) per pair from the base or amplified ranges by cluster, noisifies the ground
/// truth and writes `<out_dir>/images/<id>.png`. Per-pair randomness derives from (seed, id).
NoisyDataset build_noisy_dataset(const PairManifest& manifest, const Assignment& assignment, const NoiseSpec& spec,
                                 const std::filesystem::path& out_dir, const NoisifyOptions& options = {});

std::string noise_records_csv(const std::vector<NoiseRecord>& records);

/// File-system safe stem for an id; distinct ids map to distinct stems within one call.
std::vector<std::string> file_stems(const std::vector<std::string>& ids);

}  // namespace cardie
