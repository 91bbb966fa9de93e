#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cardie/image.hpp"

namespace cardie {

using LuminanceMap = Plane;

/// L = 0.299 R + 0.587 G + 0.114 B per pixel.
LuminanceMap luminance(const RgbImage& image);
double luminance(double r, double g, double b);

/// O1 = (R + G + B - 1.5) / 1.5, O2 = R - G.
std::pair<Plane, Plane> opponent(const RgbImage& image);

/// Which angle convention produces the hue of a pixel.
///  - opponent: theta = atan2(O2, O1) in the opponent coordinates above.
///  - standard: theta = atan2(sqrt(3)(G - B), 2R - G - B), the hexcone hue (red 0, yellow pi/3, ...).
enum class HueMode { opponent, standard };

HueMode parse_hue_mode(const std::string& text);
std::string to_string(HueMode mode);

inline constexpr int kDefaultHueBins = 360;
inline constexpr double kDefaultChromaEpsilon = 1e-3;

struct HueHistogram {
  /// Lower edge of each bin; bins are uniform over [0, 2 pi).
  std::vector<double> bin_edges;
  /// Mass per bin; sums to 1 if any pixel was chromatic, else all zero.
  std::vector<double> masses;
  /// Fraction of pixels whose chroma fell below the epsilon.
  double chroma_excluded_fraction = 0.0;

  std::size_t bins() const noexcept { return masses.size(); }
  double bin_width() const;
  double bin_center(std::size_t i) const;
  double total_mass() const;

  /// Integral of the histogram density over [center - width/2, center + width/2] on the circle.
  /// Partially covered bins are credited proportionally to their covered length.
  double mass_in(double center, double width) const;
};

/// Angle in [0, 2 pi) and the chroma magnitude used for the achromatic test.
struct HueSample {
  double theta;
  double chroma;
};
HueSample hue_of(double r, double g, double b, HueMode mode = HueMode::opponent);

HueHistogram hue_histogram(const RgbImage& image, int bins = kDefaultHueBins,
                           double chroma_epsilon = kDefaultChromaEpsilon, HueMode mode = HueMode::opponent);

/// Normalized histogram of raw angles (any real value, wrapped onto the circle).
HueHistogram bin_hue_angles(std::span<const double> angles, int bins = kDefaultHueBins);

/// CSV rows (bin_center_rad, mass).
std::string hue_histogram_csv(const HueHistogram& hist);

inline constexpr int kDefaultVarianceWindow = 16;

struct VarianceStats {
  int window = kDefaultVarianceWindow;
  std::size_t window_count = 0;
  /// Mean of population variances over all full, non-overlapping windows.
  double sigma_bar = 0.0;
};

VarianceStats mean_local_variance(const LuminanceMap& lum, int window = kDefaultVarianceWindow);

}  // namespace cardie
