#include "cardie/colormath.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cardie/csv.hpp"
#include "cardie/error.hpp"

namespace cardie {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_angle(double theta) {
  double t = std::fmod(theta, kTwoPi);
  if (t < 0) t += kTwoPi;
  if (t >= kTwoPi) t = 0.0;  // fmod rounding can land exactly on 2pi
  return t;
}

std::size_t bin_index(double theta, std::size_t bins) {
  const auto i = static_cast<std::size_t>(theta / kTwoPi * static_cast<double>(bins));
  return std::min(i, bins - 1);
}

HueHistogram empty_histogram(int bins) {
  if (bins < 1) throw ArgumentError("hue histogram needs at least one bin");
  HueHistogram h;
  h.masses.assign(bins, 0.0);
  h.bin_edges.resize(bins);
  for (int i = 0; i < bins; ++i) h.bin_edges[i] = kTwoPi * i / bins;
  return h;
}

}  // namespace

double luminance(double r, double g, double b) { return 0.299 * r + 0.587 * g + 0.114 * b; }

LuminanceMap luminance(const RgbImage& image) {
  LuminanceMap out(image.width, image.height);
  for (std::size_t i = 0; i < image.pixel_count(); ++i) {
    out.values[i] = luminance(image.r[i], image.g[i], image.b[i]);
  }
  return out;
}

std::pair<Plane, Plane> opponent(const RgbImage& image) {
  Plane o1(image.width, image.height), o2(image.width, image.height);
  for (std::size_t i = 0; i < image.pixel_count(); ++i) {
    o1.values[i] = (image.r[i] + image.g[i] + image.b[i] - 1.5) / 1.5;
    o2.values[i] = image.r[i] - image.g[i];
  }
  return {std::move(o1), std::move(o2)};
}

HueMode parse_hue_mode(const std::string& text) {
  if (text == "opponent") return HueMode::opponent;
  if (text == "standard") return HueMode::standard;
  throw ConfigError("hue_mode must be 'opponent' or 'standard', got '" + text + "'");
}

std::string to_string(HueMode mode) { return mode == HueMode::opponent ? "opponent" : "standard"; }

HueSample hue_of(double r, double g, double b, HueMode mode) {
  double x = 0.0, y = 0.0;
  if (mode == HueMode::opponent) {
    x = (r + g + b - 1.5) / 1.5;
    y = r - g;
  } else {
    x = r - 0.5 * (g + b);
    y = 0.5 * std::sqrt(3.0) * (g - b);
  }
  return {wrap_angle(std::atan2(y, x)), std::hypot(x, y)};
}

double HueHistogram::bin_width() const { return kTwoPi / static_cast<double>(masses.size()); }

double HueHistogram::bin_center(std::size_t i) const { return bin_edges[i] + 0.5 * bin_width(); }

double HueHistogram::total_mass() const {
  double s = 0.0;
  for (double m : masses) s += m;
  return s;
}

double HueHistogram::mass_in(double center, double width) const {
  if (masses.empty() || width <= 0) return 0.0;
  if (width >= kTwoPi) return total_mass();
  const std::size_t n = masses.size();
  const double w = bin_width();

  // Cumulative mass from 0 up to angle t in [0, 2pi], linear inside a bin.
  auto cumulative = [&](double t) {
    const double pos = t / w;
    const auto full = std::min(static_cast<std::size_t>(pos), n);
    double s = 0.0;
    for (std::size_t i = 0; i < full; ++i) s += masses[i];
    if (full < n) s += masses[full] * (pos - static_cast<double>(full));
    return s;
  };

  const double lo = wrap_angle(center - 0.5 * width);
  const double hi = lo + width;
  if (hi <= kTwoPi) return cumulative(hi) - cumulative(lo);
  return (cumulative(kTwoPi) - cumulative(lo)) + cumulative(hi - kTwoPi);
}

HueHistogram hue_histogram(const RgbImage& image, int bins, double chroma_epsilon, HueMode mode) {
  HueHistogram h = empty_histogram(bins);
  const std::size_t n = image.pixel_count();
  if (n == 0) return h;
  std::size_t chromatic = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto s = hue_of(image.r[i], image.g[i], image.b[i], mode);
    if (s.chroma < chroma_epsilon) continue;
    h.masses[bin_index(s.theta, h.masses.size())] += 1.0;
    ++chromatic;
  }
  h.chroma_excluded_fraction = static_cast<double>(n - chromatic) / static_cast<double>(n);
  if (chromatic > 0) {
    for (double& m : h.masses) m /= static_cast<double>(chromatic);
  }
  return h;
}

HueHistogram bin_hue_angles(std::span<const double> angles, int bins) {
  HueHistogram h = empty_histogram(bins);
  for (double a : angles) h.masses[bin_index(wrap_angle(a), h.masses.size())] += 1.0;
  if (!angles.empty()) {
    for (double& m : h.masses) m /= static_cast<double>(angles.size());
  }
  return h;
}

std::string hue_histogram_csv(const HueHistogram& hist) {
  csv::Writer w({"bin_center_rad", "mass"});
  for (std::size_t i = 0; i < hist.bins(); ++i) {
    w.add({csv::format_double(hist.bin_center(i)), csv::format_double(hist.masses[i])});
  }
  return w.str();
}

VarianceStats mean_local_variance(const LuminanceMap& lum, int window) {
  if (window < 1) throw ArgumentError("variance window must be positive");
  if (lum.width < window || lum.height < window) {
    throw ArgumentError("image " + std::to_string(lum.width) + "x" + std::to_string(lum.height) +
                        " smaller than variance window " + std::to_string(window));
  }
  const int nx = lum.width / window;
  const int ny = lum.height / window;
  const double count = static_cast<double>(window) * window;
  double total = 0.0;
  for (int wy = 0; wy < ny; ++wy) {
    for (int wx = 0; wx < nx; ++wx) {
      double mean = 0.0;
      for (int y = wy * window; y < (wy + 1) * window; ++y)
        for (int x = wx * window; x < (wx + 1) * window; ++x) mean += lum.at(x, y);
      mean /= count;
      double ss = 0.0;
      for (int y = wy * window; y < (wy + 1) * window; ++y)
        for (int x = wx * window; x < (wx + 1) * window; ++x) {
          const double d = lum.at(x, y) - mean;
          ss += d * d;
        }
      total += ss / count;
    }
  }
  VarianceStats out;
  out.window = window;
  out.window_count = std::size_t(nx) * ny;
  out.sigma_bar = total / static_cast<double>(out.window_count);
  return out;
}

}  // namespace cardie
