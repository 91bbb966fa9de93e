#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace cardie {

/// Row-major plane of doubles.
struct Plane {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  Plane() = default;
  Plane(int w, int h, double fill = 0.0) : width(w), height(h), values(std::size_t(w) * h, fill) {}

  std::size_t size() const noexcept { return values.size(); }
  double& at(int x, int y) { return values[std::size_t(y) * width + x]; }
  double at(int x, int y) const { return values[std::size_t(y) * width + x]; }
  std::span<const double> span() const noexcept { return values; }

  friend bool operator==(const Plane&, const Plane&) = default;
};

/// Planar RGB with samples in [0, 1].
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<double> r, g, b;

  RgbImage() = default;
  RgbImage(int w, int h, double rv = 0.0, double gv = 0.0, double bv = 0.0)
      : width(w), height(h), r(std::size_t(w) * h, rv), g(std::size_t(w) * h, gv), b(std::size_t(w) * h, bv) {}

  std::size_t pixel_count() const noexcept { return r.size(); }
  void set(int x, int y, double rv, double gv, double bv) {
    const std::size_t i = std::size_t(y) * width + x;
    r[i] = rv;
    g[i] = gv;
    b[i] = bv;
  }

  friend bool operator==(const RgbImage&, const RgbImage&) = default;
};

/// Default side length of the square analysis grid.
inline constexpr int kDefaultAnalysisResolution = 256;

/// Decodes an 8- or 16-bit raster (any format OpenCV reads), normalizes by 255 or 65535
/// and bilinearly resizes to resolution x resolution. resolution <= 0 keeps the native size.
/// Gray and alpha channels are handled: gray is replicated, alpha is dropped.
RgbImage load_image(const std::filesystem::path& path, int resolution = kDefaultAnalysisResolution,
                    const std::string& entry_id = {});

/// Bilinear resize of an in-memory image (same kernel as load_image).
RgbImage resize_bilinear(const RgbImage& image, int width, int height);

/// Writes an 8-bit (rounded) or 16-bit lossless PNG.
void save_png(const RgbImage& image, const std::filesystem::path& path, int bit_depth = 8);

}  // namespace cardie
