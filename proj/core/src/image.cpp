#include "cardie/image.hpp"

#include <algorithm>
#include <cmath>
#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "cardie/error.hpp"

namespace cardie {

namespace {

cv::Mat to_mat(const RgbImage& image) {
  cv::Mat mat(image.height, image.width, CV_64FC3);
  for (int y = 0; y < image.height; ++y) {
    auto* row = mat.ptr<cv::Vec3d>(y);
    for (int x = 0; x < image.width; ++x) {
      const std::size_t i = std::size_t(y) * image.width + x;
      row[x] = cv::Vec3d(image.r[i], image.g[i], image.b[i]);
    }
  }
  return mat;
}

RgbImage from_mat(const cv::Mat& mat) {
  RgbImage out(mat.cols, mat.rows);
  for (int y = 0; y < mat.rows; ++y) {
    const auto* row = mat.ptr<cv::Vec3d>(y);
    for (int x = 0; x < mat.cols; ++x) {
      const std::size_t i = std::size_t(y) * mat.cols + x;
      out.r[i] = std::clamp(row[x][0], 0.0, 1.0);
      out.g[i] = std::clamp(row[x][1], 0.0, 1.0);
      out.b[i] = std::clamp(row[x][2], 0.0, 1.0);
    }
  }
  return out;
}

}  // namespace

RgbImage resize_bilinear(const RgbImage& image, int width, int height) {
  if (width <= 0 || height <= 0) throw ArgumentError("resize target must be positive");
  if (image.width == width && image.height == height) return image;
  cv::Mat resized;
  cv::resize(to_mat(image), resized, cv::Size(width, height), 0, 0, cv::INTER_LINEAR);
  return from_mat(resized);
}

RgbImage load_image(const std::filesystem::path& path, int resolution, const std::string& entry_id) {
  cv::Mat raw;
  try {
    raw = cv::imread(path.string(), cv::IMREAD_UNCHANGED | cv::IMREAD_ANYDEPTH | cv::IMREAD_ANYCOLOR);
  } catch (const cv::Exception& e) {
    throw DecodeError(entry_id, path.string() + ": " + e.what());
  }
  if (raw.empty()) throw DecodeError(entry_id, "cannot decode " + path.string());

  double scale = 0.0;
  switch (raw.depth()) {
    case CV_8U: scale = 1.0 / 255.0; break;
    case CV_16U: scale = 1.0 / 65535.0; break;
    default: throw DecodeError(entry_id, path.string() + ": unsupported bit depth (need 8 or 16 bit)");
  }

  cv::Mat bgr;
  switch (raw.channels()) {
    case 1: cv::cvtColor(raw, bgr, cv::COLOR_GRAY2BGR); break;
    case 3: bgr = raw; break;
    case 4: cv::cvtColor(raw, bgr, cv::COLOR_BGRA2BGR); break;
    default: throw DecodeError(entry_id, path.string() + ": unsupported channel count");
  }
  cv::Mat rgb;
  cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
  cv::Mat unit;
  rgb.convertTo(unit, CV_64FC3, scale);

  if (resolution > 0 && (unit.cols != resolution || unit.rows != resolution)) {
    cv::Mat resized;
    cv::resize(unit, resized, cv::Size(resolution, resolution), 0, 0, cv::INTER_LINEAR);
    unit = resized;
  }
  return from_mat(unit);
}

void save_png(const RgbImage& image, const std::filesystem::path& path, int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16) throw ArgumentError("bit depth must be 8 or 16");
  const double max = bit_depth == 8 ? 255.0 : 65535.0;
  cv::Mat out(image.height, image.width, bit_depth == 8 ? CV_8UC3 : CV_16UC3);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      const std::size_t i = std::size_t(y) * image.width + x;
      auto q = [&](double v) { return std::lround(std::clamp(v, 0.0, 1.0) * max); };
      if (bit_depth == 8) {
        out.at<cv::Vec3b>(y, x) = cv::Vec3b(static_cast<uchar>(q(image.b[i])), static_cast<uchar>(q(image.g[i])),
                                            static_cast<uchar>(q(image.r[i])));
      } else {
        out.at<cv::Vec3w>(y, x) = cv::Vec3w(static_cast<ushort>(q(image.b[i])), static_cast<ushort>(q(image.g[i])),
                                            static_cast<ushort>(q(image.r[i])));
      }
    }
  }
  bool ok = false;
  try {
    ok = cv::imwrite(path.string(), out, {cv::IMWRITE_PNG_COMPRESSION, 6});
  } catch (const cv::Exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
  if (!ok) throw IoError("cannot write " + path.string());
}

}  // namespace cardie
