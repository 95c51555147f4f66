#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "texassoc/error.hpp"

namespace texassoc {

/// 8-bit RGB image, row-major, interleaved.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  RgbImage() = default;
  RgbImage(int w, int h) : width(w), height(h) {
    if (w < 1 || h < 1) {
      throw Error(ErrorCode::InvalidDimensions,
                  "image dimensions must be >= 1, got " + std::to_string(w) + "x" +
                      std::to_string(h));
    }
    pixels.assign(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3, 0);
  }

  std::uint8_t& at(int x, int y, int c) {
    return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + c];
  }
  std::uint8_t at(int x, int y, int c) const {
    return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + c];
  }

  static RgbImage filled(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    RgbImage img(w, h);
    for (std::size_t i = 0; i < img.pixels.size(); i += 3) {
      img.pixels[i] = r;
      img.pixels[i + 1] = g;
      img.pixels[i + 2] = b;
    }
    return img;
  }

  bool operator==(const RgbImage&) const = default;
};

namespace detail {

inline RgbImage from_bgr_mat(const cv::Mat& bgr) {
  RgbImage img(bgr.cols, bgr.rows);
  for (int y = 0; y < bgr.rows; ++y) {
    const auto* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < bgr.cols; ++x) {
      img.at(x, y, 0) = row[x][2];
      img.at(x, y, 1) = row[x][1];
      img.at(x, y, 2) = row[x][0];
    }
  }
  return img;
}

// Grayscale is replicated to three channels and alpha is dropped by
// IMREAD_COLOR. EXIF orientation is not applied.
constexpr int kDecodeFlags = cv::IMREAD_COLOR | cv::IMREAD_IGNORE_ORIENTATION;

}  // namespace detail

inline RgbImage decode_image(std::span<const std::uint8_t> bytes) {
  if (bytes.empty()) throw Error(ErrorCode::ImageDecodeError, "empty image buffer");
  const cv::Mat buffer(1, static_cast<int>(bytes.size()), CV_8UC1,
                       const_cast<std::uint8_t*>(bytes.data()));
  cv::Mat bgr = cv::imdecode(buffer, detail::kDecodeFlags);
  if (bgr.empty()) throw Error(ErrorCode::ImageDecodeError, "cannot decode image buffer");
  return detail::from_bgr_mat(bgr);
}

inline RgbImage load_image(const std::filesystem::path& path) {
  cv::Mat bgr = cv::imread(path.string(), detail::kDecodeFlags);
  if (bgr.empty()) throw Error(ErrorCode::ImageDecodeError, "cannot decode image: " + path.string());
  return detail::from_bgr_mat(bgr);
}

}  // namespace texassoc
