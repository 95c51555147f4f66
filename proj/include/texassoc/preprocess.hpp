#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "texassoc/error.hpp"
#include "texassoc/image.hpp"

namespace texassoc {

inline constexpr int kResizeSide = 256;
inline constexpr int kCropSide = 224;

/// Channel-first 3x224x224 float tensor, RGB channel order.
class InputTensor {
 public:
  static constexpr std::size_t kChannels = 3;
  static constexpr std::size_t kHeight = kCropSide;
  static constexpr std::size_t kWidth = kCropSide;
  static constexpr std::size_t kSize = kChannels * kHeight * kWidth;

  InputTensor() : data_(kSize, 0.0f) {}
  explicit InputTensor(std::vector<float> data) : data_(std::move(data)) {
    if (data_.size() != kSize) {
      throw Error(ErrorCode::ShapeMismatch, "tensor must hold 3x224x224 values, got " +
                                                std::to_string(data_.size()));
    }
  }

  static InputTensor constant(float value) { return InputTensor(std::vector<float>(kSize, value)); }

  float& at(std::size_t c, std::size_t y, std::size_t x) { return data_[(c * kHeight + y) * kWidth + x]; }
  float at(std::size_t c, std::size_t y, std::size_t x) const {
    return data_[(c * kHeight + y) * kWidth + x];
  }

  std::span<const float> values() const noexcept { return data_; }
  std::span<float> values() noexcept { return data_; }
  std::span<const float> channel(std::size_t c) const {
    return std::span<const float>(data_).subspan(c * kHeight * kWidth, kHeight * kWidth);
  }

  bool operator==(const InputTensor&) const = default;

 private:
  std::vector<float> data_;
};

struct NormalizationSpec {
  std::array<double, 3> mean{0.485, 0.456, 0.406};
  std::array<double, 3> stddev{0.229, 0.224, 0.225};

  void validate() const {
    for (std::size_t c = 0; c < 3; ++c) {
      if (!(stddev[c] > 0.0) || !std::isfinite(stddev[c]) || !std::isfinite(mean[c])) {
        throw Error(ErrorCode::InvalidNormalization,
                    "std must be positive and finite for every channel");
      }
    }
  }

  bool operator==(const NormalizationSpec&) const = default;
};

/// The statistics published with ImageNet-pretrained torchvision weights.
inline NormalizationSpec imagenet_normalization() { return {}; }

enum class ResizeMode { Square, ShortestSide };

// Antialiased bilinear resampling, bit-compatible with Pillow's
// Image.resize(..., BILINEAR): separable triangle filter whose support widens
// with the downscale factor, 22-bit fixed-point coefficients, and 8-bit
// rounding between the horizontal and vertical passes.
namespace detail {

inline constexpr int kPrecisionBits = 32 - 8 - 2;

struct ResampleCoeffs {
  int taps = 0;                // coefficients per output position
  std::vector<int> first;      // first source index per output position
  std::vector<int> count;      // number of used source indices
  std::vector<std::int32_t> k; // out_size * taps fixed-point weights
};

inline double triangle(double x) {
  x = std::abs(x);
  return x < 1.0 ? 1.0 - x : 0.0;
}

inline ResampleCoeffs resample_coeffs(int in_size, int out_size) {
  const double scale = static_cast<double>(in_size) / out_size;
  const double filterscale = std::max(scale, 1.0);
  const double support = 1.0 * filterscale;
  const double inv = 1.0 / filterscale;

  ResampleCoeffs rc;
  rc.taps = static_cast<int>(std::ceil(support)) * 2 + 1;
  rc.first.resize(out_size);
  rc.count.resize(out_size);
  rc.k.assign(static_cast<std::size_t>(out_size) * rc.taps, 0);

  std::vector<double> w(rc.taps);
  for (int xx = 0; xx < out_size; ++xx) {
    const double center = (xx + 0.5) * scale;
    // Truncating casts mirror the reference rounding exactly.
    int xmin = static_cast<int>(center - support + 0.5);
    if (xmin < 0) xmin = 0;
    int xmax = static_cast<int>(center + support + 0.5);
    if (xmax > in_size) xmax = in_size;
    xmax -= xmin;

    double total = 0.0;
    for (int x = 0; x < xmax; ++x) {
      w[x] = triangle((x + xmin - center + 0.5) * inv);
      total += w[x];
    }
    for (int x = 0; x < xmax; ++x) {
      const double normalized = total != 0.0 ? w[x] / total : w[x];
      const double fixed = normalized * (1 << kPrecisionBits);
      rc.k[static_cast<std::size_t>(xx) * rc.taps + x] =
          static_cast<std::int32_t>(fixed < 0 ? fixed - 0.5 : fixed + 0.5);
    }
    rc.first[xx] = xmin;
    rc.count[xx] = xmax;
  }
  return rc;
}

inline std::uint8_t clip8(std::int64_t v) {
  if (v >= (std::int64_t{1} << kPrecisionBits << 8)) return 255;
  if (v <= 0) return 0;
  return static_cast<std::uint8_t>(v >> kPrecisionBits);
}

inline RgbImage resample_horizontal(const RgbImage& in, int out_width) {
  const ResampleCoeffs rc = resample_coeffs(in.width, out_width);
  RgbImage out(out_width, in.height);
  for (int y = 0; y < in.height; ++y) {
    for (int xx = 0; xx < out_width; ++xx) {
      const std::int32_t* k = &rc.k[static_cast<std::size_t>(xx) * rc.taps];
      for (int c = 0; c < 3; ++c) {
        std::int64_t acc = std::int64_t{1} << (kPrecisionBits - 1);
        for (int x = 0; x < rc.count[xx]; ++x) acc += in.at(rc.first[xx] + x, y, c) * std::int64_t{k[x]};
        out.at(xx, y, c) = clip8(acc);
      }
    }
  }
  return out;
}

inline RgbImage resample_vertical(const RgbImage& in, int out_height) {
  const ResampleCoeffs rc = resample_coeffs(in.height, out_height);
  RgbImage out(in.width, out_height);
  for (int yy = 0; yy < out_height; ++yy) {
    const std::int32_t* k = &rc.k[static_cast<std::size_t>(yy) * rc.taps];
    for (int x = 0; x < in.width; ++x) {
      for (int c = 0; c < 3; ++c) {
        std::int64_t acc = std::int64_t{1} << (kPrecisionBits - 1);
        for (int y = 0; y < rc.count[yy]; ++y) acc += in.at(x, rc.first[yy] + y, c) * std::int64_t{k[y]};
        out.at(x, yy, c) = clip8(acc);
      }
    }
  }
  return out;
}

}  // namespace detail

/// Antialiased bilinear resize to an arbitrary size. Passes whose dimension
/// is unchanged are skipped, so same-size resizes are the identity.
inline RgbImage resize(const RgbImage& img, int width, int height) {
  if (img.width < 1 || img.height < 1) {
    throw Error(ErrorCode::InvalidDimensions, "cannot resize an empty image");
  }
  if (width < 1 || height < 1) {
    throw Error(ErrorCode::InvalidDimensions, "target size must be >= 1");
  }
  RgbImage out = img;
  if (width != out.width) out = detail::resample_horizontal(out, width);
  if (height != out.height) out = detail::resample_vertical(out, height);
  return out;
}

/// Resizes to side x side without preserving the aspect ratio.
inline RgbImage resize_square(const RgbImage& img, int side) { return resize(img, side, side); }

/// Resizes so the shorter edge equals `side`; the longer edge is
/// floor(side * long / short).
inline RgbImage resize_shortest_side(const RgbImage& img, int side) {
  if (img.width < 1 || img.height < 1 || side < 1) {
    throw Error(ErrorCode::InvalidDimensions, "invalid dimensions for resize");
  }
  if (img.width <= img.height) {
    const auto h = static_cast<int>(static_cast<long long>(side) * img.height / img.width);
    return resize(img, side, h);
  }
  const auto w = static_cast<int>(static_cast<long long>(side) * img.width / img.height);
  return resize(img, w, side);
}

/// Top-left corner of a centered side x side window: floor((w-side)/2), floor((h-side)/2).
inline std::pair<int, int> center_crop_origin(int width, int height, int side) {
  if (side < 1 || width < side || height < side) {
    throw Error(ErrorCode::CropLargerThanImage,
                "cannot crop " + std::to_string(side) + "x" + std::to_string(side) + " from " +
                    std::to_string(width) + "x" + std::to_string(height));
  }
  return {(width - side) / 2, (height - side) / 2};
}

inline RgbImage center_crop(const RgbImage& img, int side) {
  const auto [x0, y0] = center_crop_origin(img.width, img.height, side);
  RgbImage out(side, side);
  for (int y = 0; y < side; ++y) {
    const auto* src = &img.pixels[(static_cast<std::size_t>(y0 + y) * img.width + x0) * 3];
    std::copy_n(src, static_cast<std::size_t>(side) * 3,
                &out.pixels[static_cast<std::size_t>(y) * side * 3]);
  }
  return out;
}

/// (pixel / 255 - mean[c]) / std[c], laid out channel-first.
inline InputTensor normalize(const RgbImage& img, const NormalizationSpec& spec) {
  if (img.width != kCropSide || img.height != kCropSide) {
    throw Error(ErrorCode::ShapeMismatch, "normalize expects a 224x224 image, got " +
                                              std::to_string(img.width) + "x" +
                                              std::to_string(img.height));
  }
  spec.validate();
  std::array<std::array<float, 256>, 3> lut{};
  for (std::size_t c = 0; c < 3; ++c) {
    for (int v = 0; v < 256; ++v) {
      lut[c][v] = static_cast<float>((v / 255.0 - spec.mean[c]) / spec.stddev[c]);
    }
  }
  InputTensor tensor;
  for (std::size_t y = 0; y < InputTensor::kHeight; ++y) {
    for (std::size_t x = 0; x < InputTensor::kWidth; ++x) {
      for (std::size_t c = 0; c < 3; ++c) {
        tensor.at(c, y, x) = lut[c][img.at(static_cast<int>(x), static_cast<int>(y), static_cast<int>(c))];
      }
    }
  }
  return tensor;
}

/// resize (256) -> center crop (224) -> normalize.
inline InputTensor preprocess_pipeline(const RgbImage& img, const NormalizationSpec& spec,
                                       ResizeMode mode = ResizeMode::Square) {
  const RgbImage resized = mode == ResizeMode::Square ? resize_square(img, kResizeSide)
                                                      : resize_shortest_side(img, kResizeSide);
  return normalize(center_crop(resized, kCropSide), spec);
}

}  // namespace texassoc
