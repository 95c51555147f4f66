#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <unistd.h>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "texassoc/image.hpp"

namespace texassoc::testing {

namespace fs = std::filesystem;

inline fs::path data_dir() { return TEXASSOC_TEST_DATA_DIR; }
inline fs::path repo_dir() { return TEXASSOC_REPO_DIR; }

/// Fresh directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("texassoc_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline void write_png(const fs::path& path, const RgbImage& img) {
  fs::create_directories(path.parent_path());
  cv::Mat bgr(img.height, img.width, CV_8UC3);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      bgr.at<cv::Vec3b>(y, x) = {img.at(x, y, 2), img.at(x, y, 1), img.at(x, y, 0)};
    }
  }
  cv::imwrite(path.string(), bgr);
}

inline RgbImage random_image(std::mt19937& rng, int w, int h) {
  RgbImage img(w, h);
  std::uniform_int_distribution<int> dist(0, 255);
  for (auto& p : img.pixels) p = static_cast<std::uint8_t>(dist(rng));
  return img;
}

}  // namespace texassoc::testing
