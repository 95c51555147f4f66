#pragma once

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "texassoc/error.hpp"

namespace texassoc {

namespace fs = std::filesystem;

struct TextureClass {
  std::size_t index = 0;
  std::string name;

  bool operator==(const TextureClass&) const = default;
};

struct SampleRef {
  fs::path path;
  std::size_t texture = 0;

  bool operator==(const SampleRef&) const = default;
};

/// A texture corpus laid out as <root>/<class name>/<image files>.
/// Classes are indexed in byte-wise lexicographic order of their names.
struct TextureCorpus {
  fs::path root;
  std::vector<TextureClass> classes;
  std::vector<SampleRef> samples;
  std::vector<std::size_t> counts_per_class;
  /// Non-image files encountered (and ignored) during the scan.
  std::size_t skipped_files = 0;

  std::size_t num_classes() const noexcept { return classes.size(); }
  std::size_t num_samples() const noexcept { return samples.size(); }

  bool operator==(const TextureCorpus&) const = default;
};

inline bool is_supported_image(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".jpg" || ext == ".jpeg" || ext == ".png";
}

namespace detail {

inline std::string fold_case(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace detail

/// Enumerates every image under each class directory of `root`.
///
/// Images are recognized by extension (jpg/jpeg/png, any case); they are not
/// decoded here. Files at the root level and non-image files are skipped and
/// counted in `skipped_files`.
inline TextureCorpus scan_corpus(const fs::path& root) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) {
    throw Error(ErrorCode::MissingRoot, "dataset root not found: " + root.string());
  }

  TextureCorpus corpus;
  corpus.root = root;

  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory()) {
      names.push_back(entry.path().filename().string());
    } else {
      ++corpus.skipped_files;
    }
  }
  if (names.empty()) {
    throw Error(ErrorCode::EmptyCorpus, "no class directories under " + root.string());
  }
  // std::string comparison is byte-wise, independent of locale.
  std::sort(names.begin(), names.end());

  for (std::size_t i = 1; i < names.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (detail::fold_case(names[i]) == detail::fold_case(names[j])) {
        throw Error(ErrorCode::DuplicateClass,
                    "class names differ only by case: '" + names[j] + "' and '" + names[i] + "'");
      }
    }
  }

  for (std::size_t index = 0; index < names.size(); ++index) {
    corpus.classes.push_back({index, names[index]});

    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(root / names[index])) {
      if (entry.is_regular_file() && is_supported_image(entry.path())) {
        files.push_back(entry.path());
      } else {
        ++corpus.skipped_files;
      }
    }
    if (files.empty()) {
      throw Error(ErrorCode::EmptyCorpus, "class directory has no images: " + names[index]);
    }
    std::sort(files.begin(), files.end(), [](const fs::path& a, const fs::path& b) {
      return a.filename().string() < b.filename().string();
    });

    corpus.counts_per_class.push_back(files.size());
    for (auto& file : files) corpus.samples.push_back({std::move(file), index});
  }
  return corpus;
}

/// Exact, case-sensitive lookup.
inline const TextureClass& class_of(const TextureCorpus& corpus, std::string_view name) {
  auto it = std::find_if(corpus.classes.begin(), corpus.classes.end(),
                         [&](const TextureClass& c) { return c.name == name; });
  if (it == corpus.classes.end()) {
    throw Error(ErrorCode::UnknownTextureClass, "unknown texture class: " + std::string(name));
  }
  return *it;
}

}  // namespace texassoc
