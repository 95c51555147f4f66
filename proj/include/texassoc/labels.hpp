#pragma once

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "texassoc/error.hpp"

namespace texassoc {

/// Object-class labels; position is the class index. Labels are kept verbatim.
using LabelManifest = std::vector<std::string>;

/// Reads one label per line. Trailing blank lines are allowed; a blank line
/// between labels is a ParseError.
inline LabelManifest load_label_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open label manifest: " + path.string());

  LabelManifest labels;
  std::vector<std::size_t> blank_lines;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      blank_lines.push_back(line_no);
      continue;
    }
    if (!blank_lines.empty()) {
      throw Error(ErrorCode::ParseError, "blank label in manifest " + path.string(),
                  blank_lines.front());
    }
    labels.push_back(line);
  }
  if (labels.empty()) throw Error(ErrorCode::ParseError, "empty label manifest: " + path.string());
  return labels;
}

/// Canonical matching form: spaces become underscores.
inline std::string canonical_label(std::string_view label) {
  std::string out(label);
  std::replace(out.begin(), out.end(), ' ', '_');
  return out;
}

enum class LabelStyle { Underscore, Space };

inline std::string display_label(std::string_view label, LabelStyle style) {
  std::string out(label);
  if (style == LabelStyle::Underscore) {
    std::replace(out.begin(), out.end(), ' ', '_');
  } else {
    std::replace(out.begin(), out.end(), '_', ' ');
  }
  return out;
}

}  // namespace texassoc
