#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "texassoc/corpus.hpp"
#include "texassoc/error.hpp"
#include "texassoc/labels.hpp"

namespace texassoc {

inline constexpr int kLogVersion = 1;

struct PredictionRecord {
  std::string sample_path;
  std::size_t texture_index = 0;
  std::string texture_name;
  std::size_t predicted_object_index = 0;
  std::string predicted_object_label;
  std::optional<double> confidence;

  bool operator==(const PredictionRecord&) const = default;
};

inline nlohmann::ordered_json to_json(const PredictionRecord& r) {
  nlohmann::ordered_json j;
  j["v"] = kLogVersion;
  j["sample_path"] = r.sample_path;
  j["texture_index"] = r.texture_index;
  j["texture_name"] = r.texture_name;
  j["predicted_object_index"] = r.predicted_object_index;
  j["predicted_object_label"] = r.predicted_object_label;
  if (r.confidence) j["confidence"] = *r.confidence;
  return j;
}

/// Parses one log line without checking indices against a corpus.
inline PredictionRecord parse_log_line(const std::string& line, std::size_t line_no) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what(), line_no);
  }
  auto bad = [&](const std::string& what) { throw Error(ErrorCode::ParseError, what, line_no); };
  if (!j.is_object()) bad("record is not a JSON object");

  auto index_field = [&](const char* key) -> std::size_t {
    if (!j.contains(key) || !j[key].is_number_integer()) bad(std::string("missing integer field ") + key);
    if (j[key].is_number_unsigned()) return j[key].get<std::size_t>();
    const auto v = j[key].get<long long>();
    if (v < 0) throw Error(ErrorCode::IndexOutOfRange, std::string(key) + " is negative", line_no);
    return static_cast<std::size_t>(v);
  };
  auto string_field = [&](const char* key) -> std::string {
    if (!j.contains(key) || !j[key].is_string()) bad(std::string("missing string field ") + key);
    return j[key].get<std::string>();
  };

  if (!j.contains("v") || !j["v"].is_number_integer() || j["v"].get<long long>() != kLogVersion) {
    bad("unsupported or missing log version (expected v=1)");
  }
  PredictionRecord r;
  r.sample_path = string_field("sample_path");
  r.texture_index = index_field("texture_index");
  r.texture_name = string_field("texture_name");
  r.predicted_object_index = index_field("predicted_object_index");
  r.predicted_object_label = string_field("predicted_object_label");
  if (j.contains("confidence") && !j["confidence"].is_null()) {
    if (!j["confidence"].is_number()) bad("confidence must be a number");
    const double c = j["confidence"].get<double>();
    if (!(c >= 0.0 && c <= 1.0)) bad("confidence outside [0,1]");
    r.confidence = c;
  }
  return r;
}

/// Appends records to a JSON Lines file, one object per line.
class PredictionLogWriter {
 public:
  explicit PredictionLogWriter(const std::filesystem::path& path)
      : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw Error(ErrorCode::IoError, "cannot open log for writing: " + path.string());
  }

  void write(const PredictionRecord& record) {
    out_ << to_json(record).dump() << '\n';
    if (!out_) throw Error(ErrorCode::IoError, "write failed: " + path_.string());
    ++count_;
  }

  std::size_t close() {
    out_.close();
    if (out_.fail()) throw Error(ErrorCode::IoError, "close failed: " + path_.string());
    return count_;
  }

  std::size_t count() const noexcept { return count_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::size_t count_ = 0;
};

inline std::size_t write_log(std::span<const PredictionRecord> records, const std::filesystem::path& out) {
  PredictionLogWriter writer(out);
  for (const auto& r : records) writer.write(r);
  return writer.close();
}

/// Reads every record without validation. Blank lines are only accepted at
/// the end of the file.
inline std::vector<PredictionRecord> read_log_records(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open log: " + path.string());

  std::vector<PredictionRecord> records;
  std::optional<std::size_t> first_blank;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) {
      if (!first_blank) first_blank = line_no;
      continue;
    }
    if (first_blank) throw Error(ErrorCode::ParseError, "blank line inside log", *first_blank);
    records.push_back(parse_log_line(line, line_no));
  }
  return records;
}

/// Checks records against the texture classes and the object manifest.
/// Indices are authoritative; the stored names must agree with them (object
/// labels compared after underscore/space normalization). Errors carry the
/// 1-based record position, which is the line number in a log.
inline void validate_records(std::span<const PredictionRecord> records, std::span<const TextureClass> classes,
                             const LabelManifest& manifest) {
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    const std::size_t line_no = i + 1;
    if (r.texture_index >= classes.size()) {
      throw Error(ErrorCode::IndexOutOfRange,
                  "texture_index " + std::to_string(r.texture_index) + " >= T=" +
                      std::to_string(classes.size()),
                  line_no);
    }
    if (r.predicted_object_index >= manifest.size()) {
      throw Error(ErrorCode::IndexOutOfRange,
                  "predicted_object_index " + std::to_string(r.predicted_object_index) +
                      " >= O=" + std::to_string(manifest.size()),
                  line_no);
    }
    if (classes[r.texture_index].name != r.texture_name) {
      throw Error(ErrorCode::LabelMismatch,
                  "texture_name '" + r.texture_name + "' does not match class " +
                      std::to_string(r.texture_index) + " '" + classes[r.texture_index].name + "'",
                  line_no);
    }
    if (canonical_label(manifest[r.predicted_object_index]) != canonical_label(r.predicted_object_label)) {
      throw Error(ErrorCode::LabelMismatch,
                  "predicted_object_label '" + r.predicted_object_label + "' does not match manifest entry '" +
                      manifest[r.predicted_object_index] + "'",
                  line_no);
    }
  }
}

/// Reads a log and validates every record; see validate_records.
inline std::vector<PredictionRecord> read_log(const std::filesystem::path& path,
                                              std::span<const TextureClass> classes,
                                              const LabelManifest& manifest) {
  auto records = read_log_records(path);
  validate_records(records, classes, manifest);
  return records;
}

/// Reconstructs the texture class list from the (index, name) pairs in a log.
/// Indices must be contiguous from 0 and names consistent.
inline std::vector<TextureClass> classes_from_records(std::span<const PredictionRecord> records) {
  std::vector<std::optional<std::string>> names;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (r.texture_index >= names.size()) names.resize(r.texture_index + 1);
    auto& slot = names[r.texture_index];
    if (!slot) {
      slot = r.texture_name;
    } else if (*slot != r.texture_name) {
      throw Error(ErrorCode::LabelMismatch,
                  "texture_index " + std::to_string(r.texture_index) + " is named both '" + *slot +
                      "' and '" + r.texture_name + "'",
                  i + 1);
    }
  }
  if (names.empty()) throw Error(ErrorCode::EmptyCorpus, "log contains no records");
  std::vector<TextureClass> classes;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (!names[i]) {
      throw Error(ErrorCode::EmptyTextureClass, "log has no records for texture index " + std::to_string(i));
    }
    classes.push_back({i, *names[i]});
  }
  return classes;
}

}  // namespace texassoc
