#pragma once

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "texassoc/association.hpp"
#include "texassoc/corpus.hpp"
#include "texassoc/error.hpp"
#include "texassoc/labels.hpp"

namespace texassoc {

enum class TaxonomyLabel { ExpectedStrong, UnexpectedStrong, ExpectedAbsent, Unclassified };

constexpr std::string_view to_string(TaxonomyLabel label) noexcept {
  switch (label) {
    case TaxonomyLabel::ExpectedStrong: return "EXPECTED_STRONG";
    case TaxonomyLabel::UnexpectedStrong: return "UNEXPECTED_STRONG";
    case TaxonomyLabel::ExpectedAbsent: return "EXPECTED_ABSENT";
    case TaxonomyLabel::Unclassified: return "UNCLASSIFIED";
  }
  return "UNCLASSIFIED";
}

constexpr std::string_view display_name(TaxonomyLabel label) noexcept {
  switch (label) {
    case TaxonomyLabel::ExpectedStrong: return "Expected & Strongly Present";
    case TaxonomyLabel::UnexpectedStrong: return "Not Expected & Strongly Present";
    case TaxonomyLabel::ExpectedAbsent: return "Expected & Not Present";
    case TaxonomyLabel::Unclassified: return "Unclassified";
  }
  return "Unclassified";
}

inline std::optional<TaxonomyLabel> taxonomy_label_from_string(std::string_view s) {
  for (auto label : {TaxonomyLabel::ExpectedStrong, TaxonomyLabel::UnexpectedStrong,
                     TaxonomyLabel::ExpectedAbsent, TaxonomyLabel::Unclassified}) {
    if (s == to_string(label)) return label;
  }
  return std::nullopt;
}

inline constexpr double kDefaultStrongThreshold = 0.2;

/// Texture name -> expected object labels (canonical form). A texture that
/// is missing from the map has unknown expectation; an empty set means
/// "nothing is expected".
using ExpectationMap = std::map<std::string, std::set<std::string>>;

/// Parses a JSON object mapping texture names to arrays of object labels.
inline ExpectationMap parse_expectation_map(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidExpectationMap, e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::InvalidExpectationMap, "expectation map must be a JSON object");
  ExpectationMap map;
  for (const auto& [texture, labels] : j.items()) {
    if (!labels.is_array()) {
      throw Error(ErrorCode::InvalidExpectationMap, "entry for '" + texture + "' must be an array");
    }
    auto& set = map[texture];
    for (const auto& label : labels) {
      if (!label.is_string()) {
        throw Error(ErrorCode::InvalidExpectationMap, "labels for '" + texture + "' must be strings");
      }
      set.insert(canonical_label(label.get<std::string>()));
    }
  }
  return map;
}

inline ExpectationMap load_expectation_map(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open expectation map: " + path.string());
  const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return parse_expectation_map(text);
}

/// Every problem with the map's references, one message per problem.
inline std::vector<std::string> expectation_map_violations(const ExpectationMap& map,
                                                           std::span<const TextureClass> classes,
                                                           const LabelManifest& manifest) {
  std::set<std::string> textures;
  for (const auto& c : classes) textures.insert(c.name);
  std::set<std::string> labels;
  for (const auto& l : manifest) labels.insert(canonical_label(l));

  std::vector<std::string> out;
  for (const auto& [texture, expected] : map) {
    if (!textures.contains(texture)) out.push_back("unknown texture class '" + texture + "'");
    for (const auto& label : expected) {
      if (!labels.contains(label)) {
        out.push_back("unknown object label '" + label + "' (texture '" + texture + "')");
      }
    }
  }
  return out;
}

/// Expected object indices per texture index. Absent key = unknown.
using ResolvedExpectations = std::map<std::size_t, std::set<std::size_t>>;

inline ResolvedExpectations resolve_expectations(const ExpectationMap& map,
                                                 std::span<const TextureClass> classes,
                                                 const LabelManifest& manifest) {
  if (auto problems = expectation_map_violations(map, classes, manifest); !problems.empty()) {
    throw Error(ErrorCode::InvalidExpectationMap, problems.front());
  }
  ResolvedExpectations resolved;
  for (const auto& c : classes) {
    auto it = map.find(c.name);
    if (it == map.end()) continue;
    auto& set = resolved[c.index];
    for (std::size_t o = 0; o < manifest.size(); ++o) {
      if (it->second.contains(canonical_label(manifest[o]))) set.insert(o);
    }
  }
  return resolved;
}

/// Assigns one of the association categories to a texture's top-k row.
/// STRONG categories look at the top-1 object only; EXPECTED_ABSENT requires
/// that no expected object appears anywhere in the row.
inline TaxonomyLabel classify(const AssociationRow& row,
                              const std::optional<std::set<std::size_t>>& expected,
                              double strong_threshold) {
  if (!(strong_threshold > 0.0 && strong_threshold < 1.0)) {
    throw Error(ErrorCode::InvalidThreshold, "strong threshold must be in (0,1)");
  }
  if (row.top.empty()) throw Error(ErrorCode::InvalidArgument, "association row is empty");
  if (!expected) return TaxonomyLabel::Unclassified;

  const Association& first = row.top.front();
  const bool strong = first.effect >= strong_threshold;
  const bool first_expected = expected->contains(first.object);
  if (strong && first_expected) return TaxonomyLabel::ExpectedStrong;
  if (strong) return TaxonomyLabel::UnexpectedStrong;

  if (!expected->empty()) {
    bool any = false;
    for (const auto& a : row.top) any = any || expected->contains(a.object);
    if (!any) return TaxonomyLabel::ExpectedAbsent;
  }
  return TaxonomyLabel::Unclassified;
}

struct TaxonomyEntry {
  std::size_t texture = 0;
  std::size_t top_object = 0;
  double top_effect = 0.0;
  TaxonomyLabel label = TaxonomyLabel::Unclassified;
  std::optional<std::set<std::size_t>> expected;

  bool operator==(const TaxonomyEntry&) const = default;
};

/// One entry per table row, in table order.
inline std::vector<TaxonomyEntry> build_taxonomy(const AssociationTable& table,
                                                 const ResolvedExpectations& expectations,
                                                 double strong_threshold) {
  std::vector<TaxonomyEntry> entries;
  entries.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    std::optional<std::set<std::size_t>> expected;
    if (auto it = expectations.find(row.texture); it != expectations.end()) expected = it->second;
    const auto label = classify(row, expected, strong_threshold);
    entries.push_back({row.texture, row.top.front().object, row.top.front().effect, label, std::move(expected)});
  }
  return entries;
}

}  // namespace texassoc
