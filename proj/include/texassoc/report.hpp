#pragma once

#include <charconv>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "texassoc/association.hpp"
#include "texassoc/corpus.hpp"
#include "texassoc/error.hpp"
#include "texassoc/labels.hpp"
#include "texassoc/taxonomy.hpp"

namespace texassoc {

enum class ReportFormat { Markdown, Csv, Json };

struct ReportConfig {
  ReportFormat format = ReportFormat::Markdown;
  int decimals = 3;
  LabelStyle label_style = LabelStyle::Underscore;

  void validate() const {
    if (decimals < 1) throw Error(ErrorCode::InvalidArgument, "decimals must be >= 1");
  }
};

/// Shortest decimal string that round-trips to `value`.
inline std::string shortest_decimal(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::fixed);
  if (res.ec != std::errc{}) throw Error(ErrorCode::InvalidArgument, "cannot format value");
  return {buf, res.ptr};
}

/// Rounds to `decimals` places, half to even. The tie test is applied to the
/// shortest round-trip decimal form of the value, so 0.0005 is a tie (-> 0.000)
/// even though its binary value is slightly above one half-unit.
inline std::string format_fixed(double value, int decimals) {
  std::string s = shortest_decimal(value);
  bool negative = false;
  if (!s.empty() && s.front() == '-') {
    negative = true;
    s.erase(0, 1);
  }
  const auto dot = s.find('.');
  std::string digits = dot == std::string::npos ? s : s.substr(0, dot);
  std::string frac = dot == std::string::npos ? std::string() : s.substr(dot + 1);
  const auto keep = static_cast<std::size_t>(decimals);

  bool round_up = false;
  if (frac.size() > keep) {
    const std::string rest = frac.substr(keep);
    frac.resize(keep);
    if (rest[0] > '5') {
      round_up = true;
    } else if (rest[0] == '5') {
      const bool beyond = rest.find_first_not_of('0', 1) != std::string::npos;
      const char last = keep > 0 ? frac.back() : digits.back();
      round_up = beyond || ((last - '0') % 2 == 1);
    }
  }
  frac.resize(keep, '0');
  digits += frac;
  if (round_up) {
    std::size_t i = digits.size();
    while (i > 0) {
      --i;
      if (digits[i] == '9') {
        digits[i] = '0';
      } else {
        ++digits[i];
        break;
      }
      if (i == 0) digits.insert(digits.begin(), '1');
    }
  }
  const std::size_t new_int_len = digits.size() - keep;
  std::string out = digits.substr(0, new_int_len) + "." + digits.substr(new_int_len);
  if (negative && out.find_first_not_of("0.") != std::string::npos) out.insert(out.begin(), '-');
  return out;
}

inline double rounded_value(double value, int decimals) {
  const std::string text = format_fixed(value, decimals);
  double out = 0.0;
  std::from_chars(text.data(), text.data() + text.size(), out);
  return out;
}

/// Association table with names resolved, as it appears in a report.
struct AssociationReportRow {
  std::string texture;
  std::vector<std::pair<std::string, double>> objects;  // (label, effect)

  bool operator==(const AssociationReportRow&) const = default;
};

struct TaxonomyReportRow {
  std::string texture;
  std::string top_object;
  double top_effect = 0.0;
  TaxonomyLabel label = TaxonomyLabel::Unclassified;
  std::optional<std::vector<std::string>> expected;

  bool operator==(const TaxonomyReportRow&) const = default;
};

inline std::vector<AssociationReportRow> association_rows(const AssociationTable& table,
                                                          std::span<const TextureClass> classes,
                                                          const LabelManifest& manifest) {
  std::vector<AssociationReportRow> rows;
  for (const auto& row : table.rows) {
    AssociationReportRow out{classes[row.texture].name, {}};
    for (const auto& a : row.top) out.objects.emplace_back(manifest[a.object], a.effect);
    rows.push_back(std::move(out));
  }
  return rows;
}

inline std::vector<TaxonomyReportRow> taxonomy_rows(std::span<const TaxonomyEntry> entries,
                                                    std::span<const TextureClass> classes,
                                                    const LabelManifest& manifest) {
  std::vector<TaxonomyReportRow> rows;
  for (const auto& e : entries) {
    TaxonomyReportRow out{classes[e.texture].name, manifest[e.top_object], e.top_effect, e.label, std::nullopt};
    if (e.expected) {
      out.expected.emplace();
      for (std::size_t o : *e.expected) out.expected->push_back(manifest[o]);
    }
    rows.push_back(std::move(out));
  }
  return rows;
}

namespace detail {

inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string md_cell(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '|') out += '\\';
    out += c;
  }
  return out;
}

inline std::string join_row(const std::vector<std::string>& cells, ReportFormat format) {
  std::string out;
  if (format == ReportFormat::Markdown) {
    out = "|";
    for (const auto& c : cells) out += " " + md_cell(c) + " |";
  } else {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += csv_field(cells[i]);
    }
  }
  return out + "\n";
}

inline std::string md_separator(const std::vector<bool>& numeric) {
  std::string out = "|";
  for (bool n : numeric) out += n ? " ---: |" : " --- |";
  return out + "\n";
}

inline std::string expected_text(const std::optional<std::vector<std::string>>& expected, LabelStyle style) {
  if (!expected) return "unknown";
  if (expected->empty()) return "none";
  std::string out;
  for (const auto& label : *expected) {
    if (!out.empty()) out += "; ";
    out += display_label(label, style);
  }
  return out;
}

}  // namespace detail

/// Texture class followed by k (Object class, Effect) column pairs. `k` only
/// matters for the header of an empty table.
inline std::string render_association_rows(std::span<const AssociationReportRow> rows, std::size_t k,
                                           const ReportConfig& cfg) {
  cfg.validate();
  if (!rows.empty()) k = rows.front().objects.size();

  if (cfg.format == ReportFormat::Json) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& row : rows) {
      nlohmann::ordered_json j;
      j["texture"] = row.texture;
      j["associations"] = nlohmann::ordered_json::array();
      for (const auto& [label, effect] : row.objects) {
        j["associations"].push_back({{"object", display_label(label, cfg.label_style)},
                                     {"effect", rounded_value(effect, cfg.decimals)}});
      }
      arr.push_back(std::move(j));
    }
    return arr.dump(2) + "\n";
  }

  std::vector<std::string> header{"Texture class"};
  std::vector<bool> numeric{false};
  for (std::size_t i = 0; i < k; ++i) {
    header.insert(header.end(), {"Object class", "Effect"});
    numeric.insert(numeric.end(), {false, true});
  }
  std::string out = detail::join_row(header, cfg.format);
  if (cfg.format == ReportFormat::Markdown) out += detail::md_separator(numeric);
  for (const auto& row : rows) {
    std::vector<std::string> cells{row.texture};
    for (const auto& [label, effect] : row.objects) {
      cells.push_back(display_label(label, cfg.label_style));
      cells.push_back(format_fixed(effect, cfg.decimals));
    }
    out += detail::join_row(cells, cfg.format);
  }
  return out;
}

inline std::string render_association_table(const AssociationTable& table, std::span<const TextureClass> classes,
                                            const LabelManifest& manifest, const ReportConfig& cfg) {
  const auto rows = association_rows(table, classes, manifest);
  return render_association_rows(rows, table.k, cfg);
}

inline std::string render_taxonomy_rows(std::span<const TaxonomyReportRow> rows, const ReportConfig& cfg) {
  cfg.validate();
  if (cfg.format == ReportFormat::Json) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& row : rows) {
      nlohmann::ordered_json j;
      j["texture"] = row.texture;
      j["top_object"] = display_label(row.top_object, cfg.label_style);
      j["top_effect"] = rounded_value(row.top_effect, cfg.decimals);
      j["label"] = std::string(to_string(row.label));
      j["label_text"] = std::string(display_name(row.label));
      if (row.expected) {
        j["expected"] = nlohmann::ordered_json::array();
        for (const auto& e : *row.expected) j["expected"].push_back(display_label(e, cfg.label_style));
      } else {
        j["expected"] = nullptr;
      }
      arr.push_back(std::move(j));
    }
    return arr.dump(2) + "\n";
  }

  std::string out = detail::join_row({"Texture class", "Top object", "Effect", "Association", "Expected"}, cfg.format);
  if (cfg.format == ReportFormat::Markdown) out += detail::md_separator({false, false, true, false, false});
  for (const auto& row : rows) {
    out += detail::join_row({row.texture, display_label(row.top_object, cfg.label_style),
                             format_fixed(row.top_effect, cfg.decimals), std::string(display_name(row.label)),
                             detail::expected_text(row.expected, cfg.label_style)},
                            cfg.format);
  }
  return out;
}

inline std::string render_taxonomy_report(std::span<const TaxonomyEntry> entries, std::span<const TextureClass> classes,
                                          const LabelManifest& manifest, const ReportConfig& cfg) {
  const auto rows = taxonomy_rows(entries, classes, manifest);
  return render_taxonomy_rows(rows, cfg);
}

/// Full T x O effect matrix. Header row holds the object labels, the first
/// column the texture names; values use the shortest round-trip form.
inline std::string render_effect_matrix_csv(const EffectSizeMatrix& e, std::span<const TextureClass> classes,
                                            const LabelManifest& manifest) {
  std::string out = "texture";
  for (const auto& label : manifest) out += "," + detail::csv_field(label);
  out += "\n";
  for (std::size_t t = 0; t < e.textures; ++t) {
    out += detail::csv_field(classes[t].name);
    for (double v : e.row(t)) out += "," + shortest_decimal(v);
    out += "\n";
  }
  return out;
}

/// Parses the JSON rendering of an association table.
inline std::vector<AssociationReportRow> parse_association_json(std::string_view text) {
  std::vector<AssociationReportRow> rows;
  try {
    const auto arr = nlohmann::json::parse(text);
    if (!arr.is_array()) throw Error(ErrorCode::ParseError, "association report must be a JSON array");
    for (const auto& j : arr) {
      AssociationReportRow row{j.at("texture").get<std::string>(), {}};
      for (const auto& a : j.at("associations")) {
        row.objects.emplace_back(a.at("object").get<std::string>(), a.at("effect").get<double>());
      }
      rows.push_back(std::move(row));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  return rows;
}

/// Parses the JSON rendering of a taxonomy report.
inline std::vector<TaxonomyReportRow> parse_taxonomy_json(std::string_view text) {
  std::vector<TaxonomyReportRow> rows;
  try {
    const auto arr = nlohmann::json::parse(text);
    if (!arr.is_array()) throw Error(ErrorCode::ParseError, "taxonomy report must be a JSON array");
    for (const auto& j : arr) {
      TaxonomyReportRow row;
      row.texture = j.at("texture").get<std::string>();
      row.top_object = j.at("top_object").get<std::string>();
      row.top_effect = j.at("top_effect").get<double>();
      const auto label = taxonomy_label_from_string(j.at("label").get<std::string>());
      if (!label) throw Error(ErrorCode::ParseError, "unknown taxonomy label");
      row.label = *label;
      if (!j.at("expected").is_null()) row.expected = j.at("expected").get<std::vector<std::string>>();
      rows.push_back(std::move(row));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  return rows;
}

/// Writes to a sibling temporary file, then renames it over `path`.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.close();
    if (out.fail()) throw Error(ErrorCode::IoError, "write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorCode::IoError, "cannot move output into place: " + path.string());
  }
}

}  // namespace texassoc
