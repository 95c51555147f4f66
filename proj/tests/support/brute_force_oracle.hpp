#pragma once

// Test-only reference for the statistics pipeline. Deliberately naive: every
// (texture, object) cell is counted by a full scan of the records, the ratio
// table is materialized, and every row is fully sorted.

#include <algorithm>
#include <cstddef>
#include <string>
#include <tuple>
#include <vector>

#include "texassoc/association.hpp"
#include "texassoc/error.hpp"
#include "texassoc/prediction_log.hpp"

namespace texassoc::testing {

inline AssociationTable brute_force_oracle(const std::vector<PredictionRecord>& records, std::size_t textures,
                                           std::size_t objects, std::size_t k) {
  std::vector<std::vector<double>> ratio(textures, std::vector<double>(objects, 0.0));
  for (std::size_t t = 0; t < textures; ++t) {
    std::size_t total = 0;
    for (const auto& r : records) total += r.texture_index == t ? 1 : 0;
    if (total == 0) throw Error(ErrorCode::EmptyTextureClass, "texture " + std::to_string(t) + " has no samples");
    for (std::size_t o = 0; o < objects; ++o) {
      std::size_t hits = 0;
      for (const auto& r : records) hits += (r.texture_index == t && r.predicted_object_index == o) ? 1 : 0;
      ratio[t][o] = static_cast<double>(hits) / static_cast<double>(total);
    }
  }

  AssociationTable table;
  table.k = k;
  for (std::size_t t = 0; t < textures; ++t) {
    std::vector<std::tuple<double, std::size_t>> cells;
    for (std::size_t o = 0; o < objects; ++o) cells.emplace_back(ratio[t][o], o);
    std::sort(cells.begin(), cells.end(), [](const auto& a, const auto& b) {
      if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
      return std::get<1>(a) < std::get<1>(b);
    });
    AssociationRow row{t, {}};
    for (std::size_t i = 0; i < k; ++i) row.top.push_back({std::get<1>(cells[i]), std::get<0>(cells[i])});
    table.rows.push_back(row);
  }
  std::sort(table.rows.begin(), table.rows.end(), [](const AssociationRow& a, const AssociationRow& b) {
    if (a.top.front().effect != b.top.front().effect) return a.top.front().effect > b.top.front().effect;
    return a.texture < b.texture;
  });
  return table;
}

}  // namespace texassoc::testing
