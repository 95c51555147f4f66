#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <numeric>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "texassoc/error.hpp"
#include "texassoc/prediction_log.hpp"

namespace texassoc {

/// T x O prediction counts, row-major.
struct CountMatrix {
  std::size_t textures = 0;
  std::size_t objects = 0;
  std::vector<std::uint64_t> counts;
  std::vector<std::uint64_t> per_texture_totals;

  CountMatrix() = default;
  CountMatrix(std::size_t t, std::size_t o)
      : textures(t), objects(o), counts(t * o, 0), per_texture_totals(t, 0) {}

  std::uint64_t at(std::size_t t, std::size_t o) const { return counts[t * objects + o]; }
  std::span<const std::uint64_t> row(std::size_t t) const {
    return std::span<const std::uint64_t>(counts).subspan(t * objects, objects);
  }

  void add(std::size_t t, std::size_t o, std::uint64_t n = 1) {
    counts[t * objects + o] += n;
    per_texture_totals[t] += n;
  }

  CountMatrix& operator+=(const CountMatrix& other) {
    for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
    for (std::size_t t = 0; t < textures; ++t) per_texture_totals[t] += other.per_texture_totals[t];
    return *this;
  }

  bool operator==(const CountMatrix&) const = default;
};

/// Row-normalized counts: effects[t][o] is the share of texture t's samples
/// whose top-1 prediction was object o.
struct EffectSizeMatrix {
  std::size_t textures = 0;
  std::size_t objects = 0;
  std::vector<double> effects;

  double at(std::size_t t, std::size_t o) const { return effects[t * objects + o]; }
  std::span<const double> row(std::size_t t) const {
    return std::span<const double>(effects).subspan(t * objects, objects);
  }

  bool operator==(const EffectSizeMatrix&) const = default;
};

struct Association {
  std::size_t object = 0;
  double effect = 0.0;

  bool operator==(const Association&) const = default;
};

struct AssociationRow {
  std::size_t texture = 0;
  std::vector<Association> top;

  bool operator==(const AssociationRow&) const = default;
};

struct AssociationTable {
  std::size_t k = 0;
  std::vector<AssociationRow> rows;

  bool operator==(const AssociationTable&) const = default;
};

namespace detail {

inline CountMatrix count_range(std::span<const PredictionRecord> records, std::size_t textures,
                               std::size_t objects) {
  CountMatrix m(textures, objects);
  for (const auto& r : records) {
    if (r.texture_index >= textures || r.predicted_object_index >= objects) {
      throw Error(ErrorCode::IndexOutOfRange, "record outside the " + std::to_string(textures) + "x" +
                                                  std::to_string(objects) + " matrix");
    }
    m.add(r.texture_index, r.predicted_object_index);
  }
  return m;
}

}  // namespace detail

/// Counts (texture, predicted object) pairs. With threads > 1 the records are
/// split into contiguous shards whose matrices are summed; integer addition
/// makes the result identical to the serial count.
inline CountMatrix accumulate(std::span<const PredictionRecord> records, std::size_t textures,
                              std::size_t objects, unsigned threads = 1) {
  const std::size_t shards = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(records.size(), 1));
  if (shards == 1) return detail::count_range(records, textures, objects);

  std::vector<CountMatrix> partial(shards);
  std::vector<std::exception_ptr> errors(shards);
  {
    std::vector<std::jthread> workers;
    const std::size_t chunk = (records.size() + shards - 1) / shards;
    for (std::size_t s = 0; s < shards; ++s) {
      const std::size_t begin = std::min(records.size(), s * chunk);
      const std::size_t end = std::min(records.size(), begin + chunk);
      workers.emplace_back([&, s, begin, end] {
        try {
          partial[s] = detail::count_range(records.subspan(begin, end - begin), textures, objects);
        } catch (...) {
          errors[s] = std::current_exception();
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  CountMatrix total(textures, objects);
  for (const auto& p : partial) total += p;
  return total;
}

inline EffectSizeMatrix effect_sizes(const CountMatrix& m) {
  EffectSizeMatrix e{m.textures, m.objects, std::vector<double>(m.counts.size(), 0.0)};
  for (std::size_t t = 0; t < m.textures; ++t) {
    const std::uint64_t total = m.per_texture_totals[t];
    if (total == 0) {
      throw Error(ErrorCode::EmptyTextureClass, "texture " + std::to_string(t) + " has no samples");
    }
    for (std::size_t o = 0; o < m.objects; ++o) {
      e.effects[t * m.objects + o] = static_cast<double>(m.at(t, o)) / static_cast<double>(total);
    }
  }
  return e;
}

/// The k strongest objects per texture (ties to the lower object index), with
/// rows ordered by their strongest effect, descending (ties to the lower
/// texture index).
inline AssociationTable top_k(const EffectSizeMatrix& e, std::size_t k) {
  if (k < 1 || k > e.objects) {
    throw Error(ErrorCode::InvalidArgument,
                "k must be in [1, " + std::to_string(e.objects) + "], got " + std::to_string(k));
  }
  AssociationTable table;
  table.k = k;
  table.rows.reserve(e.textures);

  std::vector<std::size_t> order(e.objects);
  for (std::size_t t = 0; t < e.textures; ++t) {
    const auto row = e.row(t);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      [&](std::size_t a, std::size_t b) {
                        return row[a] != row[b] ? row[a] > row[b] : a < b;
                      });
    AssociationRow out{t, {}};
    out.top.reserve(k);
    for (std::size_t i = 0; i < k; ++i) out.top.push_back({order[i], row[order[i]]});
    table.rows.push_back(std::move(out));
  }

  std::stable_sort(table.rows.begin(), table.rows.end(),
                   [](const AssociationRow& a, const AssociationRow& b) {
                     return a.top.front().effect > b.top.front().effect;
                   });
  return table;
}

}  // namespace texassoc
