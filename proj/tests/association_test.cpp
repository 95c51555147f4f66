#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "support/brute_force_oracle.hpp"
#include "support/test_support.hpp"
#include "texassoc/association.hpp"

namespace texassoc {
namespace {

PredictionRecord rec(std::size_t t, std::size_t o) {
  return {"x.jpg", t, "t" + std::to_string(t), o, "o" + std::to_string(o), std::nullopt};
}

EffectSizeMatrix matrix(std::size_t t, std::size_t o, std::vector<double> effects) {
  return {t, o, std::move(effects)};
}

std::vector<PredictionRecord> random_records(std::mt19937& rng, std::size_t textures, std::size_t objects,
                                             std::size_t n) {
  std::vector<PredictionRecord> out;
  out.reserve(n);
  // Skewed draws so ties and dominant objects both occur.
  std::uniform_int_distribution<std::size_t> tex(0, textures - 1);
  std::geometric_distribution<std::size_t> skew(0.4);
  std::uniform_int_distribution<std::size_t> obj(0, objects - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t o = rng() % 2 ? std::min(skew(rng), objects - 1) : obj(rng);
    out.push_back(rec(tex(rng), o));
  }
  return out;
}

TEST(Accumulate, DirectCount) {
  const std::vector<PredictionRecord> records{rec(0, 1), rec(0, 1), rec(0, 2), rec(1, 0)};
  const auto m = accumulate(records, 2, 3);
  EXPECT_EQ(std::vector<std::uint64_t>(m.row(0).begin(), m.row(0).end()), (std::vector<std::uint64_t>{0, 2, 1}));
  EXPECT_EQ(std::vector<std::uint64_t>(m.row(1).begin(), m.row(1).end()), (std::vector<std::uint64_t>{1, 0, 0}));
  EXPECT_EQ(m.per_texture_totals, (std::vector<std::uint64_t>{3, 1}));
}

TEST(Accumulate, EmptyIsZeroMatrix) {
  const auto m = accumulate({}, 3, 4, 8);
  EXPECT_EQ(m, CountMatrix(3, 4));
}

TEST(Accumulate, OutOfRangeRecordRejected) {
  EXPECT_THROW(accumulate(std::vector<PredictionRecord>{rec(2, 0)}, 2, 3), Error);
  EXPECT_THROW(accumulate(std::vector<PredictionRecord>{rec(0, 0), rec(0, 3)}, 2, 3, 2), Error);
}

TEST(EffectSizes, RowRatio) {
  CountMatrix m(1, 3);
  m.add(0, 0, 3);
  m.add(0, 1, 1);
  EXPECT_EQ(effect_sizes(m).effects, (std::vector<double>{0.75, 0.25, 0.0}));
}

TEST(EffectSizes, EmptyRowIsError) {
  CountMatrix m(2, 2);
  m.add(0, 1);
  try {
    effect_sizes(m);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyTextureClass);
  }
}

TEST(TopK, PicksLargestWithLowIndexTieBreak) {
  auto t = top_k(matrix(1, 3, {0.1, 0.6, 0.3}), 2);
  EXPECT_EQ(t.rows[0].top, (std::vector<Association>{{1, 0.6}, {2, 0.3}}));
  t = top_k(matrix(1, 3, {0.5, 0.5, 0.0}), 1);
  EXPECT_EQ(t.rows[0].top, (std::vector<Association>{{0, 0.5}}));
}

TEST(TopK, RowsSortedByFirstEffect) {
  const auto t = top_k(matrix(3, 2, {0.5, 0.5, 0.1, 0.9, 0.5, 0.5}), 2);
  ASSERT_EQ(t.rows.size(), 3u);
  EXPECT_EQ(t.rows[0].texture, 1u);
  EXPECT_EQ(t.rows[1].texture, 0u);  // tie with texture 2 goes to the lower index
  EXPECT_EQ(t.rows[2].texture, 2u);
}

TEST(TopK, RejectsBadK) {
  EXPECT_THROW(top_k(matrix(1, 3, {1, 0, 0}), 0), Error);
  EXPECT_THROW(top_k(matrix(1, 3, {1, 0, 0}), 4), Error);
}

TEST(Oracle, SingleRecordOneHot) {
  const std::vector<PredictionRecord> records{rec(0, 2)};
  const auto table = top_k(effect_sizes(accumulate(records, 1, 4)), 1);
  EXPECT_EQ(table, testing::brute_force_oracle(records, 1, 4, 1));
  EXPECT_EQ(table.rows[0].top, (std::vector<Association>{{2, 1.0}}));
}

TEST(Oracle, EmptyRowSameError) {
  const std::vector<PredictionRecord> records{rec(0, 0)};
  ErrorCode pipeline{}, oracle{};
  try {
    top_k(effect_sizes(accumulate(records, 2, 2)), 1);
  } catch (const Error& e) {
    pipeline = e.code();
  }
  try {
    testing::brute_force_oracle(records, 2, 2, 1);
  } catch (const Error& e) {
    oracle = e.code();
  }
  EXPECT_EQ(pipeline, ErrorCode::EmptyTextureClass);
  EXPECT_EQ(oracle, pipeline);
}

TEST(OracleProperty, PipelineEqualsBruteForce) {
  std::mt19937 rng(31337);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t T = std::uniform_int_distribution<std::size_t>(1, 10)(rng);
    const std::size_t O = std::uniform_int_distribution<std::size_t>(1, 10)(rng);
    const std::size_t k = std::uniform_int_distribution<std::size_t>(1, O)(rng);
    auto records = random_records(rng, T, O, std::uniform_int_distribution<std::size_t>(T, 1000)(rng));
    for (std::size_t t = 0; t < T; ++t) records.push_back(rec(t, 0));  // no empty rows
    const auto expected = testing::brute_force_oracle(records, T, O, k);
    ASSERT_EQ(top_k(effect_sizes(accumulate(records, T, O)), k), expected) << "trial " << trial;
  }
}

TEST(StatsProperty, RowsAreDistributions) {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t T = std::uniform_int_distribution<std::size_t>(1, 20)(rng);
    const std::size_t O = std::uniform_int_distribution<std::size_t>(1, 1000)(rng);
    auto records = random_records(rng, T, O, std::uniform_int_distribution<std::size_t>(0, 3000)(rng));
    for (std::size_t t = 0; t < T; ++t) records.push_back(rec(t, O - 1));
    const auto e = effect_sizes(accumulate(records, T, O));
    for (std::size_t t = 0; t < T; ++t) {
      const auto row = e.row(t);
      for (double v : row) ASSERT_TRUE(v >= 0.0 && v <= 1.0);
      EXPECT_NEAR(std::accumulate(row.begin(), row.end(), 0.0), 1.0, 1e-9);
    }
  }
}

TEST(StatsProperty, PermutationAndThreadInvariance) {
  std::mt19937 rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    auto records = random_records(rng, 7, 13, std::uniform_int_distribution<std::size_t>(0, 2000)(rng));
    const auto serial = accumulate(records, 7, 13);
    for (unsigned threads : {2u, 3u, 8u, 64u}) EXPECT_EQ(accumulate(records, 7, 13, threads), serial);
    std::shuffle(records.begin(), records.end(), rng);
    EXPECT_EQ(accumulate(records, 7, 13), serial);
  }
}

TEST(StatsProperty, AddingAMatchingRecordRaisesThatEffect) {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    auto records = random_records(rng, 3, 5, std::uniform_int_distribution<std::size_t>(1, 200)(rng));
    for (std::size_t t = 0; t < 3; ++t) records.push_back(rec(t, 4));
    const std::size_t t = rng() % 3, o = rng() % 5;
    const double before = effect_sizes(accumulate(records, 3, 5)).at(t, o);
    records.push_back(rec(t, o));
    const double after = effect_sizes(accumulate(records, 3, 5)).at(t, o);
    if (before < 1.0) {
      EXPECT_GT(after, before);
    } else {
      EXPECT_EQ(after, 1.0);
    }
  }
}

// The committed reference log has a resolution of 1/120 per texture.
TEST(CommittedLog, HoneycombedLeadsTheTable) {
  const auto records = read_log_records(testing::data_dir() / "resnet50_reference.jsonl");
  const auto classes = classes_from_records(records);
  const auto manifest = load_label_manifest(testing::data_dir() / "imagenet_labels.txt");
  const auto table = top_k(effect_sizes(accumulate(records, classes.size(), manifest.size(), 4)), 3);
  const auto& first = table.rows.front();
  EXPECT_EQ(classes[first.texture].name, "honeycombed");
  EXPECT_EQ(manifest[first.top[0].object], "honeycomb");
  EXPECT_NEAR(first.top[0].effect, 0.731, 1.0 / 240);
  EXPECT_EQ(manifest[first.top[1].object], "chain mail");
  EXPECT_NEAR(first.top[1].effect, 0.071, 1.0 / 240);
  EXPECT_EQ(manifest[first.top[2].object], "velvet");
  EXPECT_NEAR(first.top[2].effect, 0.027, 1.0 / 240);
}

}  // namespace
}  // namespace texassoc
