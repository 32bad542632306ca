// Copyright 2026 The dptext Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dptext/mapping.h"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "oracles.h"
#include "test_util.h"

namespace dptext {
namespace {

using ::testing::ElementsAre;
using ::testing::HasSubstr;
using ::testing::SizeIs;

using testing::BruteForceGroups;
using testing::Iota;

std::vector<std::vector<TokenId>> Members(const MappingTable& mapping) {
  std::vector<std::vector<TokenId>> out;
  for (const Group& g : mapping.groups()) out.push_back(g.members);
  return out;
}

// Checks the structural invariants every mapping must satisfy.
void ExpectWellFormed(const MappingTable& mapping, size_t vocab_size, size_t k) {
  std::vector<int> seen(vocab_size, 0);
  size_t short_groups = 0;
  for (size_t g = 0; g < mapping.groups().size(); ++g) {
    const Group& group = mapping.groups()[g];
    ASSERT_FALSE(group.members.empty());
    ASSERT_LE(group.size(), k);
    if (group.size() < k) ++short_groups;
    ASSERT_EQ(group.scores.size(), group.size() * group.size());
    for (size_t i = 0; i < group.size(); ++i) {
      const TokenId id = group.members[i];
      ++seen[id];
      EXPECT_EQ(mapping.group_of(id), g);
      EXPECT_EQ(mapping.position_of(id), i);
      for (size_t j = 0; j < group.size(); ++j) {
        const double u = group.score(i, j);
        if (mapping.measure().polarity() == Polarity::kNegative) {
          EXPECT_GE(u, -1.0);
          EXPECT_LE(u, 0.0);
        } else {
          EXPECT_GE(u, 0.0);
          EXPECT_LE(u, 1.0);
        }
        // Self score is row-maximal.
        EXPECT_GE(group.score(i, i), u);
        EXPECT_FALSE(std::signbit(u) && u == 0.0) << "negative zero";
      }
    }
  }
  EXPECT_LE(short_groups, 1u);
  for (size_t id = 0; id < vocab_size; ++id) EXPECT_EQ(seen[id], 1) << id;
}

TEST(GenerateMappingTest, ToyLineSplitsIntoNeighborPairs) {
  const MappingTable mapping = testing::MustMap(testing::ToyTable(), 2);
  EXPECT_THAT(Members(mapping),
              ElementsAre(ElementsAre(0u, 1u), ElementsAre(2u, 3u)));
  const Group& g = mapping.groups()[0];
  EXPECT_THAT(g.scores, ElementsAre(0.0, -1.0, -1.0, 0.0));
  EXPECT_EQ(g.d_min, 0.0);
  EXPECT_EQ(g.d_max, 1.0);
  EXPECT_TRUE(mapping.warnings().empty());
}

TEST(GenerateMappingTest, MatchesBruteForceOracle) {
  const EmbeddingTable table = testing::RandomTable(100, 12, 21);
  for (SimilarityMeasure m :
       {SimilarityMeasure::Euclidean(), SimilarityMeasure::Cosine()}) {
    for (size_t k : {1u, 2u, 3u, 7u, 20u, 99u, 100u}) {
      MappingOptions options;
      options.k = k;
      options.measure = m;
      auto mapping = GenerateMapping(table, options);
      ASSERT_TRUE(mapping.ok());
      EXPECT_EQ(Members(*mapping), BruteForceGroups(table, m, k, Iota(100)))
          << m.name() << " K=" << k;
      ExpectWellFormed(*mapping, 100, k);
    }
  }
}

TEST(GenerateMappingTest, TieHeavyGridMatchesOracle) {
  const EmbeddingTable table = testing::GridTable(9);
  for (SimilarityMeasure m :
       {SimilarityMeasure::Euclidean(), SimilarityMeasure::Cosine()}) {
    for (size_t k : {2u, 4u, 5u}) {
      const MappingTable mapping = testing::MustMap(table, k, m);
      EXPECT_EQ(Members(mapping), BruteForceGroups(table, m, k, Iota(81)))
          << m.name() << " K=" << k;
      ExpectWellFormed(mapping, 81, k);
    }
  }
}

TEST(GenerateMappingTest, ParallelAndSerialScansAgree) {
  const int saved = omp_get_max_threads();
  omp_set_num_threads(3);
  const EmbeddingTable table = testing::RandomTable(9000, 4, 4);
  MappingOptions options;
  options.k = 300;
  auto parallel = GenerateMapping(table, options);
  options.parallel = false;
  auto serial = GenerateMapping(table, options);
  omp_set_num_threads(saved);
  ASSERT_TRUE(parallel.ok() && serial.ok());
  EXPECT_EQ(Members(*parallel), Members(*serial));
}

TEST(GenerateMappingTest, LeftoverGroupIsSmaller) {
  const EmbeddingTable table =
      testing::MakeTable({"a", "b", "c", "d", "e"}, {0, 1, 2, 3, 4}, 1);
  const MappingTable mapping = testing::MustMap(table, 2);
  ASSERT_THAT(mapping.groups(), SizeIs(3));
  EXPECT_EQ(mapping.groups()[0].size(), 2u);
  EXPECT_EQ(mapping.groups()[1].size(), 2u);
  EXPECT_EQ(mapping.groups()[2].size(), 1u);
  // A singleton has a single zero score.
  EXPECT_THAT(mapping.groups()[2].scores, ElementsAre(0.0));
}

TEST(GenerateMappingTest, WholeVocabularyAsOneGroup) {
  const EmbeddingTable table = testing::RandomTable(30, 5, 1);
  const MappingTable exact = testing::MustMap(table, 30);
  EXPECT_THAT(exact.groups(), SizeIs(1));
  EXPECT_TRUE(exact.warnings().empty());

  const MappingTable over = testing::MustMap(table, 50);
  EXPECT_THAT(over.groups(), SizeIs(1));
  EXPECT_EQ(over.k(), 50u);
  ASSERT_THAT(over.warnings(), SizeIs(1));
  EXPECT_THAT(over.warnings()[0], HasSubstr("exceeds vocabulary size"));
}

TEST(GenerateMappingTest, KOneWarnsAboutNoProtection) {
  const MappingTable mapping = testing::MustMap(testing::ToyTable(), 1);
  EXPECT_THAT(mapping.groups(), SizeIs(4));
  ASSERT_THAT(mapping.warnings(), SizeIs(1));
  EXPECT_THAT(mapping.warnings()[0], HasSubstr("NO differential-privacy"));
}

TEST(GenerateMappingTest, RejectsZeroK) {
  MappingOptions options;
  options.k = 0;
  EXPECT_FALSE(GenerateMapping(testing::ToyTable(), options).ok());
}

TEST(GenerateMappingTest, CosineRejectsZeroVectors) {
  const EmbeddingTable table =
      testing::MakeTable({"x", "zero", "y"}, {1, 0, 0, 0, 0, 1}, 2);
  auto mapping = GenerateMapping(table, {.k = 2, .measure = SimilarityMeasure::Cosine()});
  ASSERT_FALSE(mapping.ok());
  EXPECT_THAT(std::string(mapping.status().message()), HasSubstr("'zero'"));
}

TEST(GenerateMappingTest, FrequencyOrderSeedsMostFrequentFirst) {
  const EmbeddingTable table = testing::RandomTable(60, 6, 17);
  std::vector<uint64_t> freq(60);
  for (size_t i = 0; i < freq.size(); ++i) freq[i] = (i * 37) % 11;
  MappingOptions options;
  options.k = 4;
  options.order = SeedOrder::kFrequencyOrder;
  options.frequencies = freq;
  auto mapping = GenerateMapping(table, options);
  ASSERT_TRUE(mapping.ok());
  std::vector<TokenId> order = Iota(60);
  std::stable_sort(order.begin(), order.end(),
                   [&](TokenId a, TokenId b) { return freq[a] > freq[b]; });
  EXPECT_EQ(Members(*mapping),
            BruteForceGroups(table, SimilarityMeasure::Euclidean(), 4, order));
  EXPECT_EQ(mapping->groups()[0].members[0], order[0]);

  options.frequencies.pop_back();
  EXPECT_FALSE(GenerateMapping(table, options).ok());
}

TEST(BuildScoresTest, EuclideanMinMaxOverAllPairs) {
  const EmbeddingTable table = testing::ToyTable();
  // Members a, b, c: raw distances {0, 1, 10, 9} with d_min 0, d_max 10.
  auto s = BuildScores(std::vector<TokenId>{0, 1, 2}, table,
                       SimilarityMeasure::Euclidean());
  ASSERT_TRUE(s.ok());
  EXPECT_EQ(s->d_min, 0.0);
  EXPECT_EQ(s->d_max, 10.0);
  EXPECT_THAT(s->scores,
              ElementsAre(0.0, -0.1, -1.0, -0.1, 0.0, -0.9, -1.0, -0.9, 0.0));
}

TEST(BuildScoresTest, CosineSelfIsOneAndRangeIsUnit) {
  const EmbeddingTable table =
      testing::MakeTable({"x", "y", "z"}, {1, 0, 0, 1, -1, 0}, 2);
  auto s = BuildScores(std::vector<TokenId>{0, 1, 2}, table,
                       SimilarityMeasure::Cosine());
  ASSERT_TRUE(s.ok());
  EXPECT_EQ(s->d_min, -1.0);
  EXPECT_EQ(s->d_max, 1.0);
  // cos(x, y) = 0 maps to 0.5; cos(x, z) = -1 maps to 0.
  EXPECT_THAT(s->scores,
              ElementsAre(1.0, 0.5, 0.0, 0.5, 1.0, 0.5, 0.0, 0.5, 1.0));
}

TEST(BuildScoresTest, DegenerateGroupScoresAreZero) {
  const EmbeddingTable table =
      testing::MakeTable({"p", "q"}, {1, 0, 1, 0}, 2);
  for (SimilarityMeasure m :
       {SimilarityMeasure::Euclidean(), SimilarityMeasure::Cosine()}) {
    auto s = BuildScores(std::vector<TokenId>{0, 1}, table, m);
    ASSERT_TRUE(s.ok());
    EXPECT_THAT(s->scores, ElementsAre(0.0, 0.0, 0.0, 0.0));
  }
}

// Any two members' score rows differ by at most 1 at every output, which is
// what bounds the sensitivity.
TEST(BuildScoresTest, AdjacentRowsDifferByAtMostOne) {
  const EmbeddingTable table = testing::RandomTable(200, 8, 6);
  for (SimilarityMeasure m :
       {SimilarityMeasure::Euclidean(), SimilarityMeasure::Cosine()}) {
    const MappingTable mapping = testing::MustMap(table, 9, m);
    for (const Group& g : mapping.groups()) {
      for (size_t x = 0; x < g.size(); ++x) {
        for (size_t xp = 0; xp < g.size(); ++xp) {
          for (size_t y = 0; y < g.size(); ++y) {
            EXPECT_LE(std::abs(g.score(x, y) - g.score(xp, y)), 1.0);
          }
        }
      }
    }
  }
}

TEST(MappingTableTest, LookupBySurface) {
  const MappingTable mapping = testing::MustMap(testing::ToyTable(), 2);
  auto row = mapping.Lookup("d");
  ASSERT_TRUE(row.has_value());
  EXPECT_EQ(row->group_index, 1u);
  EXPECT_EQ(row->position, 1u);
  EXPECT_THAT(std::vector<double>(row->scores.begin(), row->scores.end()),
              ElementsAre(-1.0, 0.0));
  EXPECT_FALSE(mapping.Lookup("zzz").has_value());
}

TEST(MappingTableTest, CreateRejectsBrokenPartitions) {
  auto vocab = *Vocabulary::Create({"a", "b", "c"});
  auto group = [](std::vector<TokenId> m) {
    Group g;
    g.members = m;
    g.scores.assign(m.size() * m.size(), 0.0);
    return g;
  };
  const auto e = SimilarityMeasure::Euclidean();
  const auto o = SeedOrder::kVocabOrder;
  EXPECT_TRUE(MappingTable::Create(vocab, {group({0, 1}), group({2})}, 2, e, o, 0).ok());
  // Token 2 missing.
  EXPECT_FALSE(MappingTable::Create(vocab, {group({0, 1})}, 2, e, o, 0).ok());
  // Token 1 twice.
  EXPECT_FALSE(
      MappingTable::Create(vocab, {group({0, 1}), group({1, 2})}, 2, e, o, 0).ok());
  // Group larger than K.
  EXPECT_FALSE(MappingTable::Create(vocab, {group({0, 1, 2})}, 2, e, o, 0).ok());
  // Two short groups.
  EXPECT_FALSE(MappingTable::Create(vocab, {group({0}), group({1}), group({2})},
                                    2, e, o, 0)
                   .ok());
  // Non-square scores.
  Group bad = group({0, 1});
  bad.scores.pop_back();
  EXPECT_FALSE(MappingTable::Create(vocab, {bad, group({2})}, 2, e, o, 0).ok());
  // Score outside [-1, 0] for euclidean.
  Group out_of_range = group({0, 1});
  out_of_range.scores[1] = 0.5;
  EXPECT_FALSE(
      MappingTable::Create(vocab, {out_of_range, group({2})}, 2, e, o, 0).ok());
}

TEST(LoadFrequenciesTest, ParsesAndIgnoresUnknownSurfaces) {
  testing::TempDir dir;
  testing::WriteFile(dir / "f.txt", "b 7\nzzz 3\r\n\na\t2\n");
  auto counts = LoadFrequencies(dir / "f.txt", testing::ToyTable().vocab());
  ASSERT_TRUE(counts.ok()) << counts.status();
  EXPECT_THAT(*counts, ElementsAre(2u, 7u, 0u, 0u));

  testing::WriteFile(dir / "bad.txt", "a x\n");
  EXPECT_FALSE(LoadFrequencies(dir / "bad.txt", testing::ToyTable().vocab()).ok());
  EXPECT_EQ(LoadFrequencies(dir / "none.txt", testing::ToyTable().vocab())
                .status()
                .code(),
            absl::StatusCode::kNotFound);
}

TEST(SeedOrderTest, Names) {
  EXPECT_EQ(*SeedOrderFromName("vocab"), SeedOrder::kVocabOrder);
  EXPECT_EQ(*SeedOrderFromName("frequency"), SeedOrder::kFrequencyOrder);
  EXPECT_FALSE(SeedOrderFromName("random").ok());
  EXPECT_EQ(SeedOrderName(SeedOrder::kFrequencyOrder), "frequency");
}

}  // namespace
}  // namespace dptext
