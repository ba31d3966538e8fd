#include <gtest/gtest.h>

#include <cmath>

#include "lexbridge/bdi.hpp"
#include "lexbridge/error.hpp"
#include "lexbridge/smt/extraction.hpp"
#include "lexbridge/smt/phrase_table.hpp"
#include "oracles.hpp"

using namespace lexbridge;
using namespace lexbridge::smt;

namespace {

AlignmentMap identity_map(int d) {
  AlignmentMap m;
  m.source_map = Matrix::Identity(d, d);
  return m;
}

double row_sum(const std::vector<PhraseEntry>& row) {
  double s = 0;
  for (const auto& e : row) s += e.forward;
  return s;
}

}  // namespace

TEST(Softmax, Stable) {
  const auto p = softmax({1000.0, 1000.0, 999.0});
  const double e = std::exp(1.0);
  EXPECT_NEAR(p[0], e / (2 * e + 1), 1e-12);
  EXPECT_NEAR(p[2], 1 / (2 * e + 1), 1e-12);
}

TEST(InitTable, EqualCosinesGiveUniformRow) {
  RowMatrix s(1, 2), t(3, 2);
  s << 1, 0;
  t << 0.3, 1, 0.3, 1, 0.3, 1;
  PhraseInitOptions o;
  o.temperature = 1.0;
  const auto table = init_phrase_table(identity_map(2), EmbeddingSpace(oracle::ranked_vocab("p", 1), s),
                                       EmbeddingSpace(oracle::ranked_vocab("c", 3), t), o);
  const auto* row = table.lookup(Phrase{"p0"});
  ASSERT_NE(row, nullptr);
  ASSERT_EQ(row->size(), 3u);
  for (const auto& e : *row) EXPECT_NEAR(e.forward, 1.0 / 3, 1e-12);
}

TEST(InitTable, TwoCandidatesUnitTemperature) {
  RowMatrix s(1, 2), t(2, 2);
  s << 1, 0;
  t << 1, 0, 0, 1;
  PhraseInitOptions o;
  o.temperature = 1.0;
  const auto table = init_phrase_table(identity_map(2), EmbeddingSpace(oracle::ranked_vocab("p", 1), s),
                                       EmbeddingSpace(oracle::ranked_vocab("c", 2), t), o);
  const auto& row = *table.lookup(Phrase{"p0"});
  const double e = std::exp(1.0);
  EXPECT_EQ(row[0].target, Phrase{"c0"});
  EXPECT_NEAR(row[0].forward, e / (e + 1), 1e-9);
  EXPECT_NEAR(row[1].forward, 1 / (e + 1), 1e-9);
}

TEST(InitTable, RowsNormalizeAndHoldSingleWords) {
  const auto p = oracle::rotated_pair(50, 8, 3, 0.4);
  const auto ps = prepare_for_alignment(p.source), pt = prepare_for_alignment(p.target);
  for (bool invert : {false, true}) {
    PhraseInitOptions o;
    o.invert_temperature = invert;
    o.candidates = 10;
    const auto table = init_phrase_table(identity_map(8), ps, pt, o);
    EXPECT_EQ(table.size(), 50u);
    EXPECT_EQ(table.longest_source(), 1);
    EXPECT_EQ(table.max_length(), 4);
    for (const auto& [src, row] : table.rows()) {
      EXPECT_NEAR(row_sum(row), 1.0, 1e-6);
      EXPECT_EQ(row.size(), 10u);
      for (const auto& e : row) {
        EXPECT_EQ(e.target.size(), 1u);
        EXPECT_GT(e.backward, 0.0);
        EXPECT_LE(e.backward, 1.0);
      }
    }
  }
}

TEST(InitTable, DimensionMismatch) {
  const auto p = oracle::rotated_pair(10, 4, 4);
  try {
    init_phrase_table(identity_map(3), p.source, p.target);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimensionMismatch);
  }
}

TEST(PhraseTable, SetRowRenormalizesAndSorts) {
  PhraseTable t;
  t.set_row({"a", "b"}, {{{"y"}, 1.0, 0.5}, {{"x"}, 3.0, 0.5}});
  const auto& row = *t.lookup(Phrase{"a", "b"});
  EXPECT_EQ(row[0].target, Phrase{"x"});
  EXPECT_NEAR(row[0].forward, 0.75, 1e-12);
  EXPECT_EQ(t.longest_source(), 2);
  EXPECT_THROW(t.set_row({"a", "b", "c", "d", "e"}, {{{"x"}, 1.0, 1.0}}), Error);
}

TEST(PhraseTable, InvertSwapsDirections) {
  PhraseTable t;
  t.set_row({"a"}, {{{"x"}, 0.6, 0.9}, {{"y"}, 0.4, 0.5}});
  t.set_row({"b"}, {{{"x"}, 1.0, 0.1}});
  const auto inv = t.inverted();
  const auto& x = *inv.lookup(Phrase{"x"});
  ASSERT_EQ(x.size(), 2u);
  EXPECT_NEAR(row_sum(x), 1.0, 1e-12);
  EXPECT_EQ(x[0].target, Phrase{"a"});
  EXPECT_NEAR(x[0].forward, 0.9, 1e-12);
  EXPECT_NEAR(x[0].backward, 0.6, 1e-12);
}

TEST(PhraseTable, SaveLoad) {
  PhraseTable t;
  t.set_row({"a", "b"}, {{{"x", "y"}, 0.25, 0.125}, {{"z"}, 0.75, 0.5}});
  t.set_row({"c"}, {{{"w"}, 1.0, 1.0}});
  const auto dir = oracle::scratch_dir("pt");
  t.save(dir / "pt.txt");
  const auto back = PhraseTable::load(dir / "pt.txt");
  EXPECT_EQ(back.entry_count(), 3u);
  EXPECT_NEAR(back.lookup(Phrase{"a", "b"})->at(1).forward, 0.25, 1e-9);
  EXPECT_EQ(back.lookup(Phrase{"a", "b"})->at(1).target, (Phrase{"x", "y"}));
}

TEST(Extraction, ConsistentPhrasePairs) {
  AlignedPair p{{"a", "b", "c"}, {"x", "y", "z"}, {{0, 0}, {1, 2}, {2, 1}}};
  auto pairs = extract_pairs(p, 4);
  std::sort(pairs.begin(), pairs.end());
  // Brute force: a span pair is consistent when no link leaves it and it holds one.
  std::vector<std::pair<Phrase, Phrase>> truth;
  for (std::size_t s0 = 0; s0 < 3; ++s0)
    for (std::size_t s1 = s0 + 1; s1 <= 3; ++s1)
      for (std::size_t t0 = 0; t0 < 3; ++t0)
        for (std::size_t t1 = t0 + 1; t1 <= 3; ++t1) {
          bool inside = false, ok = true;
          for (auto [i, j] : p.links) {
            const bool si = i >= s0 && i < s1, tj = j >= t0 && j < t1;
            if (si != tj) ok = false;
            inside = inside || (si && tj);
          }
          if (ok && inside)
            truth.push_back({Phrase(p.source.begin() + static_cast<long>(s0), p.source.begin() + static_cast<long>(s1)),
                             Phrase(p.target.begin() + static_cast<long>(t0), p.target.begin() + static_cast<long>(t1))});
        }
  std::sort(truth.begin(), truth.end());
  EXPECT_EQ(pairs, truth);
}

TEST(Extraction, RelativeFrequencies) {
  const std::vector<AlignedPair> corpus = {{{"a"}, {"x"}, {{0, 0}}}, {{"a"}, {"x"}, {{0, 0}}}, {{"a"}, {"y"}, {{0, 0}}},
                                           {{"b"}, {"y"}, {{0, 0}}}};
  const auto t = extract_phrase_table(corpus);
  const auto& a = *t.lookup(Phrase{"a"});
  EXPECT_NEAR(a[0].forward, 2.0 / 3, 1e-12);
  EXPECT_NEAR(a[0].backward, 1.0, 1e-12);
  EXPECT_NEAR(a[1].backward, 0.5, 1e-12);
}

TEST(Extraction, AlignsRepeatedWordsAlongDiagonal) {
  PhraseTable t;
  t.set_row({"a"}, {{{"x"}, 1.0, 1.0}});
  t.set_row({"b"}, {{{"y"}, 1.0, 1.0}});
  const Sentence s{"a", "b", "a"}, u{"x", "y", "x"};
  auto links = align_pair(t, s, u);
  std::sort(links.begin(), links.end());
  EXPECT_EQ(links, (std::vector<Link>{{0, 0}, {1, 1}, {2, 2}}));
}

TEST(Extraction, Backfill) {
  PhraseTable t, fallback;
  t.set_row({"a"}, {{{"x"}, 1.0, 1.0}});
  fallback.set_row({"a"}, {{{"q"}, 1.0, 1.0}});
  fallback.set_row({"b"}, {{{"y"}, 1.0, 1.0}});
  backfill(t, fallback);
  EXPECT_EQ(t.lookup(Phrase{"a"})->at(0).target, Phrase{"x"});
  EXPECT_EQ(t.lookup(Phrase{"b"})->at(0).target, Phrase{"y"});
}
