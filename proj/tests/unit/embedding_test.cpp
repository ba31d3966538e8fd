#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "lexbridge/embedding.hpp"
#include "lexbridge/error.hpp"
#include "lexbridge/hash.hpp"
#include "oracles.hpp"

using namespace lexbridge;

namespace {

double cosine(const Vector& a, const Vector& b) { return a.dot(b) / (a.norm() * b.norm()); }

Corpus repeated(const Sentence& s, int n) {
  Corpus c{"rep", {}};
  for (int i = 0; i < n; ++i) c.sentences.push_back(s);
  return c;
}

Corpus two_clusters(int sentences, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::vector<std::string> a = {"a1", "a2", "a3", "a4", "a5"}, b = {"b1", "b2", "b3", "b4", "b5"};
  Corpus c{"clusters", {}};
  for (int i = 0; i < sentences; ++i) {
    const auto& side = i % 2 ? a : b;
    Sentence s;
    for (int j = 0; j < 6; ++j) s.push_back(side[rng() % side.size()]);
    c.sentences.push_back(s);
  }
  return c;
}

TrainConfig small(int dim) {
  TrainConfig cfg;
  cfg.dim = dim;
  cfg.min_count = 1;
  cfg.subsample = 1.0;
  cfg.epochs = 5;
  cfg.seed = 3;
  return cfg;
}

}  // namespace

TEST(Subwords, Cat) {
  EXPECT_EQ(subword_ngrams("cat"), (std::vector<std::string>{"<c", "ca", "at", "t>", "<ca", "cat", "at>", "<cat",
                                                             "cat>", "<cat>"}));
}

TEST(Subwords, SingleLetterAndEmpty) {
  EXPECT_EQ(subword_ngrams("a"), (std::vector<std::string>{"<a", "a>", "<a>"}));
  try {
    subword_ngrams("");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kPreconditionViolation);
  }
}

TEST(Subwords, CodePointsNotBytes) {
  const auto g = subword_ngrams("né", 2, 2);
  EXPECT_EQ(g, (std::vector<std::string>{"<n", "né", "é>", "<né>"}));
}

TEST(Subwords, BucketIsFnvModulo) {
  EXPECT_EQ(subword_bucket("ab", 1000), fnv1a64("ab") % 1000);
  EXPECT_LT(subword_bucket("<cat>", 7), 7u);
}

TEST(SkipGram, CooccurringPairRanksHighest) {
  const auto m = train_skipgram(repeated({"x", "y"}, 500), small(10));
  const auto& v = m.space.vectors();
  const auto& vocab = m.space.vocab();
  const auto x = static_cast<Eigen::Index>(*vocab.id("x")), y = static_cast<Eigen::Index>(*vocab.id("y"));
  // PMI: x and y always co-occur, neither co-occurs with itself.
  const double xy = cosine(v.row(x), m.context.row(y)), yx = cosine(v.row(y), m.context.row(x));
  const double xx = cosine(v.row(x), m.context.row(x)), yy = cosine(v.row(y), m.context.row(y));
  EXPECT_GT(std::min(xy, yx), std::max(xx, yy));
}

TEST(SkipGram, ShapeAndDeterminism) {
  const auto corpus = two_clusters(200, 1);
  const auto a = train_skipgram(corpus, small(16));
  const auto b = train_skipgram(corpus, small(16));
  EXPECT_EQ(a.space.dim(), 16);
  EXPECT_EQ(static_cast<std::size_t>(a.space.vectors().rows()), a.space.size());
  EXPECT_EQ(a.space.size(), 10u);
  EXPECT_TRUE(a.space.vectors() == b.space.vectors());
  EXPECT_TRUE(all_finite(a.space.vectors()));
}

TEST(SkipGram, LossDecreases) {
  const auto m = train_skipgram(two_clusters(300, 2), small(16));
  ASSERT_EQ(m.epoch_loss.size(), 5u);
  EXPECT_LT(m.epoch_loss.back(), m.epoch_loss.front());
}

TEST(SkipGram, SharedContextsAreCloser) {
  const auto m = train_skipgram(two_clusters(400, 3), small(16));
  const auto& s = m.space;
  double within = 0, across = 0;
  int nw = 0, na = 0;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = i + 1; j < s.size(); ++j) {
      const double c = cosine(s.vectors().row(static_cast<Eigen::Index>(i)), s.vectors().row(static_cast<Eigen::Index>(j)));
      if (s.vocab().word(i)[0] == s.vocab().word(j)[0]) {
        within += c;
        ++nw;
      } else {
        across += c;
        ++na;
      }
    }
  EXPECT_GT(within / nw, across / na);
}

TEST(SkipGram, SubwordCompositionIsMean) {
  auto cfg = small(8);
  cfg.subword = SubwordConfig{};
  const auto m = train_skipgram(two_clusters(100, 4), cfg);
  ASSERT_TRUE(m.space.subwords().has_value());
  const auto& t = *m.space.subwords();
  EXPECT_GT(t.materialized_buckets(), 0u);
  for (std::size_t i = 0; i < m.space.size(); ++i) {
    const Vector composed = t.compose(i);
    EXPECT_LT((composed - m.space.vectors().row(static_cast<Eigen::Index>(i)).transpose()).norm(), 1e-9);
  }
  EXPECT_TRUE(m.space.lookup("a12").has_value());
}

TEST(SkipGram, InvalidConfig) {
  auto cfg = small(0);
  EXPECT_THROW(train_skipgram(two_clusters(10, 1), cfg), Error);
  cfg = small(4);
  cfg.min_count = 100;
  try {
    train_skipgram(two_clusters(10, 1), cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyVocabulary);
  }
}

TEST(Vectors, RoundTripPreservesCosines) {
  RowMatrix m(3, 2);
  m << 0.123456789, -1.5, 2.0, 0.333333333, -0.7, -0.01;
  const EmbeddingSpace s(oracle::ranked_vocab("w", 3), m);
  const auto dir = oracle::scratch_dir("vectors");
  save_vectors(s, dir / "v.txt");
  const auto back = load_vectors(dir / "v.txt");
  ASSERT_EQ(back.vocab().words(), s.vocab().words());
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      EXPECT_NEAR(cosine(back.vectors().row(i), back.vectors().row(j)), cosine(m.row(i), m.row(j)), 1e-5);
}

TEST(Vectors, MalformedInput) {
  auto code = [](const std::string& text) {
    std::istringstream in(text);
    try {
      read_vectors(in);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kPreconditionViolation;
  };
  EXPECT_EQ(code("2 5\na 1 2 3 4 5\nb 1 2 3 4\n"), ErrorCode::kMalformedRow);
  EXPECT_EQ(code("two 5\n"), ErrorCode::kMalformedHeader);
  EXPECT_EQ(code("2 2\na 1 2\na 3 4\n"), ErrorCode::kDuplicateWord);
}

TEST(Vectors, ExternalFile) {
  std::istringstream in("3 2\nthe 0.1 0.2\nof -0.3 1e-2\nand 4 -5\n");
  const auto s = read_vectors(in);
  EXPECT_EQ(s.size(), 3u);
  EXPECT_EQ(s.dim(), 2);
  EXPECT_EQ(*s.vocab().id("and"), 2u);
  EXPECT_DOUBLE_EQ(s.vectors()(1, 1), 0.01);
}
