#include <gtest/gtest.h>

#include <random>

#include "lexbridge/error.hpp"
#include "lexbridge/smt/language_model.hpp"
#include "oracles.hpp"

using namespace lexbridge;
using smt::NGramLanguageModel;

namespace {

std::vector<Sentence> random_text(int sentences, int types, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Sentence> out;
  for (int i = 0; i < sentences; ++i) {
    Sentence s;
    const int len = 1 + static_cast<int>(rng() % 7);
    // Skewed so that counts of 1, 2, 3 and 4 all occur.
    for (int j = 0; j < len; ++j) s.push_back("w" + std::to_string(std::min(rng() % types, rng() % types)));
    out.push_back(s);
  }
  return out;
}

std::vector<std::string> outcomes(const NGramLanguageModel& lm) {
  std::vector<std::string> w;
  for (std::size_t i = 0; i < lm.vocabulary_size(); ++i)
    if (lm.word(static_cast<NGramLanguageModel::WordId>(i)) != "<s>") w.push_back(lm.word(static_cast<NGramLanguageModel::WordId>(i)));
  return w;
}

}  // namespace

TEST(LanguageModel, TwoTypeCorpusMatchesOracle) {
  const std::vector<Sentence> text = {{"a", "b"}, {"a", "b"}};
  const auto lm = NGramLanguageModel::train(Corpus{"ab", text}, 2);
  const oracle::KneserNey kn(text, 2);
  const Sentence a{"a"};
  EXPECT_NEAR(lm.prob("b", a), kn.prob("b", a), 1e-9);
  double sum = 0;
  for (const char* w : {"a", "b", "<unk>", "</s>"}) sum += lm.prob(w, a);
  EXPECT_NEAR(sum, 1.0, 1e-6);
  EXPECT_GT(lm.prob("z", a), 0.0);
  EXPECT_GT(lm.prob("z", Sentence{}), 0.0);
}

TEST(LanguageModel, DiscountsFromCountOfCounts) {
  const auto text = random_text(400, 30, 1);
  const auto lm = NGramLanguageModel::train(Corpus{"r", text}, 3);
  const oracle::KneserNey kn(text, 3);
  ASSERT_EQ(lm.discounts().size(), 3u);
  for (std::size_t n = 0; n < 3; ++n)
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(lm.discounts()[n][i], kn.discounts()[n][i], 1e-12);
}

TEST(LanguageModel, MatchesOracleOnRandomHistories) {
  const auto text = random_text(300, 25, 2);
  for (int order : {2, 3, 4}) {
    const auto lm = NGramLanguageModel::train(Corpus{"r", text}, order);
    const oracle::KneserNey kn(text, order);
    const auto words = outcomes(lm);
    std::mt19937_64 rng(static_cast<std::uint64_t>(order));
    for (int h = 0; h < 100; ++h) {
      Sentence hist;
      const int len = static_cast<int>(rng() % static_cast<std::uint64_t>(order + 1));
      for (int i = 0; i < len; ++i) hist.push_back(i == 0 && rng() % 3 == 0 ? "<s>" : "w" + std::to_string(rng() % 27));
      Sentence oracle_hist = hist;
      for (auto& w : oracle_hist)
        if (!lm.id(w)) w = "<unk>";
      double sum = 0;
      for (const auto& w : words) {
        const double p = lm.prob(w, hist);
        ASSERT_GT(p, 0.0);
        ASSERT_LE(p, 1.0);
        sum += p;
        EXPECT_NEAR(p, kn.prob(w, oracle_hist), 1e-9) << "order " << order << " w=" << w;
      }
      EXPECT_NEAR(sum, 1.0, 1e-6);
    }
  }
}

TEST(LanguageModel, SentenceLogProbIsChainRule) {
  const auto text = random_text(100, 10, 3);
  const auto lm = NGramLanguageModel::train(Corpus{"r", text}, 3);
  const Sentence s{"w1", "w0", "w9", "q"};
  Sentence hist{"<s>"};
  double total = 0;
  for (const auto& w : s) {
    total += lm.log_prob(w, hist);
    hist.push_back(w);
  }
  total += lm.log_prob("</s>", hist);
  EXPECT_NEAR(lm.sentence_log_prob(s), total, 1e-12);
}

TEST(LanguageModel, OrderFallsBackOnShortCorpus) {
  const auto lm = NGramLanguageModel::train(Corpus{"tiny", {{"a"}, {"b"}}}, 5);
  EXPECT_EQ(lm.order(), 3);
  EXPECT_FALSE(lm.warnings().empty());
}

TEST(LanguageModel, ArpaRoundTrip) {
  const auto text = random_text(120, 12, 4);
  const auto lm = NGramLanguageModel::train(Corpus{"r", text}, 3);
  const auto dir = oracle::scratch_dir("arpa");
  lm.save_arpa(dir / "lm.arpa");
  const auto back = NGramLanguageModel::load_arpa(dir / "lm.arpa");
  EXPECT_EQ(back.order(), 3);
  for (int n = 1; n <= 3; ++n) EXPECT_EQ(back.ngram_count(n), lm.ngram_count(n));
  for (const auto& s : text) EXPECT_NEAR(back.sentence_log_prob(s), lm.sentence_log_prob(s), 1e-4);
}

TEST(LanguageModel, EmptyCorpus) {
  EXPECT_THROW(NGramLanguageModel::train(Corpus{"e", {}}, 3), Error);
}
