#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "lexbridge/error.hpp"
#include "lexbridge/smt/decoder.hpp"
#include "lexbridge/smt/language_model.hpp"
#include "lexbridge/synthetic.hpp"

using namespace lexbridge;
using namespace lexbridge::smt;

namespace {

PhraseTable hand_table() {
  PhraseTable t;
  t.set_row({"a"}, {{{"x"}, 0.7, 0.5}, {{"y"}, 0.3, 0.25}});
  t.set_row({"b", "c"}, {{{"z", "w"}, 1.0, 0.125}});
  t.set_row({"b"}, {{{"z"}, 1.0, 0.9}});
  t.set_row({"c"}, {{{"w"}, 1.0, 0.8}});
  return t;
}

const NGramLanguageModel& target_lm() {
  static const auto lm = NGramLanguageModel::train(Corpus{"t", {{"x", "z", "w"}, {"y", "w"}, {"z", "x"}}}, 2);
  return lm;
}

}  // namespace

TEST(ScoreDerivation, TwoPhraseHandSum) {
  const Sentence src{"a", "b", "c"};
  const std::vector<DerivationStep> steps = {{0, 1, {"x"}}, {1, 3, {"z", "w"}}};
  DecoderOptions o;
  const double lm = target_lm().sentence_log_prob(Phrase{"x", "z", "w"});
  const double expected = std::log(0.5) + std::log(0.125) + lm + 3 * o.weights.word_penalty;
  EXPECT_NEAR(score_derivation(hand_table(), target_lm(), src, steps, o), expected, 1e-12);
}

TEST(ScoreDerivation, PhraseOnlyWeights) {
  DecoderOptions o;
  o.weights.lm = 0;
  o.weights.word_penalty = 0;
  const Sentence src{"a", "b", "c", "q"};
  const std::vector<DerivationStep> steps = {{0, 1, {"y"}}, {1, 2, {"z"}}, {2, 3, {"w"}}, {3, 4, {"q"}}};
  const double expected = std::log(0.25) + std::log(0.9) + std::log(0.8) + o.unknown_log_prob;
  EXPECT_NEAR(score_derivation(hand_table(), target_lm(), src, steps, o), expected, 1e-12);
  EXPECT_NEAR(phrase_log_prob(hand_table(), Sentence{"a"}, Phrase{"nope"}, o), o.unknown_log_prob, 0);
}

TEST(Decode, IdentityTableCopies) {
  PhraseTable t;
  for (const char* w : {"a", "b", "c"}) t.set_row({w}, {{{w}, 1.0, 1.0}});
  const auto lm = NGramLanguageModel::train(Corpus{"u", {{"a", "b", "c"}, {"c", "b", "a"}}}, 2);
  const Sentence s{"c", "a", "a", "b", "unk"};
  const auto tr = decode(t, lm, s);
  EXPECT_EQ(tr.tokens, s);
  EXPECT_TRUE(tr.segments.back().copied);
  DecoderOptions o;
  o.weights.word_penalty = 0;
  std::vector<DerivationStep> steps;
  for (std::size_t i = 0; i < s.size(); ++i) steps.push_back({i, i + 1, {s[i]}});
  EXPECT_NEAR(decode(t, lm, s, o).score, score_derivation(t, lm, s, steps, o), 1e-12);
}

TEST(Decode, CipherToyDeciphers) {
  CipherOptions opts;
  opts.vocabulary = 20;
  opts.shared = 2;
  opts.tokens = 3000;
  opts.held_out = 20;
  const auto bench = make_cipher_benchmark(opts);
  PhraseTable t;
  for (const auto& p : bench.cipher) {
    std::vector<PhraseEntry> row{{{p.target}, 0.9, 0.9}};
    for (const auto& q : bench.cipher)
      if (q.target != p.target && row.size() < 3) row.push_back({{q.target}, 0.05, 0.05});
    t.set_row({p.source}, row);
  }
  const auto lm = NGramLanguageModel::train(bench.target, 3);
  for (std::size_t i = 0; i < bench.held_out_source.size(); ++i)
    EXPECT_EQ(decode(t, lm, bench.held_out_source[i]).tokens, bench.held_out_target[i]);
}

TEST(Decode, PicksCheaperSegmentation) {
  DecoderOptions o;
  o.weights.lm = 0;
  const auto tr = decode(hand_table(), target_lm(), Sentence{"a", "b", "c"}, o);
  // b c as one phrase: ln .125 - .2 versus ln .9 + ln .8 - .2.
  EXPECT_EQ(tr.segments.size(), 3u);
  EXPECT_TRUE(tr.monotone());
}

TEST(Decode, Validation) {
  DecoderOptions o;
  o.beam = 0;
  EXPECT_THROW(decode(hand_table(), target_lm(), Sentence{"a"}, o), Error);
  EXPECT_THROW(decode(hand_table(), target_lm(), Sentence{}), Error);
}

TEST(Decode, DistortionAllowsSwaps) {
  PhraseTable t;
  t.set_row({"a"}, {{{"x"}, 1.0, 1.0}});
  t.set_row({"b"}, {{{"y"}, 1.0, 1.0}});
  const auto lm = NGramLanguageModel::train(Corpus{"t", std::vector<Sentence>(20, Sentence{"y", "x"})}, 3);
  EXPECT_EQ(decode(t, lm, Sentence{"a", "b"}).tokens, (Phrase{"x", "y"}));
  DecoderOptions o;
  o.distortion_limit = 2;
  const auto swapped = decode(t, lm, Sentence{"a", "b"}, o);
  EXPECT_EQ(swapped.tokens, (Phrase{"y", "x"}));
  EXPECT_FALSE(swapped.monotone());
}

TEST(Decode, AllMatchesSingle) {
  const std::vector<Sentence> in = {{"a"}, {"b", "c"}, {"a", "a"}};
  const auto all = decode_all(hand_table(), target_lm(), in);
  for (std::size_t i = 0; i < in.size(); ++i) EXPECT_EQ(all[i].tokens, decode(hand_table(), target_lm(), in[i]).tokens);
}
