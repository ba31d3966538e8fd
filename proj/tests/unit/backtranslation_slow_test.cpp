#include <gtest/gtest.h>

#include <iostream>

#include "lexbridge/bdi.hpp"
#include "lexbridge/smt/backtranslation.hpp"
#include "lexbridge/smt/metrics.hpp"
#include "lexbridge/synthetic.hpp"

using namespace lexbridge;

// A deliberately weak start (one Procrustes fit, small corpora) so that the
// back-translation rounds have something to fix.
TEST(BackTranslationSlow, BleuImprovesOverIterationZero) {
  CipherOptions co;
  co.vocabulary = 100;
  co.tokens = 20000;
  co.shared = 10;
  co.held_out = 100;
  const auto b = make_cipher_benchmark(co);
  TrainConfig tc;
  tc.dim = 100;
  tc.subsample = 1.0;
  tc.linear_decay = true;
  const auto src = train_skipgram(b.source, tc);
  tc.seed = 2;
  const auto tgt = train_skipgram(b.target, tc);
  ProcrustesOptions po;
  po.iterations = 1;
  const auto r = procrustes_iterate(src.space, tgt.space, Dictionary::identity(b.shared_words), po);
  smt::PhraseInitOptions io;
  io.invert_temperature = true;
  const auto pt0 =
      smt::init_phrase_table(r.map, prepare_for_alignment(src.space), prepare_for_alignment(tgt.space), io);
  const auto lms = smt::NGramLanguageModel::train(b.source), lmt = smt::NGramLanguageModel::train(b.target);
  auto bleu = [&](const smt::PhraseTable& t) {
    std::vector<Sentence> h;
    for (auto& x : smt::decode_all(t, lmt, b.held_out_source)) h.push_back(x.tokens);
    return smt::corpus_bleu(h, b.held_out_target).bleu;
  };
  std::vector<double> curve{bleu(pt0)};
  smt::SmtConfig sc;
  sc.iterations = 3;
  smt::back_translate_loop(b.source, b.target, pt0, lms, lmt, sc,
                           [&](const smt::IterationModels& m) { curve.push_back(bleu(m.forward)); });
  for (std::size_t i = 0; i < curve.size(); ++i) std::cout << "iteration " << i << " BLEU " << curve[i] << '\n';
  ASSERT_EQ(curve.size(), 4u);
  EXPECT_GE(curve[3], curve[0]);
  EXPECT_GT(curve[3], curve[0] + 10);
}
