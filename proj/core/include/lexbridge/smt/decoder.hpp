#pragma once

#include <span>
#include <string>
#include <vector>

#include "lexbridge/smt/language_model.hpp"
#include "lexbridge/smt/phrase_table.hpp"

namespace lexbridge::smt {

struct FeatureWeights {
  double phrase = 1.0;
  double lm = 1.0;
  /// Added once per target word.
  double word_penalty = -0.1;
  /// Multiplies minus the source jump width; only reordering decodes jump.
  double distortion = 0.3;
};

struct DecoderOptions {
  FeatureWeights weights;
  std::size_t beam = 10;
  /// Options per source span, best backward score first.
  std::size_t table_limit = 20;
  /// 0 decodes monotonically; otherwise the largest allowed source jump.
  int distortion_limit = 0;
  /// Log score of a phrase pair missing from the table (copied tokens too).
  double unknown_log_prob = -20.0;

  void validate() const;
};

/// One phrase application: source span [src_begin, src_end) produced the
/// target tokens [tgt_begin, tgt_end).
struct Segment {
  std::size_t src_begin = 0;
  std::size_t src_end = 0;
  std::size_t tgt_begin = 0;
  std::size_t tgt_end = 0;
  /// Token had no table entry and was passed through unchanged.
  bool copied = false;
};

struct Translation {
  Phrase tokens;
  std::vector<Segment> segments;
  double score = 0.0;

  bool monotone() const;
};

/// Derivation step for scoring a hand-built translation.
struct DerivationStep {
  std::size_t src_begin = 0;
  std::size_t src_end = 0;
  Phrase target;
};

/// Model score of a derivation, given in target order.
double score_derivation(const PhraseTable& table, const NGramLanguageModel& lm,
                        std::span<const std::string> source,
                        const std::vector<DerivationStep>& steps, const DecoderOptions& opts);

/// Weighted phrase feature of one pair: max(ln P_bwd, unknown_log_prob).
double phrase_log_prob(const PhraseTable& table, std::span<const std::string> source,
                       const Phrase& target, const DecoderOptions& opts);

/// Stack decoding with beam pruning and recombination on (coverage, last
/// source position, LM state).
Translation decode(const PhraseTable& table, const NGramLanguageModel& lm,
                   std::span<const std::string> source, const DecoderOptions& opts = {});

std::vector<Translation> decode_all(const PhraseTable& table, const NGramLanguageModel& lm,
                                    const std::vector<Sentence>& sources,
                                    const DecoderOptions& opts = {});

}  // namespace lexbridge::smt
