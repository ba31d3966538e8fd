#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "lexbridge/corpus.hpp"
#include "lexbridge/dictionary.hpp"
#include "lexbridge/smt/decoder.hpp"
#include "lexbridge/smt/language_model.hpp"
#include "lexbridge/smt/phrase_table.hpp"

namespace lexbridge::smt {

struct SmtConfig {
  PhraseInitOptions init;
  DecoderOptions decoder;
  int iterations = 3;
  /// Sentences drawn from each corpus per direction and round.
  std::size_t sample_sentences = 10000;
  /// Distortion limit for decodes after the first generation.
  int later_distortion_limit = 0;
  /// Refill single words missing from extracted tables with generation-0 rows.
  bool backfill = true;
  std::uint64_t seed = 1;

  void validate() const;
};

struct IterationModels {
  int iteration = 0;
  PhraseTable forward;
  PhraseTable backward;
  std::size_t forward_pairs = 0;
  std::size_t backward_pairs = 0;
};

struct BackTranslationResult {
  PhraseTable forward;
  std::vector<IterationModels> iterations;
};

using IterationCallback = std::function<void(const IterationModels&)>;

/// Each round: the forward system translates sampled source sentences, and a
/// backward table is extracted from the synthetic (target', source) pairs;
/// then the new backward system translates sampled target sentences and a new
/// forward table is extracted from (source', target). The initial backward
/// table is `pt0` inverted.
BackTranslationResult back_translate_loop(const Corpus& source, const Corpus& target,
                                          const PhraseTable& pt0, const NGramLanguageModel& lm_source,
                                          const NGramLanguageModel& lm_target, const SmtConfig& cfg,
                                          const IterationCallback& on_iteration = {});

/// Single-pass token replacement; tokens without an entry pass through.
/// The first entry for a source word wins.
Sentence dictionary_replace_baseline(const Dictionary& dict, const Sentence& sentence);

}  // namespace lexbridge::smt
