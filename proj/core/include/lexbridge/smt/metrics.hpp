#pragma once

#include <array>
#include <string>
#include <vector>

#include "lexbridge/corpus.hpp"

namespace lexbridge::smt {

struct BleuScore {
  /// 0..100
  double bleu = 0.0;
  std::array<double, 4> precisions{};
  double brevity_penalty = 0.0;
  std::size_t hypothesis_length = 0;
  std::size_t reference_length = 0;
};

/// Corpus BLEU-4 against a single reference per sentence, no smoothing.
BleuScore corpus_bleu(const std::vector<Sentence>& hypotheses, const std::vector<Sentence>& references);

/// Fraction of hypotheses identical to their reference.
double exact_match(const std::vector<Sentence>& hypotheses, const std::vector<Sentence>& references);

}  // namespace lexbridge::smt
