#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lexbridge/corpus.hpp"
#include "lexbridge/smt/phrase_table.hpp"

namespace lexbridge::smt {

using Link = std::pair<std::size_t, std::size_t>;  // (source position, target position)

struct AlignedPair {
  Sentence source;
  Sentence target;
  std::vector<Link> links;
};

/// Word links for a sentence pair: the intersection of argmax links in both
/// directions under the single-word table, plus links between identical
/// strings. `table` maps source words to target words.
std::vector<Link> align_pair(const PhraseTable& table, std::span<const std::string> source,
                             std::span<const std::string> target);

/// All phrase pairs up to `max_length` consistent with the links.
std::vector<std::pair<Phrase, Phrase>> extract_pairs(const AlignedPair& pair, int max_length);

/// Relative-frequency phrase table from extracted pair counts.
PhraseTable extract_phrase_table(const std::vector<AlignedPair>& corpus, int max_length = 4);

/// Adds single-word rows of `fallback` for source words `table` lacks.
void backfill(PhraseTable& table, const PhraseTable& fallback);

}  // namespace lexbridge::smt
