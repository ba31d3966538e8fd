#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lexbridge/bdi.hpp"
#include "lexbridge/embedding.hpp"

namespace lexbridge::smt {

using Phrase = std::vector<std::string>;

std::string join(std::span<const std::string> tokens);
Phrase split(std::string_view text);

struct PhraseEntry {
  Phrase target;
  double forward = 0.0;   ///< P(target | source)
  double backward = 0.0;  ///< P(source | target)
};

/// Source phrase (1..max_length tokens) -> scored target phrases. Rows are
/// kept sorted by descending forward probability, then target text.
class PhraseTable {
 public:
  explicit PhraseTable(int max_length = 4);

  int max_length() const { return max_length_; }
  std::size_t size() const { return rows_.size(); }
  std::size_t entry_count() const;
  bool empty() const { return rows_.empty(); }

  /// Replaces the row for `source`. Forward probabilities are renormalized.
  void set_row(const Phrase& source, std::vector<PhraseEntry> entries);
  bool has_row(const Phrase& source) const;
  const std::vector<PhraseEntry>* lookup(std::span<const std::string> source) const;
  const std::map<std::string, std::vector<PhraseEntry>>& rows() const { return rows_; }

  /// Longest source phrase actually stored.
  int longest_source() const;

  /// Copy with source and target swapped; forward/backward exchange roles and
  /// the new forward distributions are renormalized.
  PhraseTable inverted() const;

  /// `src ||| tgt ||| p_fwd p_bwd` per line.
  void save(const std::filesystem::path& path) const;
  static PhraseTable load(const std::filesystem::path& path, int max_length = 4);

 private:
  int max_length_;
  std::map<std::string, std::vector<PhraseEntry>> rows_;
};

struct PhraseInitOptions {
  /// Softmax temperature T.
  double temperature = 30.0;
  /// false: logits cos / T. true: logits T * cos, which sharpens as T grows.
  bool invert_temperature = false;
  /// Candidates per source word, taken from the CSLS ranking.
  std::size_t candidates = 100;
  int k_csls = 10;
  int max_length = 4;
};

/// Softmax of the logits, in a numerically stable form.
std::vector<double> softmax(const std::vector<double>& logits);

/// Generation-0 word table: P(c | p) is a softmax over the cosines of W p
/// with the CSLS-ranked candidates of p; backward scores are the symmetric
/// softmax over each target word's candidate sources.
PhraseTable init_phrase_table(const AlignmentMap& map, const EmbeddingSpace& prepared_source,
                              const EmbeddingSpace& prepared_target,
                              const PhraseInitOptions& opts = {});

}  // namespace lexbridge::smt
