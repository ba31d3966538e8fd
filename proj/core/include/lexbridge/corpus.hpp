#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace lexbridge {

using Sentence = std::vector<std::string>;

struct Corpus {
  std::string name;
  std::vector<Sentence> sentences;

  std::size_t token_count() const;
};

struct LoadOptions {
  bool lowercase = true;
  /// ECMAScript regex; every match is replaced by a space before tokenizing.
  /// Intended for de-identification placeholders such as `\[\*\*[^*]*\*\*\]`.
  std::optional<std::string> strip_pattern;
};

/// Whitespace tokenization with ASCII lowercasing. Bytes >= 0x80 pass through
/// untouched so UTF-8 survives.
Sentence tokenize(std::string_view line, bool lowercase = true);

Corpus read_corpus(std::istream& in, std::string name, const LoadOptions& opts = {});

/// One sentence per line. Throws kIoError if unreadable, kEmptyCorpus if no
/// sentence survives filtering.
Corpus load_corpus(const std::filesystem::path& path, const LoadOptions& opts = {});

void save_corpus(const Corpus& corpus, const std::filesystem::path& path);

/// Dense word ids ordered by descending count, ties broken lexicographically.
class Vocabulary {
 public:
  Vocabulary() = default;

  /// Keeps words with count >= min_count. Throws kEmptyVocabulary.
  static Vocabulary build(const Corpus& corpus, std::int64_t min_count = 2);

  /// Builds from explicit (word, count) pairs, preserving the given order.
  /// Counts must be non-increasing; words must be unique.
  static Vocabulary from_ordered(std::vector<std::pair<std::string, std::int64_t>> entries,
                                 std::int64_t min_count = 1);

  std::size_t size() const { return words_.size(); }
  bool empty() const { return words_.empty(); }
  std::int64_t min_count() const { return min_count_; }

  std::optional<std::size_t> id(std::string_view word) const;
  bool contains(std::string_view word) const { return id(word).has_value(); }
  const std::string& word(std::size_t id) const { return words_.at(id); }
  std::int64_t count(std::size_t id) const { return counts_.at(id); }
  const std::vector<std::string>& words() const { return words_; }
  const std::vector<std::int64_t>& counts() const { return counts_; }
  std::int64_t total_count() const;

  /// TSV `word<TAB>count`, descending count.
  void save_tsv(const std::filesystem::path& path) const;
  static Vocabulary load_tsv(const std::filesystem::path& path);

 private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const {
      return std::hash<std::string_view>{}(s);
    }
  };

  std::vector<std::string> words_;
  std::vector<std::int64_t> counts_;
  std::unordered_map<std::string, std::size_t, Hash, std::equal_to<>> index_;
  std::int64_t min_count_ = 1;
};

struct AnchorOptions {
  /// Minimum count in each vocabulary; 0 disables.
  std::int64_t min_frequency = 0;
  /// Minimum length in bytes; 0 disables.
  std::size_t min_length = 0;
};

using AnchorSet = std::vector<std::string>;

/// Words present in both vocabularies, ordered by descending summed count
/// with a lexicographic tie-break. Throws kNoAnchors when empty.
AnchorSet extract_anchors(const Vocabulary& a, const Vocabulary& b,
                          const AnchorOptions& opts = {});

void save_word_list(const std::vector<std::string>& words,
                    const std::filesystem::path& path);
std::vector<std::string> load_word_list(const std::filesystem::path& path);

}  // namespace lexbridge
