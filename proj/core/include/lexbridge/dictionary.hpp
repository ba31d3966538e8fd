#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

namespace lexbridge {

struct WordPair {
  std::string source;
  std::string target;
  std::optional<double> score;

  friend bool operator==(const WordPair& a, const WordPair& b) {
    return a.source == b.source && a.target == b.target;
  }
};

/// Ordered, duplicate-free list of word pairs. Serves as seed dictionary,
/// induced dictionary and gold evaluation list.
class Dictionary {
 public:
  Dictionary() = default;
  explicit Dictionary(std::vector<WordPair> pairs);

  /// Identity pairs w -> w, e.g. for identical-string anchors.
  static Dictionary identity(const std::vector<std::string>& words);

  /// Appends unless the (source, target) pair is already present.
  bool add(WordPair pair);

  std::size_t size() const { return pairs_.size(); }
  bool empty() const { return pairs_.empty(); }
  const std::vector<WordPair>& pairs() const { return pairs_; }
  auto begin() const { return pairs_.begin(); }
  auto end() const { return pairs_.end(); }

  /// TSV `src<TAB>tgt[<TAB>score]`.
  void save_tsv(const std::filesystem::path& path, bool with_scores = false) const;
  static Dictionary load_tsv(const std::filesystem::path& path);

  friend bool operator==(const Dictionary& a, const Dictionary& b) {
    return a.pairs_ == b.pairs_;
  }

 private:
  std::vector<WordPair> pairs_;
  std::unordered_set<std::string> keys_;
};

}  // namespace lexbridge
