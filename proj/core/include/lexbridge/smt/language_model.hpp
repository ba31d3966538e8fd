#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lexbridge/corpus.hpp"

namespace lexbridge::smt {

inline constexpr std::string_view kBos = "<s>";
inline constexpr std::string_view kEos = "</s>";
inline constexpr std::string_view kUnk = "<unk>";

/// Interpolated modified Kneser-Ney n-gram model stored in backoff form.
/// Probabilities are natural logs; ARPA files carry log10.
class NGramLanguageModel {
 public:
  static constexpr int kMaxOrder = 8;
  using WordId = std::int32_t;

  struct Entry {
    double log_prob = 0.0;
    double log_backoff = 0.0;
  };

  struct Key {
    std::array<WordId, kMaxOrder> ids{};
    std::uint8_t size = 0;
    bool operator==(const Key& o) const;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const;
  };

  /// Discounts D1, D2, D3+ of one order.
  using Discounts = std::array<double, 3>;

  /// Trains on `corpus`. An order longer than any padded sentence is lowered
  /// to the longest feasible one, with a warning.
  static NGramLanguageModel train(const Corpus& corpus, int order = 4);

  int order() const { return order_; }
  const std::vector<std::string>& warnings() const { return warnings_; }
  const std::vector<Discounts>& discounts() const { return discounts_; }

  WordId bos() const { return 1; }
  WordId eos() const { return 2; }
  WordId unk() const { return 0; }
  /// Id of `word`, or the unknown-word id.
  WordId id(std::string_view word) const;
  const std::string& word(WordId id) const { return words_.at(static_cast<std::size_t>(id)); }
  std::size_t vocabulary_size() const { return words_.size(); }

  /// ln P(word | context); `context` is most recent last and may be longer
  /// than order - 1.
  double log_prob(WordId word, std::span<const WordId> context) const;
  double log_prob(std::string_view word, std::span<const std::string> context) const;
  double prob(std::string_view word, std::span<const std::string> context) const;

  /// ln P of the whole sentence, including </s>.
  double sentence_log_prob(std::span<const std::string> tokens) const;
  double perplexity(const Corpus& corpus) const;

  std::size_t ngram_count(int n) const { return tables_.at(static_cast<std::size_t>(n - 1)).size(); }
  const Entry* find(std::span<const WordId> ngram) const;

  void save_arpa(const std::filesystem::path& path) const;
  static NGramLanguageModel load_arpa(const std::filesystem::path& path);

 private:
  WordId intern(std::string_view word);
  static Key make_key(std::span<const WordId> ids);

  int order_ = 0;
  std::vector<std::string> words_;
  std::unordered_map<std::string, WordId> ids_;
  std::vector<std::unordered_map<Key, Entry, KeyHash>> tables_;
  std::vector<Discounts> discounts_;
  std::vector<std::string> warnings_;
};

}  // namespace lexbridge::smt
