#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lexbridge/corpus.hpp"
#include "lexbridge/matrix.hpp"

namespace lexbridge {

struct SubwordConfig {
  int min_n = 2;
  int max_n = 5;
  std::uint64_t buckets = std::uint64_t{1} << 21;
};

/// Character n-grams (UTF-8 code points) of "<word>" for n in [min_n, max_n],
/// followed by "<word>" itself, deduplicated in first-occurrence order.
std::vector<std::string> subword_ngrams(std::string_view word, int min_n = 2, int max_n = 5);

/// FNV-1a of the n-gram bytes, reduced modulo `buckets`.
std::uint64_t subword_bucket(std::string_view ngram, std::uint64_t buckets);

/// Hashed n-gram vector bank. Only buckets reachable from the training
/// vocabulary are materialized; the rest of the hash space is implicit.
class SubwordTable {
 public:
  SubwordTable(SubwordConfig config, RowMatrix word_rows, RowMatrix bucket_rows,
               std::unordered_map<std::uint64_t, std::size_t> bucket_index,
               std::vector<std::vector<std::size_t>> word_buckets);

  const SubwordConfig& config() const { return config_; }
  const RowMatrix& word_rows() const { return word_rows_; }
  const RowMatrix& bucket_rows() const { return bucket_rows_; }
  std::size_t materialized_buckets() const { return static_cast<std::size_t>(bucket_rows_.rows()); }

  /// Mean of the word row and its n-gram bucket rows.
  Vector compose(std::size_t word_id) const;
  /// Mean over the word's materialized bucket rows, for out-of-vocabulary words.
  std::optional<Vector> compose_oov(std::string_view word) const;

 private:
  SubwordConfig config_;
  RowMatrix word_rows_;
  RowMatrix bucket_rows_;
  std::unordered_map<std::uint64_t, std::size_t> bucket_index_;
  std::vector<std::vector<std::size_t>> word_buckets_;
};

class EmbeddingSpace {
 public:
  EmbeddingSpace() = default;
  EmbeddingSpace(Vocabulary vocab, RowMatrix vectors,
                 std::optional<SubwordTable> subwords = std::nullopt);

  const Vocabulary& vocab() const { return vocab_; }
  const RowMatrix& vectors() const { return vectors_; }
  std::size_t size() const { return vocab_.size(); }
  int dim() const { return static_cast<int>(vectors_.cols()); }
  const std::optional<SubwordTable>& subwords() const { return subwords_; }

  /// Stored vector, or a subword composition for unseen words when available.
  std::optional<Vector> lookup(std::string_view word) const;

 private:
  Vocabulary vocab_;
  RowMatrix vectors_;
  std::optional<SubwordTable> subwords_;
};

struct TrainConfig {
  int dim = 100;
  int window = 5;
  int epochs = 5;
  double learning_rate = 0.1;
  /// Decay the rate linearly towards 1e-4 * learning_rate over all epochs
  /// instead of keeping it constant.
  bool linear_decay = false;
  /// Frequent-word subsampling threshold t: a token of relative frequency f
  /// is kept with probability sqrt(t/f) + t/f. A value of 1 keeps everything.
  double subsample = 1e-5;
  int negatives = 5;
  std::int64_t min_count = 2;
  std::optional<SubwordConfig> subword;
  std::uint64_t seed = 1;
  /// Values above 1 shard sentences across threads with unsynchronized
  /// updates; results are then not reproducible.
  int threads = 1;

  void validate() const;
};

struct SkipGramModel {
  EmbeddingSpace space;
  /// Output (context) vectors, one row per vocabulary word.
  RowMatrix context;
  /// Mean negative-sampling loss per positive pair, one entry per epoch.
  std::vector<double> epoch_loss;
};

SkipGramModel train_skipgram(const Corpus& corpus, const TrainConfig& cfg);

/// word2vec text format: header "|V| d", then "word v1 ... vd" per line.
void write_vectors(const EmbeddingSpace& space, std::ostream& out);
void save_vectors(const EmbeddingSpace& space, const std::filesystem::path& path);

/// Rows are taken to be in descending frequency order, as word2vec writes
/// them; vocabulary counts are synthesized from the row rank.
EmbeddingSpace read_vectors(std::istream& in);
EmbeddingSpace load_vectors(const std::filesystem::path& path);

}  // namespace lexbridge
