#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lexbridge/corpus.hpp"
#include "lexbridge/dictionary.hpp"
#include "lexbridge/matrix.hpp"

namespace lexbridge {

enum class RetrievalMethod { kNearestNeighbor, kCsls };

std::string_view to_string(RetrievalMethod m);
RetrievalMethod parse_retrieval_method(std::string_view s);

struct Candidate {
  std::size_t id = 0;
  std::string word;
  double score = 0.0;
};

/// Exact nearest-neighbour and CSLS retrieval from mapped source vectors into
/// a target space.
///
/// CSLS(i, j) = 2 cos(s_i, t_j) - r_T(s_i) - r_S(t_j), where r_T(s_i) is the
/// mean cosine of s_i to its k nearest targets and r_S(t_j) the mean cosine of
/// t_j to its k nearest mapped sources. k is clamped to the opposite side's
/// size. Rankings break ties by ascending target id.
class RetrievalIndex {
 public:
  /// With `normalize` false, raw dot products replace cosines.
  RetrievalIndex(RowMatrix mapped_source, Vocabulary source_vocab, RowMatrix target,
                 Vocabulary target_vocab, int k_csls = 10, bool normalize = true);

  std::size_t source_size() const { return static_cast<std::size_t>(source_.rows()); }
  std::size_t target_size() const { return static_cast<std::size_t>(target_.rows()); }
  const Vocabulary& source_vocab() const { return source_vocab_; }
  const Vocabulary& target_vocab() const { return target_vocab_; }
  const RowMatrix& source() const { return source_; }
  const RowMatrix& target() const { return target_; }
  int k_csls() const { return k_csls_; }

  /// r_T: mean similarity of source i to its k nearest targets.
  double source_neighborhood(std::size_t i) const { return r_source_(static_cast<Eigen::Index>(i)); }
  /// r_S: mean similarity of target j to its k nearest mapped sources.
  double target_neighborhood(std::size_t j) const { return r_target_(static_cast<Eigen::Index>(j)); }

  /// Scores of source `i` against every target.
  Vector scores(std::size_t i, RetrievalMethod method) const;
  /// Scores of target `j` against every source (reverse direction).
  Vector reverse_scores(std::size_t j, RetrievalMethod method) const;

  std::vector<Candidate> query(std::size_t source_id, std::size_t k, RetrievalMethod method) const;
  std::vector<Candidate> nn_query(std::string_view source_word, std::size_t k) const;
  std::vector<Candidate> csls_query(std::string_view source_word, std::size_t k) const;

  /// Best target per listed source, computed block-wise.
  std::vector<Candidate> best_targets(const std::vector<std::size_t>& source_ids,
                                      RetrievalMethod method) const;
  /// Best source per listed target; `Candidate::id` is the source id.
  std::vector<Candidate> best_sources(const std::vector<std::size_t>& target_ids,
                                      RetrievalMethod method) const;

 private:
  std::size_t source_id_or_throw(std::string_view word) const;

  RowMatrix source_;
  RowMatrix target_;
  Vocabulary source_vocab_;
  Vocabulary target_vocab_;
  int k_csls_;
  Vector r_source_;
  Vector r_target_;
};

/// Mean of the k largest entries of each row of a * b^T, computed in blocks.
Vector mean_top_k_similarity(const RowMatrix& a, const RowMatrix& b, int k);

/// Top-1 translation per source word; pairs scoring below `threshold` are
/// dropped. Unknown source words are skipped.
Dictionary induce_dictionary(const RetrievalIndex& index, const std::vector<std::string>& source_words,
                             RetrievalMethod method,
                             std::optional<double> threshold = std::nullopt);

struct PrecisionResult {
  double precision = 0.0;
  std::size_t evaluated = 0;  ///< distinct gold source words scored
  std::size_t skipped = 0;    ///< gold pairs dropped as out-of-vocabulary
};

/// A source word counts as a hit if any of its in-vocabulary gold targets is
/// among its top-k retrievals. Throws kNoEvaluablePairs if nothing is scorable.
PrecisionResult precision_at_k(const RetrievalIndex& index, const Dictionary& gold, std::size_t k,
                               RetrievalMethod method);

struct EvalReport {
  double p_at_1 = 0, p_at_5 = 0, p_at_10 = 0;
  std::size_t evaluated = 0;
  std::size_t skipped = 0;
  /// Bootstrap standard deviations over gold source words, when requested.
  std::optional<double> std_at_1, std_at_5, std_at_10;

  std::string to_json() const;
};

EvalReport evaluate_bdi(const RetrievalIndex& index, const Dictionary& gold, RetrievalMethod method,
                        std::size_t bootstrap_resamples = 0, std::uint64_t seed = 1);

}  // namespace lexbridge
