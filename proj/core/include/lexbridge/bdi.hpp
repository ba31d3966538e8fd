#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lexbridge/dictionary.hpp"
#include "lexbridge/embedding.hpp"
#include "lexbridge/matrix.hpp"
#include "lexbridge/retrieval.hpp"

namespace lexbridge {

enum class BdiMethod { kProcrustes, kSelfLearning, kAdversarial };

std::string_view to_string(BdiMethod m);
BdiMethod parse_bdi_method(std::string_view s);

/// Linear map(s) into a shared space, acting on column vectors: a source word
/// x maps to `source_map * x`, a target word y to `target_map * y` (identity
/// when absent). Maps act on spaces passed through `prepare_for_alignment`.
struct AlignmentMap {
  Matrix source_map;
  std::optional<Matrix> target_map;
  BdiMethod method = BdiMethod::kProcrustes;

  int dim() const { return static_cast<int>(source_map.rows()); }
  /// ||W^T W - I||_F of the source map.
  double orthogonality_residual() const;

  /// Header "d method", then d rows of d values; self-learning maps append the
  /// d target-side rows.
  void save(const std::filesystem::path& path) const;
  static AlignmentMap load(const std::filesystem::path& path);
};

/// Unit-normalize, mean-center, unit-normalize again.
EmbeddingSpace prepare_for_alignment(const EmbeddingSpace& space);
void prepare_rows(RowMatrix& rows);

/// Rows of `space` mapped by `map`, i.e. space * W^T.
RowMatrix map_rows(const RowMatrix& rows, const Matrix& map);

/// Retrieval index over prepared and mapped spaces.
RetrievalIndex make_index(const EmbeddingSpace& prepared_source,
                          const EmbeddingSpace& prepared_target, const AlignmentMap& map,
                          int k_csls = 10);

/// Orthogonal W minimizing ||W X - Y||_F for d x k anchor matrices:
/// W = U V^T with U S V^T = SVD(Y X^T).
AlignmentMap procrustes_fit(const Matrix& x, const Matrix& y);

struct ProcrustesOptions {
  int iterations = 5;
  int k_csls = 10;
  /// Only the most frequent source words enter refinement dictionaries.
  std::size_t max_rank = 15000;
  RetrievalMethod induction = RetrievalMethod::kCsls;
  /// Refit on mutual nearest neighbours only instead of every forward pair.
  bool mutual = true;
};

struct AlignmentResult {
  AlignmentMap map;
  /// Dictionary induced with the final map (for self-learning: the final
  /// bidirectional dictionary).
  Dictionary dictionary;
  /// Mean score of the induced dictionary after each fit.
  std::vector<double> mean_similarity;
  int iterations_run = 0;
  bool converged = true;
  std::vector<std::string> warnings;
};

/// Seed pairs resolved to row ids; throws kUnknownWord for missing words.
std::vector<std::pair<std::size_t, std::size_t>> resolve_pairs(const Dictionary& seed,
                                                               const Vocabulary& source,
                                                               const Vocabulary& target);

/// Anchored iterative Procrustes. Spaces are prepared internally. With
/// zero iterations the seed fit is returned as is.
AlignmentResult procrustes_iterate(const EmbeddingSpace& source, const EmbeddingSpace& target,
                                   const Dictionary& seed, const ProcrustesOptions& opts = {});

/// Procrustes refinement starting from an existing map over prepared spaces.
AlignmentResult procrustes_refine(const EmbeddingSpace& prepared_source,
                                  const EmbeddingSpace& prepared_target, const Matrix& initial,
                                  const ProcrustesOptions& opts = {});

struct SelfLearningOptions {
  int max_iterations = 50;
  int k_csls = 10;
  /// Only the most frequent words on each side take part in induction.
  std::size_t vocabulary_cutoff = 20000;
  bool whiten = true;
  double source_reweight = 0.5;
  double target_reweight = 0.5;
  bool dewhiten = true;
};

/// Self-learning with whitening, singular-value re-weighting, de-whitening and
/// bidirectional CSLS dictionary induction, iterated until the dictionary is
/// unchanged. Whitening is skipped on iterations whose dictionary does not
/// span the space.
AlignmentResult self_learning_fit(const EmbeddingSpace& source, const EmbeddingSpace& target,
                                  const Dictionary& seed, const SelfLearningOptions& opts = {});

struct AdvConfig {
  int hidden = 2048;
  int hidden_layers = 2;
  double leaky_slope = 0.2;
  double lr_start = 0.1;
  double lr_floor = 1e-6;
  double lr_decay = 0.98;
  std::size_t top_freq = 1000;
  int epochs = 50;
  int iterations_per_epoch = 200;
  int batch_size = 32;
  int discriminator_steps = 5;
  double label_smoothing = 0.1;
  double orthogonality_beta = 0.01;
  /// Words per side scored by the unsupervised model-selection criterion.
  std::size_t selection_words = 5000;
  int refinement_iterations = 5;
  int k_csls = 10;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Feed-forward binary classifier: leaky-ReLU hidden layers, sigmoid output
/// giving P(sample comes from the source side).
class Discriminator {
 public:
  Discriminator(int input_dim, int hidden, int layers, double leaky_slope, std::uint64_t seed);

  /// `batch` holds one sample per column.
  Eigen::VectorXf predict(const Eigen::MatrixXf& batch) const;
  /// One SGD step on binary cross-entropy. Returns the mean loss.
  float train_step(const Eigen::MatrixXf& batch, const Eigen::VectorXf& labels, float lr);
  /// Gradient of the mean loss w.r.t. the inputs, parameters untouched.
  Eigen::MatrixXf input_gradient(const Eigen::MatrixXf& batch, const Eigen::VectorXf& labels,
                                 float* loss = nullptr) const;
  /// Fraction of samples classified on the correct side of 0.5.
  double accuracy(const Eigen::MatrixXf& source_batch, const Eigen::MatrixXf& target_batch) const;

 private:
  struct Cache;
  float backward(const Eigen::MatrixXf& batch, const Eigen::VectorXf& labels, Cache& cache,
                 bool update, float lr, Eigen::MatrixXf* input_grad);

  std::vector<Eigen::MatrixXf> weights_;
  std::vector<Eigen::VectorXf> biases_;
  float slope_;
};

struct AdversarialResult {
  AlignmentResult refined;
  /// Map selected before refinement.
  Matrix adversarial_map;
  int best_epoch = 0;
  int epochs_run = 0;
  std::vector<double> selection_criterion;
  std::vector<double> discriminator_loss;
  std::shared_ptr<const Discriminator> discriminator;
};

/// Anchor-free alignment: adversarial training of the map against the
/// discriminator over the `top_freq` most frequent words, epoch selection by
/// mean CSLS score of the induced dictionary, then Procrustes refinement.
AdversarialResult adversarial_fit(const EmbeddingSpace& source, const EmbeddingSpace& target,
                                  const AdvConfig& cfg = {});

}  // namespace lexbridge
