#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "lexbridge/bdi.hpp"
#include "lexbridge/error.hpp"

namespace lexbridge {

void AdvConfig::validate() const {
  if (hidden < 1 || hidden_layers < 0) fail(ErrorCode::kInvalidConfig, "bad discriminator shape");
  if (!(lr_start > 0) || !(lr_floor < lr_start)) {
    fail(ErrorCode::kInvalidConfig, "need 0 < lr_floor < lr_start");
  }
  if (!(lr_decay > 0 && lr_decay <= 1)) fail(ErrorCode::kInvalidConfig, "lr_decay must be in (0, 1]");
  if (top_freq < 1) fail(ErrorCode::kInvalidConfig, "top_freq must be >= 1");
  if (epochs < 1 || iterations_per_epoch < 1 || batch_size < 1 || discriminator_steps < 1) {
    fail(ErrorCode::kInvalidConfig, "epochs, iterations, batch size and steps must be >= 1");
  }
  if (label_smoothing < 0 || label_smoothing >= 0.5) {
    fail(ErrorCode::kInvalidConfig, "label_smoothing must be in [0, 0.5)");
  }
}

struct Discriminator::Cache {
  std::vector<Eigen::MatrixXf> pre;   // pre-activations per hidden layer
  std::vector<Eigen::MatrixXf> act;   // act[0] = input, act[l+1] = leaky(pre[l])
  Eigen::RowVectorXf logits;
};

Discriminator::Discriminator(int input_dim, int hidden, int layers, double leaky_slope,
                             std::uint64_t seed)
    : slope_(static_cast<float>(leaky_slope)) {
  std::mt19937_64 rng(seed);
  int in = input_dim;
  // Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)), as in common deep-learning defaults.
  auto layer = [&](int out_dim, int in_dim) {
    const float bound = 1.0f / std::sqrt(static_cast<float>(in_dim));
    std::uniform_real_distribution<float> u(-bound, bound);
    Eigen::MatrixXf w(out_dim, in_dim);
    for (Eigen::Index c = 0; c < w.cols(); ++c) {
      for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = u(rng);
    }
    Eigen::VectorXf b(out_dim);
    for (Eigen::Index r = 0; r < b.size(); ++r) b(r) = u(rng);
    weights_.push_back(std::move(w));
    biases_.push_back(std::move(b));
  };
  for (int l = 0; l < layers; ++l) {
    layer(hidden, in);
    in = hidden;
  }
  layer(1, in);
}

namespace {

Eigen::RowVectorXf sigmoid(const Eigen::RowVectorXf& x) {
  return x.unaryExpr([](float v) { return 1.0f / (1.0f + std::exp(-v)); });
}

}  // namespace

Eigen::VectorXf Discriminator::predict(const Eigen::MatrixXf& batch) const {
  Eigen::MatrixXf h = batch;
  const auto hidden_layers = weights_.size() - 1;
  for (std::size_t l = 0; l < hidden_layers; ++l) {
    Eigen::MatrixXf a = weights_[l] * h;
    a.colwise() += biases_[l];
    h = a.unaryExpr([s = slope_](float v) { return v > 0 ? v : s * v; });
  }
  Eigen::RowVectorXf logits = weights_.back() * h;
  logits.array() += biases_.back()(0);
  return sigmoid(logits).transpose();
}

float Discriminator::backward(const Eigen::MatrixXf& batch, const Eigen::VectorXf& labels,
                              Cache& cache, bool update, float lr, Eigen::MatrixXf* input_grad) {
  const auto hidden_layers = weights_.size() - 1;
  cache.act.assign(1, batch);
  cache.pre.clear();
  for (std::size_t l = 0; l < hidden_layers; ++l) {
    Eigen::MatrixXf a = weights_[l] * cache.act.back();
    a.colwise() += biases_[l];
    cache.act.push_back(a.unaryExpr([s = slope_](float v) { return v > 0 ? v : s * v; }));
    cache.pre.push_back(std::move(a));
  }
  cache.logits = weights_.back() * cache.act.back();
  cache.logits.array() += biases_.back()(0);
  const Eigen::RowVectorXf p = sigmoid(cache.logits);
  const auto n = static_cast<float>(batch.cols());

  float loss = 0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const float y = labels(i);
    const float pi = std::clamp(p(i), 1e-7f, 1.0f - 1e-7f);
    loss -= y * std::log(pi) + (1 - y) * std::log(1 - pi);
  }
  loss /= n;

  Eigen::MatrixXf delta = (p - labels.transpose()) / n;  // 1 x B
  for (std::size_t l = weights_.size(); l-- > 0;) {
    const Eigen::MatrixXf& in = cache.act[l];
    Eigen::MatrixXf grad_in = weights_[l].transpose() * delta;
    if (update) {
      weights_[l].noalias() -= lr * (delta * in.transpose());
      biases_[l] -= lr * delta.rowwise().sum();
    }
    if (l > 0) {
      const Eigen::MatrixXf& pre = cache.pre[l - 1];
      delta = grad_in.binaryExpr(pre, [s = slope_](float g, float a) { return a > 0 ? g : s * g; });
    } else if (input_grad) {
      *input_grad = std::move(grad_in);
    }
  }
  return loss;
}

float Discriminator::train_step(const Eigen::MatrixXf& batch, const Eigen::VectorXf& labels, float lr) {
  Cache cache;
  return backward(batch, labels, cache, true, lr, nullptr);
}

Eigen::MatrixXf Discriminator::input_gradient(const Eigen::MatrixXf& batch,
                                              const Eigen::VectorXf& labels, float* loss) const {
  Cache cache;
  Eigen::MatrixXf grad;
  // backward() only mutates parameters when asked to
  const float l = const_cast<Discriminator*>(this)->backward(batch, labels, cache, false, 0.0f, &grad);
  if (loss) *loss = l;
  return grad;
}

double Discriminator::accuracy(const Eigen::MatrixXf& source_batch,
                               const Eigen::MatrixXf& target_batch) const {
  const auto ps = predict(source_batch);
  const auto pt = predict(target_batch);
  std::size_t correct = 0;
  for (Eigen::Index i = 0; i < ps.size(); ++i) correct += ps(i) >= 0.5f ? 1 : 0;
  for (Eigen::Index i = 0; i < pt.size(); ++i) correct += pt(i) < 0.5f ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(ps.size() + pt.size());
}

namespace {

double selection_criterion(const RowMatrix& src, const Vocabulary& sv, const RowMatrix& tgt,
                           const Vocabulary& tv, const Matrix& w, std::size_t words, int k_csls) {
  const auto ns = static_cast<Eigen::Index>(std::min<std::size_t>(words, sv.size()));
  const auto nt = static_cast<Eigen::Index>(std::min<std::size_t>(words, tv.size()));
  std::vector<std::pair<std::string, std::int64_t>> se, te;
  for (Eigen::Index i = 0; i < ns; ++i) se.emplace_back(sv.word(static_cast<std::size_t>(i)), sv.count(static_cast<std::size_t>(i)));
  for (Eigen::Index i = 0; i < nt; ++i) te.emplace_back(tv.word(static_cast<std::size_t>(i)), tv.count(static_cast<std::size_t>(i)));
  RetrievalIndex index(map_rows(src.topRows(ns), w), Vocabulary::from_ordered(std::move(se), 0),
                       tgt.topRows(nt), Vocabulary::from_ordered(std::move(te), 0), k_csls);
  std::vector<std::size_t> ids(static_cast<std::size_t>(ns));
  std::iota(ids.begin(), ids.end(), std::size_t{0});
  const auto best = index.best_targets(ids, RetrievalMethod::kCsls);
  double sum = 0;
  for (const auto& c : best) sum += c.score;
  return sum / static_cast<double>(best.size());
}

}  // namespace

AdversarialResult adversarial_fit(const EmbeddingSpace& source, const EmbeddingSpace& target,
                                  const AdvConfig& cfg) {
  cfg.validate();
  require(cfg.top_freq <= source.size() && cfg.top_freq <= target.size(),
          "top_freq exceeds a vocabulary size");
  if (source.dim() != target.dim()) fail(ErrorCode::kDimensionMismatch, "space dimensions differ");
  const auto src = prepare_for_alignment(source);
  const auto tgt = prepare_for_alignment(target);
  const auto d = src.dim();

  const Eigen::MatrixXf src_f = src.vectors().topRows(static_cast<Eigen::Index>(cfg.top_freq)).cast<float>().transpose();
  const Eigen::MatrixXf tgt_f = tgt.vectors().topRows(static_cast<Eigen::Index>(cfg.top_freq)).cast<float>().transpose();

  auto disc = std::make_shared<Discriminator>(d, cfg.hidden, cfg.hidden_layers, cfg.leaky_slope, cfg.seed);
  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_int_distribution<Eigen::Index> pick(0, static_cast<Eigen::Index>(cfg.top_freq) - 1);

  Matrix w = Matrix::Identity(d, d);
  const auto bs = cfg.batch_size;
  const auto smooth = static_cast<float>(cfg.label_smoothing);
  Eigen::VectorXf dis_labels(2 * bs);
  dis_labels.head(bs).setConstant(1.0f - smooth);  // source side: Pro = 1
  dis_labels.tail(bs).setConstant(smooth);
  const Eigen::VectorXf gen_labels = Eigen::VectorXf::Ones(2 * bs) - dis_labels;

  auto sample = [&](const Eigen::MatrixXf& wf, Eigen::MatrixXf& raw_src) {
    Eigen::MatrixXf batch(d, 2 * bs);
    raw_src.resize(d, bs);
    for (int b = 0; b < bs; ++b) raw_src.col(b) = src_f.col(pick(rng));
    batch.leftCols(bs) = wf * raw_src;
    for (int b = 0; b < bs; ++b) batch.col(bs + b) = tgt_f.col(pick(rng));
    return batch;
  };

  AdversarialResult res;
  double lr = cfg.lr_start;
  double best = -std::numeric_limits<double>::infinity();
  Matrix best_w = w;
  Eigen::MatrixXf raw;
  for (int epoch = 0; epoch < cfg.epochs && lr >= cfg.lr_floor; ++epoch) {
    double dis_loss_sum = 0;
    for (int it = 0; it < cfg.iterations_per_epoch; ++it) {
      Eigen::MatrixXf wf = w.cast<float>();
      for (int s = 0; s < cfg.discriminator_steps; ++s) {
        const auto batch = sample(wf, raw);
        const float loss = disc->train_step(batch, dis_labels, static_cast<float>(lr));
        if (!std::isfinite(loss)) {
          std::ostringstream msg;
          msg << "discriminator loss is NaN at epoch " << epoch << ", iteration " << it
              << ", lr " << lr;
          fail(ErrorCode::kDivergence, msg.str());
        }
        dis_loss_sum += loss;
      }
      // Generator step: flip the labels, move only the map.
      const auto batch = sample(wf, raw);
      float gen_loss = 0;
      const Eigen::MatrixXf grad = disc->input_gradient(batch, gen_labels, &gen_loss);
      if (!std::isfinite(gen_loss)) {
        std::ostringstream msg;
        msg << "generator loss is NaN at epoch " << epoch << ", iteration " << it;
        fail(ErrorCode::kDivergence, msg.str());
      }
      const Matrix grad_w = (grad.leftCols(bs) * raw.transpose()).cast<double>();
      w -= lr * grad_w;
      w = (1.0 + cfg.orthogonality_beta) * w - cfg.orthogonality_beta * (w * w.transpose()) * w;
      if (!w.allFinite()) fail(ErrorCode::kDivergence, "map diverged at epoch " + std::to_string(epoch));
    }
    res.discriminator_loss.push_back(
        dis_loss_sum / static_cast<double>(cfg.iterations_per_epoch * cfg.discriminator_steps));
    const double crit = selection_criterion(src.vectors(), src.vocab(), tgt.vectors(), tgt.vocab(), w,
                                            cfg.selection_words, cfg.k_csls);
    res.selection_criterion.push_back(crit);
    if (crit > best) {
      best = crit;
      best_w = w;
      res.best_epoch = epoch;
    }
    ++res.epochs_run;
    lr *= cfg.lr_decay;
  }

  res.adversarial_map = best_w;
  ProcrustesOptions popts;
  popts.iterations = cfg.refinement_iterations;
  popts.k_csls = cfg.k_csls;
  res.refined = procrustes_refine(src, tgt, best_w, popts);
  res.refined.map.method = BdiMethod::kAdversarial;
  res.discriminator = std::move(disc);
  return res;
}

}  // namespace lexbridge
