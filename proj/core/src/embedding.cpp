#include "lexbridge/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>
#include <unordered_set>

#include "lexbridge/error.hpp"
#include "lexbridge/hash.hpp"

namespace lexbridge {

namespace {

// Splits UTF-8 into code points; malformed bytes count as single units.
std::vector<std::string_view> code_points(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t len = 1;
    if ((c & 0xE0) == 0xC0) len = 2;
    else if ((c & 0xF0) == 0xE0) len = 3;
    else if ((c & 0xF8) == 0xF0) len = 4;
    len = std::min(len, s.size() - i);
    out.push_back(s.substr(i, len));
    i += len;
  }
  return out;
}

double sigmoid(double x) {
  if (x > 30) return 1.0;
  if (x < -30) return 0.0;
  return 1.0 / (1.0 + std::exp(-x));
}

// Negatives are drawn from counts^0.75.
class UnigramSampler {
 public:
  explicit UnigramSampler(const std::vector<std::int64_t>& counts) {
    cumulative_.reserve(counts.size());
    double acc = 0;
    for (auto c : counts) {
      acc += std::pow(static_cast<double>(c), 0.75);
      cumulative_.push_back(acc);
    }
  }

  template <class Rng>
  std::size_t operator()(Rng& rng) const {
    std::uniform_real_distribution<double> u(0.0, cumulative_.back());
    const double r = u(rng);
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), r);
    if (it == cumulative_.end()) --it;
    return static_cast<std::size_t>(it - cumulative_.begin());
  }

 private:
  std::vector<double> cumulative_;
};

struct TrainingState {
  const TrainConfig& cfg;
  const std::vector<std::vector<std::size_t>>& sentences;
  const std::vector<double>& keep_prob;
  const std::vector<std::vector<std::size_t>>& components;  // input rows per word
  const UnigramSampler& sampler;
  RowMatrix& input;
  RowMatrix& output;
  int epoch = 0;
};

// One pass over sentences [begin, end). Returns (summed loss, positive pairs).
std::pair<double, std::size_t> train_range(TrainingState& st, std::size_t begin, std::size_t end,
                                           std::mt19937_64& rng) {
  const auto dim = st.input.cols();
  Vector hidden(dim);
  Vector grad(dim);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> window(1, st.cfg.window);
  std::vector<std::size_t> kept;
  double loss = 0;
  std::size_t pairs = 0;
  const double lr0 = st.cfg.learning_rate;
  const double schedule_len = static_cast<double>(st.cfg.epochs) * static_cast<double>(st.sentences.size());

  for (std::size_t s = begin; s < end; ++s) {
    double lr = lr0;
    if (st.cfg.linear_decay) {
      const double done = static_cast<double>(st.epoch) * static_cast<double>(st.sentences.size()) + static_cast<double>(s);
      lr = lr0 * std::max(1e-4, 1.0 - done / schedule_len);
    }
    kept.clear();
    for (auto w : st.sentences[s]) {
      if (st.keep_prob[w] >= 1.0 || unit(rng) < st.keep_prob[w]) kept.push_back(w);
    }
    for (std::size_t pos = 0; pos < kept.size(); ++pos) {
      const std::size_t center = kept[pos];
      const auto& rows = st.components[center];
      hidden.setZero();
      for (auto r : rows) hidden += st.input.row(static_cast<Eigen::Index>(r)).transpose();
      hidden /= static_cast<double>(rows.size());

      const int b = window(rng);
      const std::size_t lo = pos >= static_cast<std::size_t>(b) ? pos - b : 0;
      const std::size_t hi = std::min(kept.size() - 1, pos + b);
      for (std::size_t c = lo; c <= hi; ++c) {
        if (c == pos) continue;
        const std::size_t target = kept[c];
        grad.setZero();
        for (int n = 0; n <= st.cfg.negatives; ++n) {
          std::size_t t = target;
          double label = 1.0;
          if (n > 0) {
            t = st.sampler(rng);
            if (t == target) continue;
            label = 0.0;
          }
          auto out_row = st.output.row(static_cast<Eigen::Index>(t));
          const double score = out_row.dot(hidden);
          const double f = sigmoid(score);
          loss -= label > 0 ? std::log(std::max(f, 1e-12)) : std::log(std::max(1.0 - f, 1e-12));
          const double g = (label - f) * lr;
          grad += g * out_row.transpose();
          out_row += g * hidden.transpose();
        }
        ++pairs;
        const double scale = 1.0 / static_cast<double>(rows.size());
        for (auto r : rows) st.input.row(static_cast<Eigen::Index>(r)) += scale * grad.transpose();
        // hidden must follow the input rows it is composed from
        hidden += grad * scale;
      }
    }
  }
  return {loss, pairs};
}

}  // namespace

std::vector<std::string> subword_ngrams(std::string_view word, int min_n, int max_n) {
  require(!word.empty(), "subword_ngrams: empty word");
  require(min_n >= 1 && max_n >= min_n, "subword_ngrams: need 1 <= min_n <= max_n");
  std::string wrapped = "<" + std::string(word) + ">";
  const auto cps = code_points(wrapped);
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (int n = min_n; n <= max_n; ++n) {
    if (static_cast<std::size_t>(n) > cps.size()) break;
    for (std::size_t i = 0; i + n <= cps.size(); ++i) {
      std::string g;
      for (std::size_t k = i; k < i + n; ++k) g += cps[k];
      if (seen.insert(g).second) out.push_back(std::move(g));
    }
  }
  if (seen.insert(wrapped).second) out.push_back(wrapped);
  return out;
}

std::uint64_t subword_bucket(std::string_view ngram, std::uint64_t buckets) {
  require(buckets > 0, "subword_bucket: zero buckets");
  return fnv1a64(ngram) % buckets;
}

SubwordTable::SubwordTable(SubwordConfig config, RowMatrix word_rows, RowMatrix bucket_rows,
                           std::unordered_map<std::uint64_t, std::size_t> bucket_index,
                           std::vector<std::vector<std::size_t>> word_buckets)
    : config_(config),
      word_rows_(std::move(word_rows)),
      bucket_rows_(std::move(bucket_rows)),
      bucket_index_(std::move(bucket_index)),
      word_buckets_(std::move(word_buckets)) {}

Vector SubwordTable::compose(std::size_t word_id) const {
  Vector v = word_rows_.row(static_cast<Eigen::Index>(word_id)).transpose();
  const auto& b = word_buckets_.at(word_id);
  for (auto r : b) v += bucket_rows_.row(static_cast<Eigen::Index>(r)).transpose();
  return v / static_cast<double>(b.size() + 1);
}

std::optional<Vector> SubwordTable::compose_oov(std::string_view word) const {
  Vector v = Vector::Zero(word_rows_.cols());
  std::size_t n = 0;
  std::unordered_set<std::size_t> used;
  for (const auto& g : subword_ngrams(word, config_.min_n, config_.max_n)) {
    auto it = bucket_index_.find(subword_bucket(g, config_.buckets));
    if (it == bucket_index_.end() || !used.insert(it->second).second) continue;
    v += bucket_rows_.row(static_cast<Eigen::Index>(it->second)).transpose();
    ++n;
  }
  if (n == 0) return std::nullopt;
  return v / static_cast<double>(n);
}

EmbeddingSpace::EmbeddingSpace(Vocabulary vocab, RowMatrix vectors,
                               std::optional<SubwordTable> subwords)
    : vocab_(std::move(vocab)), vectors_(std::move(vectors)), subwords_(std::move(subwords)) {
  require(static_cast<std::size_t>(vectors_.rows()) == vocab_.size(),
          "embedding rows must match vocabulary size");
  require(vectors_.cols() > 0, "embedding dimension must be positive");
  if (!vectors_.allFinite()) fail(ErrorCode::kNonFinite, "embedding contains NaN/Inf");
}

std::optional<Vector> EmbeddingSpace::lookup(std::string_view word) const {
  if (auto id = vocab_.id(word)) return vectors_.row(static_cast<Eigen::Index>(*id)).transpose();
  if (subwords_) return subwords_->compose_oov(word);
  return std::nullopt;
}

void TrainConfig::validate() const {
  if (dim <= 0) fail(ErrorCode::kInvalidConfig, "dim must be positive");
  if (window < 1) fail(ErrorCode::kInvalidConfig, "window must be >= 1");
  if (epochs < 1) fail(ErrorCode::kInvalidConfig, "epochs must be >= 1");
  if (!(learning_rate > 0)) fail(ErrorCode::kInvalidConfig, "learning_rate must be > 0");
  if (!(subsample > 0 && subsample <= 1)) {
    fail(ErrorCode::kInvalidConfig, "subsample threshold must be in (0, 1]");
  }
  if (negatives < 0) fail(ErrorCode::kInvalidConfig, "negatives must be >= 0");
  if (min_count < 1) fail(ErrorCode::kInvalidConfig, "min_count must be >= 1");
  if (threads < 1) fail(ErrorCode::kInvalidConfig, "threads must be >= 1");
  if (subword && (subword->min_n < 1 || subword->max_n < subword->min_n || subword->buckets == 0)) {
    fail(ErrorCode::kInvalidConfig, "invalid subword n-gram range");
  }
}

SkipGramModel train_skipgram(const Corpus& corpus, const TrainConfig& cfg) {
  cfg.validate();
  Vocabulary vocab = Vocabulary::build(corpus, cfg.min_count);
  const std::size_t nwords = vocab.size();
  const Eigen::Index dim = cfg.dim;

  std::vector<std::vector<std::size_t>> sentences;
  sentences.reserve(corpus.sentences.size());
  for (const auto& s : corpus.sentences) {
    std::vector<std::size_t> ids;
    for (const auto& w : s) {
      if (auto id = vocab.id(w)) ids.push_back(*id);
    }
    if (ids.size() > 1) sentences.push_back(std::move(ids));
  }

  const double total = static_cast<double>(vocab.total_count());
  std::vector<double> keep_prob(nwords);
  for (std::size_t i = 0; i < nwords; ++i) {
    const double f = static_cast<double>(vocab.count(i)) / total;
    const double r = cfg.subsample / f;
    keep_prob[i] = std::min(1.0, std::sqrt(r) + r);
  }

  // Input rows: words first, then the materialized subword buckets.
  std::vector<std::vector<std::size_t>> components(nwords);
  std::unordered_map<std::uint64_t, std::size_t> bucket_index;
  std::vector<std::vector<std::size_t>> word_buckets(nwords);
  for (std::size_t i = 0; i < nwords; ++i) {
    components[i].push_back(i);
    if (!cfg.subword) continue;
    std::unordered_set<std::size_t> used;
    for (const auto& g : subword_ngrams(vocab.word(i), cfg.subword->min_n, cfg.subword->max_n)) {
      const auto b = subword_bucket(g, cfg.subword->buckets);
      auto [it, inserted] = bucket_index.emplace(b, bucket_index.size());
      if (!used.insert(it->second).second) continue;  // hash collision inside one word
      word_buckets[i].push_back(it->second);
      components[i].push_back(nwords + it->second);
    }
  }
  const auto nrows = static_cast<Eigen::Index>(nwords + bucket_index.size());

  std::mt19937_64 rng(cfg.seed);
  RowMatrix input(nrows, dim);
  {
    std::uniform_real_distribution<double> init(-0.5 / static_cast<double>(dim),
                                                0.5 / static_cast<double>(dim));
    for (Eigen::Index r = 0; r < nrows; ++r) {
      for (Eigen::Index c = 0; c < dim; ++c) input(r, c) = init(rng);
    }
  }
  RowMatrix output = RowMatrix::Zero(static_cast<Eigen::Index>(nwords), dim);
  UnigramSampler sampler(vocab.counts());

  TrainingState st{cfg, sentences, keep_prob, components, sampler, input, output};
  std::vector<double> epoch_loss;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    double loss = 0;
    std::size_t pairs = 0;
    st.epoch = epoch;
    if (cfg.threads == 1) {
      std::tie(loss, pairs) = train_range(st, 0, sentences.size(), rng);
    } else {
      const auto nthreads = static_cast<std::size_t>(cfg.threads);
      std::vector<std::pair<double, std::size_t>> parts(nthreads);
      std::vector<std::mt19937_64> rngs;
      for (std::size_t t = 0; t < nthreads; ++t) rngs.emplace_back(rng());
      std::vector<std::thread> workers;
      for (std::size_t t = 0; t < nthreads; ++t) {
        const std::size_t b = sentences.size() * t / nthreads;
        const std::size_t e = sentences.size() * (t + 1) / nthreads;
        workers.emplace_back([&, t, b, e] { parts[t] = train_range(st, b, e, rngs[t]); });
      }
      for (auto& w : workers) w.join();
      for (auto& [l, p] : parts) {
        loss += l;
        pairs += p;
      }
    }
    epoch_loss.push_back(pairs ? loss / static_cast<double>(pairs) : 0.0);
    if (!std::isfinite(epoch_loss.back())) {
      fail(ErrorCode::kDivergence, "skip-gram loss became non-finite");
    }
  }

  RowMatrix vectors(static_cast<Eigen::Index>(nwords), dim);
  std::optional<SubwordTable> table;
  if (cfg.subword) {
    table.emplace(*cfg.subword, input.topRows(static_cast<Eigen::Index>(nwords)),
                  input.bottomRows(static_cast<Eigen::Index>(bucket_index.size())),
                  std::move(bucket_index), std::move(word_buckets));
    for (std::size_t i = 0; i < nwords; ++i) {
      vectors.row(static_cast<Eigen::Index>(i)) = table->compose(i).transpose();
    }
  } else {
    vectors = input;
  }
  return SkipGramModel{EmbeddingSpace(std::move(vocab), std::move(vectors), std::move(table)),
                       std::move(output), std::move(epoch_loss)};
}

void write_vectors(const EmbeddingSpace& space, std::ostream& out) {
  out << space.size() << ' ' << space.dim() << '\n';
  out << std::setprecision(6);
  const auto& m = space.vectors();
  for (std::size_t i = 0; i < space.size(); ++i) {
    out << space.vocab().word(i);
    for (Eigen::Index c = 0; c < m.cols(); ++c) out << ' ' << m(static_cast<Eigen::Index>(i), c);
    out << '\n';
  }
}

void save_vectors(const EmbeddingSpace& space, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::kIoError, "cannot write " + path.string());
  write_vectors(space, out);
}

EmbeddingSpace read_vectors(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) fail(ErrorCode::kMalformedHeader, "missing header");
  std::istringstream hs(header);
  long long rows = -1, dim = -1;
  std::string extra;
  if (!(hs >> rows >> dim) || (hs >> extra) || rows <= 0 || dim <= 0) {
    fail(ErrorCode::kMalformedHeader, "expected '<count> <dim>', got '" + header + "'");
  }
  RowMatrix m(rows, dim);
  std::vector<std::pair<std::string, std::int64_t>> entries;
  entries.reserve(static_cast<std::size_t>(rows));
  std::unordered_set<std::string> seen;
  std::string line;
  long long r = 0;
  while (r < rows && std::getline(in, line)) {
    std::istringstream ls(line);
    std::string word;
    if (!(ls >> word)) continue;
    if (!seen.insert(word).second) fail(ErrorCode::kDuplicateWord, "duplicate word '" + word + "'");
    long long c = 0;
    std::string tok;
    while (ls >> tok) {
      if (c >= dim) fail(ErrorCode::kMalformedRow, "row for '" + word + "' has more than " + std::to_string(dim) + " values");
      try {
        m(r, c) = std::stod(tok);
      } catch (const std::exception&) {
        fail(ErrorCode::kMalformedRow, "non-numeric value in row for '" + word + "'");
      }
      ++c;
    }
    if (c != dim) {
      fail(ErrorCode::kMalformedRow, "row for '" + word + "' has " + std::to_string(c) +
                                         " values, expected " + std::to_string(dim));
    }
    entries.emplace_back(std::move(word), rows - r);
    ++r;
  }
  if (r != rows) {
    fail(ErrorCode::kMalformedHeader,
         "header declares " + std::to_string(rows) + " rows, found " + std::to_string(r));
  }
  if (!m.allFinite()) fail(ErrorCode::kNonFinite, "vector file contains NaN/Inf");
  return EmbeddingSpace(Vocabulary::from_ordered(std::move(entries), 1), std::move(m));
}

EmbeddingSpace load_vectors(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIoError, "cannot read " + path.string());
  return read_vectors(in);
}

}  // namespace lexbridge
