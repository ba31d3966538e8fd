#pragma once

// Brute-force reference computations and synthetic instances shared by the
// unit and acceptance tests. Nothing here calls into the code under test
// except for plain containers (Vocabulary, EmbeddingSpace).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lexbridge/corpus.hpp"
#include "lexbridge/embedding.hpp"
#include "lexbridge/matrix.hpp"

namespace oracle {

using lexbridge::Matrix;
using lexbridge::RowMatrix;
using lexbridge::Vector;

/// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the signs
/// of R's diagonal folded into Q.
inline Matrix random_orthogonal(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Matrix a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = g(rng);
  Eigen::HouseholderQR<Matrix> qr(a);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < d; ++j)
    if (r(j, j) < 0) q.col(j) *= -1;
  return q;
}

inline Matrix gaussian(int rows, int cols, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = g(rng);
  return m;
}

inline lexbridge::Vocabulary ranked_vocab(const std::string& prefix, int n) {
  std::vector<std::pair<std::string, std::int64_t>> e;
  for (int i = 0; i < n; ++i) e.emplace_back(prefix + std::to_string(i), n - i + 1);
  return lexbridge::Vocabulary::from_ordered(std::move(e));
}

/// Source words s0.., target words t0.. with target row i = Q * source row i
/// (+ noise). The hidden pairing is s_i -> t_i.
struct RotatedPair {
  lexbridge::EmbeddingSpace source;
  lexbridge::EmbeddingSpace target;
  Matrix rotation;
};

inline RotatedPair rotated_pair(int words, int dim, std::uint64_t seed, double noise = 0.0) {
  std::mt19937_64 rng(seed);
  RowMatrix x = gaussian(words, dim, rng);
  Matrix q = random_orthogonal(dim, rng);
  RowMatrix y = x * q.transpose();
  if (noise > 0) y += gaussian(words, dim, rng, noise);
  return {lexbridge::EmbeddingSpace(ranked_vocab("s", words), x),
          lexbridge::EmbeddingSpace(ranked_vocab("t", words), y), q};
}

inline RowMatrix unit_rows(RowMatrix m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double n = m.row(i).norm();
    if (n > 0) m.row(i) /= n;
  }
  return m;
}

/// CSLS matrix from first principles: cosines, then each side's mean of its
/// k largest cosines towards the other side (k clamped to the other side).
inline Matrix csls_matrix(const RowMatrix& src, const RowMatrix& tgt, int k) {
  const RowMatrix a = unit_rows(src), b = unit_rows(tgt);
  const Matrix cos = a * b.transpose();
  auto top_mean = [](std::vector<double> v, int kk) {
    kk = std::min<int>(kk, static_cast<int>(v.size()));
    std::sort(v.begin(), v.end(), std::greater<>());
    double s = 0;
    for (int i = 0; i < kk; ++i) s += v[static_cast<std::size_t>(i)];
    return s / kk;
  };
  Vector rt(cos.rows()), rs(cos.cols());
  for (Eigen::Index i = 0; i < cos.rows(); ++i) {
    std::vector<double> v(static_cast<std::size_t>(cos.cols()));
    for (Eigen::Index j = 0; j < cos.cols(); ++j) v[static_cast<std::size_t>(j)] = cos(i, j);
    rt(i) = top_mean(v, k);
  }
  for (Eigen::Index j = 0; j < cos.cols(); ++j) {
    std::vector<double> v(static_cast<std::size_t>(cos.rows()));
    for (Eigen::Index i = 0; i < cos.rows(); ++i) v[static_cast<std::size_t>(i)] = cos(i, j);
    rs(j) = top_mean(v, k);
  }
  Matrix out(cos.rows(), cos.cols());
  for (Eigen::Index i = 0; i < cos.rows(); ++i)
    for (Eigen::Index j = 0; j < cos.cols(); ++j) out(i, j) = 2 * cos(i, j) - rt(i) - rs(j);
  return out;
}

/// Largest in-degree of the top-1 graph of a score matrix (rows query columns).
inline int max_in_degree(const Matrix& scores) {
  std::vector<int> deg(static_cast<std::size_t>(scores.cols()), 0);
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    Eigen::Index best = 0;
    scores.row(i).maxCoeff(&best);
    ++deg[static_cast<std::size_t>(best)];
  }
  return *std::max_element(deg.begin(), deg.end());
}

/// Symmetric eigenvalues of L = D - A, descending.
inline std::vector<double> laplacian_eigenvalues(const Matrix& adjacency) {
  Matrix l = -adjacency;
  for (Eigen::Index i = 0; i < l.rows(); ++i) l(i, i) = adjacency.row(i).sum();
  Eigen::SelfAdjointEigenSolver<Matrix> es(l);
  std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  std::sort(ev.begin(), ev.end(), std::greater<>());
  return ev;
}

/// Interpolated modified Kneser-Ney from raw n-gram counts, written directly
/// from the textbook recursion (no backoff form). Sentences are padded with a
/// single <s> and </s>. Lower orders use left-extension type counts except
/// for n-grams starting with <s>; the base distribution is uniform over every
/// word except <s> (with <unk>). `fixed` replaces count-of-counts discounts.
class KneserNey {
 public:
  using Gram = std::vector<std::string>;

  KneserNey(const std::vector<std::vector<std::string>>& sentences, int order,
            std::optional<std::array<double, 3>> fixed = std::nullopt)
      : order_(order) {
    std::set<std::string> vocab{"<unk>", "</s>"};
    std::vector<std::map<Gram, long>> raw(static_cast<std::size_t>(order));
    for (const auto& s : sentences) {
      Gram p{"<s>"};
      p.insert(p.end(), s.begin(), s.end());
      p.push_back("</s>");
      vocab.insert(s.begin(), s.end());
      for (std::size_t i = 0; i < p.size(); ++i)
        for (int n = 1; n <= order && i + static_cast<std::size_t>(n) <= p.size(); ++n)
          ++raw[static_cast<std::size_t>(n - 1)][Gram(p.begin() + static_cast<long>(i), p.begin() + static_cast<long>(i) + n)];
    }
    base_ = 1.0 / static_cast<double>(vocab.size());
    counts_.resize(static_cast<std::size_t>(order));
    counts_.back() = raw.back();
    for (int n = 1; n < order; ++n) {
      auto& a = counts_[static_cast<std::size_t>(n - 1)];
      for (const auto& [g, c] : raw[static_cast<std::size_t>(n - 1)]) {
        if (g.front() == "<s>") {
          a[g] = c;
          continue;
        }
        std::set<std::string> left;
        for (const auto& [h, c2] : raw[static_cast<std::size_t>(n)])
          if (std::equal(g.begin(), g.end(), h.begin() + 1)) left.insert(h.front());
        a[g] = static_cast<long>(left.size());
      }
    }
    for (auto& a : counts_) a.erase(Gram{"<s>"});
    for (int n = 1; n <= order; ++n) {
      if (fixed) {
        discounts_.push_back(*fixed);
        continue;
      }
      double t[5] = {0, 0, 0, 0, 0};
      for (const auto& [g, c] : counts_[static_cast<std::size_t>(n - 1)])
        if (c >= 1 && c <= 4) t[c] += 1;
      const double y = t[1] / (t[1] + 2 * t[2]);
      std::array<double, 3> d{1 - 2 * y * t[2] / t[1], 2 - 3 * y * t[3] / t[2], 3 - 4 * y * t[4] / t[3]};
      bool ok = true;
      for (int i = 0; i < 3; ++i) ok = ok && std::isfinite(d[static_cast<std::size_t>(i)]) && d[static_cast<std::size_t>(i)] > 0 && d[static_cast<std::size_t>(i)] <= i + 1;
      discounts_.push_back(ok ? d : std::array<double, 3>{0.5, 1.0, 1.5});
    }
  }

  const std::vector<std::array<double, 3>>& discounts() const { return discounts_; }

  /// P(w | history), most recent word last.
  double prob(const std::string& w, Gram history) const {
    if (static_cast<int>(history.size()) > order_ - 1)
      history.erase(history.begin(), history.end() - (order_ - 1));
    return p(w, history);
  }

 private:
  double p(const std::string& w, const Gram& h) const {
    const std::size_t n = h.size() + 1;
    const double lower = h.empty() ? base_ : p(w, Gram(h.begin() + 1, h.end()));
    const auto& table = counts_[n - 1];
    const auto& d = discounts_[n - 1];
    double total = 0, n1 = 0, n2 = 0, n3 = 0, cw = 0;
    for (const auto& [g, c] : table) {
      if (!std::equal(h.begin(), h.end(), g.begin())) continue;
      total += static_cast<double>(c);
      (c == 1 ? n1 : c == 2 ? n2 : n3) += 1;
      if (g.back() == w) cw = static_cast<double>(c);
    }
    if (total == 0) return lower;
    const double disc = cw == 0 ? 0 : cw == 1 ? d[0] : cw == 2 ? d[1] : d[2];
    const double gamma = (d[0] * n1 + d[1] * n2 + d[2] * n3) / total;
    return (cw - disc) / total + gamma * lower;
  }

  int order_;
  double base_ = 0;
  std::vector<std::map<Gram, long>> counts_;
  std::vector<std::array<double, 3>> discounts_;
};

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("lexbridge-test-" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace oracle
