#include "lexbridge/bdi.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <set>
#include <sstream>

#include "lexbridge/error.hpp"

namespace lexbridge {

std::string_view to_string(BdiMethod m) {
  switch (m) {
    case BdiMethod::kProcrustes: return "procrustes";
    case BdiMethod::kSelfLearning: return "self_learning";
    case BdiMethod::kAdversarial: return "adversarial";
  }
  return "procrustes";
}

BdiMethod parse_bdi_method(std::string_view s) {
  if (s == "procrustes") return BdiMethod::kProcrustes;
  if (s == "self_learning" || s == "self-learning") return BdiMethod::kSelfLearning;
  if (s == "adversarial") return BdiMethod::kAdversarial;
  fail(ErrorCode::kInvalidConfig, "unknown BDI method '" + std::string(s) + "'");
}

double AlignmentMap::orthogonality_residual() const {
  const auto d = source_map.cols();
  return (source_map.transpose() * source_map - Matrix::Identity(d, d)).norm();
}

void AlignmentMap::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::kIoError, "cannot write " + path.string());
  out << dim() << ' ' << to_string(method) << '\n' << std::setprecision(17);
  auto rows = [&](const Matrix& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) out << (c ? " " : "") << m(r, c);
      out << '\n';
    }
  };
  rows(source_map);
  if (target_map) rows(*target_map);
}

AlignmentMap AlignmentMap::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIoError, "cannot read " + path.string());
  std::string header;
  std::getline(in, header);
  std::istringstream hs(header);
  int d = 0;
  std::string method;
  if (!(hs >> d >> method) || d <= 0) fail(ErrorCode::kMalformedHeader, "expected 'd method'");
  AlignmentMap map;
  map.method = parse_bdi_method(method);
  auto read = [&](Matrix& m) {
    m.resize(d, d);
    for (int r = 0; r < d; ++r) {
      std::string line;
      if (!std::getline(in, line)) fail(ErrorCode::kMalformedRow, "missing map row");
      std::istringstream ls(line);
      for (int c = 0; c < d; ++c) {
        if (!(ls >> m(r, c))) fail(ErrorCode::kMalformedRow, "short map row " + std::to_string(r));
      }
    }
  };
  read(map.source_map);
  if (map.method == BdiMethod::kSelfLearning) {
    map.target_map.emplace();
    read(*map.target_map);
  }
  if (!map.source_map.allFinite()) fail(ErrorCode::kNonFinite, "map contains NaN/Inf");
  return map;
}

void prepare_rows(RowMatrix& rows) {
  normalize_rows(rows);
  const Eigen::RowVectorXd mean = rows.colwise().mean();
  rows.rowwise() -= mean;
  normalize_rows(rows);
}

EmbeddingSpace prepare_for_alignment(const EmbeddingSpace& space) {
  RowMatrix rows = space.vectors();
  prepare_rows(rows);
  return EmbeddingSpace(space.vocab(), std::move(rows));
}

RowMatrix map_rows(const RowMatrix& rows, const Matrix& map) { return rows * map.transpose(); }

RetrievalIndex make_index(const EmbeddingSpace& prepared_source, const EmbeddingSpace& prepared_target,
                          const AlignmentMap& map, int k_csls) {
  if (prepared_source.dim() != map.dim() || prepared_target.dim() != map.dim()) {
    fail(ErrorCode::kDimensionMismatch, "alignment map and space dimensions differ");
  }
  RowMatrix tgt = map.target_map ? map_rows(prepared_target.vectors(), *map.target_map)
                                 : prepared_target.vectors();
  return RetrievalIndex(map_rows(prepared_source.vectors(), map.source_map), prepared_source.vocab(),
                        std::move(tgt), prepared_target.vocab(), k_csls);
}

AlignmentMap procrustes_fit(const Matrix& x, const Matrix& y) {
  require(x.cols() >= 1, "procrustes_fit: need at least one anchor");
  if (x.rows() != y.rows() || x.cols() != y.cols()) {
    fail(ErrorCode::kDimensionMismatch, "procrustes_fit: X and Y shapes differ");
  }
  if (!x.allFinite() || !y.allFinite()) fail(ErrorCode::kNonFinite, "procrustes_fit: NaN/Inf input");
  const Matrix m = y * x.transpose();
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.info() != Eigen::Success) fail(ErrorCode::kDecompositionFailure, "SVD failed");
  AlignmentMap out;
  out.source_map = svd.matrixU() * svd.matrixV().transpose();
  out.method = BdiMethod::kProcrustes;
  if (!out.source_map.allFinite()) fail(ErrorCode::kDecompositionFailure, "SVD produced NaN");
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> resolve_pairs(const Dictionary& seed,
                                                               const Vocabulary& source,
                                                               const Vocabulary& target) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (const auto& p : seed) {
    auto s = source.id(p.source);
    if (!s) fail(ErrorCode::kUnknownWord, "seed word '" + p.source + "' not in source vocabulary");
    auto t = target.id(p.target);
    if (!t) fail(ErrorCode::kUnknownWord, "seed word '" + p.target + "' not in target vocabulary");
    out.emplace_back(*s, *t);
  }
  return out;
}

namespace {

AlignmentMap fit_pairs(const RowMatrix& src, const RowMatrix& tgt,
                       const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
  Matrix x(src.cols(), static_cast<Eigen::Index>(pairs.size()));
  Matrix y(tgt.cols(), static_cast<Eigen::Index>(pairs.size()));
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    x.col(static_cast<Eigen::Index>(k)) = src.row(static_cast<Eigen::Index>(pairs[k].first)).transpose();
    y.col(static_cast<Eigen::Index>(k)) = tgt.row(static_cast<Eigen::Index>(pairs[k].second)).transpose();
  }
  return procrustes_fit(x, y);
}

std::vector<std::size_t> first_ids(std::size_t n, std::size_t limit) {
  std::vector<std::size_t> ids(std::min(n, limit));
  std::iota(ids.begin(), ids.end(), std::size_t{0});
  return ids;
}

struct Induced {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  Dictionary dictionary;
  double mean_score = 0;
};

Induced induce_forward(const RetrievalIndex& index, std::size_t max_rank, RetrievalMethod method,
                       bool mutual = false) {
  Induced out;
  const auto ids = first_ids(index.source_size(), max_rank);
  const auto best = index.best_targets(ids, method);
  std::vector<Candidate> back;
  if (mutual) back = index.best_sources(first_ids(index.target_size(), max_rank), method);
  double sum = 0;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const bool keep = !mutual || (best[i].id < back.size() && back[best[i].id].id == ids[i]);
    if (keep) out.pairs.emplace_back(ids[i], best[i].id);
    out.dictionary.add({index.source_vocab().word(ids[i]), best[i].word, best[i].score});
    sum += best[i].score;
  }
  out.mean_score = ids.empty() ? 0 : sum / static_cast<double>(ids.size());
  return out;
}

}  // namespace

AlignmentResult procrustes_refine(const EmbeddingSpace& src, const EmbeddingSpace& tgt,
                                  const Matrix& initial, const ProcrustesOptions& opts) {
  require(opts.iterations >= 0, "iterations must be >= 0");
  AlignmentResult res;
  res.map.source_map = initial;
  res.map.method = BdiMethod::kProcrustes;
  auto induce = [&]() {
    const auto index = make_index(src, tgt, res.map, opts.k_csls);
    return induce_forward(index, opts.max_rank, opts.induction, opts.mutual);
  };
  Induced current = induce();
  for (int it = 0; it < opts.iterations; ++it) {
    if (current.pairs.empty()) fail(ErrorCode::kPreconditionViolation, "no mutual pairs to refit on");
    res.map = fit_pairs(src.vectors(), tgt.vectors(), current.pairs);
    current = induce();
    res.mean_similarity.push_back(current.mean_score);
    ++res.iterations_run;
  }
  res.dictionary = std::move(current.dictionary);
  return res;
}

AlignmentResult procrustes_iterate(const EmbeddingSpace& source, const EmbeddingSpace& target,
                                   const Dictionary& seed, const ProcrustesOptions& opts) {
  require(!seed.empty(), "procrustes_iterate: empty seed dictionary");
  require(opts.iterations >= 0, "iterations must be >= 0");
  if (source.dim() != target.dim()) fail(ErrorCode::kDimensionMismatch, "space dimensions differ");
  const auto pairs = resolve_pairs(seed, source.vocab(), target.vocab());
  const auto src = prepare_for_alignment(source);
  const auto tgt = prepare_for_alignment(target);
  const AlignmentMap initial = fit_pairs(src.vectors(), tgt.vectors(), pairs);
  // the seed fit counts as the first of the requested iterations
  ProcrustesOptions rest = opts;
  rest.iterations = std::max(0, opts.iterations - 1);
  AlignmentResult res = procrustes_refine(src, tgt, initial.source_map, rest);
  if (opts.iterations == 0) {
    res.mean_similarity.clear();
    res.iterations_run = 0;
  } else {
    ++res.iterations_run;
    // mean score of the dictionary induced right after the seed fit
    const auto index = make_index(src, tgt, initial, opts.k_csls);
    res.mean_similarity.insert(res.mean_similarity.begin(),
                               induce_forward(index, opts.max_rank, opts.induction).mean_score);
  }
  return res;
}

namespace {

// (M^T M)^{-1/2} and its inverse from the SVD of M; empty when rank deficient.
std::optional<std::pair<Matrix, Matrix>> whitening(const Matrix& m) {
  if (m.rows() < m.cols()) return std::nullopt;
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinV);
  const Vector s = svd.singularValues();
  if (s.size() == 0 || s(s.size() - 1) <= 1e-8 * s(0)) return std::nullopt;
  const Matrix& v = svd.matrixV();
  Matrix w = v * s.cwiseInverse().asDiagonal() * v.transpose();
  Matrix w_inv = v * s.asDiagonal() * v.transpose();
  return std::make_pair(std::move(w), std::move(w_inv));
}

std::set<std::pair<std::size_t, std::size_t>> as_set(
    const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
  return {pairs.begin(), pairs.end()};
}

}  // namespace

AlignmentResult self_learning_fit(const EmbeddingSpace& source, const EmbeddingSpace& target,
                                  const Dictionary& seed, const SelfLearningOptions& opts) {
  require(!seed.empty(), "self_learning_fit: empty seed dictionary");
  require(opts.max_iterations >= 1, "max_iterations must be >= 1");
  if (source.dim() != target.dim()) fail(ErrorCode::kDimensionMismatch, "space dimensions differ");
  auto pairs = resolve_pairs(seed, source.vocab(), target.vocab());
  const auto src = prepare_for_alignment(source);
  const auto tgt = prepare_for_alignment(target);
  const RowMatrix& x = src.vectors();
  const RowMatrix& z = tgt.vectors();
  const auto d = x.cols();

  AlignmentResult res;
  res.map.method = BdiMethod::kSelfLearning;
  res.converged = false;
  double best_objective = -std::numeric_limits<double>::infinity();
  auto current = as_set(pairs);

  for (int it = 0; it < opts.max_iterations; ++it) {
    Matrix xd(static_cast<Eigen::Index>(pairs.size()), d);
    Matrix zd(static_cast<Eigen::Index>(pairs.size()), d);
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      xd.row(static_cast<Eigen::Index>(k)) = x.row(static_cast<Eigen::Index>(pairs[k].first));
      zd.row(static_cast<Eigen::Index>(k)) = z.row(static_cast<Eigen::Index>(pairs[k].second));
    }
    // Row convention: mapped = X * T.
    Matrix wx1 = Matrix::Identity(d, d), wx1_inv = wx1;
    Matrix wz1 = Matrix::Identity(d, d), wz1_inv = wz1;
    bool whitened = false;
    if (opts.whiten) {
      auto wx = whitening(xd);
      auto wz = whitening(zd);
      if (wx && wz) {
        std::tie(wx1, wx1_inv) = *wx;
        std::tie(wz1, wz1_inv) = *wz;
        whitened = true;
      }
    }
    const Matrix cross = (xd * wx1).transpose() * (zd * wz1);
    Eigen::JacobiSVD<Matrix> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
    if (svd.info() != Eigen::Success) fail(ErrorCode::kDecompositionFailure, "SVD failed");
    const Matrix& wx2 = svd.matrixU();
    const Matrix& wz2 = svd.matrixV();
    const Vector s = svd.singularValues();
    Matrix tx = wx1 * wx2 * s.array().pow(opts.source_reweight).matrix().asDiagonal();
    Matrix tz = wz1 * wz2 * s.array().pow(opts.target_reweight).matrix().asDiagonal();
    if (whitened && opts.dewhiten) {
      tx = tx * (wx2.transpose() * wx1_inv * wx2);
      tz = tz * (wz2.transpose() * wz1_inv * wz2);
    }

    AlignmentMap map{tx.transpose(), Matrix(tz.transpose()), BdiMethod::kSelfLearning};
    RetrievalIndex index(map_rows(x, map.source_map), src.vocab(), map_rows(z, *map.target_map),
                         tgt.vocab(), opts.k_csls, /*normalize=*/false);

    // Bidirectional induction, union of both directions.
    const auto src_ids = first_ids(index.source_size(), opts.vocabulary_cutoff);
    const auto tgt_ids = first_ids(index.target_size(), opts.vocabulary_cutoff);
    const auto fwd = index.best_targets(src_ids, RetrievalMethod::kCsls);
    const auto bwd = index.best_sources(tgt_ids, RetrievalMethod::kCsls);
    std::vector<std::pair<std::size_t, std::size_t>> next;
    double objective = 0;
    for (std::size_t i = 0; i < src_ids.size(); ++i) {
      next.emplace_back(src_ids[i], fwd[i].id);
      objective += fwd[i].score;
    }
    for (std::size_t j = 0; j < tgt_ids.size(); ++j) {
      next.emplace_back(bwd[j].id, tgt_ids[j]);
      objective += bwd[j].score;
    }
    objective /= static_cast<double>(src_ids.size() + tgt_ids.size());
    res.mean_similarity.push_back(objective);
    ++res.iterations_run;

    auto next_set = as_set(next);
    if (objective > best_objective || it == 0) {
      best_objective = objective;
      res.map = map;
      Dictionary dict;
      for (const auto& [i, j] : next_set) {
        dict.add({src.vocab().word(i), tgt.vocab().word(j), std::nullopt});
      }
      res.dictionary = std::move(dict);
    }
    if (next_set == current) {
      res.converged = true;
      res.map = map;
      Dictionary dict;
      for (const auto& [i, j] : next_set) dict.add({src.vocab().word(i), tgt.vocab().word(j), std::nullopt});
      res.dictionary = std::move(dict);
      break;
    }
    current = std::move(next_set);
    pairs.assign(current.begin(), current.end());
  }
  if (!res.converged) {
    res.warnings.push_back("self-learning did not converge within " +
                           std::to_string(opts.max_iterations) +
                           " iterations; returning best-so-far map");
  }
  return res;
}

}  // namespace lexbridge
