#include "lexbridge/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "json.hpp"
#include "lexbridge/error.hpp"

namespace lexbridge {

namespace {

constexpr Eigen::Index kBlock = 512;

std::vector<std::size_t> top_k_indices(const Vector& scores, std::size_t k) {
  std::vector<std::size_t> idx(static_cast<std::size_t>(scores.size()));
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  k = std::min(k, idx.size());
  auto better = [&](std::size_t a, std::size_t b) {
    const double sa = scores(static_cast<Eigen::Index>(a));
    const double sb = scores(static_cast<Eigen::Index>(b));
    if (sa != sb) return sa > sb;
    return a < b;
  };
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(), better);
  idx.resize(k);
  return idx;
}

std::size_t argmax(const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  std::size_t best = 0;
  for (Eigen::Index j = 1; j < row.size(); ++j) {
    if (row(j) > row(static_cast<Eigen::Index>(best))) best = static_cast<std::size_t>(j);
  }
  return best;
}

}  // namespace

std::string_view to_string(RetrievalMethod m) {
  return m == RetrievalMethod::kCsls ? "csls" : "nn";
}

RetrievalMethod parse_retrieval_method(std::string_view s) {
  if (s == "csls") return RetrievalMethod::kCsls;
  if (s == "nn") return RetrievalMethod::kNearestNeighbor;
  fail(ErrorCode::kInvalidConfig, "unknown retrieval method '" + std::string(s) + "'");
}

Vector mean_top_k_similarity(const RowMatrix& a, const RowMatrix& b, int k) {
  require(k >= 1, "k must be >= 1");
  const auto kk = std::min<Eigen::Index>(k, b.rows());
  Vector out(a.rows());
  std::vector<double> buf(static_cast<std::size_t>(b.rows()));
  for (Eigen::Index start = 0; start < a.rows(); start += kBlock) {
    const auto len = std::min(kBlock, a.rows() - start);
    const RowMatrix sims = a.middleRows(start, len) * b.transpose();
    for (Eigen::Index r = 0; r < len; ++r) {
      std::copy(sims.row(r).data(), sims.row(r).data() + sims.cols(), buf.begin());
      std::nth_element(buf.begin(), buf.begin() + (kk - 1), buf.end(), std::greater<>());
      double s = 0;
      // sum in a fixed order so results do not depend on nth_element internals
      std::sort(buf.begin(), buf.begin() + kk, std::greater<>());
      for (Eigen::Index t = 0; t < kk; ++t) s += buf[static_cast<std::size_t>(t)];
      out(start + r) = s / static_cast<double>(kk);
    }
  }
  return out;
}

RetrievalIndex::RetrievalIndex(RowMatrix mapped_source, Vocabulary source_vocab, RowMatrix target,
                               Vocabulary target_vocab, int k_csls, bool normalize)
    : source_(std::move(mapped_source)),
      target_(std::move(target)),
      source_vocab_(std::move(source_vocab)),
      target_vocab_(std::move(target_vocab)),
      k_csls_(k_csls) {
  require(k_csls_ >= 1, "k_csls must be >= 1");
  require(source_.rows() > 0 && target_.rows() > 0, "retrieval needs non-empty spaces");
  if (source_.cols() != target_.cols()) {
    fail(ErrorCode::kDimensionMismatch, "source and target dimensions differ");
  }
  require(static_cast<std::size_t>(source_.rows()) == source_vocab_.size(), "source rows/vocab mismatch");
  require(static_cast<std::size_t>(target_.rows()) == target_vocab_.size(), "target rows/vocab mismatch");
  if (!source_.allFinite() || !target_.allFinite()) {
    fail(ErrorCode::kNonFinite, "retrieval input contains NaN/Inf");
  }
  if (normalize) {
    normalize_rows(source_);
    normalize_rows(target_);
  }
  r_source_ = mean_top_k_similarity(source_, target_, k_csls_);
  r_target_ = mean_top_k_similarity(target_, source_, k_csls_);
}

Vector RetrievalIndex::scores(std::size_t i, RetrievalMethod method) const {
  Vector s = target_ * source_.row(static_cast<Eigen::Index>(i)).transpose();
  if (method == RetrievalMethod::kCsls) {
    s = 2.0 * s - r_target_;
    s.array() -= r_source_(static_cast<Eigen::Index>(i));
  }
  return s;
}

Vector RetrievalIndex::reverse_scores(std::size_t j, RetrievalMethod method) const {
  Vector s = source_ * target_.row(static_cast<Eigen::Index>(j)).transpose();
  if (method == RetrievalMethod::kCsls) {
    s = 2.0 * s - r_source_;
    s.array() -= r_target_(static_cast<Eigen::Index>(j));
  }
  return s;
}

std::size_t RetrievalIndex::source_id_or_throw(std::string_view word) const {
  auto id = source_vocab_.id(word);
  if (!id) fail(ErrorCode::kUnknownWord, "'" + std::string(word) + "' not in source vocabulary");
  return *id;
}

std::vector<Candidate> RetrievalIndex::query(std::size_t source_id, std::size_t k,
                                             RetrievalMethod method) const {
  require(source_id < source_size(), "source id out of range");
  const Vector s = scores(source_id, method);
  std::vector<Candidate> out;
  for (auto j : top_k_indices(s, k)) {
    out.push_back({j, target_vocab_.word(j), s(static_cast<Eigen::Index>(j))});
  }
  return out;
}

std::vector<Candidate> RetrievalIndex::nn_query(std::string_view source_word, std::size_t k) const {
  return query(source_id_or_throw(source_word), k, RetrievalMethod::kNearestNeighbor);
}

std::vector<Candidate> RetrievalIndex::csls_query(std::string_view source_word, std::size_t k) const {
  return query(source_id_or_throw(source_word), k, RetrievalMethod::kCsls);
}

std::vector<Candidate> RetrievalIndex::best_targets(const std::vector<std::size_t>& source_ids,
                                                    RetrievalMethod method) const {
  std::vector<Candidate> out;
  out.reserve(source_ids.size());
  const auto n = static_cast<Eigen::Index>(source_ids.size());
  for (Eigen::Index start = 0; start < n; start += kBlock) {
    const auto len = std::min(kBlock, n - start);
    RowMatrix block(len, source_.cols());
    for (Eigen::Index r = 0; r < len; ++r) {
      block.row(r) = source_.row(static_cast<Eigen::Index>(source_ids[static_cast<std::size_t>(start + r)]));
    }
    RowMatrix sims = block * target_.transpose();
    for (Eigen::Index r = 0; r < len; ++r) {
      const auto i = source_ids[static_cast<std::size_t>(start + r)];
      if (method == RetrievalMethod::kCsls) {
        sims.row(r) = 2.0 * sims.row(r) - r_target_.transpose();
        sims.row(r).array() -= r_source_(static_cast<Eigen::Index>(i));
      }
      const auto j = argmax(sims.row(r));
      out.push_back({j, target_vocab_.word(j), sims(r, static_cast<Eigen::Index>(j))});
    }
  }
  return out;
}

std::vector<Candidate> RetrievalIndex::best_sources(const std::vector<std::size_t>& target_ids,
                                                    RetrievalMethod method) const {
  std::vector<Candidate> out;
  out.reserve(target_ids.size());
  const auto n = static_cast<Eigen::Index>(target_ids.size());
  for (Eigen::Index start = 0; start < n; start += kBlock) {
    const auto len = std::min(kBlock, n - start);
    RowMatrix block(len, target_.cols());
    for (Eigen::Index r = 0; r < len; ++r) {
      block.row(r) = target_.row(static_cast<Eigen::Index>(target_ids[static_cast<std::size_t>(start + r)]));
    }
    RowMatrix sims = block * source_.transpose();
    for (Eigen::Index r = 0; r < len; ++r) {
      const auto j = target_ids[static_cast<std::size_t>(start + r)];
      if (method == RetrievalMethod::kCsls) {
        sims.row(r) = 2.0 * sims.row(r) - r_source_.transpose();
        sims.row(r).array() -= r_target_(static_cast<Eigen::Index>(j));
      }
      const auto i = argmax(sims.row(r));
      out.push_back({i, source_vocab_.word(i), sims(r, static_cast<Eigen::Index>(i))});
    }
  }
  return out;
}

Dictionary induce_dictionary(const RetrievalIndex& index, const std::vector<std::string>& source_words,
                             RetrievalMethod method, std::optional<double> threshold) {
  require(!source_words.empty(), "induce_dictionary: empty source word list");
  std::vector<std::size_t> ids;
  std::vector<const std::string*> words;
  for (const auto& w : source_words) {
    if (auto id = index.source_vocab().id(w)) {
      ids.push_back(*id);
      words.push_back(&w);
    }
  }
  Dictionary d;
  const auto best = index.best_targets(ids, method);
  for (std::size_t i = 0; i < best.size(); ++i) {
    if (threshold && best[i].score < *threshold) continue;
    d.add({*words[i], best[i].word, best[i].score});
  }
  return d;
}

namespace {

struct GoldGroup {
  std::size_t source_id;
  std::set<std::size_t> targets;
};

std::vector<GoldGroup> group_gold(const RetrievalIndex& index, const Dictionary& gold,
                                  std::size_t& skipped) {
  std::map<std::size_t, std::set<std::size_t>> groups;
  std::vector<std::size_t> order;
  skipped = 0;
  for (const auto& p : gold) {
    auto s = index.source_vocab().id(p.source);
    auto t = index.target_vocab().id(p.target);
    if (!s || !t) {
      ++skipped;
      continue;
    }
    auto [it, inserted] = groups.try_emplace(*s);
    if (inserted) order.push_back(*s);
    it->second.insert(*t);
  }
  std::vector<GoldGroup> out;
  for (auto s : order) out.push_back({s, groups[s]});
  return out;
}

// Rank (0-based) of the first gold target within the top `depth`, or depth.
std::size_t first_hit_rank(const RetrievalIndex& index, const GoldGroup& g, std::size_t depth,
                           RetrievalMethod method) {
  const auto top = index.query(g.source_id, depth, method);
  for (std::size_t r = 0; r < top.size(); ++r) {
    if (g.targets.count(top[r].id)) return r;
  }
  return depth;
}

}  // namespace

PrecisionResult precision_at_k(const RetrievalIndex& index, const Dictionary& gold, std::size_t k,
                               RetrievalMethod method) {
  require(k >= 1, "precision_at_k: k must be >= 1");
  PrecisionResult res;
  const auto groups = group_gold(index, gold, res.skipped);
  if (groups.empty()) fail(ErrorCode::kNoEvaluablePairs, "every gold pair is out of vocabulary");
  std::size_t hits = 0;
  for (const auto& g : groups) {
    if (first_hit_rank(index, g, k, method) < k) ++hits;
  }
  res.evaluated = groups.size();
  res.precision = static_cast<double>(hits) / static_cast<double>(groups.size());
  return res;
}

EvalReport evaluate_bdi(const RetrievalIndex& index, const Dictionary& gold, RetrievalMethod method,
                        std::size_t bootstrap_resamples, std::uint64_t seed) {
  EvalReport rep;
  const auto groups = group_gold(index, gold, rep.skipped);
  if (groups.empty()) fail(ErrorCode::kNoEvaluablePairs, "every gold pair is out of vocabulary");
  std::vector<std::size_t> ranks;
  ranks.reserve(groups.size());
  for (const auto& g : groups) ranks.push_back(first_hit_rank(index, g, 10, method));
  rep.evaluated = groups.size();
  auto precision = [&](const std::vector<std::size_t>& sample, std::size_t k) {
    std::size_t hits = 0;
    for (auto r : sample) hits += r < k ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(sample.size());
  };
  rep.p_at_1 = precision(ranks, 1);
  rep.p_at_5 = precision(ranks, 5);
  rep.p_at_10 = precision(ranks, 10);
  if (bootstrap_resamples > 0) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, ranks.size() - 1);
    std::vector<double> s1, s5, s10;
    std::vector<std::size_t> sample(ranks.size());
    for (std::size_t b = 0; b < bootstrap_resamples; ++b) {
      for (auto& x : sample) x = ranks[pick(rng)];
      s1.push_back(precision(sample, 1));
      s5.push_back(precision(sample, 5));
      s10.push_back(precision(sample, 10));
    }
    auto stddev = [](const std::vector<double>& v) {
      const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
      double ss = 0;
      for (double x : v) ss += (x - mean) * (x - mean);
      return std::sqrt(ss / static_cast<double>(v.size() > 1 ? v.size() - 1 : 1));
    };
    rep.std_at_1 = stddev(s1);
    rep.std_at_5 = stddev(s5);
    rep.std_at_10 = stddev(s10);
  }
  return rep;
}

std::string EvalReport::to_json() const {
  nlohmann::ordered_json j;
  j["p@1"] = p_at_1;
  j["p@5"] = p_at_5;
  j["p@10"] = p_at_10;
  j["evaluated"] = evaluated;
  j["skipped"] = skipped;
  if (std_at_1) {
    j["std@1"] = *std_at_1;
    j["std@5"] = *std_at_5;
    j["std@10"] = *std_at_10;
  }
  return j.dump(2);
}

}  // namespace lexbridge
