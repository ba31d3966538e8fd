#include "lexbridge/smt/phrase_table.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "lexbridge/corpus.hpp"
#include "lexbridge/error.hpp"

namespace lexbridge::smt {

std::string join(std::span<const std::string> tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

Phrase split(std::string_view text) { return tokenize(text, false); }

PhraseTable::PhraseTable(int max_length) : max_length_(max_length) {
  require(max_length >= 1, "phrase length limit must be >= 1");
}

std::size_t PhraseTable::entry_count() const {
  std::size_t n = 0;
  for (const auto& [k, v] : rows_) n += v.size();
  return n;
}

void PhraseTable::set_row(const Phrase& source, std::vector<PhraseEntry> entries) {
  require(!source.empty(), "empty source phrase");
  require(static_cast<int>(source.size()) <= max_length_, "source phrase exceeds length limit");
  require(!entries.empty(), "phrase table row without entries");
  double sum = 0;
  for (const auto& e : entries) {
    require(!e.target.empty(), "empty target phrase");
    require(e.forward >= 0 && std::isfinite(e.forward), "invalid forward probability");
    sum += e.forward;
  }
  require(sum > 0, "phrase table row has zero mass");
  for (auto& e : entries) e.forward /= sum;
  std::sort(entries.begin(), entries.end(), [](const PhraseEntry& a, const PhraseEntry& b) {
    if (a.forward != b.forward) return a.forward > b.forward;
    return a.target < b.target;
  });
  rows_[join(source)] = std::move(entries);
}

bool PhraseTable::has_row(const Phrase& source) const { return rows_.count(join(source)) > 0; }

const std::vector<PhraseEntry>* PhraseTable::lookup(std::span<const std::string> source) const {
  auto it = rows_.find(join(source));
  return it == rows_.end() ? nullptr : &it->second;
}

int PhraseTable::longest_source() const {
  int longest = 0;
  for (const auto& [k, v] : rows_) {
    longest = std::max(longest, static_cast<int>(std::count(k.begin(), k.end(), ' ') + 1));
  }
  return longest;
}

PhraseTable PhraseTable::inverted() const {
  std::map<std::string, std::vector<PhraseEntry>> by_target;
  for (const auto& [src, entries] : rows_) {
    for (const auto& e : entries) {
      by_target[join(e.target)].push_back({split(src), e.backward, e.forward});
    }
  }
  int longest_target = 1;
  for (const auto& [k, v] : by_target) {
    longest_target = std::max(longest_target, static_cast<int>(split(k).size()));
  }
  PhraseTable out(std::max(max_length_, longest_target));
  for (auto& [tgt, entries] : by_target) {
    double sum = 0;
    for (const auto& e : entries) sum += e.forward;
    if (sum <= 0) {
      for (auto& e : entries) e.forward = 1.0;
    }
    out.set_row(split(tgt), std::move(entries));
  }
  return out;
}

void PhraseTable::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::kIoError, "cannot write " + path.string());
  out << std::setprecision(10);
  for (const auto& [src, entries] : rows_) {
    for (const auto& e : entries) {
      out << src << " ||| " << join(e.target) << " ||| " << e.forward << ' ' << e.backward << '\n';
    }
  }
}

PhraseTable PhraseTable::load(const std::filesystem::path& path, int max_length) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIoError, "cannot read " + path.string());
  std::map<std::string, std::vector<PhraseEntry>> rows;
  std::string line;
  std::size_t lineno = 0;
  int longest = max_length;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto a = line.find(" ||| ");
    const auto b = a == std::string::npos ? a : line.find(" ||| ", a + 5);
    if (b == std::string::npos) {
      fail(ErrorCode::kMalformedRow, path.string() + ":" + std::to_string(lineno) + ": expected 'src ||| tgt ||| p_fwd p_bwd'");
    }
    Phrase src = split(line.substr(0, a));
    Phrase tgt = split(line.substr(a + 5, b - a - 5));
    std::istringstream probs(line.substr(b + 5));
    PhraseEntry e;
    e.target = std::move(tgt);
    if (src.empty() || e.target.empty() || !(probs >> e.forward >> e.backward)) {
      fail(ErrorCode::kMalformedRow, path.string() + ":" + std::to_string(lineno) + ": bad entry");
    }
    longest = std::max(longest, static_cast<int>(src.size()));
    rows[join(src)].push_back(std::move(e));
  }
  PhraseTable table(longest);
  for (auto& [src, entries] : rows) table.set_row(split(src), std::move(entries));
  return table;
}

std::vector<double> softmax(const std::vector<double>& logits) {
  require(!logits.empty(), "softmax of an empty vector");
  const double mx = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double sum = 0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - mx);
    sum += out[i];
  }
  for (auto& v : out) v /= sum;
  return out;
}

namespace {

std::vector<std::size_t> top_by(const Vector& scores, std::size_t k) {
  std::vector<std::size_t> idx(static_cast<std::size_t>(scores.size()));
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  k = std::min(k, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                    [&](std::size_t a, std::size_t b) {
                      const double sa = scores(static_cast<Eigen::Index>(a));
                      const double sb = scores(static_cast<Eigen::Index>(b));
                      if (sa != sb) return sa > sb;
                      return a < b;
                    });
  idx.resize(k);
  return idx;
}

}  // namespace

PhraseTable init_phrase_table(const AlignmentMap& map, const EmbeddingSpace& prepared_source,
                              const EmbeddingSpace& prepared_target, const PhraseInitOptions& opts) {
  require(opts.temperature > 0, "temperature must be > 0");
  require(opts.candidates >= 1, "need at least one candidate per word");
  const auto index = make_index(prepared_source, prepared_target, map, opts.k_csls);
  auto logit = [&](double cosine) {
    return opts.invert_temperature ? cosine * opts.temperature : cosine / opts.temperature;
  };

  // Backward normalizers: each target word's candidate sources.
  const std::size_t nt = index.target_size();
  std::vector<std::unordered_map<std::size_t, double>> backward(nt);
  std::vector<double> log_norm(nt);
  for (std::size_t j = 0; j < nt; ++j) {
    const Vector csls = index.reverse_scores(j, RetrievalMethod::kCsls);
    const Vector cosine = index.reverse_scores(j, RetrievalMethod::kNearestNeighbor);
    const auto cands = top_by(csls, opts.candidates);
    std::vector<double> logits;
    for (auto i : cands) logits.push_back(logit(cosine(static_cast<Eigen::Index>(i))));
    const double mx = *std::max_element(logits.begin(), logits.end());
    double z = 0;
    for (double l : logits) z += std::exp(l - mx);
    log_norm[j] = mx + std::log(z);
    for (std::size_t c = 0; c < cands.size(); ++c) {
      backward[j][cands[c]] = std::exp(logits[c] - log_norm[j]);
    }
  }

  PhraseTable table(opts.max_length);
  for (std::size_t i = 0; i < index.source_size(); ++i) {
    const Vector csls = index.scores(i, RetrievalMethod::kCsls);
    const Vector cosine = index.scores(i, RetrievalMethod::kNearestNeighbor);
    const auto cands = top_by(csls, opts.candidates);
    std::vector<double> logits;
    for (auto j : cands) logits.push_back(logit(cosine(static_cast<Eigen::Index>(j))));
    const auto probs = softmax(logits);
    std::vector<PhraseEntry> entries;
    for (std::size_t c = 0; c < cands.size(); ++c) {
      const auto j = cands[c];
      auto it = backward[j].find(i);
      const double bwd = it != backward[j].end()
                             ? it->second
                             : std::min(1.0, std::exp(logits[c] - log_norm[j]));
      entries.push_back({{index.target_vocab().word(j)}, probs[c], bwd});
    }
    table.set_row({index.source_vocab().word(i)}, std::move(entries));
  }
  return table;
}

}  // namespace lexbridge::smt
