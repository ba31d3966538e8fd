#include "lexbridge/smt/extraction.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "lexbridge/error.hpp"

namespace lexbridge::smt {

namespace {

double link_score(const PhraseTable& table, const std::string& s, const std::string& t) {
  const auto* row = table.lookup(std::span<const std::string>(&s, 1));
  if (!row) return 0.0;
  for (const auto& e : *row) {
    if (e.target.size() == 1 && e.target[0] == t) return e.forward * e.backward;
  }
  return 0.0;
}

}  // namespace

std::vector<Link> align_pair(const PhraseTable& table, std::span<const std::string> source,
                             std::span<const std::string> target) {
  const std::size_t ns = source.size(), nt = target.size();
  std::vector<std::vector<double>> score(ns, std::vector<double>(nt));
  for (std::size_t i = 0; i < ns; ++i) {
    for (std::size_t j = 0; j < nt; ++j) score[i][j] = link_score(table, source[i], target[j]);
  }
  // Equal scores (repeated words) go to the position nearest the diagonal.
  auto off_diagonal = [&](std::size_t i, std::size_t j) {
    return std::abs((static_cast<double>(i) + 0.5) / static_cast<double>(ns) -
                    (static_cast<double>(j) + 0.5) / static_cast<double>(nt));
  };
  auto better = [&](std::size_t i, std::size_t j, std::size_t bi, std::size_t bj) {
    if (score[i][j] != score[bi][bj]) return score[i][j] > score[bi][bj];
    return off_diagonal(i, j) < off_diagonal(bi, bj);
  };
  std::set<Link> links;
  for (std::size_t i = 0; i < ns; ++i) {
    std::size_t best = nt;
    for (std::size_t j = 0; j < nt; ++j) {
      if (score[i][j] > 0 && (best == nt || better(i, j, i, best))) best = j;
    }
    if (best == nt) continue;
    std::size_t back = ns;
    for (std::size_t k = 0; k < ns; ++k) {
      if (score[k][best] > 0 && (back == ns || better(k, best, back, best))) back = k;
    }
    if (back == i) links.insert({i, best});
  }
  for (std::size_t i = 0; i < ns; ++i) {
    for (std::size_t j = 0; j < nt; ++j) {
      if (source[i] == target[j]) links.insert({i, j});
    }
  }
  return {links.begin(), links.end()};
}

std::vector<std::pair<Phrase, Phrase>> extract_pairs(const AlignedPair& pair, int max_length) {
  require(max_length >= 1, "phrase length limit must be >= 1");
  const std::size_t ns = pair.source.size(), nt = pair.target.size();
  const auto L = static_cast<std::size_t>(max_length);
  std::vector<std::vector<std::size_t>> by_target(nt);
  std::vector<bool> target_aligned(nt, false);
  for (const auto& [s, t] : pair.links) {
    require(s < ns && t < nt, "alignment link out of range");
    by_target[t].push_back(s);
    target_aligned[t] = true;
  }
  std::vector<std::pair<Phrase, Phrase>> out;
  for (std::size_t s1 = 0; s1 < ns; ++s1) {
    for (std::size_t s2 = s1; s2 < ns && s2 - s1 < L; ++s2) {
      std::size_t t1 = nt, t2 = 0;
      for (const auto& [s, t] : pair.links) {
        if (s >= s1 && s <= s2) {
          t1 = std::min(t1, t);
          t2 = std::max(t2, t);
        }
      }
      if (t1 == nt || t2 - t1 >= L) continue;
      bool consistent = true;
      for (std::size_t t = t1; t <= t2 && consistent; ++t) {
        for (auto s : by_target[t]) {
          if (s < s1 || s > s2) consistent = false;
        }
      }
      if (!consistent) continue;
      const Phrase src(pair.source.begin() + static_cast<std::ptrdiff_t>(s1),
                       pair.source.begin() + static_cast<std::ptrdiff_t>(s2 + 1));
      // Grow over unaligned target words on either side.
      for (std::size_t a = t1 + 1; a-- > 0;) {
        if (a < t1 && target_aligned[a]) break;
        for (std::size_t b = t2; b < nt; ++b) {
          if (b > t2 && target_aligned[b]) break;
          if (b - a >= L) break;
          out.emplace_back(src, Phrase(pair.target.begin() + static_cast<std::ptrdiff_t>(a),
                                       pair.target.begin() + static_cast<std::ptrdiff_t>(b + 1)));
        }
      }
    }
  }
  return out;
}

PhraseTable extract_phrase_table(const std::vector<AlignedPair>& corpus, int max_length) {
  std::map<std::pair<std::string, std::string>, double> joint;
  std::map<std::string, double> source_total, target_total;
  for (const auto& pair : corpus) {
    for (const auto& [s, t] : extract_pairs(pair, max_length)) {
      const auto sk = join(s), tk = join(t);
      joint[{sk, tk}] += 1;
      source_total[sk] += 1;
      target_total[tk] += 1;
    }
  }
  std::map<std::string, std::vector<PhraseEntry>> rows;
  for (const auto& [key, c] : joint) {
    rows[key.first].push_back({split(key.second), c / source_total[key.first], c / target_total[key.second]});
  }
  PhraseTable table(max_length);
  for (auto& [src, entries] : rows) table.set_row(split(src), std::move(entries));
  return table;
}

void backfill(PhraseTable& table, const PhraseTable& fallback) {
  for (const auto& [src, entries] : fallback.rows()) {
    if (src.find(' ') != std::string::npos) continue;
    const Phrase key{src};
    if (!table.has_row(key)) table.set_row(key, entries);
  }
}

}  // namespace lexbridge::smt
