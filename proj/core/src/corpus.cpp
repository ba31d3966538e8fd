#include "lexbridge/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>

#include "lexbridge/error.hpp"

namespace lexbridge {

std::size_t Corpus::token_count() const {
  std::size_t n = 0;
  for (const auto& s : sentences) n += s.size();
  return n;
}

Sentence tokenize(std::string_view line, bool lowercase) {
  Sentence tokens;
  std::size_t i = 0;
  auto is_space = [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
  };
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    std::size_t j = i;
    while (j < line.size() && !is_space(line[j])) ++j;
    if (j > i) {
      std::string tok(line.substr(i, j - i));
      if (lowercase) {
        for (char& c : tok) {
          if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
        }
      }
      tokens.push_back(std::move(tok));
    }
    i = j;
  }
  return tokens;
}

Corpus read_corpus(std::istream& in, std::string name, const LoadOptions& opts) {
  std::optional<std::regex> strip;
  if (opts.strip_pattern) {
    try {
      strip.emplace(*opts.strip_pattern, std::regex::ECMAScript);
    } catch (const std::regex_error& e) {
      fail(ErrorCode::kInvalidConfig, "bad strip pattern: " + std::string(e.what()));
    }
  }
  Corpus corpus;
  corpus.name = std::move(name);
  std::string line;
  while (std::getline(in, line)) {
    if (strip) line = std::regex_replace(line, *strip, " ");
    Sentence s = tokenize(line, opts.lowercase);
    if (!s.empty()) corpus.sentences.push_back(std::move(s));
  }
  if (corpus.sentences.empty()) {
    fail(ErrorCode::kEmptyCorpus, "corpus '" + corpus.name + "' has no sentences");
  }
  return corpus;
}

Corpus load_corpus(const std::filesystem::path& path, const LoadOptions& opts) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIoError, "cannot read corpus " + path.string());
  return read_corpus(in, path.stem().string(), opts);
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::kIoError, "cannot write " + path.string());
  for (const auto& s : corpus.sentences) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (i) out << ' ';
      out << s[i];
    }
    out << '\n';
  }
}

Vocabulary Vocabulary::build(const Corpus& corpus, std::int64_t min_count) {
  require(min_count >= 1, "min_count must be >= 1");
  std::unordered_map<std::string, std::int64_t> counts;
  for (const auto& s : corpus.sentences) {
    for (const auto& w : s) ++counts[w];
  }
  std::vector<std::pair<std::string, std::int64_t>> entries;
  for (auto& [w, c] : counts) {
    if (c >= min_count) entries.emplace_back(w, c);
  }
  if (entries.empty()) {
    fail(ErrorCode::kEmptyVocabulary,
         "no word of '" + corpus.name + "' reaches min_count " + std::to_string(min_count));
  }
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  return from_ordered(std::move(entries), min_count);
}

Vocabulary Vocabulary::from_ordered(std::vector<std::pair<std::string, std::int64_t>> entries,
                                    std::int64_t min_count) {
  Vocabulary v;
  v.min_count_ = min_count;
  v.words_.reserve(entries.size());
  v.counts_.reserve(entries.size());
  for (auto& [w, c] : entries) {
    if (w.empty()) fail(ErrorCode::kMalformedRow, "empty word in vocabulary");
    if (c < min_count) {
      fail(ErrorCode::kPreconditionViolation, "word '" + w + "' below min_count");
    }
    if (!v.counts_.empty() && c > v.counts_.back()) {
      fail(ErrorCode::kPreconditionViolation, "vocabulary counts must be non-increasing");
    }
    if (!v.index_.emplace(w, v.words_.size()).second) {
      fail(ErrorCode::kDuplicateWord, "duplicate word '" + w + "'");
    }
    v.words_.push_back(std::move(w));
    v.counts_.push_back(c);
  }
  if (v.words_.empty()) fail(ErrorCode::kEmptyVocabulary, "empty vocabulary");
  return v;
}

std::optional<std::size_t> Vocabulary::id(std::string_view word) const {
  auto it = index_.find(word);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::int64_t Vocabulary::total_count() const {
  std::int64_t t = 0;
  for (auto c : counts_) t += c;
  return t;
}

void Vocabulary::save_tsv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::kIoError, "cannot write " + path.string());
  for (std::size_t i = 0; i < words_.size(); ++i) {
    out << words_[i] << '\t' << counts_[i] << '\n';
  }
}

Vocabulary Vocabulary::load_tsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIoError, "cannot read " + path.string());
  std::vector<std::pair<std::string, std::int64_t>> entries;
  std::string line;
  std::int64_t lowest = 0;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) fail(ErrorCode::kMalformedRow, "expected word<TAB>count: " + line);
    std::int64_t c = 0;
    try {
      c = std::stoll(line.substr(tab + 1));
    } catch (const std::exception&) {
      fail(ErrorCode::kMalformedRow, "bad count: " + line);
    }
    if (first || c < lowest) lowest = c;
    first = false;
    entries.emplace_back(line.substr(0, tab), c);
  }
  return from_ordered(std::move(entries), std::max<std::int64_t>(1, lowest));
}

AnchorSet extract_anchors(const Vocabulary& a, const Vocabulary& b, const AnchorOptions& opts) {
  require(!a.empty() && !b.empty(), "anchor extraction needs non-empty vocabularies");
  std::vector<std::pair<std::string, std::int64_t>> shared;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& w = a.word(i);
    auto j = b.id(w);
    if (!j) continue;
    const auto ca = a.count(i);
    const auto cb = b.count(*j);
    if (opts.min_frequency > 0 && (ca < opts.min_frequency || cb < opts.min_frequency)) continue;
    if (w.size() < opts.min_length) continue;
    shared.emplace_back(w, ca + cb);
  }
  if (shared.empty()) fail(ErrorCode::kNoAnchors, "vocabularies share no words");
  std::sort(shared.begin(), shared.end(), [](const auto& x, const auto& y) {
    if (x.second != y.second) return x.second > y.second;
    return x.first < y.first;
  });
  AnchorSet out;
  out.reserve(shared.size());
  for (auto& [w, c] : shared) out.push_back(std::move(w));
  return out;
}

void save_word_list(const std::vector<std::string>& words, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::kIoError, "cannot write " + path.string());
  for (const auto& w : words) out << w << '\n';
}

std::vector<std::string> load_word_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIoError, "cannot read " + path.string());
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    auto toks = tokenize(line, false);
    if (!toks.empty()) words.push_back(toks.front());
  }
  return words;
}

}  // namespace lexbridge
