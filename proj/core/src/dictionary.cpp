#include "lexbridge/dictionary.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "lexbridge/error.hpp"

namespace lexbridge {

Dictionary::Dictionary(std::vector<WordPair> pairs) {
  for (auto& p : pairs) add(std::move(p));
}

Dictionary Dictionary::identity(const std::vector<std::string>& words) {
  Dictionary d;
  for (const auto& w : words) d.add({w, w, std::nullopt});
  return d;
}

bool Dictionary::add(WordPair pair) {
  if (!keys_.insert(pair.source + '\t' + pair.target).second) return false;
  pairs_.push_back(std::move(pair));
  return true;
}

void Dictionary::save_tsv(const std::filesystem::path& path, bool with_scores) const {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::kIoError, "cannot write " + path.string());
  out << std::setprecision(9);
  for (const auto& p : pairs_) {
    out << p.source << '\t' << p.target;
    if (with_scores && p.score) out << '\t' << *p.score;
    out << '\n';
  }
}

Dictionary Dictionary::load_tsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIoError, "cannot read " + path.string());
  Dictionary d;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string src, tgt, score;
    if (!std::getline(fields, src, '\t') || !std::getline(fields, tgt, '\t') || src.empty() ||
        tgt.empty()) {
      fail(ErrorCode::kMalformedRow,
           path.string() + ":" + std::to_string(lineno) + ": expected src<TAB>tgt");
    }
    WordPair p{src, tgt, std::nullopt};
    if (std::getline(fields, score, '\t') && !score.empty()) p.score = std::stod(score);
    d.add(std::move(p));
  }
  return d;
}

}  // namespace lexbridge
