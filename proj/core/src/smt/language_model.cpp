#include "lexbridge/smt/language_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

#include "lexbridge/error.hpp"

namespace lexbridge::smt {

namespace {

constexpr double kLn10 = 2.302585092994045684;

}  // namespace

bool NGramLanguageModel::Key::operator==(const Key& o) const {
  return size == o.size && std::equal(ids.begin(), ids.begin() + size, o.ids.begin());
}

std::size_t NGramLanguageModel::KeyHash::operator()(const Key& k) const {
  std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ k.size;
  for (std::uint8_t i = 0; i < k.size; ++i) {
    h ^= static_cast<std::uint32_t>(k.ids[i]) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return static_cast<std::size_t>(h);
}

NGramLanguageModel::Key NGramLanguageModel::make_key(std::span<const WordId> ids) {
  Key k;
  k.size = static_cast<std::uint8_t>(ids.size());
  std::copy(ids.begin(), ids.end(), k.ids.begin());
  return k;
}

NGramLanguageModel::WordId NGramLanguageModel::intern(std::string_view word) {
  auto it = ids_.find(std::string(word));
  if (it != ids_.end()) return it->second;
  const auto id = static_cast<WordId>(words_.size());
  words_.emplace_back(word);
  ids_.emplace(std::string(word), id);
  return id;
}

NGramLanguageModel::WordId NGramLanguageModel::id(std::string_view word) const {
  auto it = ids_.find(std::string(word));
  return it == ids_.end() ? unk() : it->second;
}

NGramLanguageModel NGramLanguageModel::train(const Corpus& corpus, int order) {
  require(order >= 1 && order <= kMaxOrder, "LM order must be in [1, 8]");
  if (corpus.sentences.empty()) fail(ErrorCode::kEmptyCorpus, "cannot train a language model on an empty corpus");

  NGramLanguageModel lm;
  lm.intern(kUnk);
  lm.intern(kBos);
  lm.intern(kEos);
  {
    std::vector<std::string> vocab;
    for (const auto& s : corpus.sentences) vocab.insert(vocab.end(), s.begin(), s.end());
    std::sort(vocab.begin(), vocab.end());
    vocab.erase(std::unique(vocab.begin(), vocab.end()), vocab.end());
    for (const auto& w : vocab) lm.intern(w);
  }

  std::vector<std::vector<WordId>> padded;
  padded.reserve(corpus.sentences.size());
  int longest = 0;
  for (const auto& s : corpus.sentences) {
    std::vector<WordId> ids{lm.bos()};
    for (const auto& w : s) ids.push_back(lm.id(w));
    ids.push_back(lm.eos());
    longest = std::max(longest, static_cast<int>(ids.size()));
    padded.push_back(std::move(ids));
  }
  if (order > longest) {
    lm.warnings_.push_back("order " + std::to_string(order) + " exceeds the longest padded sentence; using order " +
                           std::to_string(longest));
    order = longest;
  }
  lm.order_ = order;
  const auto N = static_cast<std::size_t>(order);

  using CountMap = std::unordered_map<Key, std::int64_t, KeyHash>;
  std::vector<CountMap> raw(N);
  for (const auto& ids : padded) {
    for (std::size_t i = 0; i < ids.size(); ++i) {
      for (std::size_t n = 1; n <= N && i + n <= ids.size(); ++n) {
        ++raw[n - 1][make_key(std::span(ids).subspan(i, n))];
      }
    }
  }

  // Adjusted counts: raw for the top order and for n-grams opening with <s>,
  // otherwise the number of distinct left extensions.
  std::vector<CountMap> adjusted(N);
  adjusted[N - 1] = raw[N - 1];
  for (std::size_t n = 1; n < N; ++n) {
    auto& a = adjusted[n - 1];
    for (const auto& [k, c] : raw[n - 1]) a[k] = k.ids[0] == lm.bos() ? c : 0;
    for (const auto& [k, c] : raw[n]) {
      Key suffix;
      suffix.size = static_cast<std::uint8_t>(n);
      std::copy(k.ids.begin() + 1, k.ids.begin() + 1 + n, suffix.ids.begin());
      if (suffix.ids[0] != lm.bos()) ++a[suffix];
    }
  }

  Key bos_unigram;
  bos_unigram.size = 1;
  bos_unigram.ids[0] = lm.bos();

  lm.discounts_.resize(N);
  for (std::size_t n = 1; n <= N; ++n) {
    std::array<double, 5> t{};
    for (const auto& [k, c] : adjusted[n - 1]) {
      if (n == 1 && k == bos_unigram) continue;
      if (c >= 1 && c <= 4) t[static_cast<std::size_t>(c)] += 1;
    }
    const double y = t[1] / (t[1] + 2 * t[2]);
    Discounts d{1 - 2 * y * t[2] / t[1], 2 - 3 * y * t[3] / t[2], 3 - 4 * y * t[4] / t[3]};
    bool ok = true;
    for (std::size_t i = 0; i < 3; ++i) {
      if (!std::isfinite(d[i]) || d[i] <= 0 || d[i] > static_cast<double>(i + 1)) ok = false;
    }
    if (!ok) {
      d = {0.5, 1.0, 1.5};
      lm.warnings_.push_back("order " + std::to_string(n) +
                             ": count-of-counts give invalid discounts; using 0.5 1.0 1.5");
    }
    lm.discounts_[n - 1] = d;
  }

  struct ContextStats {
    double total = 0;
    double n1 = 0, n2 = 0, n3 = 0;
  };
  lm.tables_.assign(N, {});
  const double uniform = 1.0 / static_cast<double>(lm.words_.size() - 1);
  for (std::size_t n = 1; n <= N; ++n) {
    const auto& d = lm.discounts_[n - 1];
    std::unordered_map<Key, ContextStats, KeyHash> contexts;
    for (const auto& [k, c] : adjusted[n - 1]) {
      if (n == 1 && k == bos_unigram) continue;
      Key ctx;
      ctx.size = static_cast<std::uint8_t>(n - 1);
      std::copy(k.ids.begin(), k.ids.begin() + static_cast<std::ptrdiff_t>(n - 1), ctx.ids.begin());
      auto& st = contexts[ctx];
      st.total += static_cast<double>(c);
      (c == 1 ? st.n1 : c == 2 ? st.n2 : st.n3) += 1;
    }
    auto gamma = [&](const ContextStats& st) {
      return (d[0] * st.n1 + d[1] * st.n2 + d[2] * st.n3) / st.total;
    };
    auto discount = [&](std::int64_t c) { return c == 1 ? d[0] : c == 2 ? d[1] : d[2]; };

    auto& table = lm.tables_[n - 1];
    for (const auto& [k, c] : adjusted[n - 1]) {
      if (n == 1 && k == bos_unigram) continue;
      Key ctx;
      ctx.size = static_cast<std::uint8_t>(n - 1);
      std::copy(k.ids.begin(), k.ids.begin() + static_cast<std::ptrdiff_t>(n - 1), ctx.ids.begin());
      const auto& st = contexts.at(ctx);
      double lower = uniform;
      if (n > 1) {
        Key shorter;
        shorter.size = static_cast<std::uint8_t>(n - 1);
        std::copy(k.ids.begin() + 1, k.ids.begin() + static_cast<std::ptrdiff_t>(n), shorter.ids.begin());
        lower = std::exp(lm.tables_[n - 2].at(shorter).log_prob);
      }
      const double p = (static_cast<double>(c) - discount(c)) / st.total + gamma(st) * lower;
      table[k].log_prob = std::log(p);
    }
    if (n == 1) {
      const auto& st = contexts.at(Key{});
      Key unk_key;
      unk_key.size = 1;
      unk_key.ids[0] = lm.unk();
      if (!table.count(unk_key)) table[unk_key].log_prob = std::log(gamma(st) * uniform);
      table[bos_unigram].log_prob = -std::numeric_limits<double>::infinity();
    } else {
      for (const auto& [ctx, st] : contexts) {
        lm.tables_[n - 2].at(ctx).log_backoff = std::log(gamma(st));
      }
    }
  }
  return lm;
}

const NGramLanguageModel::Entry* NGramLanguageModel::find(std::span<const WordId> ngram) const {
  if (ngram.empty() || ngram.size() > tables_.size()) return nullptr;
  const auto& table = tables_[ngram.size() - 1];
  auto it = table.find(make_key(ngram));
  return it == table.end() ? nullptr : &it->second;
}

double NGramLanguageModel::log_prob(WordId word, std::span<const WordId> context) const {
  const std::size_t max_ctx = static_cast<std::size_t>(order_ - 1);
  if (context.size() > max_ctx) context = context.subspan(context.size() - max_ctx);
  std::array<WordId, kMaxOrder> buf{};
  double backoff = 0;
  for (std::size_t len = context.size() + 1; len-- > 0;) {
    const auto ctx = context.subspan(context.size() - len);
    std::copy(ctx.begin(), ctx.end(), buf.begin());
    buf[len] = word;
    if (const Entry* e = find(std::span<const WordId>(buf.data(), len + 1))) return backoff + e->log_prob;
    if (len > 0) {
      if (const Entry* c = find(ctx)) backoff += c->log_backoff;
    }
  }
  const WordId u = unk();
  return backoff + find(std::span<const WordId>(&u, 1))->log_prob;
}

double NGramLanguageModel::log_prob(std::string_view word, std::span<const std::string> context) const {
  std::vector<WordId> ids;
  ids.reserve(context.size());
  for (const auto& w : context) ids.push_back(id(w));
  return log_prob(id(word), ids);
}

double NGramLanguageModel::prob(std::string_view word, std::span<const std::string> context) const {
  return std::exp(log_prob(word, context));
}

double NGramLanguageModel::sentence_log_prob(std::span<const std::string> tokens) const {
  std::vector<WordId> ids{bos()};
  double total = 0;
  for (const auto& w : tokens) {
    const WordId wid = id(w);
    total += log_prob(wid, ids);
    ids.push_back(wid);
  }
  return total + log_prob(eos(), ids);
}

double NGramLanguageModel::perplexity(const Corpus& corpus) const {
  double total = 0;
  std::size_t events = 0;
  for (const auto& s : corpus.sentences) {
    total += sentence_log_prob(s);
    events += s.size() + 1;
  }
  require(events > 0, "perplexity of an empty corpus");
  return std::exp(-total / static_cast<double>(events));
}

void NGramLanguageModel::save_arpa(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::kIoError, "cannot write " + path.string());
  out << "\n\\data\\\n";
  for (int n = 1; n <= order_; ++n) out << "ngram " << n << '=' << ngram_count(n) << '\n';
  out << std::setprecision(10);
  for (int n = 1; n <= order_; ++n) {
    out << "\n\\" << n << "-grams:\n";
    std::map<std::string, const Entry*> sorted;
    for (const auto& [k, e] : tables_[static_cast<std::size_t>(n - 1)]) {
      std::string text;
      for (std::uint8_t i = 0; i < k.size; ++i) {
        if (i) text += ' ';
        text += words_[static_cast<std::size_t>(k.ids[i])];
      }
      sorted.emplace(std::move(text), &e);
    }
    for (const auto& [text, e] : sorted) {
      const double lp = std::isfinite(e->log_prob) ? e->log_prob / kLn10 : -99.0;
      out << lp << '\t' << text;
      if (n < order_) out << '\t' << e->log_backoff / kLn10;
      out << '\n';
    }
  }
  out << "\n\\end\\\n";
}

NGramLanguageModel NGramLanguageModel::load_arpa(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIoError, "cannot read " + path.string());
  NGramLanguageModel lm;
  lm.intern(kUnk);
  lm.intern(kBos);
  lm.intern(kEos);
  std::string line;
  std::size_t lineno = 0;
  int section = 0;
  auto bad = [&](const std::string& what) {
    fail(ErrorCode::kMalformedRow, path.string() + ":" + std::to_string(lineno) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line == "\\data\\") {
      section = 0;
      continue;
    }
    if (line == "\\end\\") break;
    if (line.rfind("ngram ", 0) == 0) {
      const int n = std::stoi(line.substr(6, line.find('=') - 6));
      if (n < 1 || n > kMaxOrder) bad("unsupported order");
      lm.order_ = std::max(lm.order_, n);
      continue;
    }
    if (line.front() == '\\') {
      section = std::stoi(line.substr(1));
      if (section < 1 || section > lm.order_) bad("section outside declared orders");
      if (lm.tables_.size() < static_cast<std::size_t>(lm.order_)) lm.tables_.resize(static_cast<std::size_t>(lm.order_));
      continue;
    }
    if (section == 0) bad("entry outside an n-gram section");
    std::istringstream fields(line);
    double lp10 = 0;
    if (!(fields >> lp10)) bad("missing probability");
    std::vector<WordId> ids;
    std::string w;
    for (int i = 0; i < section; ++i) {
      if (!(fields >> w)) bad("too few words");
      ids.push_back(lm.intern(w));
    }
    double bo10 = 0;
    fields >> bo10;
    Entry e;
    e.log_prob = lp10 <= -99.0 ? -std::numeric_limits<double>::infinity() : lp10 * kLn10;
    e.log_backoff = bo10 * kLn10;
    lm.tables_[static_cast<std::size_t>(section - 1)][make_key(ids)] = e;
  }
  if (lm.order_ == 0 || lm.tables_.empty() || lm.tables_[0].empty()) {
    fail(ErrorCode::kMalformedHeader, path.string() + ": no n-grams");
  }
  const WordId u = lm.unk();
  if (!lm.find(std::span<const WordId>(&u, 1))) {
    fail(ErrorCode::kMalformedRow, path.string() + ": missing <unk> unigram");
  }
  return lm;
}

}  // namespace lexbridge::smt
