#include "lexbridge/smt/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <unordered_map>

#include "lexbridge/error.hpp"

namespace lexbridge::smt {

void DecoderOptions::validate() const {
  if (beam < 1) fail(ErrorCode::kInvalidConfig, "beam must be >= 1");
  if (table_limit < 1) fail(ErrorCode::kInvalidConfig, "table limit must be >= 1");
  if (distortion_limit < 0) fail(ErrorCode::kInvalidConfig, "distortion limit must be >= 0");
  if (!std::isfinite(unknown_log_prob)) fail(ErrorCode::kInvalidConfig, "unknown log prob must be finite");
}

bool Translation::monotone() const {
  std::size_t expected = 0;
  for (const auto& s : segments) {
    if (s.src_begin != expected) return false;
    expected = s.src_end;
  }
  return true;
}

double phrase_log_prob(const PhraseTable& table, std::span<const std::string> source,
                       const Phrase& target, const DecoderOptions& opts) {
  if (const auto* row = table.lookup(source)) {
    for (const auto& e : *row) {
      if (e.target == target) {
        return e.backward > 0 ? std::max(std::log(e.backward), opts.unknown_log_prob) : opts.unknown_log_prob;
      }
    }
  }
  return opts.unknown_log_prob;
}

double score_derivation(const PhraseTable& table, const NGramLanguageModel& lm,
                        std::span<const std::string> source,
                        const std::vector<DerivationStep>& steps, const DecoderOptions& opts) {
  const auto& w = opts.weights;
  double score = 0;
  std::size_t last_end = 0;
  std::vector<NGramLanguageModel::WordId> history{lm.bos()};
  std::vector<bool> covered(source.size(), false);
  for (const auto& s : steps) {
    require(s.src_begin < s.src_end && s.src_end <= source.size(), "derivation span out of range");
    for (std::size_t i = s.src_begin; i < s.src_end; ++i) {
      require(!covered[i], "derivation covers a source word twice");
      covered[i] = true;
    }
    const auto span = source.subspan(s.src_begin, s.src_end - s.src_begin);
    score += w.phrase * phrase_log_prob(table, span, s.target, opts);
    const auto jump = s.src_begin > last_end ? s.src_begin - last_end : last_end - s.src_begin;
    score -= w.distortion * static_cast<double>(jump);
    last_end = s.src_end;
    for (const auto& t : s.target) {
      const auto id = lm.id(t);
      score += w.lm * lm.log_prob(id, history) + w.word_penalty;
      history.push_back(id);
    }
  }
  require(std::all_of(covered.begin(), covered.end(), [](bool c) { return c; }),
          "derivation leaves source words uncovered");
  return score + w.lm * lm.log_prob(lm.eos(), history);
}

namespace {

using WordId = NGramLanguageModel::WordId;

struct Option {
  Phrase target;
  std::vector<WordId> ids;
  double static_score = 0;  // phrase + word penalty
  bool copied = false;
};

struct Hyp {
  std::vector<std::uint64_t> coverage;
  std::size_t covered = 0;
  std::size_t last_end = 0;
  std::vector<WordId> state;
  double score = 0;
  double future = 0;
  int back = -1;
  std::size_t begin = 0, end = 0;
  const Option* option = nullptr;
  bool dead = false;
};

bool is_covered(const std::vector<std::uint64_t>& cov, std::size_t i) {
  return (cov[i / 64] >> (i % 64)) & 1U;
}

std::string recombination_key(const Hyp& h, bool reordering) {
  std::string key;
  key.reserve(h.coverage.size() * 8 + h.state.size() * 4 + 8);
  key.append(reinterpret_cast<const char*>(h.coverage.data()), h.coverage.size() * sizeof(std::uint64_t));
  if (reordering) key.append(reinterpret_cast<const char*>(&h.last_end), sizeof(h.last_end));
  key.append(reinterpret_cast<const char*>(h.state.data()), h.state.size() * sizeof(WordId));
  return key;
}

Translation decode_impl(const PhraseTable& table, const NGramLanguageModel& lm,
                        std::span<const std::string> source, const DecoderOptions& opts) {
  const auto& w = opts.weights;
  const std::size_t n = source.size();
  const std::size_t ctx = static_cast<std::size_t>(std::max(lm.order() - 1, 0));
  const bool reordering = opts.distortion_limit > 0;
  const auto max_len = static_cast<std::size_t>(table.max_length());
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();

  // options[b][len - 1]
  std::vector<std::vector<std::vector<Option>>> options(n);
  std::vector<std::vector<double>> future(n + 1, std::vector<double>(n + 1, kNegInf));
  for (std::size_t b = 0; b < n; ++b) {
    options[b].resize(std::min(max_len, n - b));
    for (std::size_t len = 1; len <= options[b].size(); ++len) {
      const auto span = source.subspan(b, len);
      auto& opts_here = options[b][len - 1];
      if (const auto* row = table.lookup(span)) {
        std::vector<const PhraseEntry*> ranked;
        for (const auto& e : *row) ranked.push_back(&e);
        std::stable_sort(ranked.begin(), ranked.end(),
                         [](const PhraseEntry* a, const PhraseEntry* c) { return a->backward > c->backward; });
        if (ranked.size() > opts.table_limit) ranked.resize(opts.table_limit);
        for (const auto* e : ranked) {
          Option o;
          o.target = e->target;
          for (const auto& t : o.target) o.ids.push_back(lm.id(t));
          o.static_score = w.phrase * phrase_log_prob(table, span, o.target, opts) +
                           w.word_penalty * static_cast<double>(o.target.size());
          opts_here.push_back(std::move(o));
        }
      } else if (len == 1) {
        Option o;
        o.target = {source[b]};
        o.ids = {lm.id(source[b])};
        o.static_score = w.phrase * opts.unknown_log_prob + w.word_penalty;
        o.copied = true;
        opts_here.push_back(std::move(o));
      }
      for (const auto& o : opts_here) {
        double est = o.static_score;
        for (std::size_t i = 0; i < o.ids.size(); ++i) {
          est += w.lm * lm.log_prob(o.ids[i], std::span<const WordId>(o.ids.data(), i));
        }
        future[b][b + len] = std::max(future[b][b + len], est);
      }
    }
  }
  for (std::size_t width = 2; width <= n; ++width) {
    for (std::size_t b = 0; b + width <= n; ++b) {
      for (std::size_t k = b + 1; k < b + width; ++k) {
        future[b][b + width] = std::max(future[b][b + width], future[b][k] + future[k][b + width]);
      }
    }
  }
  auto future_of = [&](const std::vector<std::uint64_t>& cov) {
    double total = 0;
    std::size_t i = 0;
    while (i < n) {
      if (is_covered(cov, i)) {
        ++i;
        continue;
      }
      std::size_t j = i;
      while (j < n && !is_covered(cov, j)) ++j;
      total += future[i][j];
      i = j;
    }
    return total;
  };

  std::vector<Hyp> arena;
  std::vector<std::vector<int>> stacks(n + 1);
  std::vector<std::unordered_map<std::string, int>> seen(n + 1);
  {
    Hyp root;
    root.coverage.assign((n + 63) / 64 + 1, 0);
    root.state = {lm.bos()};
    root.future = future_of(root.coverage);
    arena.push_back(std::move(root));
    stacks[0].push_back(0);
  }

  auto add = [&](Hyp&& h) {
    const std::size_t s = h.covered;
    const auto key = recombination_key(h, reordering);
    auto it = seen[s].find(key);
    if (it != seen[s].end()) {
      Hyp& old = arena[static_cast<std::size_t>(it->second)];
      if (h.score <= old.score) return;
      old.dead = true;
    }
    const int idx = static_cast<int>(arena.size());
    arena.push_back(std::move(h));
    stacks[s].push_back(idx);
    seen[s][key] = idx;
  };

  for (std::size_t s = 0; s < n; ++s) {
    auto& stack = stacks[s];
    stack.erase(std::remove_if(stack.begin(), stack.end(), [&](int i) { return arena[static_cast<std::size_t>(i)].dead; }),
                stack.end());
    std::stable_sort(stack.begin(), stack.end(), [&](int a, int b) {
      const auto& ha = arena[static_cast<std::size_t>(a)];
      const auto& hb = arena[static_cast<std::size_t>(b)];
      return ha.score + ha.future > hb.score + hb.future;
    });
    if (stack.size() > opts.beam) stack.resize(opts.beam);
    const auto expand_from = stack;
    for (int hi : expand_from) {
      for (std::size_t b = 0; b < n; ++b) {
        const Hyp& base = arena[static_cast<std::size_t>(hi)];
        if (is_covered(base.coverage, b)) continue;
        if (!reordering && b != base.last_end) continue;
        const std::size_t jump = b > base.last_end ? b - base.last_end : base.last_end - b;
        if (reordering && jump > static_cast<std::size_t>(opts.distortion_limit)) continue;
        for (std::size_t len = 1; len <= options[b].size(); ++len) {
          if (is_covered(arena[static_cast<std::size_t>(hi)].coverage, b + len - 1)) break;
          for (const auto& o : options[b][len - 1]) {
            const Hyp& from = arena[static_cast<std::size_t>(hi)];
            Hyp h;
            h.coverage = from.coverage;
            for (std::size_t i = b; i < b + len; ++i) h.coverage[i / 64] |= std::uint64_t{1} << (i % 64);
            h.covered = from.covered + len;
            h.last_end = b + len;
            h.score = from.score + o.static_score - w.distortion * static_cast<double>(jump);
            std::vector<WordId> hist = from.state;
            for (auto id : o.ids) {
              h.score += w.lm * lm.log_prob(id, hist);
              hist.push_back(id);
            }
            if (hist.size() > ctx) hist.erase(hist.begin(), hist.end() - static_cast<std::ptrdiff_t>(ctx));
            h.state = std::move(hist);
            h.future = future_of(h.coverage);
            h.back = hi;
            h.begin = b;
            h.end = b + len;
            h.option = &o;
            add(std::move(h));
          }
        }
      }
    }
  }

  int best = -1;
  double best_score = kNegInf;
  for (int hi : stacks[n]) {
    const Hyp& h = arena[static_cast<std::size_t>(hi)];
    if (h.dead) continue;
    const double total = h.score + w.lm * lm.log_prob(lm.eos(), h.state);
    if (best < 0 || total > best_score) {
      best = hi;
      best_score = total;
    }
  }
  Translation out;
  if (best < 0) {
    out.score = kNegInf;
    return out;
  }
  out.score = best_score;
  std::vector<const Hyp*> chain;
  for (int i = best; i > 0; i = arena[static_cast<std::size_t>(i)].back) chain.push_back(&arena[static_cast<std::size_t>(i)]);
  std::reverse(chain.begin(), chain.end());
  for (const Hyp* h : chain) {
    Segment seg;
    seg.src_begin = h->begin;
    seg.src_end = h->end;
    seg.tgt_begin = out.tokens.size();
    out.tokens.insert(out.tokens.end(), h->option->target.begin(), h->option->target.end());
    seg.tgt_end = out.tokens.size();
    seg.copied = h->option->copied;
    out.segments.push_back(seg);
  }
  return out;
}

}  // namespace

Translation decode(const PhraseTable& table, const NGramLanguageModel& lm,
                   std::span<const std::string> source, const DecoderOptions& opts) {
  opts.validate();
  require(!source.empty(), "cannot decode an empty sentence");
  Translation t = decode_impl(table, lm, source, opts);
  if (!std::isfinite(t.score) && opts.distortion_limit > 0) {
    DecoderOptions monotone = opts;
    monotone.distortion_limit = 0;
    t = decode_impl(table, lm, source, monotone);
  }
  return t;
}

std::vector<Translation> decode_all(const PhraseTable& table, const NGramLanguageModel& lm,
                                    const std::vector<Sentence>& sources, const DecoderOptions& opts) {
  std::vector<Translation> out;
  out.reserve(sources.size());
  for (const auto& s : sources) out.push_back(decode(table, lm, s, opts));
  return out;
}

}  // namespace lexbridge::smt
