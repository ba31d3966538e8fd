#include "lexbridge/synthetic.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <set>
#include <unordered_map>

#include "lexbridge/error.hpp"

namespace lexbridge {

namespace {

std::string random_word(std::mt19937_64& rng, std::string_view consonants, std::string_view vowels) {
  std::uniform_int_distribution<int> syllables(2, 3);
  std::uniform_int_distribution<std::size_t> c(0, consonants.size() - 1), v(0, vowels.size() - 1);
  std::string w;
  for (int s = syllables(rng); s > 0; --s) {
    w += consonants[c(rng)];
    w += vowels[v(rng)];
  }
  return w;
}

std::vector<std::string> distinct_words(std::mt19937_64& rng, std::size_t n, std::string_view consonants,
                                        std::string_view vowels, std::set<std::string>& taken) {
  std::vector<std::string> out;
  while (out.size() < n) {
    auto w = random_word(rng, consonants, vowels);
    if (taken.insert(w).second) out.push_back(std::move(w));
  }
  return out;
}

}  // namespace

Dictionary CipherBenchmark::hidden_pairs() const {
  Dictionary out;
  for (const auto& p : cipher) {
    if (p.source != p.target) out.add(p);
  }
  return out;
}

Sentence CipherBenchmark::encipher(const Sentence& s) const {
  std::unordered_map<std::string, std::string> map;
  for (const auto& p : cipher) map.emplace(p.source, p.target);
  Sentence out;
  for (const auto& w : s) out.push_back(map.at(w));
  return out;
}

CipherBenchmark make_cipher_benchmark(const CipherOptions& opts) {
  require(opts.vocabulary >= 2, "cipher vocabulary must have at least 2 words");
  require(opts.shared <= opts.vocabulary, "more shared words than vocabulary");
  require(!opts.successor_weights.empty(), "need successor weights");
  require(opts.min_length >= 1 && opts.min_length <= opts.max_length, "bad sentence length range");
  std::mt19937_64 rng(opts.seed);
  const std::size_t V = opts.vocabulary;

  std::set<std::string> taken;
  const auto source_words = distinct_words(rng, V, "bdfgklmnprstvz", "aeiou", taken);
  auto target_words = distinct_words(rng, V, "chjqwxy", "aeiouy", taken);
  std::vector<std::size_t> order(V);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  CipherBenchmark bench;
  std::vector<bool> is_shared(V, false);
  for (std::size_t i = 0; i < opts.shared; ++i) is_shared[order[i]] = true;
  for (std::size_t i = 0; i < V; ++i) {
    if (is_shared[i]) {
      target_words[i] = source_words[i];
      bench.shared_words.push_back(source_words[i]);
    }
    bench.cipher.add({source_words[i], target_words[i], std::nullopt});
  }
  std::sort(bench.shared_words.begin(), bench.shared_words.end());

  require(opts.topics >= 1 && opts.topics <= V, "topic count must be in [1, vocabulary]");
  // Topic t owns words [bounds[t], bounds[t + 1]) of a random word order.
  std::vector<std::size_t> words_by_topic(V);
  std::iota(words_by_topic.begin(), words_by_topic.end(), std::size_t{0});
  std::shuffle(words_by_topic.begin(), words_by_topic.end(), rng);
  std::vector<std::size_t> bounds;
  for (std::size_t t = 0; t <= opts.topics; ++t) bounds.push_back(t * V / opts.topics);

  std::vector<std::vector<std::size_t>> successors(opts.successor_weights.size(), std::vector<std::size_t>(V));
  for (auto& succ : successors) {
    for (std::size_t t = 0; t < opts.topics; ++t) {
      std::vector<std::size_t> members(words_by_topic.begin() + static_cast<std::ptrdiff_t>(bounds[t]),
                                       words_by_topic.begin() + static_cast<std::ptrdiff_t>(bounds[t + 1]));
      auto perm = members;
      std::shuffle(perm.begin(), perm.end(), rng);
      for (std::size_t i = 0; i < members.size(); ++i) succ[members[i]] = perm[i];
    }
  }
  std::discrete_distribution<std::size_t> pick(opts.successor_weights.begin(), opts.successor_weights.end());
  std::uniform_int_distribution<std::size_t> topic(0, opts.topics - 1);
  std::uniform_int_distribution<std::size_t> length(opts.min_length, opts.max_length);
  auto walk = [&](std::mt19937_64& g) {
    const auto t = topic(g);
    std::uniform_int_distribution<std::size_t> start(bounds[t], bounds[t + 1] - 1);
    std::vector<std::size_t> ids{words_by_topic[start(g)]};
    for (std::size_t n = length(g); ids.size() < n;) ids.push_back(successors[pick(g)][ids.back()]);
    return ids;
  };

  std::mt19937_64 src_rng(opts.seed * 2 + 1), tgt_rng(opts.seed * 2 + 2), held_rng(opts.seed * 2 + 3);
  bench.source.name = "cipher-source";
  bench.target.name = "cipher-target";
  std::set<std::vector<std::size_t>> seen;
  for (std::size_t t = 0; t < opts.tokens;) {
    auto ids = walk(src_rng);
    t += ids.size();
    Sentence s;
    for (auto i : ids) s.push_back(source_words[i]);
    bench.source.sentences.push_back(std::move(s));
    seen.insert(std::move(ids));
  }
  for (std::size_t t = 0; t < opts.tokens;) {
    auto ids = walk(tgt_rng);
    t += ids.size();
    Sentence s;
    for (auto i : ids) s.push_back(target_words[i]);
    bench.target.sentences.push_back(std::move(s));
  }
  while (bench.held_out_source.size() < opts.held_out) {
    auto ids = walk(held_rng);
    if (!seen.insert(ids).second) continue;
    Sentence s, r;
    for (auto i : ids) {
      s.push_back(source_words[i]);
      r.push_back(target_words[i]);
    }
    bench.held_out_source.push_back(std::move(s));
    bench.held_out_target.push_back(std::move(r));
  }
  return bench;
}

}  // namespace lexbridge
