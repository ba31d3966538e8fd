#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lexbridge/corpus.hpp"
#include "lexbridge/dictionary.hpp"

namespace lexbridge {

/// Two monolingual corpora sampled independently from one sparse Markov
/// chain; the target side is rewritten through a word-substitution cipher
/// that keeps `shared` words as identical strings.
struct CipherOptions {
  std::size_t vocabulary = 300;
  std::size_t tokens = 50000;
  std::size_t shared = 30;
  std::size_t held_out = 200;
  /// Successors per word. Successor k follows the k-th random permutation,
  /// so the transition matrix is doubly stochastic.
  std::vector<double> successor_weights{0.4, 0.3, 0.2, 0.1};
  /// Words are split into this many equal topics; each sentence walks inside
  /// one topic. 1 gives a single global chain.
  std::size_t topics = 1;
  std::size_t min_length = 6;
  std::size_t max_length = 12;
  std::uint64_t seed = 7;
};

struct CipherBenchmark {
  Corpus source;
  Corpus target;
  /// Full source -> target word mapping, shared words included.
  Dictionary cipher;
  std::vector<std::string> shared_words;
  /// Source sentences absent from `source`, with their enciphered references.
  std::vector<Sentence> held_out_source;
  std::vector<Sentence> held_out_target;

  /// Cipher pairs whose strings differ.
  Dictionary hidden_pairs() const;
  Sentence encipher(const Sentence& s) const;
};

CipherBenchmark make_cipher_benchmark(const CipherOptions& opts = {});

}  // namespace lexbridge
