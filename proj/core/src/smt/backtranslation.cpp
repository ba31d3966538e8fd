#include "lexbridge/smt/backtranslation.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <unordered_map>

#include "lexbridge/error.hpp"
#include "lexbridge/smt/extraction.hpp"

namespace lexbridge::smt {

void SmtConfig::validate() const {
  if (!(init.temperature > 0)) fail(ErrorCode::kInvalidConfig, "temperature must be > 0");
  if (iterations < 0) fail(ErrorCode::kInvalidConfig, "iterations must be >= 0");
  if (init.max_length < 1) fail(ErrorCode::kInvalidConfig, "phrase length must be >= 1");
  if (later_distortion_limit < 0) fail(ErrorCode::kInvalidConfig, "distortion limit must be >= 0");
  decoder.validate();
}

namespace {

std::vector<const Sentence*> sample(const Corpus& corpus, std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(corpus.sentences.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(std::min(n, idx.size()));
  std::sort(idx.begin(), idx.end());
  std::vector<const Sentence*> out;
  for (auto i : idx) out.push_back(&corpus.sentences[i]);
  if (out.empty()) fail(ErrorCode::kEmptyBatch, "sampled batch from '" + corpus.name + "' is empty");
  return out;
}

/// Translates `batch` with `system` and extracts a table for the reverse
/// direction from the (translation, original) pairs.
PhraseTable reverse_table(const std::vector<const Sentence*>& batch, const PhraseTable& system,
                          const NGramLanguageModel& lm, const DecoderOptions& opts,
                          const PhraseTable& reverse_current, const PhraseTable& reverse_initial,
                          const SmtConfig& cfg, std::size_t& pairs) {
  std::vector<AlignedPair> data;
  data.reserve(batch.size());
  for (const Sentence* s : batch) {
    Translation t = decode(system, lm, *s, opts);
    if (t.tokens.empty()) continue;
    AlignedPair p;
    p.source = std::move(t.tokens);
    p.target = *s;
    p.links = align_pair(reverse_current, p.source, p.target);
    data.push_back(std::move(p));
  }
  pairs = data.size();
  PhraseTable table = extract_phrase_table(data, cfg.init.max_length);
  if (cfg.backfill) backfill(table, reverse_initial);
  return table;
}

}  // namespace

BackTranslationResult back_translate_loop(const Corpus& source, const Corpus& target,
                                          const PhraseTable& pt0, const NGramLanguageModel& lm_source,
                                          const NGramLanguageModel& lm_target, const SmtConfig& cfg,
                                          const IterationCallback& on_iteration) {
  cfg.validate();
  BackTranslationResult result{pt0, {}};
  if (cfg.iterations == 0) return result;

  const PhraseTable backward0 = pt0.inverted();
  PhraseTable forward = pt0;
  PhraseTable backward = backward0;
  bool first_generation = true;
  for (int it = 1; it <= cfg.iterations; ++it) {
    DecoderOptions opts = cfg.decoder;
    opts.distortion_limit = first_generation ? 0 : cfg.later_distortion_limit;
    IterationModels models;
    models.iteration = it;

    const auto src_batch = sample(source, cfg.sample_sentences, cfg.seed + 2 * static_cast<std::uint64_t>(it));
    backward = reverse_table(src_batch, forward, lm_target, opts, backward, backward0, cfg, models.backward_pairs);

    opts.distortion_limit = cfg.later_distortion_limit;
    const auto tgt_batch = sample(target, cfg.sample_sentences, cfg.seed + 2 * static_cast<std::uint64_t>(it) + 1);
    forward = reverse_table(tgt_batch, backward, lm_source, opts, forward, pt0, cfg, models.forward_pairs);
    first_generation = false;

    models.forward = forward;
    models.backward = backward;
    if (on_iteration) on_iteration(models);
    result.iterations.push_back(std::move(models));
  }
  result.forward = forward;
  return result;
}

Sentence dictionary_replace_baseline(const Dictionary& dict, const Sentence& sentence) {
  std::unordered_map<std::string, std::string> map;
  for (const auto& p : dict.pairs()) map.emplace(p.source, p.target);
  Sentence out;
  out.reserve(sentence.size());
  for (const auto& tok : sentence) {
    auto it = map.find(tok);
    out.push_back(it == map.end() ? tok : it->second);
  }
  return out;
}

}  // namespace lexbridge::smt
