#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lexbridge/bdi.hpp"
#include "lexbridge/corpus.hpp"
#include "lexbridge/dictionary.hpp"
#include "lexbridge/embedding.hpp"
#include "lexbridge/retrieval.hpp"
#include "lexbridge/smt/backtranslation.hpp"

namespace lexbridge {

/// End-to-end run: corpora -> embeddings -> alignment -> dictionary ->
/// phrase table + language models -> back-translation -> translations.
struct PipelineConfig {
  std::string preset = "custom";
  std::filesystem::path source_corpus;
  std::filesystem::path target_corpus;
  /// Extra consumer-side text, appended to the target corpus for embeddings.
  std::optional<std::filesystem::path> augmentation_corpus;
  /// Presets built on augmented embeddings require `augmentation_corpus`.
  bool augmented = false;
  /// Target-side LM corpus; the target corpus itself when absent.
  std::optional<std::filesystem::path> lm_corpus;
  /// Presets that call for a general-domain LM require `lm_corpus`.
  bool general_lm = false;
  std::optional<std::filesystem::path> gold_dictionary;
  /// Source sentences to translate with the final system.
  std::optional<std::filesystem::path> translate_input;
  /// References for `translate_input`; BLEU and exact match are reported.
  std::optional<std::filesystem::path> translate_reference;
  LoadOptions load;

  TrainConfig embedding;
  bool anchors = true;
  AnchorOptions anchor_filter;
  BdiMethod method = BdiMethod::kProcrustes;
  ProcrustesOptions procrustes;
  SelfLearningOptions self_learning;
  AdvConfig adversarial;
  RetrievalMethod retrieval = RetrievalMethod::kCsls;

  int lm_order = 4;
  smt::SmtConfig smt;
  std::uint64_t seed = 1;
  std::filesystem::path output_dir = "lexbridge-out";

  /// Throws kInvalidConfig; anchors off requires the adversarial method.
  void validate() const;
  /// Every setting except `output_dir`, as canonical JSON.
  std::string to_json() const;
};

/// Table-style presets "A".."F" and "N" (suffix "-like" accepted).
PipelineConfig pipeline_preset(std::string_view name);
std::vector<std::string> pipeline_preset_names();

struct PipelineResult {
  std::filesystem::path output_dir;
  AlignmentMap map;
  Dictionary induced;
  std::optional<EvalReport> bdi_report;
  smt::PhraseTable initial_table;
  smt::PhraseTable final_table;
  std::vector<Sentence> translations;
  std::optional<double> bleu;
  std::optional<double> exact_match;
  std::string manifest_hash;
  std::vector<std::string> warnings;
};

/// Runs every stage and writes artifacts plus manifest.json into
/// `cfg.output_dir`. Stage failures are rethrown with the stage name.
PipelineResult run_pipeline(const PipelineConfig& cfg);

}  // namespace lexbridge
