#include "lexbridge/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "lexbridge/error.hpp"
#include "lexbridge/hash.hpp"
#include "lexbridge/smt/metrics.hpp"

namespace lexbridge {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

void PipelineConfig::validate() const {
  if (source_corpus.empty() || target_corpus.empty()) {
    fail(ErrorCode::kInvalidConfig, "source and target corpora are required");
  }
  if (!anchors && method != BdiMethod::kAdversarial) {
    fail(ErrorCode::kInvalidConfig, "anchors=off requires the adversarial BDI method");
  }
  if (general_lm && !lm_corpus) {
    fail(ErrorCode::kInvalidConfig, "preset '" + preset + "' needs a general-domain LM corpus (lm_corpus)");
  }
  if (augmented && !augmentation_corpus) {
    fail(ErrorCode::kInvalidConfig, "preset '" + preset + "' needs an augmentation corpus");
  }
  if (translate_reference && !translate_input) {
    fail(ErrorCode::kInvalidConfig, "translate_reference given without translate_input");
  }
  if (lm_order < 1 || lm_order > smt::NGramLanguageModel::kMaxOrder) {
    fail(ErrorCode::kInvalidConfig, "lm_order must be in [1, 8]");
  }
  embedding.validate();
  smt.validate();
  if (method == BdiMethod::kAdversarial) adversarial.validate();
  if (procrustes.iterations < 0) fail(ErrorCode::kInvalidConfig, "procrustes iterations must be >= 0");
}

namespace {

ojson opt_path(const std::optional<fs::path>& p) { return p ? ojson(p->string()) : ojson(nullptr); }

ojson config_json(const PipelineConfig& c) {
  ojson j;
  j["preset"] = c.preset;
  j["seed"] = c.seed;
  j["source_corpus"] = c.source_corpus.string();
  j["target_corpus"] = c.target_corpus.string();
  j["augmentation_corpus"] = opt_path(c.augmentation_corpus);
  j["lm_corpus"] = opt_path(c.lm_corpus);
  j["augmented"] = c.augmented;
  j["general_lm"] = c.general_lm;
  j["gold_dictionary"] = opt_path(c.gold_dictionary);
  j["translate_input"] = opt_path(c.translate_input);
  j["translate_reference"] = opt_path(c.translate_reference);
  j["load"] = {{"lowercase", c.load.lowercase},
               {"strip_pattern", c.load.strip_pattern ? ojson(*c.load.strip_pattern) : ojson(nullptr)}};
  const auto& e = c.embedding;
  j["embedding"] = {{"dim", e.dim},
                    {"window", e.window},
                    {"epochs", e.epochs},
                    {"learning_rate", e.learning_rate},
                    {"linear_decay", e.linear_decay},
                    {"subsample", e.subsample},
                    {"negatives", e.negatives},
                    {"min_count", e.min_count},
                    {"subword", e.subword ? ojson{{"min_n", e.subword->min_n},
                                                  {"max_n", e.subword->max_n},
                                                  {"buckets", e.subword->buckets}}
                                          : ojson(nullptr)},
                    {"source_seed", c.seed},
                    {"target_seed", c.seed + 1},
                    {"threads", e.threads}};
  j["anchors"] = {{"enabled", c.anchors},
                  {"min_frequency", c.anchor_filter.min_frequency},
                  {"min_length", c.anchor_filter.min_length}};
  j["bdi"] = {{"method", std::string(to_string(c.method))}, {"retrieval", std::string(to_string(c.retrieval))}};
  j["procrustes"] = {{"iterations", c.procrustes.iterations},
                     {"k_csls", c.procrustes.k_csls},
                     {"max_rank", c.procrustes.max_rank},
                     {"mutual", c.procrustes.mutual}};
  j["self_learning"] = {{"max_iterations", c.self_learning.max_iterations},
                        {"k_csls", c.self_learning.k_csls},
                        {"vocabulary_cutoff", c.self_learning.vocabulary_cutoff},
                        {"whiten", c.self_learning.whiten},
                        {"source_reweight", c.self_learning.source_reweight},
                        {"target_reweight", c.self_learning.target_reweight},
                        {"dewhiten", c.self_learning.dewhiten}};
  const auto& a = c.adversarial;
  j["adversarial"] = {{"hidden", a.hidden},
                      {"hidden_layers", a.hidden_layers},
                      {"leaky_slope", a.leaky_slope},
                      {"lr_start", a.lr_start},
                      {"lr_floor", a.lr_floor},
                      {"lr_decay", a.lr_decay},
                      {"top_freq", a.top_freq},
                      {"epochs", a.epochs},
                      {"iterations_per_epoch", a.iterations_per_epoch},
                      {"batch_size", a.batch_size},
                      {"discriminator_steps", a.discriminator_steps},
                      {"label_smoothing", a.label_smoothing},
                      {"orthogonality_beta", a.orthogonality_beta},
                      {"selection_words", a.selection_words},
                      {"refinement_iterations", a.refinement_iterations},
                      {"k_csls", a.k_csls},
                      {"seed", c.seed}};
  const auto& s = c.smt;
  j["lm_order"] = c.lm_order;
  j["smt"] = {{"temperature", s.init.temperature},
              {"invert_temperature", s.init.invert_temperature},
              {"candidates", s.init.candidates},
              {"k_csls", s.init.k_csls},
              {"max_phrase_length", s.init.max_length},
              {"beam", s.decoder.beam},
              {"table_limit", s.decoder.table_limit},
              {"weights",
               {{"phrase", s.decoder.weights.phrase},
                {"lm", s.decoder.weights.lm},
                {"word_penalty", s.decoder.weights.word_penalty},
                {"distortion", s.decoder.weights.distortion}}},
              {"unknown_log_prob", s.decoder.unknown_log_prob},
              {"iterations", s.iterations},
              {"sample_sentences", s.sample_sentences},
              {"later_distortion_limit", s.later_distortion_limit},
              {"backfill", s.backfill},
              {"seed", c.seed}};
  return j;
}

std::string hex(std::uint64_t h) {
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

std::string file_hash(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) fail(ErrorCode::kIoError, "cannot read " + p.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return hex(fnv1a64(buf.str()));
}

template <class F>
auto stage(const std::string& name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.code(), "stage '" + name + "': " + e.detail());
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kIoError, "stage '" + name + "': " + e.what());
  }
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  if (!out) fail(ErrorCode::kIoError, "cannot write " + p.string());
  out << text;
}

}  // namespace

std::string PipelineConfig::to_json() const { return config_json(*this).dump(2); }

std::vector<std::string> pipeline_preset_names() { return {"A", "B", "C", "D", "E", "F", "N"}; }

PipelineConfig pipeline_preset(std::string_view name) {
  std::string key(name);
  if (key.size() > 5 && key.substr(key.size() - 5) == "-like") key.resize(key.size() - 5);
  for (auto& ch : key) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  PipelineConfig c;
  c.preset = key;
  if (key == "A" || key == "B") {
    c.embedding.dim = 100;
    c.embedding.subword = SubwordConfig{};
  } else if (key == "C" || key == "D") {
    c.embedding.dim = 1000;
    c.embedding.subword = SubwordConfig{};
    c.augmented = true;
  } else if (key == "E" || key == "F" || key == "N") {
    c.embedding.dim = 300;
  } else {
    fail(ErrorCode::kInvalidConfig, "unknown preset '" + std::string(name) + "' (expected A-F or N)");
  }
  c.general_lm = key == "A" || key == "C" || key == "E" || key == "N";
  if (key == "N") {
    c.anchors = false;
    c.method = BdiMethod::kAdversarial;
  }
  return c;
}

PipelineResult run_pipeline(const PipelineConfig& cfg) {
  cfg.validate();
  const fs::path out = cfg.output_dir;
  stage("output", [&] {
    fs::create_directories(out);
    return 0;
  });
  PipelineResult res;
  res.output_dir = out;
  std::vector<std::string> artifacts;

  const Corpus source = stage("load", [&] { return load_corpus(cfg.source_corpus, cfg.load); });
  const Corpus target = stage("load", [&] { return load_corpus(cfg.target_corpus, cfg.load); });
  Corpus target_emb = target;
  if (cfg.augmentation_corpus) {
    const Corpus aug = stage("load", [&] { return load_corpus(*cfg.augmentation_corpus, cfg.load); });
    target_emb.sentences.insert(target_emb.sentences.end(), aug.sentences.begin(), aug.sentences.end());
  }

  auto [src_space, tgt_space] = stage("embedding", [&] {
    TrainConfig tc = cfg.embedding;
    tc.seed = cfg.seed;
    auto s = train_skipgram(source, tc).space;
    tc.seed = cfg.seed + 1;
    auto t = train_skipgram(target_emb, tc).space;
    save_vectors(s, out / "source.vec");
    save_vectors(t, out / "target.vec");
    return std::pair{std::move(s), std::move(t)};
  });
  artifacts.insert(artifacts.end(), {"source.vec", "target.vec"});

  Dictionary seed_dict;
  if (cfg.anchors) {
    stage("anchors", [&] {
      const auto anchors = extract_anchors(src_space.vocab(), tgt_space.vocab(), cfg.anchor_filter);
      save_word_list(anchors, out / "anchors.txt");
      seed_dict = Dictionary::identity(anchors);
      return 0;
    });
    artifacts.emplace_back("anchors.txt");
  }

  res.map = stage("bdi", [&] {
    switch (cfg.method) {
      case BdiMethod::kProcrustes:
        return procrustes_iterate(src_space, tgt_space, seed_dict, cfg.procrustes).map;
      case BdiMethod::kSelfLearning: {
        auto r = self_learning_fit(src_space, tgt_space, seed_dict, cfg.self_learning);
        res.warnings.insert(res.warnings.end(), r.warnings.begin(), r.warnings.end());
        return r.map;
      }
      case BdiMethod::kAdversarial: {
        AdvConfig ac = cfg.adversarial;
        ac.seed = cfg.seed;
        const auto smaller = std::min(src_space.size(), tgt_space.size());
        if (ac.top_freq > smaller) {
          res.warnings.push_back("adversarial top_freq lowered from " + std::to_string(ac.top_freq) + " to " +
                                 std::to_string(smaller) + " (vocabulary size)");
          ac.top_freq = smaller;
        }
        return adversarial_fit(src_space, tgt_space, ac).refined.map;
      }
    }
    fail(ErrorCode::kInvalidConfig, "unknown BDI method");
  });
  res.map.save(out / "map.txt");
  artifacts.emplace_back("map.txt");

  const auto prep_src = prepare_for_alignment(src_space);
  const auto prep_tgt = prepare_for_alignment(tgt_space);
  stage("retrieval", [&] {
    const auto index = make_index(prep_src, prep_tgt, res.map, cfg.procrustes.k_csls);
    res.induced = induce_dictionary(index, src_space.vocab().words(), cfg.retrieval);
    res.induced.save_tsv(out / "induced.tsv", true);
    if (cfg.gold_dictionary) {
      const auto gold = Dictionary::load_tsv(*cfg.gold_dictionary);
      res.bdi_report = evaluate_bdi(index, gold, cfg.retrieval);
      write_text(out / "bdi_report.json", res.bdi_report->to_json() + "\n");
    }
    return 0;
  });
  artifacts.emplace_back("induced.tsv");
  if (res.bdi_report) artifacts.emplace_back("bdi_report.json");

  res.initial_table = stage("phrase-table", [&] {
    auto t = smt::init_phrase_table(res.map, prep_src, prep_tgt, cfg.smt.init);
    t.save(out / "pt0.txt");
    return t;
  });
  artifacts.emplace_back("pt0.txt");

  auto [lm_src, lm_tgt] = stage("lm", [&] {
    const Corpus lm_corpus = cfg.lm_corpus ? load_corpus(*cfg.lm_corpus, cfg.load) : target;
    auto t = smt::NGramLanguageModel::train(lm_corpus, cfg.lm_order);
    auto s = smt::NGramLanguageModel::train(source, cfg.lm_order);
    for (const auto& w : t.warnings()) res.warnings.push_back("target LM: " + w);
    for (const auto& w : s.warnings()) res.warnings.push_back("source LM: " + w);
    t.save_arpa(out / "lm_target.arpa");
    s.save_arpa(out / "lm_source.arpa");
    return std::pair{std::move(s), std::move(t)};
  });
  artifacts.insert(artifacts.end(), {"lm_target.arpa", "lm_source.arpa"});

  smt::SmtConfig sc = cfg.smt;
  sc.seed = cfg.seed;
  const auto bt = stage("backtranslate", [&] {
    return smt::back_translate_loop(source, target, res.initial_table, lm_src, lm_tgt, sc,
                                    [&](const smt::IterationModels& m) {
                                      const auto name = "phrase_table.iter" + std::to_string(m.iteration) + ".txt";
                                      m.forward.save(out / name);
                                      artifacts.push_back(name);
                                    });
  });
  res.final_table = bt.forward;
  res.final_table.save(out / "phrase_table.txt");
  artifacts.emplace_back("phrase_table.txt");

  ojson translation_report;
  if (cfg.translate_input) {
    stage("translate", [&] {
      const Corpus input = load_corpus(*cfg.translate_input, cfg.load);
      smt::DecoderOptions opts = sc.decoder;
      opts.distortion_limit = sc.iterations > 0 ? sc.later_distortion_limit : 0;
      std::ostringstream text;
      for (const auto& t : smt::decode_all(res.final_table, lm_tgt, input.sentences, opts)) {
        text << smt::join(t.tokens) << '\n';
        res.translations.push_back(t.tokens);
      }
      write_text(out / "translations.txt", text.str());
      if (cfg.translate_reference) {
        const Corpus ref = load_corpus(*cfg.translate_reference, cfg.load);
        const auto bleu = smt::corpus_bleu(res.translations, ref.sentences);
        res.bleu = bleu.bleu;
        res.exact_match = smt::exact_match(res.translations, ref.sentences);
        translation_report = {{"bleu", bleu.bleu},
                              {"brevity_penalty", bleu.brevity_penalty},
                              {"precisions", bleu.precisions},
                              {"exact_match", *res.exact_match},
                              {"sentences", res.translations.size()}};
        write_text(out / "translation_report.json", translation_report.dump(2) + "\n");
      }
      return 0;
    });
    artifacts.emplace_back("translations.txt");
    if (cfg.translate_reference) artifacts.emplace_back("translation_report.json");
  }

  ojson manifest;
  manifest["config"] = config_json(cfg);
  manifest["stats"] = {{"source_sentences", source.sentences.size()},
                       {"target_sentences", target.sentences.size()},
                       {"source_vocabulary", src_space.size()},
                       {"target_vocabulary", tgt_space.size()},
                       {"anchors", seed_dict.size()},
                       {"induced_pairs", res.induced.size()},
                       {"orthogonality_residual", res.map.orthogonality_residual()},
                       {"initial_phrase_entries", res.initial_table.entry_count()},
                       {"final_phrase_entries", res.final_table.entry_count()},
                       {"backtranslation_iterations", bt.iterations.size()}};
  if (res.bdi_report) manifest["bdi_report"] = ojson::parse(res.bdi_report->to_json());
  if (!translation_report.is_null()) manifest["translation_report"] = translation_report;
  ojson hashes = ojson::object();
  for (const auto& a : artifacts) hashes[a] = file_hash(out / a);
  manifest["artifacts"] = hashes;
  manifest["warnings"] = res.warnings;
  const std::string text = manifest.dump(2);
  res.manifest_hash = hex(fnv1a64(text));
  write_text(out / "manifest.json", text + "\n");
  return res;
}

}  // namespace lexbridge
