// lexbridge command-line driver.
//
// Every subcommand accepts --config FILE with key=value lines (TOML/INI
// style); flags given on the command line win.
// Exit status: 0 success, 1 invalid input or configuration, 2 runtime failure.

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lexbridge/bdi.hpp"
#include "lexbridge/corpus.hpp"
#include "lexbridge/dictionary.hpp"
#include "lexbridge/embedding.hpp"
#include "lexbridge/error.hpp"
#include "lexbridge/evaluation.hpp"
#include "lexbridge/pipeline.hpp"
#include "lexbridge/retrieval.hpp"
#include "lexbridge/smt/backtranslation.hpp"
#include "lexbridge/smt/decoder.hpp"
#include "lexbridge/smt/language_model.hpp"
#include "lexbridge/smt/phrase_table.hpp"
#include "lexbridge/spectral.hpp"
#include "lexbridge/synthetic.hpp"

namespace fs = std::filesystem;
using namespace lexbridge;

namespace {

struct LoadFlags {
  bool keep_case = false;
  std::optional<std::string> strip;

  void add(CLI::App* app) {
    app->add_flag("--keep-case", keep_case, "Do not lowercase input text");
    app->add_option("--strip-pattern", strip, "Regex whose matches are blanked before tokenizing");
  }
  LoadOptions options() const { return {!keep_case, strip}; }
};

struct EmbeddingFlags {
  std::optional<int> dim, window, epochs, negatives, threads, min_n, max_n;
  std::optional<double> lr, subsample;
  std::optional<std::int64_t> min_count;
  std::optional<std::uint64_t> buckets;
  std::optional<bool> subword, linear_decay;

  void add(CLI::App* app) {
    app->add_option("--dim", dim, "Vector dimension");
    app->add_option("--window", window, "Context window");
    app->add_option("--epochs", epochs, "Training epochs");
    app->add_option("--lr", lr, "Learning rate");
    app->add_flag("--linear-decay,!--constant-lr", linear_decay, "Decay the learning rate linearly");
    app->add_option("--subsample", subsample, "Frequent-word subsampling threshold");
    app->add_option("--negatives", negatives, "Negative samples per positive pair");
    app->add_option("--min-count", min_count, "Minimum word count");
    app->add_flag("--subword,!--no-subword", subword, "Character n-gram subword vectors");
    app->add_option("--minn", min_n, "Shortest subword n-gram");
    app->add_option("--maxn", max_n, "Longest subword n-gram");
    app->add_option("--buckets", buckets, "Subword hash buckets");
    app->add_option("--threads", threads, "Training threads (1 is deterministic)");
  }

  void apply(TrainConfig& c) const {
    if (dim) c.dim = *dim;
    if (window) c.window = *window;
    if (epochs) c.epochs = *epochs;
    if (lr) c.learning_rate = *lr;
    if (linear_decay) c.linear_decay = *linear_decay;
    if (subsample) c.subsample = *subsample;
    if (negatives) c.negatives = *negatives;
    if (min_count) c.min_count = *min_count;
    if (threads) c.threads = *threads;
    if (subword) c.subword = *subword ? std::optional<SubwordConfig>(SubwordConfig{}) : std::nullopt;
    if (c.subword) {
      if (min_n) c.subword->min_n = *min_n;
      if (max_n) c.subword->max_n = *max_n;
      if (buckets) c.subword->buckets = *buckets;
    }
  }
};

struct DecoderFlags {
  std::optional<std::size_t> beam, table_limit;
  std::optional<int> distortion_limit;
  std::optional<double> w_phrase, w_lm, w_word, w_distortion, unknown;

  void add(CLI::App* app) {
    app->add_option("--beam", beam, "Hypotheses kept per stack");
    app->add_option("--table-limit", table_limit, "Options per source span");
    app->add_option("--distortion-limit", distortion_limit, "0 decodes monotonically");
    app->add_option("--w-phrase", w_phrase, "Phrase feature weight");
    app->add_option("--w-lm", w_lm, "Language model weight");
    app->add_option("--w-word", w_word, "Word penalty");
    app->add_option("--w-distortion", w_distortion, "Distortion weight");
    app->add_option("--unknown-log-prob", unknown, "Score of pairs missing from the table");
  }

  void apply(smt::DecoderOptions& o) const {
    if (beam) o.beam = *beam;
    if (table_limit) o.table_limit = *table_limit;
    if (distortion_limit) o.distortion_limit = *distortion_limit;
    if (w_phrase) o.weights.phrase = *w_phrase;
    if (w_lm) o.weights.lm = *w_lm;
    if (w_word) o.weights.word_penalty = *w_word;
    if (w_distortion) o.weights.distortion = *w_distortion;
    if (unknown) o.unknown_log_prob = *unknown;
  }
};

struct InitFlags {
  std::optional<double> temperature;
  bool invert = false;
  std::optional<std::size_t> candidates;

  void add(CLI::App* app) {
    app->add_option("--temperature", temperature, "Softmax temperature T");
    app->add_flag("--invert-temperature", invert, "Use T * cos logits instead of cos / T");
    app->add_option("--candidates", candidates, "CSLS candidates per source word");
  }
  void apply(smt::PhraseInitOptions& o) const {
    if (temperature) o.temperature = *temperature;
    if (invert) o.invert_temperature = true;
    if (candidates) o.candidates = *candidates;
  }
};

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  if (!out) fail(ErrorCode::kIoError, "cannot write " + p.string());
  out << text;
}

// Reads stdin line by line so output stays line-aligned, blank lines included.
template <class F>
void map_lines(std::istream& in, std::ostream& out, const LoadOptions& load, F&& f) {
  std::optional<std::regex> strip;
  if (load.strip_pattern) {
    try {
      strip.emplace(*load.strip_pattern, std::regex::ECMAScript);
    } catch (const std::regex_error& e) {
      fail(ErrorCode::kInvalidConfig, "bad strip pattern: " + std::string(e.what()));
    }
  }
  std::string line;
  while (std::getline(in, line)) {
    if (strip) line = std::regex_replace(line, *strip, " ");
    const Sentence s = tokenize(line, load.lowercase);
    out << smt::join(f(s)) << '\n';
  }
}

std::vector<std::string> top_words(const Vocabulary& v, std::size_t n) {
  std::vector<std::string> out(v.words().begin(), v.words().begin() + static_cast<std::ptrdiff_t>(std::min(n, v.size())));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monolingual-corpora lexicon induction and phrase-based translation"};
  app.set_config("--config", "", "key=value configuration file");
  app.require_subcommand(1);

  // train-emb
  auto* emb = app.add_subcommand("train-emb", "Train skip-gram vectors on a corpus");
  fs::path emb_corpus, emb_out;
  std::uint64_t emb_seed = 1;
  EmbeddingFlags emb_flags;
  LoadFlags emb_load;
  emb->add_option("--corpus", emb_corpus, "One sentence per line")->required();
  emb->add_option("-o,--out", emb_out, "Output .vec file")->required();
  emb->add_option("--seed", emb_seed, "Random seed");
  emb_flags.add(emb);
  emb_load.add(emb);

  // score-spaces
  auto* score = app.add_subcommand("score-spaces", "Eigenvector score of two embedding spaces");
  fs::path sc_src, sc_tgt;
  std::optional<fs::path> sc_json;
  int sc_neighbors = 10;
  std::string sc_nodes = "anchors";
  std::size_t sc_top = 1000;
  double sc_fraction = 0.9;
  score->add_option("--source", sc_src, "Source .vec")->required();
  score->add_option("--target", sc_tgt, "Target .vec")->required();
  score->add_option("--neighbors", sc_neighbors, "Neighbours per node");
  score->add_option("--nodes", sc_nodes, "anchors | top")->check(CLI::IsMember({"anchors", "top"}));
  score->add_option("--top", sc_top, "Frequent words per side with --nodes top");
  score->add_option("--fraction", sc_fraction, "Spectrum mass bound for k");
  score->add_option("--json", sc_json, "Write a JSON report");

  // align
  auto* align = app.add_subcommand("align", "Learn a map between two embedding spaces");
  fs::path al_src, al_tgt, al_out;
  std::optional<fs::path> al_seed_dict, al_dict_out;
  std::string al_method = "procrustes";
  bool al_no_anchors = false;
  ProcrustesOptions al_proc;
  SelfLearningOptions al_sl;
  AdvConfig al_adv;
  al_adv.seed = 1;
  align->add_option("--source", al_src, "Source .vec")->required();
  align->add_option("--target", al_tgt, "Target .vec")->required();
  align->add_option("-o,--out", al_out, "Output map file")->required();
  align->add_option("--method", al_method, "procrustes | self-learning | adversarial");
  align->add_option("--seed-dict", al_seed_dict, "Seed dictionary TSV instead of identical strings");
  align->add_flag("--no-anchors", al_no_anchors, "No seed dictionary (adversarial only)");
  align->add_option("--iterations", al_proc.iterations, "Procrustes fits");
  align->add_flag("--mutual,!--forward-only", al_proc.mutual, "Refit on mutual nearest neighbours");
  align->add_option("--max-rank", al_proc.max_rank, "Source words used for refinement");
  align->add_option("--k-csls", al_proc.k_csls, "CSLS neighbourhood size");
  align->add_option("--max-iterations", al_sl.max_iterations, "Self-learning iteration cap");
  align->add_option("--adv-epochs", al_adv.epochs, "Adversarial epochs");
  align->add_option("--adv-iterations", al_adv.iterations_per_epoch, "Adversarial steps per epoch");
  align->add_option("--adv-top-freq", al_adv.top_freq, "Frequent words fed to the discriminator");
  align->add_option("--seed", al_adv.seed, "Random seed");
  align->add_option("--dict-out", al_dict_out, "Write the induced dictionary");

  // eval-bdi
  auto* eval = app.add_subcommand("eval-bdi", "Precision at 1/5/10 against a gold dictionary");
  fs::path ev_src, ev_tgt, ev_map, ev_gold;
  std::string ev_method = "csls";
  int ev_k = 10;
  std::size_t ev_boot = 0;
  std::optional<fs::path> ev_json;
  eval->add_option("--source", ev_src, "Source .vec")->required();
  eval->add_option("--target", ev_tgt, "Target .vec")->required();
  eval->add_option("--map", ev_map, "Map file")->required();
  eval->add_option("--gold", ev_gold, "Gold dictionary TSV")->required();
  eval->add_option("--retrieval", ev_method, "csls | nn");
  eval->add_option("--k-csls", ev_k, "CSLS neighbourhood size");
  eval->add_option("--bootstrap", ev_boot, "Bootstrap resamples for standard deviations");
  eval->add_option("--json", ev_json, "Write the report here as well");

  // init-pt
  auto* initpt = app.add_subcommand("init-pt", "Initial word-level phrase table from an aligned space");
  fs::path ip_src, ip_tgt, ip_map, ip_out;
  InitFlags ip_flags;
  initpt->add_option("--source", ip_src, "Source .vec")->required();
  initpt->add_option("--target", ip_tgt, "Target .vec")->required();
  initpt->add_option("--map", ip_map, "Map file")->required();
  initpt->add_option("-o,--out", ip_out, "Output phrase table")->required();
  ip_flags.add(initpt);

  // train-lm
  auto* lm = app.add_subcommand("train-lm", "Kneser-Ney n-gram model in ARPA format");
  fs::path lm_corpus, lm_out;
  int lm_order = 4;
  LoadFlags lm_load;
  lm->add_option("--corpus", lm_corpus, "One sentence per line")->required();
  lm->add_option("-o,--out", lm_out, "Output ARPA file")->required();
  lm->add_option("--order", lm_order, "Model order");
  lm_load.add(lm);

  // translate
  auto* tr = app.add_subcommand("translate", "Decode stdin to stdout, one sentence per line");
  fs::path tr_table, tr_lm;
  DecoderFlags tr_flags;
  LoadFlags tr_load;
  tr->add_option("--table", tr_table, "Phrase table")->required();
  tr->add_option("--lm", tr_lm, "Target ARPA model")->required();
  tr_flags.add(tr);
  tr_load.add(tr);

  // backtranslate
  auto* bt = app.add_subcommand("backtranslate", "Iterative back-translation from an initial table");
  fs::path bt_src, bt_tgt, bt_table, bt_out;
  std::optional<fs::path> bt_lm_src, bt_lm_tgt;
  int bt_order = 4;
  smt::SmtConfig bt_cfg;
  DecoderFlags bt_flags;
  LoadFlags bt_load;
  bt->add_option("--source-corpus", bt_src, "Source monolingual corpus")->required();
  bt->add_option("--target-corpus", bt_tgt, "Target monolingual corpus")->required();
  bt->add_option("--table", bt_table, "Initial phrase table")->required();
  bt->add_option("--out-dir", bt_out, "Directory for per-iteration tables")->required();
  bt->add_option("--lm-source", bt_lm_src, "Source ARPA model (trained from the corpus if absent)");
  bt->add_option("--lm-target", bt_lm_tgt, "Target ARPA model (trained from the corpus if absent)");
  bt->add_option("--lm-order", bt_order, "Order for models trained here");
  bt->add_option("--iterations", bt_cfg.iterations, "Back-translation rounds");
  bt->add_option("--sample", bt_cfg.sample_sentences, "Sentences per direction and round");
  bt->add_option("--later-distortion-limit", bt_cfg.later_distortion_limit, "Reordering after round 1");
  bt->add_flag("--backfill,!--no-backfill", bt_cfg.backfill, "Refill missing words from the initial table");
  bt->add_option("--seed", bt_cfg.seed, "Random seed");
  bt_flags.add(bt);
  bt_load.add(bt);

  // pipeline
  auto* pl = app.add_subcommand("pipeline", "Run every stage end to end");
  std::string pl_preset = "F";
  fs::path pl_src, pl_tgt, pl_out = "lexbridge-out";
  std::optional<fs::path> pl_aug, pl_lm, pl_gold, pl_input, pl_ref;
  std::optional<bool> pl_anchors;
  std::optional<std::string> pl_method, pl_retrieval;
  std::optional<int> pl_proc_iter, pl_lm_order, pl_bt_iter, pl_adv_epochs, pl_later;
  std::optional<std::size_t> pl_sample;
  std::optional<std::uint64_t> pl_seed;
  std::optional<bool> pl_mutual;
  EmbeddingFlags pl_emb;
  InitFlags pl_init;
  DecoderFlags pl_dec;
  LoadFlags pl_load;
  bool pl_print = false;
  pl->add_option("--preset", pl_preset, "A-F or N, optionally with a -like suffix");
  pl->add_option("--source-corpus", pl_src, "Professional-side corpus")->required();
  pl->add_option("--target-corpus", pl_tgt, "Consumer-side corpus")->required();
  pl->add_option("--augmentation-corpus", pl_aug, "Extra consumer text for embeddings");
  pl->add_option("--lm-corpus", pl_lm, "Target LM corpus");
  pl->add_option("--gold", pl_gold, "Gold dictionary TSV for P@k");
  pl->add_option("--translate", pl_input, "Source sentences to translate at the end");
  pl->add_option("--reference", pl_ref, "References for --translate");
  pl->add_option("-o,--out-dir", pl_out, "Artifact directory");
  pl->add_flag("--anchors,!--no-anchors", pl_anchors, "Identical-string seed dictionary");
  pl->add_option("--method", pl_method, "procrustes | self-learning | adversarial");
  pl->add_option("--retrieval", pl_retrieval, "csls | nn");
  pl->add_option("--procrustes-iterations", pl_proc_iter, "Procrustes fits");
  pl->add_flag("--mutual,!--forward-only", pl_mutual, "Refit on mutual nearest neighbours");
  pl->add_option("--adv-epochs", pl_adv_epochs, "Adversarial epochs");
  pl->add_option("--lm-order", pl_lm_order, "Language model order");
  pl->add_option("--bt-iterations", pl_bt_iter, "Back-translation rounds");
  pl->add_option("--bt-sample", pl_sample, "Sentences per direction and round");
  pl->add_option("--later-distortion-limit", pl_later, "Reordering after round 1");
  pl->add_option("--seed", pl_seed, "Random seed");
  pl->add_flag("--print-config", pl_print, "Print the resolved configuration and exit");
  pl_emb.add(pl);
  pl_init.add(pl);
  pl_dec.add(pl);
  pl_load.add(pl);

  // export-sheets
  auto* ex = app.add_subcommand("export-sheets", "Blinded evaluation sheets");
  fs::path ex_orig, ex_out;
  std::vector<std::string> ex_systems;
  SheetOptions ex_opts;
  ex->add_option("--originals", ex_orig, "Original sentences, one per line")->required();
  ex->add_option("--system", ex_systems, "NAME=FILE, repeatable")->required();
  ex->add_option("--sets", ex_opts.sets, "Sentence sets");
  ex->add_option("--evaluators", ex_opts.evaluators, "Evaluator sheets");
  ex->add_option("--seed", ex_opts.seed, "Random seed");
  ex->add_option("-o,--out-dir", ex_out, "Output directory")->required();

  // mos-report
  auto* mos = app.add_subcommand("mos-report", "Summarize correctness and readability scores");
  std::vector<fs::path> mos_files;
  double mos_gate = 4.0;
  std::optional<fs::path> mos_out;
  mos->add_option("scores", mos_files, "Score CSV files")->required();
  mos->add_option("--gate", mos_gate, "Mean correctness needed to enter readability");
  mos->add_option("-o,--out", mos_out, "Write the JSON report here instead of stdout");

  // baseline-replace
  auto* base = app.add_subcommand("baseline-replace", "Word-by-word dictionary replacement, stdin to stdout");
  fs::path base_dict;
  LoadFlags base_load;
  base->add_option("--dict", base_dict, "Dictionary TSV")->required();
  base_load.add(base);

  // gen-cipher
  auto* gen = app.add_subcommand("gen-cipher", "Write the synthetic cipher benchmark");
  fs::path gen_out;
  CipherOptions gen_opts;
  gen->add_option("-o,--out-dir", gen_out, "Output directory")->required();
  gen->add_option("--vocabulary", gen_opts.vocabulary, "Word types");
  gen->add_option("--tokens", gen_opts.tokens, "Tokens per corpus");
  gen->add_option("--shared", gen_opts.shared, "Identical-string words");
  gen->add_option("--held-out", gen_opts.held_out, "Held-out sentence pairs");
  gen->add_option("--seed", gen_opts.seed, "Random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*emb) {
      TrainConfig tc;
      emb_flags.apply(tc);
      tc.seed = emb_seed;
      tc.validate();
      const auto corpus = load_corpus(emb_corpus, emb_load.options());
      const auto model = train_skipgram(corpus, tc);
      save_vectors(model.space, emb_out);
      std::cerr << "vocabulary " << model.space.size() << ", final loss "
                << (model.epoch_loss.empty() ? 0.0 : model.epoch_loss.back()) << '\n';
    } else if (*score) {
      const auto a = load_vectors(sc_src);
      const auto b = load_vectors(sc_tgt);
      NNGraph ga, gb;
      if (sc_nodes == "anchors") {
        const auto anchors = extract_anchors(a.vocab(), b.vocab());
        ga = build_nn_graph(a, sc_neighbors, anchors);
        gb = build_nn_graph(b, sc_neighbors, anchors);
      } else {
        ga = build_nn_graph(a, sc_neighbors, top_words(a.vocab(), sc_top));
        gb = build_nn_graph(b, sc_neighbors, top_words(b.vocab(), sc_top));
      }
      const auto s = eigenvector_score(ga, gb, sc_fraction);
      std::cout << "score " << s.score << "\nk_used " << s.k_used << '\n';
      if (sc_json) {
        nlohmann::ordered_json j{{"score", s.score},     {"k_used", s.k_used},
                                 {"nodes", ga.nodes.size()}, {"neighbors", sc_neighbors},
                                 {"node_set", sc_nodes},  {"fraction", sc_fraction}};
        write_file(*sc_json, j.dump(2) + "\n");
      }
    } else if (*align) {
      const BdiMethod method = parse_bdi_method(al_method);
      if (al_no_anchors && method != BdiMethod::kAdversarial) {
        fail(ErrorCode::kInvalidConfig, "--no-anchors requires --method adversarial");
      }
      const auto src = load_vectors(al_src);
      const auto tgt = load_vectors(al_tgt);
      Dictionary seed;
      if (al_seed_dict) seed = Dictionary::load_tsv(*al_seed_dict);
      else if (method != BdiMethod::kAdversarial) seed = Dictionary::identity(extract_anchors(src.vocab(), tgt.vocab()));
      AlignmentResult r;
      if (method == BdiMethod::kProcrustes) {
        r = procrustes_iterate(src, tgt, seed, al_proc);
      } else if (method == BdiMethod::kSelfLearning) {
        al_sl.k_csls = al_proc.k_csls;
        r = self_learning_fit(src, tgt, seed, al_sl);
      } else {
        al_adv.k_csls = al_proc.k_csls;
        al_adv.top_freq = std::min({al_adv.top_freq, src.size(), tgt.size()});
        r = adversarial_fit(src, tgt, al_adv).refined;
      }
      for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
      r.map.save(al_out);
      std::cerr << "iterations " << r.iterations_run << ", orthogonality residual "
                << r.map.orthogonality_residual() << '\n';
      if (al_dict_out) {
        const auto index = make_index(prepare_for_alignment(src), prepare_for_alignment(tgt), r.map, al_proc.k_csls);
        induce_dictionary(index, src.vocab().words(), RetrievalMethod::kCsls).save_tsv(*al_dict_out, true);
      }
    } else if (*eval) {
      const auto src = prepare_for_alignment(load_vectors(ev_src));
      const auto tgt = prepare_for_alignment(load_vectors(ev_tgt));
      const auto map = AlignmentMap::load(ev_map);
      const auto index = make_index(src, tgt, map, ev_k);
      const auto report = evaluate_bdi(index, Dictionary::load_tsv(ev_gold), parse_retrieval_method(ev_method), ev_boot);
      std::cout << report.to_json() << '\n';
      if (ev_json) write_file(*ev_json, report.to_json() + "\n");
    } else if (*initpt) {
      smt::PhraseInitOptions o;
      ip_flags.apply(o);
      const auto src = prepare_for_alignment(load_vectors(ip_src));
      const auto tgt = prepare_for_alignment(load_vectors(ip_tgt));
      const auto table = smt::init_phrase_table(AlignmentMap::load(ip_map), src, tgt, o);
      table.save(ip_out);
      std::cerr << table.size() << " rows, " << table.entry_count() << " entries\n";
    } else if (*lm) {
      const auto model = smt::NGramLanguageModel::train(load_corpus(lm_corpus, lm_load.options()), lm_order);
      for (const auto& w : model.warnings()) std::cerr << "warning: " << w << '\n';
      model.save_arpa(lm_out);
    } else if (*tr) {
      smt::DecoderOptions o;
      tr_flags.apply(o);
      o.validate();
      const auto table = smt::PhraseTable::load(tr_table);
      const auto model = smt::NGramLanguageModel::load_arpa(tr_lm);
      map_lines(std::cin, std::cout, tr_load.options(),
                [&](const Sentence& s) { return s.empty() ? Sentence{} : smt::decode(table, model, s, o).tokens; });
    } else if (*bt) {
      bt_flags.apply(bt_cfg.decoder);
      bt_cfg.validate();
      const auto source = load_corpus(bt_src, bt_load.options());
      const auto target = load_corpus(bt_tgt, bt_load.options());
      const auto pt0 = smt::PhraseTable::load(bt_table);
      auto lm_for = [&](const std::optional<fs::path>& p, const Corpus& c) {
        if (p) return smt::NGramLanguageModel::load_arpa(*p);
        auto m = smt::NGramLanguageModel::train(c, bt_order);
        for (const auto& w : m.warnings()) std::cerr << "warning: " << c.name << ": " << w << '\n';
        return m;
      };
      const auto lm_s = lm_for(bt_lm_src, source);
      const auto lm_t = lm_for(bt_lm_tgt, target);
      fs::create_directories(bt_out);
      const auto res = smt::back_translate_loop(source, target, pt0, lm_s, lm_t, bt_cfg, [&](const smt::IterationModels& m) {
        m.forward.save(bt_out / ("forward.iter" + std::to_string(m.iteration) + ".txt"));
        m.backward.save(bt_out / ("backward.iter" + std::to_string(m.iteration) + ".txt"));
        std::cerr << "iteration " << m.iteration << ": " << m.forward.entry_count() << " forward entries\n";
      });
      res.forward.save(bt_out / "phrase_table.txt");
    } else if (*pl) {
      PipelineConfig c = pipeline_preset(pl_preset);
      c.source_corpus = pl_src;
      c.target_corpus = pl_tgt;
      c.augmentation_corpus = pl_aug;
      c.lm_corpus = pl_lm;
      c.gold_dictionary = pl_gold;
      c.translate_input = pl_input;
      c.translate_reference = pl_ref;
      c.output_dir = pl_out;
      c.load = pl_load.options();
      pl_emb.apply(c.embedding);
      pl_init.apply(c.smt.init);
      pl_dec.apply(c.smt.decoder);
      if (pl_anchors) c.anchors = *pl_anchors;
      if (pl_method) c.method = parse_bdi_method(*pl_method);
      if (pl_retrieval) c.retrieval = parse_retrieval_method(*pl_retrieval);
      if (pl_proc_iter) c.procrustes.iterations = *pl_proc_iter;
      if (pl_mutual) c.procrustes.mutual = *pl_mutual;
      if (pl_adv_epochs) c.adversarial.epochs = *pl_adv_epochs;
      if (pl_lm_order) c.lm_order = *pl_lm_order;
      if (pl_bt_iter) c.smt.iterations = *pl_bt_iter;
      if (pl_sample) c.smt.sample_sentences = *pl_sample;
      if (pl_later) c.smt.later_distortion_limit = *pl_later;
      if (pl_seed) c.seed = *pl_seed;
      if (pl_print) {
        c.validate();
        std::cout << c.to_json() << '\n';
        return 0;
      }
      const auto r = run_pipeline(c);
      for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
      if (r.bdi_report) std::cout << "p@1 " << r.bdi_report->p_at_1 << '\n';
      if (r.bleu) std::cout << "bleu " << *r.bleu << "\nexact_match " << *r.exact_match << '\n';
      std::cout << "manifest " << r.manifest_hash << '\n';
    } else if (*ex) {
      std::vector<std::string> originals;
      auto read_lines = [](const fs::path& p) {
        std::ifstream in(p);
        if (!in) fail(ErrorCode::kIoError, "cannot read " + p.string());
        std::vector<std::string> out;
        for (std::string line; std::getline(in, line);) out.push_back(line);
        return out;
      };
      originals = read_lines(ex_orig);
      std::vector<SystemOutput> systems;
      for (const auto& entry : ex_systems) {
        const auto eq = entry.find('=');
        if (eq == std::string::npos || eq == 0) fail(ErrorCode::kInvalidConfig, "--system expects NAME=FILE, got '" + entry + "'");
        systems.push_back({entry.substr(0, eq), read_lines(entry.substr(eq + 1))});
      }
      const auto r = export_eval_sheets(originals, systems, ex_opts, ex_out);
      std::cerr << r.evaluator_files.size() << " sheets, " << r.filtered_out << " sentences filtered\n";
    } else if (*mos) {
      std::vector<ScoreRow> rows;
      for (const auto& f : mos_files) {
        auto part = load_scores(f);
        rows.insert(rows.end(), part.begin(), part.end());
      }
      const auto report = mos_summarize(rows, mos_gate);
      if (mos_out) write_file(*mos_out, report.to_json() + "\n");
      else std::cout << report.to_json() << '\n';
    } else if (*base) {
      const auto dict = Dictionary::load_tsv(base_dict);
      map_lines(std::cin, std::cout, base_load.options(),
                [&](const Sentence& s) { return smt::dictionary_replace_baseline(dict, s); });
    } else if (*gen) {
      const auto b = make_cipher_benchmark(gen_opts);
      fs::create_directories(gen_out);
      save_corpus(b.source, gen_out / "source.txt");
      save_corpus(b.target, gen_out / "target.txt");
      b.hidden_pairs().save_tsv(gen_out / "gold.tsv");
      save_corpus(Corpus{"held-out-source", b.held_out_source}, gen_out / "held_out.source.txt");
      save_corpus(Corpus{"held-out-target", b.held_out_target}, gen_out / "held_out.target.txt");
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return is_validation_error(e.code()) ? 1 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
