#include <gtest/gtest.h>

#include "lexbridge/error.hpp"
#include "lexbridge/pipeline.hpp"
#include "lexbridge/synthetic.hpp"
#include "oracles.hpp"

using namespace lexbridge;
namespace fs = std::filesystem;

namespace {

fs::path small_benchmark(const fs::path& dir) {
  CipherOptions o;
  o.vocabulary = 100;
  o.tokens = 20000;
  o.shared = 30;
  o.held_out = 20;
  const auto b = make_cipher_benchmark(o);
  save_corpus(b.source, dir / "source.txt");
  save_corpus(b.target, dir / "target.txt");
  b.hidden_pairs().save_tsv(dir / "gold.tsv");
  save_corpus(Corpus{"h", b.held_out_source}, dir / "held_out.source.txt");
  save_corpus(Corpus{"h", b.held_out_target}, dir / "held_out.target.txt");
  return dir;
}

PipelineConfig small_config(const fs::path& data, const fs::path& out) {
  auto c = pipeline_preset("F-like");
  c.source_corpus = data / "source.txt";
  c.target_corpus = data / "target.txt";
  c.gold_dictionary = data / "gold.tsv";
  c.translate_input = data / "held_out.source.txt";
  c.translate_reference = data / "held_out.target.txt";
  c.embedding.dim = 300;
  c.embedding.subsample = 1.0;
  c.embedding.linear_decay = true;
  c.smt.iterations = 1;
  c.smt.sample_sentences = 200;
  c.lm_order = 3;
  c.output_dir = out;
  return c;
}

}  // namespace

TEST(Presets, Table) {
  EXPECT_EQ(pipeline_preset_names().size(), 7u);
  const auto f = pipeline_preset("F-like");
  EXPECT_EQ(f.embedding.dim, 300);
  EXPECT_TRUE(f.anchors);
  EXPECT_FALSE(f.general_lm);
  const auto n = pipeline_preset("n");
  EXPECT_FALSE(n.anchors);
  EXPECT_EQ(n.method, BdiMethod::kAdversarial);
  EXPECT_TRUE(pipeline_preset("C").embedding.subword.has_value());
  EXPECT_EQ(pipeline_preset("D").embedding.dim, 1000);
  EXPECT_THROW(pipeline_preset("Z"), Error);
}

TEST(Presets, AnchorsOffNeedsAdversarial) {
  auto c = pipeline_preset("F");
  c.anchors = false;
  try {
    c.validate();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidConfig);
  }
  auto a = pipeline_preset("A");
  EXPECT_THROW(a.validate(), Error);  // needs a general-domain LM corpus
}

TEST(Pipeline, ArtifactsAndDeterminism) {
  const auto dir = oracle::scratch_dir("pipeline");
  const auto data = small_benchmark(dir);
  const auto a = run_pipeline(small_config(data, dir / "a"));
  const auto b = run_pipeline(small_config(data, dir / "b"));
  for (const char* f : {"manifest.json", "induced.tsv", "map.txt", "pt0.txt", "phrase_table.txt", "translations.txt",
                        "lm_target.arpa", "bdi_report.json", "anchors.txt"})
    EXPECT_TRUE(fs::exists(dir / "a" / f)) << f;
  EXPECT_EQ(a.manifest_hash, b.manifest_hash);
  EXPECT_EQ(a.induced, b.induced);
  EXPECT_EQ(oracle::read_file(dir / "a" / "translations.txt"), oracle::read_file(dir / "b" / "translations.txt"));
  ASSERT_TRUE(a.bdi_report.has_value());
  EXPECT_GE(a.bdi_report->p_at_1, 0.9);
  ASSERT_TRUE(a.exact_match.has_value());
  EXPECT_EQ(a.translations.size(), 20u);
}

TEST(Pipeline, ManifestTracksSettings) {
  auto c = pipeline_preset("F");
  auto d = c;
  EXPECT_EQ(c.to_json(), d.to_json());
  d.output_dir = "elsewhere";
  EXPECT_EQ(c.to_json(), d.to_json());
  d.seed = 2;
  EXPECT_NE(c.to_json(), d.to_json());
}

TEST(Pipeline, StageNameInErrors) {
  const auto dir = oracle::scratch_dir("pipeline-err");
  auto c = pipeline_preset("F");
  c.source_corpus = dir / "missing.txt";
  c.target_corpus = dir / "missing.txt";
  c.output_dir = dir / "out";
  try {
    run_pipeline(c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIoError);
    EXPECT_NE(std::string(e.what()).find("stage 'load'"), std::string::npos);
  }
}
