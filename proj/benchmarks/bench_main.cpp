#include <benchmark/benchmark.h>

#include <random>

#include "lexbridge/bdi.hpp"
#include "lexbridge/embedding.hpp"
#include "lexbridge/retrieval.hpp"
#include "lexbridge/smt/decoder.hpp"
#include "lexbridge/smt/language_model.hpp"
#include "lexbridge/smt/phrase_table.hpp"
#include "lexbridge/synthetic.hpp"

using namespace lexbridge;

namespace {

RowMatrix gaussian(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  RowMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = g(rng);
  return m;
}

Vocabulary vocab(const std::string& prefix, Eigen::Index n) {
  std::vector<std::pair<std::string, std::int64_t>> e;
  for (Eigen::Index i = 0; i < n; ++i) e.emplace_back(prefix + std::to_string(i), n - i + 1);
  return Vocabulary::from_ordered(std::move(e));
}

const CipherBenchmark& cipher() {
  static const auto b = make_cipher_benchmark();
  return b;
}

}  // namespace

static void BM_ProcrustesFit(benchmark::State& state) {
  const auto d = state.range(0);
  const Matrix x = gaussian(d, 5000, 1), y = gaussian(d, 5000, 2);
  for (auto _ : state) benchmark::DoNotOptimize(procrustes_fit(x, y));
}
BENCHMARK(BM_ProcrustesFit)->Arg(50)->Arg(300)->Unit(benchmark::kMillisecond);

static void BM_CslsIndex(benchmark::State& state) {
  const auto n = state.range(0);
  const RowMatrix s = gaussian(n, 300, 3), t = gaussian(n, 300, 4);
  const auto sv = vocab("s", n), tv = vocab("t", n);
  for (auto _ : state) {
    RetrievalIndex index(s, sv, t, tv, 10);
    std::vector<std::size_t> ids(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i;
    benchmark::DoNotOptimize(index.best_targets(ids, RetrievalMethod::kCsls));
  }
}
BENCHMARK(BM_CslsIndex)->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond);

static void BM_SkipGramEpoch(benchmark::State& state) {
  TrainConfig cfg;
  cfg.dim = static_cast<int>(state.range(0));
  cfg.epochs = 1;
  cfg.subsample = 1.0;
  for (auto _ : state) benchmark::DoNotOptimize(train_skipgram(cipher().source, cfg));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(cipher().source.token_count()));
}
BENCHMARK(BM_SkipGramEpoch)->Arg(100)->Arg(300)->Unit(benchmark::kMillisecond);

static void BM_LanguageModelTrain(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(smt::NGramLanguageModel::train(cipher().target, 4));
}
BENCHMARK(BM_LanguageModelTrain)->Unit(benchmark::kMillisecond);

static void BM_Decode(benchmark::State& state) {
  smt::PhraseTable table;
  const auto& pairs = cipher().cipher.pairs();
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    std::vector<smt::PhraseEntry> row;
    for (std::size_t k = 0; k < 20; ++k) row.push_back({{pairs[(i + k) % pairs.size()].target}, k == 0 ? 0.5 : 0.025, 0.05});
    table.set_row({pairs[i].source}, row);
  }
  const auto lm = smt::NGramLanguageModel::train(cipher().target, 4);
  smt::DecoderOptions o;
  o.beam = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(smt::decode_all(table, lm, cipher().held_out_source, o));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(cipher().held_out_source.size()));
}
BENCHMARK(BM_Decode)->Arg(1)->Arg(10)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
