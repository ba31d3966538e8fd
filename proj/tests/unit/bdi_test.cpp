#include <gtest/gtest.h>

#include <random>

#include "lexbridge/bdi.hpp"
#include "lexbridge/error.hpp"
#include "oracles.hpp"

using namespace lexbridge;

namespace {

Dictionary first_pairs(int n, int from = 0) {
  Dictionary d;
  for (int i = from; i < from + n; ++i) d.add({"s" + std::to_string(i), "t" + std::to_string(i), std::nullopt});
  return d;
}

double identity_accuracy(const oracle::RotatedPair& p, const AlignmentMap& m) {
  const auto index = make_index(prepare_for_alignment(p.source), prepare_for_alignment(p.target), m);
  const auto dict = induce_dictionary(index, p.source.vocab().words(), RetrievalMethod::kCsls);
  double hits = 0;
  for (const auto& e : dict) hits += e.target.substr(1) == e.source.substr(1);
  return hits / static_cast<double>(p.source.size());
}

// Points on the unit circle: one dominant cluster and two small ones at
// uneven angles, so that no rotation or reflection maps the cloud onto itself.
RowMatrix lopsided_cloud(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> jitter(0.0, 0.3);
  std::uniform_real_distribution<double> u(0, 1);
  RowMatrix m(n, 2);
  for (int i = 0; i < n; ++i) {
    const double r = u(rng);
    const double a = (r < 0.7 ? 0.0 : r < 0.9 ? 2.0 : 4.0) + jitter(rng);
    m(i, 0) = std::cos(a);
    m(i, 1) = std::sin(a);
  }
  return m;
}

}  // namespace

TEST(ProcrustesFit, IdenticalAnchorsGiveIdentity) {
  std::mt19937_64 rng(1);
  const Matrix x = oracle::gaussian(6, 12, rng);
  EXPECT_LT((procrustes_fit(x, x).source_map - Matrix::Identity(6, 6)).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(ProcrustesFit, RecoversRotation) {
  std::mt19937_64 rng(2);
  for (int d : {2, 3, 7, 20}) {
    const Matrix q = oracle::random_orthogonal(d, rng);
    const Matrix x = oracle::gaussian(d, d + 5, rng);
    const Matrix w = procrustes_fit(x, q * x).source_map;
    EXPECT_LT((w - q).cwiseAbs().maxCoeff(), 1e-6) << "d=" << d;
  }
}

TEST(ProcrustesFit, SinglePairInTwoDimensions) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 20; ++t) {
    Matrix x = oracle::gaussian(2, 1, rng), y = oracle::gaussian(2, 1, rng);
    x /= x.norm();
    y /= y.norm();
    const Matrix w = procrustes_fit(x, y).source_map;
    const double err = (w * x - y).norm();
    EXPECT_LE(err, (x - y).norm() + 1e-12);
    // Dense sweep of rotations and reflections in the plane.
    for (int s = 0; s < 3600; ++s) {
      const double a = 2 * M_PI * s / 3600;
      Matrix r(2, 2);
      r << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
      EXPECT_LE(err, (r * x - y).norm() + 1e-12);
    }
  }
}

TEST(ProcrustesFit, RotationInvariance) {
  std::mt19937_64 rng(4);
  const Matrix x = oracle::gaussian(5, 9, rng), y = oracle::gaussian(5, 9, rng);
  const Matrix r = oracle::random_orthogonal(5, rng);
  const Matrix w = procrustes_fit(x, y).source_map;
  const Matrix wr = procrustes_fit(r * x, r * y).source_map;
  EXPECT_NEAR((w * x - y).squaredNorm(), (wr * r * x - r * y).squaredNorm(), 1e-9);
  EXPECT_LT((wr - r * w * r.transpose()).norm(), 1e-8);
}

TEST(ProcrustesFit, Errors) {
  Matrix x = Matrix::Ones(3, 4);
  EXPECT_THROW(procrustes_fit(x, Matrix::Ones(2, 4)), Error);
  x(0, 0) = std::nan("");
  try {
    procrustes_fit(x, Matrix::Ones(3, 4));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonFinite);
  }
}

TEST(ProcrustesIterate, RotatedCopy) {
  const auto p = oracle::rotated_pair(200, 50, 21);
  const auto r = procrustes_iterate(p.source, p.target, first_pairs(20));
  EXPECT_EQ(identity_accuracy(p, r.map), 1.0);
  EXPECT_LE(r.map.orthogonality_residual(), 1e-6);
  EXPECT_EQ(r.iterations_run, 5);
}

TEST(ProcrustesIterate, ZeroIterationsIsSeedFit) {
  const auto p = oracle::rotated_pair(60, 8, 22, 0.2);
  ProcrustesOptions o;
  o.iterations = 0;
  const auto r = procrustes_iterate(p.source, p.target, first_pairs(12), o);
  const auto ps = prepare_for_alignment(p.source), pt = prepare_for_alignment(p.target);
  Matrix x(8, 12), y(8, 12);
  for (int i = 0; i < 12; ++i) {
    x.col(i) = ps.vectors().row(*ps.vocab().id("s" + std::to_string(i))).transpose();
    y.col(i) = pt.vectors().row(*pt.vocab().id("t" + std::to_string(i))).transpose();
  }
  EXPECT_LT((r.map.source_map - procrustes_fit(x, y).source_map).norm(), 1e-10);
}

TEST(ProcrustesIterate, UnknownSeedWord) {
  const auto p = oracle::rotated_pair(30, 4, 23);
  Dictionary seed = first_pairs(5);
  seed.add({"nope", "t1", std::nullopt});
  try {
    procrustes_iterate(p.source, p.target, seed);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnknownWord);
  }
  EXPECT_THROW(procrustes_iterate(p.source, p.target, Dictionary{}), Error);
}

TEST(SelfLearning, RotatedCopyTenSeeds) {
  const auto p = oracle::rotated_pair(200, 20, 31);
  const auto r = self_learning_fit(p.source, p.target, first_pairs(10));
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(identity_accuracy(p, r.map), 1.0);
  for (const auto& e : r.dictionary) EXPECT_EQ(e.source.substr(1), e.target.substr(1));
}

TEST(SelfLearning, FixedPointSeedConvergesInOneIteration) {
  const auto p = oracle::rotated_pair(100, 10, 32);
  const auto first = self_learning_fit(p.source, p.target, first_pairs(10));
  const auto again = self_learning_fit(p.source, p.target, first.dictionary);
  EXPECT_EQ(again.iterations_run, 1);
  EXPECT_EQ(again.dictionary, first.dictionary);
}

TEST(SelfLearning, EmptySeed) {
  const auto p = oracle::rotated_pair(20, 4, 33);
  try {
    self_learning_fit(p.source, p.target, Dictionary{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kPreconditionViolation);
  }
}

TEST(AlignmentMap, SaveLoad) {
  const auto p = oracle::rotated_pair(50, 6, 34);
  const auto r = self_learning_fit(p.source, p.target, first_pairs(10));
  const auto dir = oracle::scratch_dir("map");
  r.map.save(dir / "m.txt");
  const auto back = AlignmentMap::load(dir / "m.txt");
  EXPECT_EQ(back.method, BdiMethod::kSelfLearning);
  ASSERT_TRUE(back.target_map.has_value());
  EXPECT_LT((back.source_map - r.map.source_map).norm(), 1e-9);
  EXPECT_LT((*back.target_map - *r.map.target_map).norm(), 1e-9);
}

TEST(Adversarial, DiscriminatorAtChanceOnIdenticalSamples) {
  std::mt19937_64 rng(41);
  const Eigen::MatrixXf a = oracle::gaussian(8, 4000, rng).cast<float>();
  Discriminator d(8, 64, 2, 0.2, 5);
  Eigen::VectorXf labels(64);
  labels.head(32).setOnes();
  labels.tail(32).setZero();
  for (int step = 0; step < 400; ++step) {
    Eigen::MatrixXf batch(8, 64);
    for (int j = 0; j < 64; ++j) batch.col(j) = a.col(static_cast<Eigen::Index>(rng() % 3000));
    d.train_step(batch, labels, 0.05f);
  }
  // Held-out: both "sides" come from the same distribution.
  const double acc = d.accuracy(a.middleCols(3000, 500), a.middleCols(3500, 500));
  EXPECT_GE(acc, 0.4);
  EXPECT_LE(acc, 0.6);
}

TEST(Adversarial, RecoversQuarterTurn) {
  Matrix truth(2, 2);
  truth << 0, -1, 1, 0;
  int recovered = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    std::mt19937_64 rng(seed * 101);
    const RowMatrix x = lopsided_cloud(400, rng);
    const RowMatrix y = x * truth.transpose();
    const EmbeddingSpace src(oracle::ranked_vocab("s", 400), x), tgt(oracle::ranked_vocab("t", 400), y);
    AdvConfig cfg;
    cfg.hidden = 64;
    cfg.top_freq = 400;
    cfg.epochs = 5;
    cfg.iterations_per_epoch = 1000;
    // Unit-norm 2-d inputs: the default step flips the map into a reflection.
    cfg.lr_start = 0.05;
    cfg.selection_words = 400;
    cfg.seed = seed;
    const auto r = adversarial_fit(src, tgt, cfg);
    // Maps act on prepared spaces; centring commutes with the rotation.
    if ((r.refined.map.source_map - truth).norm() <= 0.1) ++recovered;
  }
  EXPECT_GE(recovered, 8) << recovered << "/10 seeds recovered";
}

TEST(Adversarial, TopFreqLargerThanVocabulary) {
  const auto p = oracle::rotated_pair(30, 4, 42);
  AdvConfig cfg;
  cfg.top_freq = 31;
  try {
    adversarial_fit(p.source, p.target, cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kPreconditionViolation);
  }
}
