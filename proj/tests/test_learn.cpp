#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "support/synth.hpp"
#include "textseam/boundary.hpp"
#include "textseam/error.hpp"
#include "textseam/gbt.hpp"
#include "textseam/ksvm.hpp"
#include "textseam/logreg.hpp"
#include "textseam/window_model.hpp"

using namespace textseam;

namespace {

// Three gaussian blobs in 2-D, labels 0..2.
void blobs(std::size_t per_class, std::uint64_t seed, Matrix& x, std::vector<int>& y) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 0.3);
  const double centers[3][2] = {{0, 0}, {5, 0}, {0, 5}};
  x = Matrix(3 * per_class, 2);
  y.clear();
  for (std::size_t i = 0; i < 3 * per_class; ++i) {
    const int c = static_cast<int>(i % 3);
    x(i, 0) = centers[c][0] + noise(rng);
    x(i, 1) = centers[c][1] + noise(rng);
    y.push_back(c);
  }
}

Matrix rbf_gram(const Matrix& x, double gamma) {
  Matrix g(x.rows(), x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < x.rows(); ++j) {
      double s = 0.0;
      for (std::size_t c = 0; c < x.cols(); ++c) s += (x(i, c) - x(j, c)) * (x(i, c) - x(j, c));
      g(i, j) = std::exp(-gamma * s);
    }
  }
  return g;
}

// Scores every boundary with its own full sum over the 10 sentences.
int brute_force_boundary(const std::vector<double>& p) {
  int best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < 10; ++k) {
    double score = 0.0;
    for (int j = 0; j < 10; ++j) {
      const double q = std::clamp(p[j], 1e-6, 1.0 - 1e-6);
      score += j <= k ? std::log1p(-q) : std::log(q);
    }
    if (score > best_score) {
      best_score = score;
      best = k;
    }
  }
  return best;
}

SentenceSpans even_spans(std::uint32_t width) {
  SentenceSpans spans;
  for (std::uint32_t s = 0; s < 10; ++s) spans[s] = {s * width, (s + 1) * width};
  return spans;
}

}  // namespace

TEST(LogReg, SeparatesBlobs) {
  Matrix x;
  std::vector<int> y;
  blobs(30, 1, x, y);
  const auto model = logreg_fit(x, y, {.l2 = 1e-4, .epochs = 500, .learning_rate = 0.1, .n_classes = 3});
  for (std::size_t i = 0; i < x.rows(); ++i) EXPECT_EQ(model.predict(x.row(i)), y[i]);
}

TEST(LogReg, GradientMatchesFiniteDifferences) {
  Matrix x;
  std::vector<int> y;
  blobs(5, 2, x, y);
  const Matrix xs = Standardizer::fit(x).apply(x);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  Matrix w(3, 3);
  for (double& v : w.data()) v = normal(rng);
  Matrix grad;
  logreg_objective(w, xs, y, 0.05, &grad);
  const double h = 1e-6;
  for (std::size_t i = 0; i < w.data().size(); ++i) {
    Matrix plus = w, minus = w;
    plus.data()[i] += h;
    minus.data()[i] -= h;
    const double numeric = (logreg_objective(plus, xs, y, 0.05) - logreg_objective(minus, xs, y, 0.05)) / (2 * h);
    EXPECT_NEAR(grad.data()[i], numeric, 1e-4);
  }
}

TEST(LogReg, ConstantLabels) {
  Matrix x;
  std::vector<int> y;
  blobs(10, 4, x, y);
  std::fill(y.begin(), y.end(), 6);
  const auto model = logreg_fit(x, y);
  for (std::size_t i = 0; i < x.rows(); ++i) EXPECT_EQ(model.predict(x.row(i)), 6);
}

TEST(LogReg, LogitShiftLeavesProbabilitiesUnchanged) {
  Matrix x;
  std::vector<int> y;
  blobs(10, 5, x, y);
  auto model = logreg_fit(x, y, {.n_classes = 3});
  const auto before = model.predict_proba(x.row(0));
  for (std::size_t c = 0; c < model.n_classes; ++c) model.weights(c, model.dim) += 40.0;
  const auto after = model.predict_proba(x.row(0));
  for (std::size_t c = 0; c < before.size(); ++c) EXPECT_NEAR(before[c], after[c], 1e-12);
  EXPECT_NEAR(std::accumulate(after.begin(), after.end(), 0.0), 1.0, 1e-12);
}

TEST(LogReg, ShapeErrors) {
  Matrix x(3, 2, 1.0);
  const std::vector<int> two{0, 1};
  EXPECT_THROW(logreg_fit(x, two), ValidationError);
  const std::vector<int> bad{0, 1, 10};
  EXPECT_THROW(logreg_fit(x, bad), ValidationError);
}

TEST(Gbt, RegressionOnIdentity) {
  Matrix x(200, 1);
  std::vector<double> y(200);
  for (std::size_t i = 0; i < 200; ++i) y[i] = x(i, 0) = static_cast<double>(i) / 199.0;
  const auto model = gbt_fit(x, y, {.mode = GbtMode::regression, .trees = 200, .depth = 3});
  double mse = 0.0;
  for (std::size_t i = 0; i < 200; ++i) mse += std::pow(model.predict_value(x.row(i)) - y[i], 2);
  EXPECT_LT(mse / 200.0, 0.01);
}

TEST(Gbt, ConstantTarget) {
  Matrix x(50, 2);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> unit;
  for (double& v : x.data()) v = unit(rng);
  const std::vector<double> y(50, 4.2);
  const auto model = gbt_fit(x, y, {.mode = GbtMode::regression, .trees = 20});
  for (std::size_t i = 0; i < 50; ++i) EXPECT_NEAR(model.predict_value(x.row(i)), 4.2, 1e-9);
}

TEST(Gbt, MulticlassIntervals) {
  Matrix x(90, 1);
  std::vector<double> y(90);
  for (std::size_t i = 0; i < 90; ++i) {
    x(i, 0) = static_cast<double>(i) / 30.0;
    y[i] = std::floor(x(i, 0));
  }
  const auto model = gbt_fit(x, y, {.mode = GbtMode::multiclass, .n_classes = 3, .trees = 30, .depth = 2});
  for (std::size_t i = 0; i < 90; ++i) EXPECT_EQ(model.predict_class(x.row(i)), static_cast<int>(y[i]));
  const auto p = model.predict_proba(x.row(0));
  EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-12);
}

TEST(Gbt, TrainingLossNeverIncreases) {
  Matrix x;
  std::vector<int> labels;
  blobs(20, 6, x, labels);
  std::vector<double> y(labels.begin(), labels.end());
  for (GbtMode mode : {GbtMode::regression, GbtMode::multiclass}) {
    const auto model = gbt_fit(x, y, {.mode = mode, .n_classes = 3, .trees = 40, .depth = 2});
    ASSERT_EQ(model.train_loss.size(), 40u);
    for (std::size_t r = 1; r < model.train_loss.size(); ++r)
      EXPECT_LE(model.train_loss[r], model.train_loss[r - 1] + 1e-12);
  }
  std::vector<double> bin(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) bin[i] = y[i] == 1.0 ? 1.0 : 0.0;
  const auto model = gbt_fit(x, bin, {.mode = GbtMode::binary, .trees = 40, .depth = 2});
  for (std::size_t r = 1; r < model.train_loss.size(); ++r)
    EXPECT_LE(model.train_loss[r], model.train_loss[r - 1] + 1e-12);
}

TEST(Gbt, ConfigErrorsAndDeterminism) {
  Matrix x(10, 1);
  std::vector<double> y(10);
  for (std::size_t i = 0; i < 10; ++i) y[i] = x(i, 0) = static_cast<double>(i % 3);
  EXPECT_THROW(gbt_fit(x, y, {.depth = 0}), ConfigError);
  EXPECT_THROW(gbt_fit(x, y, {.trees = 0}), ConfigError);
  EXPECT_THROW(gbt_fit(x, y, {.learning_rate = 0.0}), ConfigError);
  EXPECT_THROW(gbt_fit(x, y, {.subsample = 1.5}), ConfigError);
  EXPECT_THROW(gbt_fit(x, y, {.min_samples_leaf = 0}), ConfigError);
  EXPECT_THROW(gbt_fit(x, y, {.mode = GbtMode::binary}), ValidationError);

  const GbtOptions opts{.mode = GbtMode::multiclass, .n_classes = 3, .trees = 15, .subsample = 0.7, .seed = 9};
  const auto a = gbt_fit(x, y, opts), b = gbt_fit(x, y, opts);
  EXPECT_EQ(a.train_loss, b.train_loss);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(a.raw_scores(x.row(i)), b.raw_scores(x.row(i)));
}

TEST(Gbt, TreesRespectDepth) {
  Matrix x;
  std::vector<int> labels;
  blobs(20, 7, x, labels);
  std::vector<double> y(labels.begin(), labels.end());
  const auto model = gbt_fit(x, y, {.mode = GbtMode::regression, .trees = 5, .depth = 2});
  for (const auto& round : model.rounds) {
    for (const auto& tree : round) EXPECT_LE(tree.depth(), 2u);
  }
}

TEST(Ksvm, SeparableClasses) {
  Matrix x;
  std::vector<int> y;
  blobs(15, 8, x, y);
  const Matrix g = rbf_gram(x, 0.5);
  const auto model = ksvm_fit(g, y, {.C = 10.0});
  EXPECT_TRUE(model.converged);
  for (std::size_t i = 0; i < x.rows(); ++i) EXPECT_EQ(model.predict(g.row(i)), y[i]);
  const auto dv = model.decision_values(g.row(0));
  EXPECT_EQ(dv[7], -std::numeric_limits<double>::infinity());
}

TEST(Ksvm, ConflictingDuplicatesStayFeasible) {
  Matrix x(40, 1);
  std::vector<double> y(40);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> unit;
  for (std::size_t i = 0; i < 20; ++i) {
    x(2 * i, 0) = x(2 * i + 1, 0) = unit(rng);
    y[2 * i] = 1.0;
    y[2 * i + 1] = unit(rng) < 0.5 ? -1.0 : 1.0;
  }
  y[1] = -1.0;
  const Matrix g = rbf_gram(x, 2.0);
  for (double C : {0.1, 1.0, 100.0}) {
    const auto svm = smo_train(g, y, {.C = C, .tolerance = 1e-3});
    ASSERT_TRUE(svm.converged);
    double balance = 0.0;
    for (std::size_t i = 0; i < 40; ++i) {
      EXPECT_GE(svm.alpha[i], 0.0);
      EXPECT_LE(svm.alpha[i], C);
      balance += svm.alpha[i] * y[i];
    }
    EXPECT_NEAR(balance, 0.0, 1e-9);
    EXPECT_LT(max_kkt_violation(g, y, svm.alpha, C), 1e-3);
  }
}

TEST(Ksvm, SingleSignAndErrors) {
  const Matrix g(3, 3, 1.0);
  const std::vector<double> pos{1.0, 1.0, 1.0};
  const auto svm = smo_train(g, pos);
  EXPECT_EQ(svm.bias, 1.0);
  EXPECT_EQ(svm.alpha, (std::vector<double>(3, 0.0)));

  const std::vector<int> y{0, 1, 1};
  EXPECT_THROW(ksvm_fit(g, y, {.C = 0.0}), ConfigError);
  Matrix skew = g;
  skew(0, 1) = 0.5;
  EXPECT_THROW(ksvm_fit(skew, y), ValidationError);
  EXPECT_THROW(ksvm_fit(Matrix(3, 2, 1.0), y), ValidationError);
  const std::vector<int> out_of_range{0, 1, 12};
  EXPECT_THROW(ksvm_fit(g, out_of_range), ValidationError);
}

TEST(Boundary, Examples) {
  EXPECT_EQ(boundary_from_probs(std::vector<double>{.1, .1, .1, .1, .9, .9, .9, .9, .9, .9}), 3);
  EXPECT_EQ(boundary_from_probs(std::vector<double>(10, 0.0)), 9);
  EXPECT_EQ(boundary_from_probs(std::vector<double>(10, 1.0)), 0);
  EXPECT_EQ(boundary_from_probs(std::vector<double>(10, 0.5)), 0);
  EXPECT_THROW(boundary_from_probs(std::vector<double>(9, 0.5)), ValidationError);
  std::vector<double> nan(10, 0.5);
  nan[3] = std::nan("");
  EXPECT_THROW(boundary_from_probs(nan), ValidationError);
}

TEST(Boundary, MatchesBruteForce) {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> unit;
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> p(10);
    for (double& v : p) v = t % 5 == 0 ? std::round(unit(rng) * 4) / 4 : unit(rng);
    EXPECT_EQ(boundary_from_probs(p), brute_force_boundary(p));
  }
}

TEST(Boundary, RecoversCleanStepFunctions) {
  for (int k = 0; k < 10; ++k) {
    std::vector<double> p(10);
    for (int j = 0; j < 10; ++j) p[j] = j <= k ? 0.05 : 0.95;
    EXPECT_EQ(boundary_from_probs(p), k);
  }
}

TEST(Boundary, RegressionToLabel) {
  EXPECT_EQ(regression_to_label(3.4), 3);
  EXPECT_EQ(regression_to_label(3.5), 4);
  EXPECT_EQ(regression_to_label(-0.7), 0);
  EXPECT_EQ(regression_to_label(9.5), 9);
  EXPECT_EQ(regression_to_label(42.0), 9);
}

TEST(SentenceProbs, OneWindowPerSentence) {
  const SentenceSpans spans = even_spans(10);
  std::vector<double> probs;
  std::vector<std::size_t> centers;
  for (std::size_t s = 0; s < 10; ++s) {
    probs.push_back(0.1 * static_cast<double>(s));
    centers.push_back(10 * s + 5);
  }
  const auto out = sentence_probs_from_windows(probs, centers, spans);
  for (std::size_t s = 0; s < 10; ++s) EXPECT_DOUBLE_EQ(out[s], probs[s]);
}

TEST(SentenceProbs, MeansWindowsInsideSpan) {
  const SentenceSpans spans = even_spans(10);
  const std::vector<double> probs{0.2, 0.4, 0.9};
  const std::vector<std::size_t> centers{1, 8, 10};
  const auto out = sentence_probs_from_windows(probs, centers, spans);
  EXPECT_NEAR(out[0], 0.3, 1e-15);
  EXPECT_DOUBLE_EQ(out[1], 0.9);
}

TEST(SentenceProbs, NearestWindowOracle) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::uint32_t> width(1, 8);
  std::uniform_real_distribution<double> unit;
  for (int t = 0; t < 200; ++t) {
    SentenceSpans spans;
    std::uint32_t cursor = 0;
    for (auto& s : spans) {
      s = {cursor, cursor + width(rng)};
      cursor = s.end;
    }
    std::vector<std::size_t> centers;
    for (std::size_t c = rng() % 4; c < cursor; c += 1 + rng() % 12) centers.push_back(c);
    if (centers.empty()) centers.push_back(0);
    std::vector<double> probs(centers.size());
    for (double& p : probs) p = unit(rng);

    const auto out = sentence_probs_from_windows(probs, centers, spans);
    for (std::size_t s = 0; s < 10; ++s) {
      double sum = 0.0;
      int count = 0;
      for (std::size_t w = 0; w < centers.size(); ++w) {
        if (centers[w] >= spans[s].start && centers[w] < spans[s].end) {
          sum += probs[w];
          ++count;
        }
      }
      if (count > 0) {
        EXPECT_NEAR(out[s], sum / count, 1e-12);
        continue;
      }
      std::size_t best = 0;
      std::size_t best_dist = std::numeric_limits<std::size_t>::max();
      for (std::size_t w = 0; w < centers.size(); ++w) {
        const std::size_t d = centers[w] < spans[s].start ? spans[s].start - centers[w] : centers[w] - spans[s].end + 1;
        if (d < best_dist) {
          best_dist = d;
          best = w;
        }
      }
      EXPECT_EQ(out[s], probs[best]);
    }
  }
}

TEST(SentenceProbs, RejectsBadInput) {
  const SentenceSpans spans = even_spans(3);
  EXPECT_THROW(sentence_probs_from_windows(std::vector<double>{}, std::vector<std::size_t>{}, spans), ValidationError);
  EXPECT_THROW(sentence_probs_from_windows(std::vector<double>{0.1, 0.2}, std::vector<std::size_t>{1}, spans),
               ValidationError);
}

TEST(WindowModel, LabelsFollowFirstGeneratedSentence) {
  IdSeries series;
  series.centers = {2, 9, 10, 25};
  series.values = {1, 1, 1, 1};
  const SentenceSpans spans = even_spans(3);
  EXPECT_EQ(window_labels(series, 2, spans), (std::vector<double>{0, 1, 1, 1}));
  EXPECT_EQ(window_labels(series, 9, spans), (std::vector<double>{0, 0, 0, 0}));
  const Matrix f = window_features(series, 31);
  EXPECT_DOUBLE_EQ(f(3, 1), 25.0 / 30.0);
}

TEST(WindowModel, RecoversBoundaryFromSeparableSeries) {
  std::vector<TraceMeta> metas;
  std::vector<IdSeries> series;
  std::vector<int> labels;
  for (int i = 0; i < 40; ++i) {
    const int label = i % 9;
    const auto trace = synth::make_trace("w" + std::to_string(i), {6, 6, 6, 6, 6, 6, 6, 6, 6, 6}, label, 4, i);
    metas.push_back(trace.meta());
    IdSeries s;
    s.sample_id = trace.sample_id;
    for (std::size_t c = 3; c < 60; c += 6) {
      s.centers.push_back(c);
      s.values.push_back(c >= trace.sentence_spans[label + 1].start ? 7.0 : 2.0);
    }
    series.push_back(std::move(s));
    labels.push_back(label);
  }
  std::vector<WindowTrainingSample> samples;
  for (std::size_t i = 0; i < series.size(); ++i) samples.push_back({&series[i], &metas[i], labels[i]});
  const auto model = window_model_fit(samples, {.trees = 50, .depth = 2});
  EXPECT_EQ(model.gbt.mode, GbtMode::binary);
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto probs = windows_to_sentence_probs(model, series[i], metas[i]);
    EXPECT_EQ(boundary_from_probs(probs), labels[i]);
  }
}
