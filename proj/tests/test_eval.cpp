#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "support/synth.hpp"
#include "textseam/analysis.hpp"
#include "textseam/error.hpp"
#include "textseam/experiment.hpp"
#include "textseam/metrics.hpp"
#include "textseam/model_io.hpp"
#include "textseam/splits.hpp"

using namespace textseam;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t csv_column_sum(const std::filesystem::path& p, std::size_t column) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  std::size_t total = 0;
  while (std::getline(in, line)) {
    std::stringstream row(line);
    std::string cell;
    for (std::size_t c = 0; c <= column; ++c) std::getline(row, cell, ',');
    total += std::stoul(cell);
  }
  return total;
}

}  // namespace

TEST(Metrics, SmallExample) {
  const std::vector<std::pair<int, int>> pairs{{3, 3}, {5, 6}, {0, 9}};
  const auto r = compute_metrics(pairs, "t");
  EXPECT_NEAR(r.acc, 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(r.soft_acc1, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(r.mse, 82.0 / 3.0, 1e-12);
  EXPECT_EQ(r.n, 3u);
  EXPECT_EQ(r.confusion[0][9], 1u);
  EXPECT_EQ(r.fold_tag, "t");
}

TEST(Metrics, PerfectPredictions) {
  std::vector<std::pair<int, int>> pairs;
  for (int k = 0; k < 10; ++k) pairs.push_back({k, k});
  const auto r = compute_metrics(pairs);
  EXPECT_EQ(r.acc, 1.0);
  EXPECT_EQ(r.soft_acc1, 1.0);
  EXPECT_EQ(r.mse, 0.0);
}

TEST(Metrics, AccuracyNeverExceedsSoftAccuracy) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> label(0, 9);
  for (int t = 0; t < 200; ++t) {
    std::vector<std::pair<int, int>> pairs(1 + rng() % 50);
    for (auto& p : pairs) p = {label(rng), label(rng)};
    const auto r = compute_metrics(pairs);
    EXPECT_LE(r.acc, r.soft_acc1);
    EXPECT_GE(r.mse, 0.0);
    std::size_t total = 0;
    for (const auto& row : r.confusion) total = std::accumulate(row.begin(), row.end(), total);
    EXPECT_EQ(total, pairs.size());
  }
}

TEST(Metrics, RejectsBadInput) {
  EXPECT_THROW(compute_metrics(std::vector<std::pair<int, int>>{}), ValidationError);
  EXPECT_THROW(compute_metrics(std::vector<std::pair<int, int>>{{0, 10}}), ValidationError);
  EXPECT_DOUBLE_EQ(relative_change(0.5, 0.25), 1.0);
  EXPECT_EQ(relative_change(0.5, 0.0), 0.0);
}

TEST(Splits, InDomainProportions) {
  const auto set = synth::make_set({.samples = 100});
  const auto plan = make_splits(set.corpus, SplitMode::in_domain, 7);
  ASSERT_EQ(plan.folds.size(), 1u);
  const Fold& f = plan.folds[0];
  EXPECT_EQ(f.tag, "in_domain");
  EXPECT_EQ(f.train.size(), 60u);
  EXPECT_EQ(f.val.size(), 20u);
  EXPECT_EQ(f.test_in.size(), 20u);
  EXPECT_TRUE(f.test_out.empty());
  EXPECT_TRUE(fold_is_leak_free(f));
  EXPECT_TRUE(plan.warnings.empty());
  for (int k = 0; k < 10; ++k) {
    const auto count = std::count_if(f.test_in.begin(), f.test_in.end(),
                                     [&](std::size_t i) { return set.corpus.samples[i].label == k; });
    EXPECT_EQ(count, 2);
  }
}

TEST(Splits, Deterministic) {
  const auto set = synth::make_set({.samples = 80});
  const auto a = make_splits(set.corpus, SplitMode::cross_topic, 3);
  const auto b = make_splits(set.corpus, SplitMode::cross_topic, 3);
  ASSERT_EQ(a.folds.size(), b.folds.size());
  for (std::size_t i = 0; i < a.folds.size(); ++i) {
    EXPECT_EQ(a.folds[i].train, b.folds[i].train);
    EXPECT_EQ(a.folds[i].test_out, b.folds[i].test_out);
  }
  const auto c = make_splits(set.corpus, SplitMode::cross_topic, 4);
  EXPECT_NE(a.folds[0].train, c.folds[0].train);
  EXPECT_NE(fold_seed(3, 0), fold_seed(3, 1));
}

TEST(Splits, CrossTopicHoldsOutEachTopic) {
  const auto set = synth::make_set({.samples = 120});
  const auto plan = make_splits(set.corpus, SplitMode::cross_topic, 1);
  ASSERT_EQ(plan.folds.size(), 4u);
  for (std::size_t t = 0; t < 4; ++t) {
    const Fold& f = plan.folds[t];
    EXPECT_EQ(f.tag, to_string(kAllTopics[t]));
    EXPECT_TRUE(fold_is_leak_free(f));
    EXPECT_EQ(f.test_out.size(), 30u);
    for (std::size_t i : f.test_out) EXPECT_EQ(set.corpus.samples[i].topic, kAllTopics[t]);
    for (const auto* part : {&f.train, &f.val, &f.test_in}) {
      for (std::size_t i : *part) EXPECT_NE(set.corpus.samples[i].topic, kAllTopics[t]);
    }
    EXPECT_EQ(f.train.size() + f.val.size() + f.test_in.size() + f.test_out.size(), 120u);
  }
}

TEST(Splits, CrossGeneratorSortedAndSmallLabelsWarned) {
  auto set = synth::make_set({.samples = 60, .generators = {"zeta", "alpha", "mid"}});
  set.corpus.samples[0].label = 9;
  for (auto& s : set.corpus.samples) {
    if (s.label == 9 && s.id != "s0") s.label = 8;
  }
  const auto plan = make_splits(set.corpus, SplitMode::cross_generator, 2);
  ASSERT_EQ(plan.folds.size(), 3u);
  EXPECT_EQ(plan.folds[0].tag, "alpha");
  EXPECT_EQ(plan.folds[2].tag, "zeta");
  EXPECT_FALSE(plan.warnings.empty());
  for (const auto& f : plan.folds) EXPECT_TRUE(fold_is_leak_free(f));

  auto one = synth::make_set({.samples = 20, .generators = {"only"}});
  EXPECT_THROW(make_splits(one.corpus, SplitMode::cross_generator, 1), ValidationError);
}

TEST(Splits, LeakDetection) {
  Fold f{.tag = "x", .train = {0, 1}, .val = {2}, .test_in = {3}, .test_out = {4}};
  EXPECT_TRUE(fold_is_leak_free(f));
  f.val.push_back(4);
  EXPECT_FALSE(fold_is_leak_free(f));
  EXPECT_EQ(parse_split_mode("cross_topic"), SplitMode::cross_topic);
  EXPECT_THROW(parse_split_mode("random"), ValidationError);
}

TEST(Experiment, EchoScoresPerfectly) {
  const auto set = synth::make_set({.samples = 80});
  const auto spec = pipeline_from_name("echo");
  const auto data = prepare_data(set.corpus, nullptr, spec);
  const auto plan = make_splits(set.corpus, SplitMode::cross_topic, 5);
  const auto results = run_experiment(set.corpus, data, spec, plan);
  ASSERT_EQ(results.size(), 4u);
  for (const auto& r : results) {
    EXPECT_EQ(r.in.acc, 1.0);
    ASSERT_TRUE(r.out.has_value());
    EXPECT_EQ(r.out->acc, 1.0);
  }
}

TEST(Experiment, ReportsAreByteIdentical) {
  const auto set = synth::make_set({.samples = 100});
  const auto dir = synth::temp_dir("exp_repeat");
  synth::write_traces(set.traces, dir / "traces");
  const TraceStore store(dir / "traces");
  auto spec = pipeline_from_name("perplexity-gb");
  spec.hyper = parse_hyper("trees=20;depth=2");
  const auto data = prepare_data(set.corpus, &store, spec);
  const auto plan = make_splits(set.corpus, SplitMode::in_domain, 11);
  write_experiment_outputs(run_experiment(set.corpus, data, spec, plan), dir / "a");
  write_experiment_outputs(run_experiment(set.corpus, data, spec, plan), dir / "b");
  for (const char* f : {"report.csv", "confusion_in_domain_IN.csv", "models/in_domain.json"}) {
    ASSERT_TRUE(std::filesystem::exists(dir / "a" / f)) << f;
    EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;
  }
  const std::string report = slurp(dir / "a" / "report.csv");
  EXPECT_EQ(report.substr(0, report.find('\n')),
            "fold_tag,split,acc,soft_acc1,mse,n,delta_vs_human_acc,delta_out_vs_in_acc");
}

TEST(Experiment, SeriesEstimatorMismatchFailsBeforeTraining) {
  const auto set = synth::make_set({.samples = 8});
  std::vector<IdSeries> series;
  for (const auto& t : set.traces) series.push_back(build_id_series(t, {.estimator = IdEstimator::tle}));
  const auto spec = pipeline_from_name("phd-gak-svm");
  EXPECT_THROW(prepare_data(set.corpus, nullptr, spec, &series), ValidationError);
  series.pop_back();
  EXPECT_THROW(prepare_data(set.corpus, nullptr, pipeline_from_name("tle-binary"), &series), ValidationError);
}

TEST(Experiment, PipelineValidation) {
  EXPECT_THROW(pipeline_from_name("nope"), ConfigError);
  auto spec = pipeline_from_name("perplexity-logreg");
  spec.learner = Learner::gak_svm;
  EXPECT_THROW(validate_pipeline(spec), ConfigError);
  spec = pipeline_from_name("perplexity-logreg");
  spec.hyper = parse_hyper("depth=3");
  EXPECT_THROW(validate_pipeline(spec), ConfigError);
  const auto grid = parse_hyper("a=1,2; b=3");
  EXPECT_EQ(grid.at("a"), (std::vector<double>{1, 2}));
  EXPECT_THROW(parse_hyper("a="), ConfigError);
  EXPECT_EQ(file_tag("New York/Times"), "new_york_times");
}

TEST(Experiment, HyperCandidatesAreCartesian) {
  auto spec = pipeline_from_name("perplexity-logreg");
  spec.hyper = parse_hyper("l2=1,2,3;lr=0.1,0.2");
  const auto c = hyper_candidates(spec);
  ASSERT_EQ(c.size(), 6u);
  EXPECT_EQ(c[0].at("l2"), 1.0);
  EXPECT_EQ(c[0].at("lr"), 0.1);
  EXPECT_EQ(c[1].at("lr"), 0.2);
}

TEST(Analysis, HistogramMassIsConserved) {
  const auto set = synth::make_set({.samples = 40});
  const auto dir = synth::temp_dir("analysis");
  synth::write_traces(set.traces, dir / "traces");
  const TraceStore store(dir / "traces");
  std::vector<IdSeries> series;
  for (const auto& t : set.traces) series.push_back(build_id_series(t, {.estimator = IdEstimator::tle}));
  const auto files = emit_analysis(set.corpus, store, &series, dir / "out");

  const std::size_t per_topic = 10, per_generator = 20;
  for (Topic t : kAllTopics) {
    const auto p = dir / "out" / ("lengths_topic_" + file_tag(to_string(t)) + ".csv");
    ASSERT_TRUE(std::filesystem::exists(p)) << p;
    EXPECT_EQ(csv_column_sum(p, 2) + csv_column_sum(p, 3), 10 * per_topic);
  }
  for (const char* g : {"gpt2", "ctrl"}) {
    const auto lengths = dir / "out" / (std::string("lengths_generator_") + g + ".csv");
    EXPECT_EQ(csv_column_sum(lengths, 2) + csv_column_sum(lengths, 3), 10 * per_generator);
    const auto ppl = dir / "out" / (std::string("last_ppl_generator_") + g + ".csv");
    EXPECT_EQ(csv_column_sum(ppl, 2), per_generator);
    EXPECT_EQ(csv_column_sum(ppl, 2) + csv_column_sum(ppl, 3), 40u);
    EXPECT_TRUE(std::filesystem::exists(dir / "out" / (std::string("window_id_generator_") + g + ".csv")));
  }
  EXPECT_EQ(files.size(), 6u * 3u);
}

TEST(Analysis, SingleSampleMass) {
  auto set = synth::make_set({.samples = 1});
  const auto dir = synth::temp_dir("analysis_one");
  synth::write_traces(set.traces, dir / "traces");
  const TraceStore store(dir / "traces");
  const auto files = emit_analysis(set.corpus, store, nullptr, dir / "out", {.generators = {"gpt2"}});
  EXPECT_EQ(files.size(), 4u);
  const auto p = dir / "out" / "lengths_generator_gpt2.csv";
  EXPECT_EQ(csv_column_sum(p, 2) + csv_column_sum(p, 3), 10u);
}

TEST(Analysis, HistogramClampsOutliers) {
  Histogram h = make_histogram(0.0, 10.0, 5, {"a"});
  add_value(h, 0, -3.0);
  add_value(h, 0, 10.0);
  add_value(h, 0, 4.0);
  EXPECT_EQ(h.counts[0].front(), 1u);
  EXPECT_EQ(h.counts[0].back(), 1u);
  EXPECT_EQ(h.counts[0][2], 1u);
  EXPECT_EQ(h.total(0), 3u);
}

TEST(ModelIo, RoundTripsPreservePredictions) {
  Matrix x(30, 2);
  std::vector<double> y(30);
  std::vector<int> yi(30);
  for (std::size_t i = 0; i < 30; ++i) {
    x(i, 0) = static_cast<double>(i % 3) + 0.01 * static_cast<double>(i);
    x(i, 1) = static_cast<double>(i) / 7.0;
    y[i] = static_cast<double>(i % 3);
    yi[i] = static_cast<int>(i % 3);
  }
  const auto gbt = gbt_fit(x, y, {.n_classes = 3, .trees = 10});
  const auto gbt2 = gbt_from_json(to_json(gbt));
  const auto lr = logreg_fit(x, yi);
  const auto lr2 = logreg_from_json(to_json(lr));
  for (std::size_t i = 0; i < 30; ++i) {
    EXPECT_EQ(gbt.raw_scores(x.row(i)), gbt2.raw_scores(x.row(i)));
    EXPECT_EQ(lr.logits(x.row(i)), lr2.logits(x.row(i)));
  }

  const auto dir = synth::temp_dir("model_io");
  const auto doc = model_document("gbt", to_json(gbt));
  write_model_file(doc, dir / "m.json");
  const auto back = read_model_file(dir / "m.json");
  EXPECT_EQ(check_model_document(back), "gbt");
  EXPECT_EQ(back, doc);
  EXPECT_THROW(read_model_file(dir / "missing.json"), NotFoundError);
  auto foreign = doc;
  foreign["format"] = "other";
  EXPECT_THROW(check_model_document(foreign), ValidationError);
}
