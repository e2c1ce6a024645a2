#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "textseam/corpus.hpp"
#include "textseam/features.hpp"
#include "textseam/metrics.hpp"
#include "textseam/series.hpp"
#include "textseam/splits.hpp"
#include "textseam/trace.hpp"

namespace textseam {

enum class FeatureSource { none, perplexity, length, phd_series, tle_windows };
enum class Learner { majority, logreg, gbt_classifier, gbt_regressor, gak_svm, window_binary, echo };

std::string_view to_string(FeatureSource source);
std::string_view to_string(Learner learner);

// Hyperparameter name -> candidate values. One value fixes the axis; several
// values are searched on the validation split.
using HyperGrid = std::map<std::string, std::vector<double>>;
using Hyper = std::map<std::string, double>;

struct PipelineSpec {
  std::string name;
  FeatureSource features = FeatureSource::none;
  Learner learner = Learner::majority;
  HyperGrid hyper;  // overrides of the learner's default grid
  PerplexityMode perplexity_mode = PerplexityMode::word_mean;
  SeriesOptions series;  // used when series are built on the fly
  std::uint64_t seed = 0;
};

// Names: majority, perplexity-logreg, perplexity-gb, perplexity-regression,
// length-gb, phd-gak-svm, tle-binary. "echo" (returns the true label) exists
// for tests. Throws ConfigError for an unknown name.
PipelineSpec pipeline_from_name(std::string_view name);
std::vector<std::string> pipeline_names();

// Learner/feature compatibility and hyperparameter names. Throws ConfigError.
void validate_pipeline(const PipelineSpec& spec);

// Candidate settings searched on validation, in a fixed order.
std::vector<Hyper> hyper_candidates(const PipelineSpec& spec);

// Parses "key=v1,v2;key2=v" (also accepts whitespace or newlines between entries).
HyperGrid parse_hyper(std::string_view text);

// Per-sample inputs aligned with corpus order.
struct ExperimentData {
  std::vector<int> labels;
  std::vector<std::string> ids;
  Matrix features;                // n x 10 for perplexity/length pipelines
  std::vector<IdSeries> series;   // per sample for series pipelines
  std::vector<TraceMeta> metas;   // per sample for tle_windows
};

// Gathers what the pipeline needs. Series come from `series` when given
// (matched by id; the estimator must fit the pipeline) or are built from the
// traces. Throws ValidationError before any training when a required trace or
// series is missing.
ExperimentData prepare_data(const Corpus& corpus, const TraceStore* traces, const PipelineSpec& spec,
                            const std::vector<IdSeries>* series = nullptr);

struct FoldResult {
  std::string tag;
  Hyper chosen;
  EvalReport in;
  std::optional<EvalReport> out;
  nlohmann::ordered_json model;  // versioned model document
};

// Trains each fold on its train split, picks hyperparameters by validation
// accuracy (validation MSE for the regressor), and scores test_in / test_out.
// Folds run in parallel; results follow plan order.
std::vector<FoldResult> run_experiment(const Corpus& corpus, const ExperimentData& data, const PipelineSpec& spec,
                                       const SplitPlan& plan);

// report.csv: fold_tag,split,acc,soft_acc1,mse,n,delta_vs_human_acc,delta_out_vs_in_acc
void write_report_csv(const std::vector<FoldResult>& results, std::ostream& out);

// Writes report.csv, confusion_<tag>_<IN|OUT>.csv and models/<tag>.json under dir.
void write_experiment_outputs(const std::vector<FoldResult>& results, const std::filesystem::path& dir);

// Lowercase alphanumerics, other bytes replaced by '_'.
std::string file_tag(std::string_view tag);

}  // namespace textseam
