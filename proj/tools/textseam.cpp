#include <CLI11.hpp>

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "textseam/analysis.hpp"
#include "textseam/corpus.hpp"
#include "textseam/error.hpp"
#include "textseam/experiment.hpp"
#include "textseam/features.hpp"
#include "textseam/parallel.hpp"
#include "textseam/series.hpp"
#include "textseam/splits.hpp"
#include "textseam/trace.hpp"

namespace fs = std::filesystem;
using namespace textseam;

namespace {

struct Global {
  std::string workdir = ".";
  int jobs = 0;
  std::uint64_t seed = 0;
};

fs::path resolve(const Global& g, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : fs::path(g.workdir) / path;
}

Corpus read_corpus(const Global& g, const std::string& path) { return load_corpus(resolve(g, path)); }

std::vector<IdSeries> read_series(const Global& g, const std::string& path) {
  const fs::path p = resolve(g, path);
  std::ifstream in(p);
  if (!in) throw NotFoundError("series file not found: " + p.string());
  return read_series_jsonl(in);
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

// ingest

struct IngestArgs {
  std::string in, out, format, encoding = "boundary", stats;
  bool drop_disclaimers = false, drop_short = false;
  std::size_t min_words = 2;
};

int cmd_ingest(const Global& g, const IngestArgs& a) {
  LoadOptions load;
  if (a.encoding == "human-count") load.encoding = LabelEncoding::human_count;
  else if (a.encoding != "boundary") throw ValidationError("--label-encoding must be boundary or human-count");
  const fs::path in = resolve(g, a.in);
  Corpus corpus;
  if (a.format.empty()) corpus = load_corpus(in, load);
  else if (a.format == "csv") corpus = load_corpus(in, CorpusFormat::csv, load);
  else if (a.format == "jsonl") corpus = load_corpus(in, CorpusFormat::jsonl, load);
  else throw ValidationError("--format must be csv or jsonl");

  PreprocessOptions opts;
  opts.drop_ai_disclaimers = a.drop_disclaimers;
  opts.drop_short_samples = a.drop_short;
  opts.min_words = a.min_words;
  PreprocessSummary summary;
  const Corpus clean = preprocess(corpus, opts, &summary);
  auto out = open_out(resolve(g, a.out));
  write_corpus_jsonl(clean, out);
  if (!a.stats.empty()) {
    auto stats = open_out(resolve(g, a.stats));
    write_stats_csv(corpus_stats(clean), stats);
  }
  std::cout << "input " << summary.input << "\nretained " << summary.retained << "\ndropped " << summary.dropped()
            << " (duplicates " << summary.duplicates << ", empty_sentences " << summary.empty_sentences
            << ", disclaimers " << summary.disclaimers << ", short " << summary.short_samples << ")\n";
  return 0;
}

// export-features

struct FeatureArgs {
  std::string corpus, traces, out, kind = "perplexity", ppl_mode = "word-mean";
};

PerplexityMode parse_ppl_mode(const std::string& s) {
  if (s == "word-mean") return PerplexityMode::word_mean;
  if (s == "pooled") return PerplexityMode::pooled;
  throw ValidationError("--perplexity-mode must be word-mean or pooled");
}

int cmd_export_features(const Global& g, const FeatureArgs& a) {
  const Corpus corpus = read_corpus(g, a.corpus);
  const TraceStore store(resolve(g, a.traces));
  const FeatureKind kind = parse_feature_kind(a.kind);
  const PerplexityMode mode = parse_ppl_mode(a.ppl_mode);
  std::vector<FeatureVector> rows(corpus.samples.size());
  for (const auto& s : corpus.samples) {
    if (!store.contains(s.id)) throw ValidationError("no trace for sample '" + s.id + "'");
  }
  parallel_for(rows.size(), [&](std::size_t i) {
    const TraceMeta& meta = store.meta(corpus.samples[i].id);
    rows[i] = kind == FeatureKind::perplexity ? sentence_perplexities(meta, mode) : sentence_lengths(meta);
  });
  auto out = open_out(resolve(g, a.out));
  write_features_csv(rows, out);
  std::cout << "features " << rows.size() << '\n';
  return 0;
}

// build-series

struct SeriesArgs {
  std::string corpus, traces, out, estimator = "phd";
  std::size_t window = 20, step = 5, k = 20, resamples = 3;
  bool exclude_center = false;
};

SeriesOptions series_options(const SeriesArgs& a, std::uint64_t seed) {
  SeriesOptions o;
  o.estimator = parse_estimator(a.estimator);
  o.window = a.window;
  o.step = a.step;
  o.tle.k = a.k;
  o.tle.include_center = !a.exclude_center;
  o.phd.resamples = a.resamples;
  o.phd.seed = seed;
  return o;
}

int cmd_build_series(const Global& g, const SeriesArgs& a) {
  const Corpus corpus = read_corpus(g, a.corpus);
  const TraceStore store(resolve(g, a.traces));
  std::vector<std::string> ids;
  for (const auto& s : corpus.samples) {
    if (!store.contains(s.id)) throw ValidationError("no trace for sample '" + s.id + "'");
    ids.push_back(s.id);
  }
  const auto series = build_id_series_batch(store, ids, series_options(a, g.seed));
  auto out = open_out(resolve(g, a.out));
  write_series_jsonl(series, out);
  std::cout << "series " << series.size() << '\n';
  return 0;
}

// run

struct RunArgs {
  std::string corpus, traces, series, pipeline, mode = "in-domain", out = "results", hyper, ppl_mode = "word-mean";
  SeriesArgs series_args;
};

int cmd_run(const Global& g, const RunArgs& a) {
  PipelineSpec spec = pipeline_from_name(a.pipeline);
  spec.seed = g.seed;
  spec.hyper = parse_hyper(a.hyper);
  spec.perplexity_mode = parse_ppl_mode(a.ppl_mode);
  SeriesArgs sa = a.series_args;
  sa.estimator = std::string(to_string(spec.series.estimator));
  spec.series = series_options(sa, g.seed);
  validate_pipeline(spec);
  const SplitMode mode = parse_split_mode(a.mode);

  const Corpus corpus = read_corpus(g, a.corpus);
  std::optional<TraceStore> store;
  if (!a.traces.empty()) store.emplace(resolve(g, a.traces));
  std::optional<std::vector<IdSeries>> series;
  if (!a.series.empty()) series = read_series(g, a.series);

  const ExperimentData data = prepare_data(corpus, store ? &*store : nullptr, spec, series ? &*series : nullptr);
  const SplitPlan plan = make_splits(corpus, mode, g.seed);
  for (const auto& w : plan.warnings) std::cerr << "warning: " << w << '\n';
  const auto results = run_experiment(corpus, data, spec, plan);
  const fs::path out_dir = resolve(g, a.out);
  write_experiment_outputs(results, out_dir);
  write_report_csv(results, std::cout);
  return 0;
}

// analyze

struct AnalyzeArgs {
  std::string corpus, traces, series, out = "analysis";
  std::vector<std::string> generators;
};

int cmd_analyze(const Global& g, const AnalyzeArgs& a) {
  const Corpus corpus = read_corpus(g, a.corpus);
  const TraceStore store(resolve(g, a.traces));
  std::optional<std::vector<IdSeries>> series;
  if (!a.series.empty()) series = read_series(g, a.series);
  AnalysisOptions opts;
  opts.generators = a.generators;
  const auto files = emit_analysis(corpus, store, series ? &*series : nullptr, resolve(g, a.out), opts);
  std::cout << "files " << files.size() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Boundary detection between human-written and generated text"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Config file (key = value, [command] sections)");
  Global g;
  app.add_option("--workdir", g.workdir, "Base directory for relative paths");
  app.add_option("--jobs", g.jobs, "Worker thread cap (0 = runtime default)")->check(CLI::NonNegativeNumber);
  app.add_option("--seed", g.seed, "Seed for every random choice")->envname("TEXTSEAM_SEED");

  IngestArgs ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Load, clean and normalize a corpus");
  c_ingest->add_option("--in", ingest.in, "Input corpus (.csv or .jsonl)")->required();
  c_ingest->add_option("--out", ingest.out, "Output corpus JSONL")->required();
  c_ingest->add_option("--format", ingest.format, "csv or jsonl (default: from extension)");
  c_ingest->add_option("--label-encoding", ingest.encoding, "boundary or human-count");
  c_ingest->add_flag("--drop-ai-disclaimers", ingest.drop_disclaimers, "Drop samples with AI disclaimers");
  c_ingest->add_flag("--drop-short-samples", ingest.drop_short, "Drop samples with a too-short sentence");
  c_ingest->add_option("--min-words", ingest.min_words, "Minimum words per sentence for --drop-short-samples");
  c_ingest->add_option("--stats", ingest.stats, "Write corpus statistics CSV");

  FeatureArgs feat;
  auto* c_feat = app.add_subcommand("export-features", "Write per-sentence features");
  c_feat->add_option("--corpus", feat.corpus)->required();
  c_feat->add_option("--traces", feat.traces)->required();
  c_feat->add_option("--out", feat.out)->required();
  c_feat->add_option("--kind", feat.kind, "perplexity or length");
  c_feat->add_option("--perplexity-mode", feat.ppl_mode, "word-mean or pooled");

  SeriesArgs ser;
  auto add_series_options = [](CLI::App* cmd, SeriesArgs& s) {
    cmd->add_option("--window", s.window, "Window length in tokens");
    cmd->add_option("--step", s.step, "Window step in tokens");
    cmd->add_option("--k", s.k, "TLE neighborhood size");
    cmd->add_option("--resamples", s.resamples, "PHD resamples per subset size");
    cmd->add_flag("--exclude-center", s.exclude_center, "TLE: leave the center point out of neighborhoods");
  };
  auto* c_series = app.add_subcommand("build-series", "Sliding-window intrinsic-dimension series");
  c_series->add_option("--corpus", ser.corpus)->required();
  c_series->add_option("--traces", ser.traces)->required();
  c_series->add_option("--out", ser.out)->required();
  c_series->add_option("--estimator", ser.estimator, "phd or tle");
  add_series_options(c_series, ser);

  RunArgs run;
  auto* c_run = app.add_subcommand("run", "Split, train and evaluate a pipeline");
  c_run->add_option("--corpus", run.corpus)->required();
  c_run->add_option("--traces", run.traces, "Trace directory");
  c_run->add_option("--series", run.series, "Precomputed series.jsonl");
  c_run->add_option("--pipeline", run.pipeline, "majority, perplexity-logreg, perplexity-gb, "
                                                "perplexity-regression, length-gb, phd-gak-svm, tle-binary")
      ->required();
  c_run->add_option("--mode", run.mode, "in-domain, cross-topic or cross-generator");
  c_run->add_option("--out", run.out, "Output directory");
  c_run->add_option("--hyper", run.hyper, "Hyperparameters, e.g. \"l2=1e-3,1e-2;lr=0.1\"");
  c_run->add_option("--perplexity-mode", run.ppl_mode, "word-mean or pooled");
  add_series_options(c_run, run.series_args);

  AnalyzeArgs an;
  auto* c_an = app.add_subcommand("analyze", "Histogram CSVs per topic and generator");
  c_an->add_option("--corpus", an.corpus)->required();
  c_an->add_option("--traces", an.traces)->required();
  c_an->add_option("--series", an.series, "series.jsonl for window-ID histograms");
  c_an->add_option("--out", an.out, "Output directory");
  c_an->add_option("--generator", an.generators, "Restrict generator histograms (repeatable)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    set_max_threads(g.jobs);
    if (c_ingest->parsed()) return cmd_ingest(g, ingest);
    if (c_feat->parsed()) return cmd_export_features(g, feat);
    if (c_series->parsed()) return cmd_build_series(g, ser);
    if (c_run->parsed()) return cmd_run(g, run);
    if (c_an->parsed()) return cmd_analyze(g, an);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
