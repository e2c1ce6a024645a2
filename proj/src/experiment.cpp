#include "textseam/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <set>

#include "textseam/boundary.hpp"
#include "textseam/csv.hpp"
#include "textseam/error.hpp"
#include "textseam/gbt.hpp"
#include "textseam/kernels.hpp"
#include "textseam/ksvm.hpp"
#include "textseam/logreg.hpp"
#include "textseam/model_io.hpp"
#include "textseam/parallel.hpp"
#include "textseam/window_model.hpp"

namespace textseam {

namespace {

struct LearnerInfo {
  Learner learner;
  std::string_view name;
  HyperGrid defaults;
};

const std::vector<LearnerInfo>& learner_table() {
  static const std::vector<LearnerInfo> table = {
      {Learner::majority, "majority", {}},
      {Learner::echo, "echo", {}},
      {Learner::logreg, "logreg", {{"l2", {1e-4, 1e-3, 1e-2}}, {"lr", {1e-2, 1e-1}}, {"epochs", {500}}}},
      {Learner::gbt_classifier,
       "gbt_classifier",
       {{"trees", {200}}, {"depth", {2, 3}}, {"lr", {0.1}}, {"subsample", {1.0}}, {"min_samples_leaf", {1}}}},
      {Learner::gbt_regressor,
       "gbt_regressor",
       {{"trees", {200}}, {"depth", {2, 3}}, {"lr", {0.1}}, {"subsample", {1.0}}, {"min_samples_leaf", {1}}}},
      {Learner::window_binary,
       "window_binary",
       {{"trees", {200}}, {"depth", {2, 3}}, {"lr", {0.1}}, {"subsample", {1.0}}, {"min_samples_leaf", {1}}}},
      {Learner::gak_svm, "gak_svm", {{"C", {0.1, 1.0, 10.0}}, {"sigma", {0.0}}, {"standardize_series", {1.0}}, {"tol", {1e-3}}}},
  };
  return table;
}

const LearnerInfo& info(Learner learner) {
  for (const auto& entry : learner_table()) {
    if (entry.learner == learner) return entry;
  }
  throw ConfigError("unknown learner");
}

GbtOptions gbt_options(const Hyper& h, GbtMode mode, std::uint64_t seed) {
  GbtOptions o;
  o.mode = mode;
  o.trees = static_cast<std::size_t>(h.at("trees"));
  o.depth = static_cast<std::size_t>(h.at("depth"));
  o.learning_rate = h.at("lr");
  o.subsample = h.at("subsample");
  o.min_samples_leaf = static_cast<std::size_t>(h.at("min_samples_leaf"));
  o.seed = seed;
  return o;
}

// Everything one candidate needs to predict.
struct Fitted {
  int majority = kNumLabels - 1;
  std::optional<LogRegModel> logreg;
  std::optional<GbtModel> gbt;
  std::optional<GakSvmModel> svm;
  std::optional<WindowBinaryModel> window;
};

class FoldRunner {
 public:
  FoldRunner(const ExperimentData& data, const PipelineSpec& spec, std::uint64_t seed)
      : data_(data), spec_(spec), seed_(seed) {}

  Fitted fit(const std::vector<std::size_t>& train, const Hyper& h) {
    Fitted f;
    std::vector<int> y;
    for (std::size_t i : train) y.push_back(data_.labels[i]);
    switch (spec_.learner) {
      case Learner::majority:
      case Learner::echo: {
        std::array<std::size_t, kNumLabels> counts{};
        for (int label : y) ++counts[static_cast<std::size_t>(label)];
        f.majority = static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
        break;
      }
      case Learner::logreg: {
        LogRegOptions o;
        o.l2 = h.at("l2");
        o.learning_rate = h.at("lr");
        o.epochs = static_cast<std::size_t>(h.at("epochs"));
        o.seed = seed_;
        f.logreg = logreg_fit(data_.features.select_rows(train), y, o);
        break;
      }
      case Learner::gbt_classifier:
      case Learner::gbt_regressor: {
        const bool regression = spec_.learner == Learner::gbt_regressor;
        std::vector<double> target(y.begin(), y.end());
        f.gbt = gbt_fit(data_.features.select_rows(train), target,
                        gbt_options(h, regression ? GbtMode::regression : GbtMode::multiclass, seed_));
        break;
      }
      case Learner::window_binary: {
        std::vector<WindowTrainingSample> samples;
        for (std::size_t i : train) samples.push_back({&data_.series[i], &data_.metas[i], data_.labels[i]});
        f.window = window_model_fit(samples, gbt_options(h, GbtMode::binary, seed_));
        break;
      }
      case Learner::gak_svm: {
        GakSvmModel m;
        m.standardize = h.at("standardize_series") != 0.0;
        std::vector<std::vector<double>> raw;
        for (std::size_t i : train) raw.push_back(data_.series[i].values);
        if (m.standardize) m.scaler = SeriesScaler::fit(raw);
        for (const auto& s : raw) m.train_series.push_back(m.prepare(s));
        m.sigma = h.at("sigma") > 0.0 ? h.at("sigma") : default_gak_sigma(m.train_series);
        const Matrix& gram = train_gram(m);
        SmoOptions o;
        o.C = h.at("C");
        o.tolerance = h.at("tol");
        m.svm = ksvm_fit(gram, y, o);
        f.svm = std::move(m);
        break;
      }
    }
    return f;
  }

  std::vector<int> predict(const Fitted& f, const std::vector<std::size_t>& idx) {
    std::vector<int> out(idx.size());
    switch (spec_.learner) {
      case Learner::majority:
        std::fill(out.begin(), out.end(), f.majority);
        break;
      case Learner::echo:
        for (std::size_t r = 0; r < idx.size(); ++r) out[r] = data_.labels[idx[r]];
        break;
      case Learner::logreg:
        for (std::size_t r = 0; r < idx.size(); ++r) out[r] = f.logreg->predict(data_.features.row(idx[r]));
        break;
      case Learner::gbt_classifier:
        for (std::size_t r = 0; r < idx.size(); ++r) out[r] = f.gbt->predict_class(data_.features.row(idx[r]));
        break;
      case Learner::gbt_regressor:
        for (std::size_t r = 0; r < idx.size(); ++r)
          out[r] = regression_to_label(f.gbt->predict_value(data_.features.row(idx[r])));
        break;
      case Learner::window_binary:
        for (std::size_t r = 0; r < idx.size(); ++r) {
          const auto p = windows_to_sentence_probs(*f.window, data_.series[idx[r]], data_.metas[idx[r]]);
          out[r] = boundary_from_probs(p);
        }
        break;
      case Learner::gak_svm: {
        std::vector<std::vector<double>> rows;
        for (std::size_t i : idx) rows.push_back(f.svm->prepare(data_.series[i].values));
        const Matrix k = kernels::gak_cross_gram(rows, f.svm->train_series, f.svm->sigma);
        for (std::size_t r = 0; r < idx.size(); ++r) out[r] = f.svm->svm.predict(k.row(r));
        break;
      }
    }
    return out;
  }

  ojson model_json(const Fitted& f, const Hyper& h) const {
    ojson body;
    std::string kind(info(spec_.learner).name);
    switch (spec_.learner) {
      case Learner::majority:
      case Learner::echo: body = {{"label", f.majority}}; break;
      case Learner::logreg: body = to_json(*f.logreg); break;
      case Learner::gbt_classifier:
      case Learner::gbt_regressor: body = to_json(*f.gbt); break;
      case Learner::window_binary: body = to_json(*f.window); break;
      case Learner::gak_svm: body = to_json(*f.svm); break;
    }
    ojson doc = model_document(kind, std::move(body));
    doc["pipeline"] = spec_.name;
    ojson hyper = ojson::object();
    for (const auto& [k, v] : h) hyper[k] = v;
    doc["hyper"] = std::move(hyper);
    return doc;
  }

 private:
  // Train gram per (sigma, standardize); C candidates share it.
  const Matrix& train_gram(const GakSvmModel& m) {
    const auto key = std::make_pair(m.sigma, m.standardize);
    auto it = grams_.find(key);
    if (it == grams_.end()) it = grams_.emplace(key, kernels::gak_gram(m.train_series, m.sigma)).first;
    return it->second;
  }

  const ExperimentData& data_;
  const PipelineSpec& spec_;
  std::uint64_t seed_;
  std::map<std::pair<double, bool>, Matrix> grams_;
};

EvalReport score(const std::vector<std::size_t>& idx, const std::vector<int>& pred, const ExperimentData& data,
                 const std::string& tag) {
  std::vector<std::pair<int, int>> pairs;
  for (std::size_t r = 0; r < idx.size(); ++r) pairs.emplace_back(data.labels[idx[r]], pred[r]);
  return compute_metrics(pairs, tag);
}

bool needs_traces(const PipelineSpec& spec) {
  return spec.features == FeatureSource::perplexity || spec.features == FeatureSource::length ||
         spec.features == FeatureSource::tle_windows;
}

}  // namespace

std::string_view to_string(FeatureSource source) {
  switch (source) {
    case FeatureSource::none: return "none";
    case FeatureSource::perplexity: return "perplexity";
    case FeatureSource::length: return "length";
    case FeatureSource::phd_series: return "phd_series";
    case FeatureSource::tle_windows: return "tle_windows";
  }
  return "unknown";
}

std::string_view to_string(Learner learner) { return info(learner).name; }

std::vector<std::string> pipeline_names() {
  return {"majority",   "perplexity-logreg", "perplexity-gb", "perplexity-regression",
          "length-gb",  "phd-gak-svm",       "tle-binary"};
}

PipelineSpec pipeline_from_name(std::string_view name) {
  PipelineSpec spec;
  spec.name = std::string(name);
  if (name == "majority") {
    spec.features = FeatureSource::none;
    spec.learner = Learner::majority;
  } else if (name == "echo") {
    spec.features = FeatureSource::none;
    spec.learner = Learner::echo;
  } else if (name == "perplexity-logreg") {
    spec.features = FeatureSource::perplexity;
    spec.learner = Learner::logreg;
  } else if (name == "perplexity-gb") {
    spec.features = FeatureSource::perplexity;
    spec.learner = Learner::gbt_classifier;
  } else if (name == "perplexity-regression") {
    spec.features = FeatureSource::perplexity;
    spec.learner = Learner::gbt_regressor;
  } else if (name == "length-gb") {
    spec.features = FeatureSource::length;
    spec.learner = Learner::gbt_classifier;
  } else if (name == "phd-gak-svm") {
    spec.features = FeatureSource::phd_series;
    spec.learner = Learner::gak_svm;
    spec.series.estimator = IdEstimator::phd;
  } else if (name == "tle-binary") {
    spec.features = FeatureSource::tle_windows;
    spec.learner = Learner::window_binary;
    spec.series.estimator = IdEstimator::tle;
  } else {
    std::string known;
    for (const auto& n : pipeline_names()) known += (known.empty() ? "" : ", ") + n;
    throw ConfigError("unknown pipeline '" + std::string(name) + "' (known: " + known + ")");
  }
  return spec;
}

void validate_pipeline(const PipelineSpec& spec) {
  const auto needs = [&](FeatureSource want) {
    if (spec.features != want)
      throw ConfigError(std::string(to_string(spec.learner)) + " requires " + std::string(to_string(want)) +
                        " features, got " + std::string(to_string(spec.features)));
  };
  switch (spec.learner) {
    case Learner::gak_svm: needs(FeatureSource::phd_series); break;
    case Learner::window_binary: needs(FeatureSource::tle_windows); break;
    case Learner::logreg:
    case Learner::gbt_classifier:
    case Learner::gbt_regressor:
      if (spec.features != FeatureSource::perplexity && spec.features != FeatureSource::length)
        throw ConfigError(std::string(to_string(spec.learner)) + " requires perplexity or length features");
      break;
    case Learner::majority:
    case Learner::echo: break;
  }
  if (spec.features == FeatureSource::phd_series && spec.series.estimator != IdEstimator::phd)
    throw ConfigError("phd_series features need the phd estimator");
  if (spec.features == FeatureSource::tle_windows && spec.series.estimator != IdEstimator::tle)
    throw ConfigError("tle_windows features need the tle estimator");
  const auto& defaults = info(spec.learner).defaults;
  for (const auto& [key, values] : spec.hyper) {
    if (!defaults.contains(key))
      throw ConfigError("hyperparameter '" + key + "' does not apply to " + std::string(to_string(spec.learner)));
    if (values.empty()) throw ConfigError("hyperparameter '" + key + "' has no values");
    for (double v : values) {
      if (!std::isfinite(v)) throw ConfigError("hyperparameter '" + key + "' must be finite");
    }
  }
}

std::vector<Hyper> hyper_candidates(const PipelineSpec& spec) {
  HyperGrid grid = info(spec.learner).defaults;
  for (const auto& [key, values] : spec.hyper) grid[key] = values;
  std::vector<Hyper> out{Hyper{}};
  for (const auto& [key, values] : grid) {
    std::vector<Hyper> next;
    for (const auto& partial : out) {
      for (double v : values) {
        Hyper h = partial;
        h[key] = v;
        next.push_back(std::move(h));
      }
    }
    out = std::move(next);
  }
  return out;
}

HyperGrid parse_hyper(std::string_view text) {
  HyperGrid grid;
  std::string entry;
  auto flush = [&] {
    const auto first = entry.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) {
      entry.clear();
      return;
    }
    const auto eq = entry.find('=');
    if (eq == std::string::npos) throw ConfigError("hyperparameter '" + entry + "' needs key=value");
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r\n");
      const auto b = s.find_last_not_of(" \t\r\n");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string key = trim(entry.substr(0, eq));
    std::string rest = entry.substr(eq + 1);
    std::vector<double> values;
    std::size_t pos = 0;
    while (pos <= rest.size()) {
      const auto comma = rest.find(',', pos);
      const std::string tok = trim(rest.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (tok.empty() || ec != std::errc() || ptr != tok.data() + tok.size())
        throw ConfigError("hyperparameter '" + key + "': '" + tok + "' is not a number");
      values.push_back(v);
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (key.empty()) throw ConfigError("empty hyperparameter name");
    grid[key] = std::move(values);
    entry.clear();
  };
  for (char c : text) {
    if (c == ';' || c == '\n') flush();
    else entry += c;
  }
  flush();
  return grid;
}

ExperimentData prepare_data(const Corpus& corpus, const TraceStore* traces, const PipelineSpec& spec,
                            const std::vector<IdSeries>* series) {
  validate_pipeline(spec);
  ExperimentData data;
  const std::size_t n = corpus.samples.size();
  for (const auto& s : corpus.samples) {
    data.labels.push_back(s.label);
    data.ids.push_back(s.id);
  }

  const bool uses_series = spec.features == FeatureSource::phd_series || spec.features == FeatureSource::tle_windows;
  if (needs_traces(spec) || (uses_series && !series)) {
    if (!traces) throw ValidationError("pipeline " + spec.name + " needs token traces (--traces)");
    std::size_t missing = 0;
    std::string first;
    for (const auto& id : data.ids) {
      if (!traces->contains(id)) {
        if (missing++ == 0) first = id;
      }
    }
    if (missing)
      throw ValidationError(std::to_string(missing) + " corpus samples have no trace (first: '" + first + "')");
  }

  if (spec.features == FeatureSource::perplexity || spec.features == FeatureSource::length) {
    data.features = Matrix(n, kSentences);
    parallel_for(n, [&](std::size_t i) {
      const TraceMeta& meta = traces->meta(data.ids[i]);
      const FeatureVector fv = spec.features == FeatureSource::perplexity
                                   ? sentence_perplexities(meta, spec.perplexity_mode)
                                   : sentence_lengths(meta);
      for (std::size_t s = 0; s < kSentences; ++s) data.features(i, s) = fv.values[s];
    });
  }

  if (uses_series) {
    if (series) {
      std::map<std::string, const IdSeries*, std::less<>> by_id;
      for (const auto& s : *series) by_id[s.sample_id] = &s;
      std::size_t missing = 0;
      std::string first;
      for (const auto& id : data.ids) {
        auto it = by_id.find(id);
        if (it == by_id.end()) {
          if (missing++ == 0) first = id;
          continue;
        }
        if (it->second->estimator != spec.series.estimator)
          throw ValidationError("series for '" + id + "' uses " + std::string(to_string(it->second->estimator)) +
                                ", pipeline " + spec.name + " needs " + std::string(to_string(spec.series.estimator)));
        data.series.push_back(*it->second);
      }
      if (missing)
        throw ValidationError(std::to_string(missing) + " corpus samples have no series (first: '" + first + "')");
    } else {
      data.series = build_id_series_batch(*traces, data.ids, spec.series);
    }
  }

  if (spec.features == FeatureSource::tle_windows) {
    for (const auto& id : data.ids) data.metas.push_back(traces->meta(id));
  }
  return data;
}

std::vector<FoldResult> run_experiment(const Corpus& corpus, const ExperimentData& data, const PipelineSpec& spec,
                                       const SplitPlan& plan) {
  validate_pipeline(spec);
  if (data.labels.size() != corpus.samples.size()) throw ValidationError("experiment data does not match the corpus");
  const auto candidates = hyper_candidates(spec);
  for (const auto& fold : plan.folds) {
    if (fold.train.empty()) throw ValidationError("fold " + fold.tag + " has an empty training split");
    if (fold.test_in.empty()) throw ValidationError("fold " + fold.tag + " has an empty test split");
  }

  std::vector<FoldResult> results(plan.folds.size());
  parallel_for(plan.folds.size(), [&](std::size_t f) {
    const Fold& fold = plan.folds[f];
    FoldRunner runner(data, spec, fold_seed(spec.seed, f));
    std::size_t best = 0;
    std::optional<Fitted> best_fit;
    double best_score = 0.0;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      Fitted fitted = runner.fit(fold.train, candidates[c]);
      if (candidates.size() == 1 || fold.val.empty()) {
        best_fit = std::move(fitted);
        break;
      }
      const EvalReport val = score(fold.val, runner.predict(fitted, fold.val), data, fold.tag);
      const double s = spec.learner == Learner::gbt_regressor ? -val.mse : val.acc;
      if (!best_fit || s > best_score) {
        best = c;
        best_score = s;
        best_fit = std::move(fitted);
      }
    }
    FoldResult& r = results[f];
    r.tag = fold.tag;
    r.chosen = candidates[best];
    r.in = score(fold.test_in, runner.predict(*best_fit, fold.test_in), data, fold.tag);
    if (!fold.test_out.empty()) r.out = score(fold.test_out, runner.predict(*best_fit, fold.test_out), data, fold.tag);
    r.model = runner.model_json(*best_fit, r.chosen);
  });
  return results;
}

void write_report_csv(const std::vector<FoldResult>& results, std::ostream& out) {
  out << "fold_tag,split,acc,soft_acc1,mse,n,delta_vs_human_acc,delta_out_vs_in_acc\n";
  auto row = [&](const std::string& tag, std::string_view split, const EvalReport& r, const EvalReport* in) {
    out << csv::escape(tag) << ',' << split << ',' << csv::format_fixed(r.acc, 6) << ','
        << csv::format_fixed(r.soft_acc1, 6) << ',' << csv::format_fixed(r.mse, 6) << ',' << r.n << ','
        << csv::format_fixed(relative_change(r.acc, kHumanAcc), 6) << ',';
    if (in) out << csv::format_fixed(relative_change(r.acc, in->acc), 6);
    out << '\n';
  };
  for (const auto& res : results) {
    row(res.tag, "IN", res.in, nullptr);
    if (res.out) row(res.tag, "OUT", *res.out, &res.in);
  }
}

std::string file_tag(std::string_view tag) {
  std::string out;
  for (unsigned char c : tag) out += std::isalnum(c) ? static_cast<char>(std::tolower(c)) : '_';
  return out.empty() ? "fold" : out;
}

void write_experiment_outputs(const std::vector<FoldResult>& results, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "models");
  {
    std::ofstream out(dir / "report.csv", std::ios::binary);
    if (!out) throw IoError("cannot write " + (dir / "report.csv").string());
    write_report_csv(results, out);
  }
  for (const auto& res : results) {
    const std::string tag = file_tag(res.tag);
    auto confusion = [&](std::string_view split, const EvalReport& r) {
      const auto path = dir / ("confusion_" + tag + "_" + std::string(split) + ".csv");
      std::ofstream out(path, std::ios::binary);
      if (!out) throw IoError("cannot write " + path.string());
      write_confusion_csv(r.confusion, out);
    };
    confusion("IN", res.in);
    if (res.out) confusion("OUT", *res.out);
    write_model_file(res.model, dir / "models" / (tag + ".json"));
  }
}

}  // namespace textseam
