#include "textseam/window_model.hpp"

#include "textseam/boundary.hpp"
#include "textseam/error.hpp"

namespace textseam {

Matrix window_features(const IdSeries& series, std::size_t n_tokens) {
  if (series.values.empty()) throw ValidationError("empty series '" + series.sample_id + "'");
  const double scale = n_tokens > 1 ? 1.0 / static_cast<double>(n_tokens - 1) : 0.0;
  Matrix x(series.values.size(), 2);
  for (std::size_t w = 0; w < series.values.size(); ++w) {
    x(w, 0) = series.values[w];
    x(w, 1) = static_cast<double>(series.centers[w]) * scale;
  }
  return x;
}

std::vector<double> window_labels(const IdSeries& series, int label, const SentenceSpans& spans) {
  std::vector<double> y(series.centers.size(), 0.0);
  if (label >= kNumLabels - 1) return y;
  const std::size_t first_fake = spans[static_cast<std::size_t>(label) + 1].start;
  for (std::size_t w = 0; w < y.size(); ++w) y[w] = series.centers[w] >= first_fake ? 1.0 : 0.0;
  return y;
}

std::vector<double> WindowBinaryModel::window_probs(const IdSeries& series, std::size_t n_tokens) const {
  const Matrix x = window_features(series, n_tokens);
  std::vector<double> p(x.rows());
  for (std::size_t w = 0; w < x.rows(); ++w) p[w] = gbt.predict_probability(x.row(w));
  return p;
}

WindowBinaryModel window_model_fit(std::span<const WindowTrainingSample> samples, GbtOptions options) {
  std::size_t rows = 0;
  for (const auto& s : samples) rows += s.series->values.size();
  if (rows == 0) throw ValidationError("window model: no training windows");
  Matrix x(rows, 2);
  std::vector<double> y;
  y.reserve(rows);
  std::size_t r = 0;
  for (const auto& s : samples) {
    const Matrix f = window_features(*s.series, s.meta->n_tokens);
    for (std::size_t w = 0; w < f.rows(); ++w, ++r) {
      x(r, 0) = f(w, 0);
      x(r, 1) = f(w, 1);
    }
    const auto labels = window_labels(*s.series, s.label, s.meta->sentence_spans);
    y.insert(y.end(), labels.begin(), labels.end());
  }
  options.mode = GbtMode::binary;
  return {gbt_fit(x, y, options)};
}

SentenceValues windows_to_sentence_probs(const WindowBinaryModel& model, const IdSeries& series,
                                         const TraceMeta& meta) {
  const auto probs = model.window_probs(series, meta.n_tokens);
  return sentence_probs_from_windows(probs, series.centers, meta.sentence_spans);
}

}  // namespace textseam
