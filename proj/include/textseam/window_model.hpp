#pragma once

#include <span>
#include <vector>

#include "textseam/gbt.hpp"
#include "textseam/series.hpp"
#include "textseam/trace.hpp"

namespace textseam {

// Binary GBT over per-window features [id value, center / (n_tokens - 1)].
struct WindowBinaryModel {
  GbtModel gbt;

  // Fake-probability of each window, in (0,1).
  std::vector<double> window_probs(const IdSeries& series, std::size_t n_tokens) const;
};

// One row per window: [value, center position in [0,1]].
Matrix window_features(const IdSeries& series, std::size_t n_tokens);

// 1 (fake) iff the window center is at or after the first generated
// sentence's start token; all 0 for label 9.
std::vector<double> window_labels(const IdSeries& series, int label, const SentenceSpans& spans);

struct WindowTrainingSample {
  const IdSeries* series = nullptr;
  const TraceMeta* meta = nullptr;
  int label = kNumLabels - 1;
};

// Stacks the windows of every sample and fits gbt in binary mode.
WindowBinaryModel window_model_fit(std::span<const WindowTrainingSample> samples, GbtOptions options);

// Window probabilities mapped onto the 10 sentences of the trace.
SentenceValues windows_to_sentence_probs(const WindowBinaryModel& model, const IdSeries& series,
                                         const TraceMeta& meta);

}  // namespace textseam
