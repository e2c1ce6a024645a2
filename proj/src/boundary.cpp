#include "textseam/boundary.hpp"

#include <algorithm>
#include <cmath>

#include "textseam/error.hpp"

namespace textseam {

std::array<double, kNumLabels> boundary_log_likelihoods(std::span<const double> p) {
  if (p.size() != kSentences) throw ValidationError("boundary: expected 10 probabilities, got " + std::to_string(p.size()));
  std::array<double, kSentences> log_human{}, log_fake{};
  for (std::size_t j = 0; j < kSentences; ++j) {
    if (!std::isfinite(p[j])) throw ValidationError("boundary: non-finite probability");
    const double q = std::clamp(p[j], kProbEpsilon, 1.0 - kProbEpsilon);
    log_human[j] = std::log1p(-q);
    log_fake[j] = std::log(q);
  }
  std::array<double, kNumLabels> out{};
  for (int k = 0; k < kNumLabels; ++k) {
    double l = 0.0;
    for (std::size_t j = 0; j < kSentences; ++j) l += static_cast<int>(j) <= k ? log_human[j] : log_fake[j];
    out[static_cast<std::size_t>(k)] = l;
  }
  return out;
}

int boundary_from_probs(std::span<const double> p) {
  const auto l = boundary_log_likelihoods(p);
  return static_cast<int>(std::max_element(l.begin(), l.end()) - l.begin());
}

int regression_to_label(double yhat) {
  if (std::isnan(yhat)) return 0;
  const double r = std::round(std::clamp(yhat, -1.0, static_cast<double>(kNumLabels)));
  return static_cast<int>(std::clamp(r, 0.0, static_cast<double>(kNumLabels - 1)));
}

SentenceValues sentence_probs_from_windows(std::span<const double> window_probs,
                                           std::span<const std::size_t> centers, const SentenceSpans& spans) {
  if (window_probs.empty()) throw ValidationError("no windows to map onto sentences");
  if (window_probs.size() != centers.size()) throw ValidationError("window probabilities and centers differ in length");
  SentenceValues out{};
  for (std::size_t s = 0; s < kSentences; ++s) {
    const TokenSpan& span = spans[s];
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t w = 0; w < centers.size(); ++w) {
      if (span.contains(centers[w])) {
        sum += window_probs[w];
        ++count;
      }
    }
    if (count > 0) {
      out[s] = sum / static_cast<double>(count);
      continue;
    }
    std::size_t nearest = 0, best = static_cast<std::size_t>(-1);
    for (std::size_t w = 0; w < centers.size(); ++w) {
      const std::size_t c = centers[w];
      const std::size_t d = c < span.start ? span.start - c : c - span.end + 1;
      if (d < best) {
        best = d;
        nearest = w;
      }
    }
    out[s] = window_probs[nearest];
  }
  return out;
}

}  // namespace textseam
