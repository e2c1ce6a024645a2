#pragma once

#include <array>
#include <span>

#include "textseam/types.hpp"

namespace textseam {

inline constexpr double kProbEpsilon = 1e-6;

// L(k) = sum_{j<=k} log(1 - p_j) + sum_{j>k} log p_j for k in [0,9], with each
// p_j clamped to [eps, 1 - eps]. p_j is the probability sentence j is generated.
std::array<double, kNumLabels> boundary_log_likelihoods(std::span<const double> p);

// argmax_k L(k); ties go to the smaller k. Throws ValidationError unless
// p holds exactly 10 finite values.
int boundary_from_probs(std::span<const double> p);

// Round half away from zero, then clamp to [0,9].
int regression_to_label(double yhat);

// Per sentence: mean of the window probabilities whose center token lies in
// the sentence span. A sentence with no center takes the probability of the
// window nearest to its span (interval distance; ties to the earlier window).
// Throws ValidationError for empty or mismatched inputs.
SentenceValues sentence_probs_from_windows(std::span<const double> window_probs,
                                           std::span<const std::size_t> centers, const SentenceSpans& spans);

}  // namespace textseam
