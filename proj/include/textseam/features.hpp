#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "textseam/trace.hpp"
#include "textseam/types.hpp"

namespace textseam {

enum class FeatureKind { perplexity, length };

std::string_view to_string(FeatureKind kind);
FeatureKind parse_feature_kind(std::string_view text);

// How token log-probs become a sentence perplexity.
enum class PerplexityMode {
  word_mean,  // mean over words of exp(-mean token log-prob of the word)
  pooled,     // exp(-mean log-prob over every scored token of the sentence's words)
};

struct FeatureVector {
  std::string sample_id;
  FeatureKind kind = FeatureKind::perplexity;
  SentenceValues values{};
};

// Tokens without a log-prob are left out of their word's mean; a word with no
// scored token is left out of its sentence. Throws NumericError
// "unscoreable sentence" when a sentence keeps no scored word.
FeatureVector sentence_perplexities(const TraceMeta& trace, PerplexityMode mode = PerplexityMode::word_mean);
inline FeatureVector sentence_perplexities(const TokenTrace& trace, PerplexityMode mode = PerplexityMode::word_mean) {
  return sentence_perplexities(trace.meta(), mode);
}

// Token count of each sentence span.
FeatureVector sentence_lengths(const TraceMeta& trace);
inline FeatureVector sentence_lengths(const TokenTrace& trace) { return sentence_lengths(trace.meta()); }

// features.csv: id,kind,v0..v9
void write_features_csv(std::span<const FeatureVector> features, std::ostream& out);
std::vector<FeatureVector> read_features_csv(std::istream& in);

}  // namespace textseam
