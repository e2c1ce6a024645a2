#include "textseam/features.hpp"

#include <charconv>
#include <cmath>
#include <ostream>

#include "textseam/csv.hpp"
#include "textseam/error.hpp"

namespace textseam {

std::string_view to_string(FeatureKind kind) {
  return kind == FeatureKind::perplexity ? "perplexity" : "length";
}

FeatureKind parse_feature_kind(std::string_view text) {
  if (text == "perplexity") return FeatureKind::perplexity;
  if (text == "length") return FeatureKind::length;
  throw ValidationError("unknown feature kind '" + std::string(text) + "'");
}

FeatureVector sentence_perplexities(const TraceMeta& trace, PerplexityMode mode) {
  FeatureVector out{trace.sample_id, FeatureKind::perplexity, {}};
  std::size_t w = 0;
  for (std::size_t s = 0; s < kSentences; ++s) {
    const TokenSpan sentence = trace.sentence_spans[s];
    double word_ppl_sum = 0.0;
    std::size_t scored_words = 0;
    double pooled_sum = 0.0;
    std::size_t pooled_tokens = 0;

    while (w < trace.word_spans.size() && trace.word_spans[w].start < sentence.start) ++w;
    for (; w < trace.word_spans.size() && sentence.contains(trace.word_spans[w]); ++w) {
      double sum = 0.0;
      std::size_t scored = 0;
      for (std::uint32_t t = trace.word_spans[w].start; t < trace.word_spans[w].end; ++t) {
        if (const auto& lp = trace.token_logprobs[t]) {
          sum += *lp;
          ++scored;
        }
      }
      if (scored == 0) continue;
      word_ppl_sum += std::exp(-sum / static_cast<double>(scored));
      ++scored_words;
      pooled_sum += sum;
      pooled_tokens += scored;
    }
    if (scored_words == 0)
      throw NumericError("unscoreable sentence " + std::to_string(s) + " in trace '" + trace.sample_id + "'");
    out.values[s] = mode == PerplexityMode::word_mean
                        ? word_ppl_sum / static_cast<double>(scored_words)
                        : std::exp(-pooled_sum / static_cast<double>(pooled_tokens));
  }
  return out;
}

FeatureVector sentence_lengths(const TraceMeta& trace) {
  FeatureVector out{trace.sample_id, FeatureKind::length, {}};
  for (std::size_t s = 0; s < kSentences; ++s) out.values[s] = static_cast<double>(trace.sentence_spans[s].size());
  return out;
}

void write_features_csv(std::span<const FeatureVector> features, std::ostream& out) {
  out << "id,kind";
  for (std::size_t i = 0; i < kSentences; ++i) out << ",v" << i;
  out << '\n';
  for (const auto& f : features) {
    out << csv::escape(f.sample_id) << ',' << to_string(f.kind);
    for (double v : f.values) out << ',' << csv::format_double(v);
    out << '\n';
  }
}

std::vector<FeatureVector> read_features_csv(std::istream& in) {
  csv::Reader reader(in);
  std::vector<std::string> fields;
  if (!reader.next(fields) || fields.size() != kSentences + 2 || fields[0] != "id")
    throw ParseError("features.csv header must be id,kind,v0..v9", 0);
  std::vector<FeatureVector> out;
  std::size_t row = 0;
  while (reader.next(fields)) {
    ++row;
    if (fields.size() != kSentences + 2) throw ParseError("expected 12 fields", row);
    FeatureVector f;
    f.sample_id = fields[0];
    try {
      f.kind = parse_feature_kind(fields[1]);
    } catch (const ValidationError& e) {
      throw ParseError(e.what(), row);
    }
    for (std::size_t i = 0; i < kSentences; ++i) {
      const std::string& text = fields[i + 2];
      auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), f.values[i]);
      if (ec != std::errc{} || ptr != text.data() + text.size()) throw ParseError("bad value '" + text + "'", row);
    }
    out.push_back(std::move(f));
  }
  return out;
}

}  // namespace textseam
