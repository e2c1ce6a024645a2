#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "textseam/types.hpp"

namespace textseam {

class TraceStore;

enum class Topic { PresidentialSpeeches, Recipes, NewYorkTimes, ShortStories };

inline constexpr std::array<Topic, 4> kAllTopics = {
    Topic::PresidentialSpeeches, Topic::Recipes, Topic::NewYorkTimes, Topic::ShortStories};

std::string_view to_string(Topic topic);

// Accepts the canonical names plus the RoFT spellings ("Presidential Speeches",
// "new_york_times", "nyt", ...). Throws ValidationError for anything else.
Topic parse_topic(std::string_view text);

// One 10-sentence passage. Label k: sentences 0..k are human, k+1..9 generated;
// k = 9 is fully human.
struct BoundarySample {
  std::string id;
  std::array<std::string, kSentences> sentences;
  int label = kNumLabels - 1;
  Topic topic = Topic::PresidentialSpeeches;
  std::string generator;
  std::optional<int> human_label;

  // Sentences joined by single spaces, unnormalized.
  std::string joined_text() const;
};

struct Corpus {
  std::string name;
  std::vector<BoundarySample> samples;
};

enum class CorpusFormat { csv, jsonl };

// How the boundary column of the input file is encoded.
enum class LabelEncoding {
  boundary_index,  // already the [0,9] class
  human_count,     // number of human sentences N in [1,10]; class = N - 1
};

struct LoadOptions {
  LabelEncoding encoding = LabelEncoding::boundary_index;
};

CorpusFormat format_from_extension(const std::filesystem::path& path);

// Reads a corpus without filtering. Throws NotFoundError for a missing file and
// ParseError (carrying the 1-based row) for malformed or out-of-range rows.
Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format,
                   const LoadOptions& options = {});
Corpus load_corpus(const std::filesystem::path& path, const LoadOptions& options = {});

Corpus parse_corpus_csv(std::istream& in, std::string name, const LoadOptions& options = {});
Corpus parse_corpus_jsonl(std::istream& in, std::string name, const LoadOptions& options = {});

// Same schema parse_corpus_jsonl reads; labels are written in boundary-index form.
void write_corpus_jsonl(const Corpus& corpus, std::ostream& out);

struct PreprocessOptions {
  bool drop_ai_disclaimers = false;
  bool drop_short_samples = false;
  std::size_t min_words = 2;  // used when drop_short_samples is set
};

struct PreprocessSummary {
  std::size_t input = 0;
  std::size_t duplicates = 0;
  std::size_t empty_sentences = 0;
  std::size_t disclaimers = 0;
  std::size_t short_samples = 0;
  std::size_t retained = 0;

  std::size_t dropped() const noexcept {
    return duplicates + empty_sentences + disclaimers + short_samples;
  }
};

// Removes exact-text duplicates (first occurrence kept), samples with an empty
// sentence, and optionally disclaimer-bearing or short samples. Idempotent.
Corpus preprocess(const Corpus& corpus, const PreprocessOptions& options = {},
                  PreprocessSummary* summary = nullptr);

// Dedup key: NFC-normalized sentences, whitespace collapsed, joined by one space.
std::string dedup_key(const BoundarySample& sample);

// Maximal runs of non-whitespace bytes.
std::size_t count_words(std::string_view text);

struct StatsReport {
  std::size_t samples = 0;
  std::map<std::string, std::size_t> topics;
  std::map<std::string, std::size_t> generators;
  std::array<std::size_t, kNumLabels> labels{};
  // Per sentence position: length -> number of samples.
  std::array<std::map<std::size_t, std::size_t>, kSentences> lengths;
  std::string length_unit = "words";
};

// Throws ValidationError on an empty corpus. With a trace store, lengths are
// token counts from sentence spans for every sample that has a trace (all
// samples must have one); otherwise word counts.
StatsReport corpus_stats(const Corpus& corpus, const TraceStore* traces = nullptr);

// Long-form CSV: section,key,value (length sections are "length_s<pos>").
void write_stats_csv(const StatsReport& report, std::ostream& out);

}  // namespace textseam
