#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "textseam/corpus.hpp"
#include "textseam/series.hpp"
#include "textseam/trace.hpp"

namespace textseam {

struct AnalysisOptions {
  std::vector<std::string> generators;  // empty: every generator present
  std::size_t length_bin_width = 5;     // tokens
  std::size_t length_cutoff = 100;      // last bin collects everything >= cutoff
  std::size_t value_bins = 20;          // equal-width bins for perplexity and window ID
};

// Equal-width histogram with fixed edges.
struct Histogram {
  std::vector<double> edges;                 // bins + 1 values; the last bin may be open
  std::vector<std::string> columns;          // one count column per series
  std::vector<std::vector<std::size_t>> counts;  // [column][bin]

  std::size_t total(std::size_t column) const;
};

// Bins [lo, hi) of equal width; values outside are clamped into the end bins.
Histogram make_histogram(double lo, double hi, std::size_t bins, std::vector<std::string> columns);
void add_value(Histogram& h, std::size_t column, double value);

// CSV: bin_lo,bin_hi,<columns...>
void write_histogram_csv(const Histogram& h, std::ostream& out);

// Per topic and per generator (files named <stat>_topic_<name>.csv and
// <stat>_generator_<name>.csv):
//  lengths: sentence token counts, human vs generated sentences;
//  last_ppl: last-sentence perplexity, the group vs the rest of the corpus;
//  window_id: window ID values (when series are given), human vs generated windows.
// Samples whose last sentence cannot be scored are left out of last_ppl.
// Returns the written paths.
std::vector<std::filesystem::path> emit_analysis(const Corpus& corpus, const TraceStore& traces,
                                                 const std::vector<IdSeries>* series,
                                                 const std::filesystem::path& out_dir,
                                                 const AnalysisOptions& options = {});

}  // namespace textseam
