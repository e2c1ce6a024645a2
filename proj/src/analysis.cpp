#include "textseam/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>

#include "textseam/csv.hpp"
#include "textseam/error.hpp"
#include "textseam/experiment.hpp"
#include "textseam/features.hpp"
#include "textseam/window_model.hpp"

namespace textseam {

std::size_t Histogram::total(std::size_t column) const {
  return std::accumulate(counts[column].begin(), counts[column].end(), std::size_t{0});
}

Histogram make_histogram(double lo, double hi, std::size_t bins, std::vector<std::string> columns) {
  if (bins == 0) throw ValidationError("histogram needs at least one bin");
  if (!(hi > lo)) hi = lo + 1.0;
  Histogram h;
  for (std::size_t b = 0; b <= bins; ++b) h.edges.push_back(lo + (hi - lo) * static_cast<double>(b) / static_cast<double>(bins));
  h.counts.assign(columns.size(), std::vector<std::size_t>(bins, 0));
  h.columns = std::move(columns);
  return h;
}

void add_value(Histogram& h, std::size_t column, double value) {
  const std::size_t bins = h.edges.size() - 1;
  const double lo = h.edges.front(), hi = h.edges.back();
  double pos = (value - lo) / (hi - lo) * static_cast<double>(bins);
  if (!(pos >= 0.0)) pos = 0.0;
  const auto b = std::min(bins - 1, static_cast<std::size_t>(pos));
  ++h.counts[column][b];
}

void write_histogram_csv(const Histogram& h, std::ostream& out) {
  out << "bin_lo,bin_hi";
  for (const auto& c : h.columns) out << ',' << csv::escape(c);
  out << '\n';
  for (std::size_t b = 0; b + 1 < h.edges.size(); ++b) {
    out << csv::format_double(h.edges[b]) << ',' << csv::format_double(h.edges[b + 1]);
    for (const auto& col : h.counts) out << ',' << col[b];
    out << '\n';
  }
}

namespace {

struct Group {
  std::string kind;  // topic | generator
  std::string name;
  std::vector<char> member;
};

void write_file(const Histogram& h, const std::filesystem::path& path, std::vector<std::filesystem::path>& written) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_histogram_csv(h, out);
  written.push_back(path);
}

}  // namespace

std::vector<std::filesystem::path> emit_analysis(const Corpus& corpus, const TraceStore& traces,
                                                 const std::vector<IdSeries>* series,
                                                 const std::filesystem::path& out_dir,
                                                 const AnalysisOptions& options) {
  if (options.length_bin_width == 0 || options.length_cutoff == 0) throw ValidationError("bad length bins");
  const std::size_t n = corpus.samples.size();
  std::vector<const TraceMeta*> metas(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& id = corpus.samples[i].id;
    if (!traces.contains(id)) throw ValidationError("no trace for sample '" + id + "'");
    metas[i] = &traces.meta(id);
  }
  std::map<std::string, const IdSeries*, std::less<>> series_by_id;
  if (series) {
    for (const auto& s : *series) series_by_id[s.sample_id] = &s;
  }

  std::vector<std::optional<double>> last_ppl(n);
  double ppl_lo = std::numeric_limits<double>::infinity(), ppl_hi = -ppl_lo;
  for (std::size_t i = 0; i < n; ++i) {
    try {
      const double v = sentence_perplexities(*metas[i]).values[kSentences - 1];
      last_ppl[i] = v;
      ppl_lo = std::min(ppl_lo, v);
      ppl_hi = std::max(ppl_hi, v);
    } catch (const NumericError&) {
    }
  }
  double id_lo = std::numeric_limits<double>::infinity(), id_hi = -id_lo;
  for (const auto& [id, s] : series_by_id) {
    for (double v : s->values) {
      id_lo = std::min(id_lo, v);
      id_hi = std::max(id_hi, v);
    }
  }

  std::vector<Group> groups;
  for (Topic t : kAllTopics) {
    Group g{"topic", std::string(to_string(t)), std::vector<char>(n, 0)};
    for (std::size_t i = 0; i < n; ++i) g.member[i] = corpus.samples[i].topic == t;
    if (std::find(g.member.begin(), g.member.end(), 1) != g.member.end()) groups.push_back(std::move(g));
  }
  std::vector<std::string> generators = options.generators;
  if (generators.empty()) {
    for (const auto& s : corpus.samples) generators.push_back(s.generator);
    std::sort(generators.begin(), generators.end());
    generators.erase(std::unique(generators.begin(), generators.end()), generators.end());
  }
  for (const auto& name : generators) {
    Group g{"generator", name, std::vector<char>(n, 0)};
    for (std::size_t i = 0; i < n; ++i) g.member[i] = corpus.samples[i].generator == name;
    groups.push_back(std::move(g));
  }

  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> written;
  const std::size_t length_bins = (options.length_cutoff + options.length_bin_width - 1) / options.length_bin_width + 1;
  for (const auto& g : groups) {
    const std::string suffix = "_" + g.kind + "_" + file_tag(g.name) + ".csv";

    Histogram lengths = make_histogram(0.0, static_cast<double>(length_bins * options.length_bin_width), length_bins,
                                       {"human", "generated"});
    for (std::size_t i = 0; i < n; ++i) {
      if (!g.member[i]) continue;
      for (std::size_t s = 0; s < kSentences; ++s) {
        const double len = static_cast<double>(metas[i]->sentence_spans[s].size());
        const double clipped = std::min(len, static_cast<double>((length_bins - 1) * options.length_bin_width));
        add_value(lengths, static_cast<int>(s) <= corpus.samples[i].label ? 0 : 1, clipped);
      }
    }
    write_file(lengths, out_dir / ("lengths" + suffix), written);

    Histogram ppl = make_histogram(std::isfinite(ppl_lo) ? ppl_lo : 0.0, std::isfinite(ppl_hi) ? ppl_hi : 1.0,
                                   options.value_bins, {g.name, "rest"});
    for (std::size_t i = 0; i < n; ++i) {
      if (last_ppl[i]) add_value(ppl, g.member[i] ? 0 : 1, *last_ppl[i]);
    }
    write_file(ppl, out_dir / ("last_ppl" + suffix), written);

    if (!series_by_id.empty()) {
      Histogram ids = make_histogram(std::isfinite(id_lo) ? id_lo : 0.0, std::isfinite(id_hi) ? id_hi : 1.0,
                                     options.value_bins, {"human", "generated"});
      for (std::size_t i = 0; i < n; ++i) {
        if (!g.member[i]) continue;
        auto it = series_by_id.find(corpus.samples[i].id);
        if (it == series_by_id.end()) continue;
        const auto fake = window_labels(*it->second, corpus.samples[i].label, metas[i]->sentence_spans);
        for (std::size_t w = 0; w < fake.size(); ++w) add_value(ids, fake[w] > 0.5 ? 1 : 0, it->second->values[w]);
      }
      write_file(ids, out_dir / ("window_id" + suffix), written);
    }
  }
  return written;
}

}  // namespace textseam
