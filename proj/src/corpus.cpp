#include "textseam/corpus.hpp"

#include <unicode/normalizer2.h>
#include <unicode/unistr.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <nlohmann/json.hpp>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

#include "textseam/csv.hpp"
#include "textseam/error.hpp"
#include "textseam/trace.hpp"

namespace textseam {

namespace {

using nlohmann::json;

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::string lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string nfc(std::string_view text) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* norm = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw Error("ICU NFC normalizer unavailable");
  const auto src = icu::UnicodeString::fromUTF8(icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  const icu::UnicodeString normalized = norm->normalize(src, status);
  if (U_FAILURE(status)) return std::string(text);
  std::string out;
  normalized.toUTF8String(out);
  return out;
}

void append_collapsed(std::string& out, std::string_view text) {
  bool pending_space = false;
  for (char c : text) {
    if (is_space(c)) {
      pending_space = true;
      continue;
    }
    if (pending_space && !out.empty() && out.back() != ' ') out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
}

int parse_int(std::string_view text, std::string_view field, std::size_t row) {
  text = trim(text);
  int value = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end || text.empty())
    throw ParseError(std::string(field) + " is not an integer: '" + std::string(text) + "'", row);
  return value;
}

int decode_label(int raw, LabelEncoding encoding, std::string_view field, std::size_t row) {
  int label = raw;
  if (encoding == LabelEncoding::human_count) {
    if (raw < 1 || raw > kNumLabels)
      throw ParseError(std::string(field) + " " + std::to_string(raw) +
                           " outside human-count range [1,10]",
                       row);
    label = raw - 1;
  }
  if (label < 0 || label >= kNumLabels)
    throw ParseError(std::string(field) + " " + std::to_string(raw) + " outside [0,9]", row);
  return label;
}

std::string sentence_count_message(std::size_t count) {
  return "sentence count " + std::to_string(count) + " != " + std::to_string(kSentences);
}

void check_unique_ids(const Corpus& corpus) {
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < corpus.samples.size(); ++i) {
    if (!seen.insert(corpus.samples[i].id).second)
      throw ParseError("duplicate id '" + corpus.samples[i].id + "'", i + 1);
  }
}

}  // namespace

std::string_view to_string(Topic topic) {
  switch (topic) {
    case Topic::PresidentialSpeeches: return "PresidentialSpeeches";
    case Topic::Recipes: return "Recipes";
    case Topic::NewYorkTimes: return "NewYorkTimes";
    case Topic::ShortStories: return "ShortStories";
  }
  return "unknown";
}

Topic parse_topic(std::string_view text) {
  std::string key;
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c)))
      key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  static const std::unordered_map<std::string, Topic> aliases = {
      {"presidentialspeeches", Topic::PresidentialSpeeches},
      {"presidentialspeech", Topic::PresidentialSpeeches},
      {"speeches", Topic::PresidentialSpeeches},
      {"recipes", Topic::Recipes},
      {"recipe", Topic::Recipes},
      {"newyorktimes", Topic::NewYorkTimes},
      {"nyt", Topic::NewYorkTimes},
      {"news", Topic::NewYorkTimes},
      {"shortstories", Topic::ShortStories},
      {"shortstory", Topic::ShortStories},
      {"stories", Topic::ShortStories},
  };
  auto it = aliases.find(key);
  if (it == aliases.end()) throw ValidationError("unknown topic '" + std::string(text) + "'");
  return it->second;
}

std::string BoundarySample::joined_text() const {
  std::string out;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    if (i) out.push_back(' ');
    out += sentences[i];
  }
  return out;
}

CorpusFormat format_from_extension(const std::filesystem::path& path) {
  const std::string ext = lower_ascii(path.extension().string());
  if (ext == ".csv") return CorpusFormat::csv;
  if (ext == ".jsonl" || ext == ".json" || ext == ".ndjson") return CorpusFormat::jsonl;
  throw ValidationError("cannot infer corpus format from '" + path.string() +
                        "' (expected .csv or .jsonl)");
}

Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format,
                   const LoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot open corpus file '" + path.string() + "'");
  const std::string name = path.stem().string();
  return format == CorpusFormat::csv ? parse_corpus_csv(in, name, options)
                                     : parse_corpus_jsonl(in, name, options);
}

Corpus load_corpus(const std::filesystem::path& path, const LoadOptions& options) {
  return load_corpus(path, format_from_extension(path), options);
}

Corpus parse_corpus_csv(std::istream& in, std::string name, const LoadOptions& options) {
  csv::Reader reader(in);
  std::vector<std::string> header;
  if (!reader.next(header)) throw ParseError("missing CSV header", 0);

  std::unordered_map<std::string, std::size_t> column;
  for (std::size_t i = 0; i < header.size(); ++i) {
    std::string key = lower_ascii(trim(header[i]));
    if (i == 0 && key.starts_with("\xef\xbb\xbf")) key.erase(0, 3);  // UTF-8 BOM
    column.emplace(std::move(key), i);
  }
  auto require = [&](const std::string& key) {
    auto it = column.find(key);
    if (it == column.end()) throw ParseError("missing required column '" + key + "'", 0);
    return it->second;
  };
  const std::size_t id_col = require("id");
  const std::size_t label_col = require("label");
  const std::size_t topic_col = require("topic");
  const std::size_t generator_col = require("generator");
  const auto human_it = column.find("human_label");

  std::vector<std::size_t> sentence_cols;
  for (std::size_t s = 1;; ++s) {
    auto it = column.find("s" + std::to_string(s));
    if (it == column.end()) break;
    sentence_cols.push_back(it->second);
  }

  Corpus corpus{std::move(name), {}};
  std::vector<std::string> fields;
  std::size_t row = 0;
  while (reader.next(fields)) {
    if (fields.size() == 1 && trim(fields[0]).empty()) continue;  // blank line
    ++row;
    if (fields.size() < header.size())
      throw ParseError("expected " + std::to_string(header.size()) + " fields, got " +
                           std::to_string(fields.size()),
                       row);
    if (sentence_cols.size() != kSentences) throw ParseError(sentence_count_message(sentence_cols.size()), row);

    BoundarySample sample;
    sample.id = std::string(trim(fields[id_col]));
    if (sample.id.empty()) throw ParseError("empty id", row);
    for (std::size_t s = 0; s < kSentences; ++s) sample.sentences[s] = fields[sentence_cols[s]];
    sample.label = decode_label(parse_int(fields[label_col], "label", row), options.encoding, "label", row);
    try {
      sample.topic = parse_topic(fields[topic_col]);
    } catch (const ValidationError& e) {
      throw ParseError(e.what(), row);
    }
    sample.generator = std::string(trim(fields[generator_col]));
    if (human_it != column.end() && !trim(fields[human_it->second]).empty()) {
      sample.human_label = decode_label(parse_int(fields[human_it->second], "human_label", row),
                                        options.encoding, "human_label", row);
    }
    corpus.samples.push_back(std::move(sample));
  }
  check_unique_ids(corpus);
  return corpus;
}

Corpus parse_corpus_jsonl(std::istream& in, std::string name, const LoadOptions& options) {
  Corpus corpus{std::move(name), {}};
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(std::string("invalid JSON: ") + e.what(), row);
    }
    try {
      BoundarySample sample;
      sample.id = obj.at("id").get<std::string>();
      if (sample.id.empty()) throw ParseError("empty id", row);
      const auto& sentences = obj.at("sentences");
      if (!sentences.is_array()) throw ParseError("'sentences' must be an array", row);
      if (sentences.size() != kSentences) throw ParseError(sentence_count_message(sentences.size()), row);
      for (std::size_t s = 0; s < kSentences; ++s) sample.sentences[s] = sentences[s].get<std::string>();
      sample.label = decode_label(obj.at("label").get<int>(), options.encoding, "label", row);
      sample.topic = parse_topic(obj.at("topic").get<std::string>());
      sample.generator = obj.at("generator").get<std::string>();
      if (auto it = obj.find("human_label"); it != obj.end() && !it->is_null()) {
        sample.human_label = decode_label(it->get<int>(), options.encoding, "human_label", row);
      }
      corpus.samples.push_back(std::move(sample));
    } catch (const ParseError&) {
      throw;
    } catch (const ValidationError& e) {
      throw ParseError(e.what(), row);
    } catch (const json::exception& e) {
      throw ParseError(std::string("bad field: ") + e.what(), row);
    }
  }
  check_unique_ids(corpus);
  return corpus;
}

void write_corpus_jsonl(const Corpus& corpus, std::ostream& out) {
  for (const auto& s : corpus.samples) {
    json obj;
    obj["id"] = s.id;
    obj["sentences"] = s.sentences;
    obj["label"] = s.label;
    obj["topic"] = to_string(s.topic);
    obj["generator"] = s.generator;
    obj["human_label"] = s.human_label ? json(*s.human_label) : json(nullptr);
    out << obj.dump() << '\n';
  }
}

std::size_t count_words(std::string_view text) {
  std::size_t words = 0;
  bool in_word = false;
  for (char c : text) {
    if (is_space(c)) {
      in_word = false;
    } else if (!in_word) {
      in_word = true;
      ++words;
    }
  }
  return words;
}

std::string dedup_key(const BoundarySample& sample) {
  std::string key;
  for (const auto& sentence : sample.sentences) {
    if (!key.empty()) key.push_back(' ');
    append_collapsed(key, trim(nfc(sentence)));
  }
  return key;
}

Corpus preprocess(const Corpus& corpus, const PreprocessOptions& options, PreprocessSummary* summary) {
  static constexpr std::string_view kDisclaimer = "as an ai language model";
  PreprocessSummary counts;
  counts.input = corpus.samples.size();

  Corpus out{corpus.name, {}};
  std::unordered_set<std::string> seen;
  for (const auto& sample : corpus.samples) {
    if (!seen.insert(dedup_key(sample)).second) {
      ++counts.duplicates;
      continue;
    }
    const bool has_empty = std::any_of(sample.sentences.begin(), sample.sentences.end(),
                                       [](const std::string& s) { return trim(s).empty(); });
    if (has_empty) {
      ++counts.empty_sentences;
      continue;
    }
    if (options.drop_ai_disclaimers &&
        lower_ascii(sample.joined_text()).find(kDisclaimer) != std::string::npos) {
      ++counts.disclaimers;
      continue;
    }
    if (options.drop_short_samples &&
        std::any_of(sample.sentences.begin(), sample.sentences.end(), [&](const std::string& s) {
          return count_words(s) < options.min_words;
        })) {
      ++counts.short_samples;
      continue;
    }
    out.samples.push_back(sample);
  }
  counts.retained = out.samples.size();
  if (summary) *summary = counts;
  return out;
}

StatsReport corpus_stats(const Corpus& corpus, const TraceStore* traces) {
  if (corpus.samples.empty()) throw ValidationError("corpus_stats: empty corpus");
  StatsReport report;
  report.samples = corpus.samples.size();
  if (traces) report.length_unit = "tokens";
  for (const auto& s : corpus.samples) {
    ++report.topics[std::string(to_string(s.topic))];
    ++report.generators[s.generator];
    ++report.labels[static_cast<std::size_t>(s.label)];
    if (traces) {
      const TraceMeta meta = traces->meta(s.id);
      for (std::size_t p = 0; p < kSentences; ++p) ++report.lengths[p][meta.sentence_spans[p].size()];
    } else {
      for (std::size_t p = 0; p < kSentences; ++p) ++report.lengths[p][count_words(s.sentences[p])];
    }
  }
  return report;
}

void write_stats_csv(const StatsReport& report, std::ostream& out) {
  out << "section,key,value\n";
  out << "count,samples," << report.samples << '\n';
  out << "count,length_unit," << report.length_unit << '\n';
  for (const auto& [topic, n] : report.topics) out << "topic," << csv::escape(topic) << ',' << n << '\n';
  for (const auto& [gen, n] : report.generators) out << "generator," << csv::escape(gen) << ',' << n << '\n';
  for (std::size_t k = 0; k < report.labels.size(); ++k) out << "label," << k << ',' << report.labels[k] << '\n';
  for (std::size_t p = 0; p < kSentences; ++p) {
    for (const auto& [len, n] : report.lengths[p]) out << "length_s" << p << ',' << len << ',' << n << '\n';
  }
}

}  // namespace textseam
