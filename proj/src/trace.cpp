#include "textseam/trace.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "textseam/error.hpp"

namespace textseam {

namespace {

using ojson = nlohmann::ordered_json;

void put_u32(std::ostream& out, std::uint32_t v) {
  const char bytes[4] = {static_cast<char>(v & 0xffu), static_cast<char>((v >> 8) & 0xffu),
                         static_cast<char>((v >> 16) & 0xffu), static_cast<char>((v >> 24) & 0xffu)};
  out.write(bytes, 4);
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void check_sample_id(std::string_view id) {
  if (id.empty()) throw ValidationError("trace: empty sample id");
  if (id == "." || id == ".." || id.find_first_of("/\\") != std::string_view::npos ||
      id.find('\0') != std::string_view::npos)
    throw ValidationError("trace: sample id '" + std::string(id) + "' is not a safe file name");
}

ojson spans_to_json(std::span<const TokenSpan> spans) {
  ojson arr = ojson::array();
  for (const auto& s : spans) arr.push_back({s.start, s.end});
  return arr;
}

TokenSpan span_from_json(const ojson& j) {
  if (!j.is_array() || j.size() != 2) throw ValidationError("trace: span must be a [start,end] pair");
  return {j[0].get<std::uint32_t>(), j[1].get<std::uint32_t>()};
}

}  // namespace

TraceMeta TokenTrace::meta() const {
  return {sample_id, n_tokens, dim, sample_id + ".emb", token_logprobs, sentence_spans, word_spans};
}

void validate_trace_meta(const TraceMeta& meta) {
  check_sample_id(meta.sample_id);
  const std::string where = "trace '" + meta.sample_id + "': ";
  if (meta.dim == 0) throw ValidationError(where + "dim must be positive");
  if (meta.token_logprobs.size() != meta.n_tokens)
    throw ValidationError(where + "token_logprobs has " + std::to_string(meta.token_logprobs.size()) +
                          " entries for " + std::to_string(meta.n_tokens) + " tokens");
  if (!meta.token_logprobs.empty() && meta.token_logprobs[0].has_value())
    throw ValidationError(where + "token 0 must have no log-probability");
  for (std::size_t t = 0; t < meta.token_logprobs.size(); ++t) {
    const auto& lp = meta.token_logprobs[t];
    if (lp && (!std::isfinite(*lp) || *lp > 0.0))
      throw ValidationError(where + "log-probability of token " + std::to_string(t) + " is not finite and <= 0");
  }

  std::uint32_t cursor = 0;
  for (std::size_t s = 0; s < kSentences; ++s) {
    const TokenSpan& span = meta.sentence_spans[s];
    if (span.empty()) throw ValidationError(where + "sentence span " + std::to_string(s) + " is empty");
    if (span.start != cursor)
      throw ValidationError(where + "sentence spans overlap or leave a gap at sentence " + std::to_string(s));
    cursor = span.end;
  }
  if (cursor != meta.n_tokens)
    throw ValidationError(where + "sentence spans cover [0," + std::to_string(cursor) + ") but n_tokens is " +
                          std::to_string(meta.n_tokens));

  std::uint32_t word_floor = 0;
  std::size_t sentence = 0;
  for (std::size_t w = 0; w < meta.word_spans.size(); ++w) {
    const TokenSpan& span = meta.word_spans[w];
    if (span.empty()) throw ValidationError(where + "word span " + std::to_string(w) + " is empty");
    if (span.start < word_floor)
      throw ValidationError(where + "word spans unsorted or overlapping at word " + std::to_string(w));
    while (sentence < kSentences && meta.sentence_spans[sentence].end <= span.start) ++sentence;
    if (sentence == kSentences || !meta.sentence_spans[sentence].contains(span))
      throw ValidationError(where + "word span " + std::to_string(w) + " crosses a sentence boundary");
    word_floor = span.end;
  }
}

void validate_trace(const TokenTrace& trace) {
  validate_trace_meta(trace.meta());
  const std::size_t expected = static_cast<std::size_t>(trace.n_tokens) * trace.dim;
  if (trace.embeddings.size() != expected)
    throw ValidationError("trace '" + trace.sample_id + "': embedding payload has " +
                          std::to_string(trace.embeddings.size()) + " values, expected " + std::to_string(expected));
  for (float v : trace.embeddings) {
    if (!std::isfinite(v)) throw ValidationError("trace '" + trace.sample_id + "': non-finite embedding value");
  }
}

void write_emb(std::ostream& out, std::uint32_t n_tokens, std::uint32_t dim, std::span<const float> payload) {
  out.write(reinterpret_cast<const char*>(kEmbMagic), 4);
  put_u32(out, kEmbVersion);
  put_u32(out, n_tokens);
  put_u32(out, dim);
  for (float v : payload) put_u32(out, std::bit_cast<std::uint32_t>(v));
}

EmbPayload read_emb(std::istream& in) {
  unsigned char header[kEmbHeaderBytes];
  in.read(reinterpret_cast<char*>(header), kEmbHeaderBytes);
  if (in.gcount() != static_cast<std::streamsize>(kEmbHeaderBytes))
    throw ValidationError("truncated header (size != header promise)");
  if (!std::equal(header, header + 4, kEmbMagic)) throw ValidationError("bad magic");
  const std::uint32_t version = get_u32(header + 4);
  if (version != kEmbVersion) throw ValidationError("unsupported .emb version " + std::to_string(version));

  EmbPayload out;
  out.n_tokens = get_u32(header + 8);
  out.dim = get_u32(header + 12);
  const std::size_t count = static_cast<std::size_t>(out.n_tokens) * out.dim;
  std::vector<unsigned char> bytes(count * 4);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (static_cast<std::size_t>(in.gcount()) != bytes.size() || in.peek() != std::char_traits<char>::eof())
    throw ValidationError("truncated payload (size != header promise)");
  out.values.resize(count);
  for (std::size_t i = 0; i < count; ++i) out.values[i] = std::bit_cast<float>(get_u32(bytes.data() + 4 * i));
  return out;
}

std::string trace_meta_to_json_line(const TraceMeta& meta) {
  ojson obj;
  obj["id"] = meta.sample_id;
  obj["n_tokens"] = meta.n_tokens;
  obj["dim"] = meta.dim;
  obj["emb_file"] = meta.emb_file;
  ojson lps = ojson::array();
  for (const auto& lp : meta.token_logprobs) lps.push_back(lp ? ojson(*lp) : ojson(nullptr));
  obj["token_logprobs"] = std::move(lps);
  obj["sentence_token_spans"] = spans_to_json(meta.sentence_spans);
  obj["word_token_spans"] = spans_to_json(meta.word_spans);
  return obj.dump();
}

TraceMeta trace_meta_from_json_line(std::string_view line) {
  ojson obj;
  try {
    obj = ojson::parse(line);
  } catch (const ojson::parse_error& e) {
    throw ValidationError(std::string("trace index: invalid JSON: ") + e.what());
  }
  try {
    TraceMeta meta;
    meta.sample_id = obj.at("id").get<std::string>();
    meta.n_tokens = obj.at("n_tokens").get<std::uint32_t>();
    meta.dim = obj.at("dim").get<std::uint32_t>();
    meta.emb_file = obj.value("emb_file", meta.sample_id + ".emb");
    for (const auto& lp : obj.at("token_logprobs"))
      meta.token_logprobs.push_back(lp.is_null() ? std::nullopt : std::optional<double>(lp.get<double>()));
    const auto& sentences = obj.at("sentence_token_spans");
    if (sentences.size() != kSentences)
      throw ValidationError("trace '" + meta.sample_id + "': expected 10 sentence spans, got " +
                            std::to_string(sentences.size()));
    for (std::size_t s = 0; s < kSentences; ++s) meta.sentence_spans[s] = span_from_json(sentences[s]);
    for (const auto& w : obj.at("word_token_spans")) meta.word_spans.push_back(span_from_json(w));
    return meta;
  } catch (const ojson::exception& e) {
    throw ValidationError(std::string("trace index: bad field: ") + e.what());
  }
}

void write_trace(const TokenTrace& trace, const std::filesystem::path& dir) {
  validate_trace(trace);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create trace directory '" + dir.string() + "': " + ec.message());

  const TraceMeta meta = trace.meta();
  const auto emb_path = dir / meta.emb_file;
  {
    std::ofstream out(emb_path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + emb_path.string() + "' for writing");
    write_emb(out, trace.n_tokens, trace.dim, trace.embeddings);
    if (!out) throw IoError("write failed for '" + emb_path.string() + "'");
  }
  const auto index_path = dir / kTraceIndexFile;
  std::ofstream index(index_path, std::ios::binary | std::ios::app);
  if (!index) throw IoError("cannot open '" + index_path.string() + "' for appending");
  index << trace_meta_to_json_line(meta) << '\n';
  if (!index) throw IoError("write failed for '" + index_path.string() + "'");
}

TokenTrace read_trace(const std::filesystem::path& dir, std::string_view sample_id) {
  return TraceStore(dir).load(sample_id);
}

TraceStore::TraceStore(std::filesystem::path dir) : dir_(std::move(dir)) {
  const auto index_path = dir_ / kTraceIndexFile;
  std::ifstream in(index_path, std::ios::binary);
  if (!in) throw NotFoundError("missing trace index '" + index_path.string() + "'");
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++row;
    try {
      TraceMeta meta = trace_meta_from_json_line(line);
      validate_trace_meta(meta);
      std::string id = meta.sample_id;
      entries_.insert_or_assign(std::move(id), std::move(meta));
    } catch (const ValidationError& e) {
      throw ParseError(e.what(), row);
    }
  }
}

TraceStore TraceStore::from_traces(std::vector<TokenTrace> traces) {
  TraceStore store;
  for (auto& t : traces) {
    validate_trace(t);
    store.entries_.insert_or_assign(t.sample_id, t.meta());
    std::string id = t.sample_id;
    store.in_memory_.insert_or_assign(std::move(id), std::move(t));
  }
  return store;
}

bool TraceStore::contains(std::string_view sample_id) const { return entries_.find(sample_id) != entries_.end(); }

std::vector<std::string> TraceStore::ids() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [id, meta] : entries_) out.push_back(id);
  return out;
}

const TraceMeta& TraceStore::meta(std::string_view sample_id) const {
  auto it = entries_.find(sample_id);
  if (it == entries_.end()) throw NotFoundError("no trace for id '" + std::string(sample_id) + "'");
  return it->second;
}

TokenTrace TraceStore::load(std::string_view sample_id) const {
  const TraceMeta& m = meta(sample_id);
  if (auto it = in_memory_.find(sample_id); it != in_memory_.end()) return it->second;

  const auto emb_path = dir_ / m.emb_file;
  std::ifstream in(emb_path, std::ios::binary);
  if (!in) throw NotFoundError("missing embedding file '" + emb_path.string() + "'");
  EmbPayload payload;
  try {
    payload = read_emb(in);
  } catch (const ValidationError& e) {
    throw ValidationError("'" + emb_path.string() + "': " + e.what());
  }
  if (payload.n_tokens != m.n_tokens || payload.dim != m.dim)
    throw ValidationError("'" + emb_path.string() + "': header shape " + std::to_string(payload.n_tokens) + "x" +
                          std::to_string(payload.dim) + " disagrees with index " + std::to_string(m.n_tokens) + "x" +
                          std::to_string(m.dim));
  TokenTrace trace{m.sample_id, m.n_tokens, m.dim, std::move(payload.values), m.token_logprobs, m.sentence_spans,
                   m.word_spans};
  validate_trace(trace);
  return trace;
}

}  // namespace textseam
