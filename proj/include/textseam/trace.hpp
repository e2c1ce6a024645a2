#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "textseam/types.hpp"

namespace textseam {

// `.emb` header: "ATBD", u32 version, u32 n_tokens, u32 dim, then f32 payload (all little-endian).
inline constexpr std::uint8_t kEmbMagic[4] = {0x41, 0x54, 0x42, 0x44};
inline constexpr std::uint32_t kEmbVersion = 1;
inline constexpr std::size_t kEmbHeaderBytes = 16;
inline constexpr std::string_view kTraceIndexFile = "traces.jsonl";

// Everything in a trace except the embedding payload, i.e. one traces.jsonl line.
struct TraceMeta {
  std::string sample_id;
  std::uint32_t n_tokens = 0;
  std::uint32_t dim = 0;
  std::string emb_file;
  // Natural-log probabilities; entry 0 is always absent.
  std::vector<std::optional<double>> token_logprobs;
  SentenceSpans sentence_spans{};
  std::vector<TokenSpan> word_spans;
};

struct TokenTrace {
  std::string sample_id;
  std::uint32_t n_tokens = 0;
  std::uint32_t dim = 0;
  std::vector<float> embeddings;  // n_tokens x dim, row-major
  std::vector<std::optional<double>> token_logprobs;
  SentenceSpans sentence_spans{};
  std::vector<TokenSpan> word_spans;

  std::span<const float> embedding(std::size_t token) const {
    return {embeddings.data() + token * dim, dim};
  }
  TraceMeta meta() const;
};

// Throws ValidationError naming the first violated invariant.
void validate_trace_meta(const TraceMeta& meta);
void validate_trace(const TokenTrace& trace);

// Validates, writes `<id>.emb` and appends one line to traces.jsonl. The caller
// serializes concurrent writers to the same directory.
void write_trace(const TokenTrace& trace, const std::filesystem::path& dir);

// Reads the last traces.jsonl entry for `sample_id` and its embedding file.
TokenTrace read_trace(const std::filesystem::path& dir, std::string_view sample_id);

// Raw .emb codec.
void write_emb(std::ostream& out, std::uint32_t n_tokens, std::uint32_t dim, std::span<const float> payload);
struct EmbPayload {
  std::uint32_t n_tokens = 0;
  std::uint32_t dim = 0;
  std::vector<float> values;
};
// Throws ValidationError on bad magic, unsupported version, or a payload size
// that differs from the header promise.
EmbPayload read_emb(std::istream& in);

std::string trace_meta_to_json_line(const TraceMeta& meta);
TraceMeta trace_meta_from_json_line(std::string_view line);

// Index over a trace directory. Later traces.jsonl lines for the same id
// replace earlier ones. Reads are const and safe to run concurrently.
class TraceStore {
 public:
  TraceStore() = default;
  explicit TraceStore(std::filesystem::path dir);

  const std::filesystem::path& dir() const noexcept { return dir_; }
  bool contains(std::string_view sample_id) const;
  std::size_t size() const noexcept { return entries_.size(); }
  std::vector<std::string> ids() const;

  const TraceMeta& meta(std::string_view sample_id) const;
  TokenTrace load(std::string_view sample_id) const;

  // In-memory store (no directory); load() returns the stored traces.
  static TraceStore from_traces(std::vector<TokenTrace> traces);

 private:
  std::filesystem::path dir_;
  std::map<std::string, TraceMeta, std::less<>> entries_;
  std::map<std::string, TokenTrace, std::less<>> in_memory_;
};

}  // namespace textseam
