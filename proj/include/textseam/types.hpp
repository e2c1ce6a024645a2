#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

namespace textseam {

// Every sample has exactly this many sentences.
inline constexpr std::size_t kSentences = 10;
// Boundary labels live in [0, kNumLabels).
inline constexpr int kNumLabels = 10;

// Half-open token range [start, end).
struct TokenSpan {
  std::uint32_t start = 0;
  std::uint32_t end = 0;

  constexpr std::uint32_t size() const noexcept { return end - start; }
  constexpr bool empty() const noexcept { return end <= start; }
  constexpr bool contains(std::size_t token) const noexcept {
    return token >= start && token < end;
  }
  constexpr bool contains(const TokenSpan& other) const noexcept {
    return other.start >= start && other.end <= end;
  }
  friend constexpr bool operator==(const TokenSpan&, const TokenSpan&) = default;
};

using SentenceSpans = std::array<TokenSpan, kSentences>;
using SentenceValues = std::array<double, kSentences>;

}  // namespace textseam
