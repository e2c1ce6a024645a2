#pragma once

#include <cstddef>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace textseam::csv {

// RFC 4180 reader: quoted fields, doubled quotes, embedded newlines, CRLF.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  // Reads the next record into `fields`. Returns false at end of input.
  // Throws ParseError on an unterminated quoted field.
  bool next(std::vector<std::string>& fields);

  // 1-based index of the record most recently returned by next().
  std::size_t record_index() const noexcept { return record_; }

 private:
  std::istream& in_;
  std::size_t record_ = 0;
};

// Quotes a field when it contains a comma, quote, or line break.
std::string escape(std::string_view field);

// Shortest representation that round-trips to the same double.
std::string format_double(double v);

// Fixed-point with `digits` decimals.
std::string format_fixed(double v, int digits);

}  // namespace textseam::csv
