#pragma once

// Line-oriented reader shared by the text file formats. Blank lines and lines
// starting with '#' are skipped; every error carries the 1-based line number.

#include <charconv>
#include <cstddef>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include "ttnet/tensor_core.hpp"

namespace ttnet::detail {

class TextReader {
 public:
  explicit TextReader(std::istream& in) : in_(in) {}

  /// Next meaningful line, trimmed. False at end of input.
  bool next(std::string& line) {
    std::string raw;
    while (std::getline(in_, raw)) {
      ++line_no_;
      const auto first = raw.find_first_not_of(" \t\r");
      if (first == std::string::npos || raw[first] == '#') continue;
      const auto last = raw.find_last_not_of(" \t\r");
      line = raw.substr(first, last - first + 1);
      return true;
    }
    return false;
  }

  std::string require_line(std::string_view what) {
    std::string line;
    if (!next(line)) fail("unexpected end of input, expected " + std::string(what));
    return line;
  }

  /// Reads "keyword: v1 v2 ..." and returns the integer fields.
  std::vector<std::size_t> header(std::string_view keyword, std::size_t expected_fields) {
    const std::string line = require_line(std::string(keyword) + ":");
    return parse_header(line, keyword, expected_fields);
  }

  std::vector<std::size_t> parse_header(const std::string& line, std::string_view keyword,
                                        std::size_t expected_fields) {
    const auto words = split(line);
    if (words.empty() || words[0] != std::string(keyword) + ":") {
      fail("expected '" + std::string(keyword) + ":' header, got '" + line + "'");
    }
    if (expected_fields != 0 && words.size() - 1 != expected_fields) {
      fail("'" + std::string(keyword) + ":' needs " + std::to_string(expected_fields) +
           " fields, got " + std::to_string(words.size() - 1));
    }
    std::vector<std::size_t> out;
    for (std::size_t k = 1; k < words.size(); ++k) out.push_back(to_size(words[k]));
    return out;
  }

  /// One value per line.
  std::vector<double> values(std::size_t count) {
    std::vector<double> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
      const std::string line = require_line("value " + std::to_string(k + 1) + " of " + std::to_string(count));
      out.push_back(to_double(line));
    }
    return out;
  }

  std::size_t to_size(const std::string& word) {
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(word.data(), word.data() + word.size(), v);
    if (ec != std::errc() || ptr != word.data() + word.size()) fail("'" + word + "' is not a non-negative integer");
    return v;
  }

  double to_double(const std::string& word) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(word.data(), word.data() + word.size(), v);
    if (ec != std::errc() || ptr != word.data() + word.size()) fail("'" + word + "' is not a number");
    return v;
  }

  static std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> words;
    std::size_t pos = 0;
    while (pos < line.size()) {
      const auto start = line.find_first_not_of(" \t", pos);
      if (start == std::string::npos) break;
      const auto end = line.find_first_of(" \t", start);
      words.push_back(line.substr(start, end == std::string::npos ? std::string::npos : end - start));
      pos = end == std::string::npos ? line.size() : end;
    }
    return words;
  }

  [[noreturn]] void fail(const std::string& message) const {
    throw FormatError("line " + std::to_string(line_no_) + ": " + message);
  }

  std::size_t line_number() const noexcept { return line_no_; }

 private:
  std::istream& in_;
  std::size_t line_no_ = 0;
};

}  // namespace ttnet::detail
