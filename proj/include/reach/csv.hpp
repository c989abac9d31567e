#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace reach {

/// RFC 4180 reader: quoted fields, doubled quotes, CRLF, a UTF-8 BOM on the
/// header. Rows are returned as raw strings.
class CsvReader {
 public:
  explicit CsvReader(const std::filesystem::path& path);

  const std::vector<std::string>& header() const { return header_; }
  std::optional<std::size_t> column(std::string_view name) const;
  std::size_t require_column(std::string_view name) const;

  /// Next data row, padded with empty fields to the header width. Blank
  /// lines are skipped.
  bool next(std::vector<std::string>& row);

  /// 1-based line number where the last returned row started.
  std::size_t line() const { return row_line_; }
  const std::filesystem::path& path() const { return path_; }

 private:
  bool read_record(std::vector<std::string>& fields);

  std::filesystem::path path_;
  std::ifstream in_;
  std::vector<std::string> header_;
  std::size_t line_ = 1;
  std::size_t row_line_ = 0;
};

/// Quotes a field when it contains a delimiter, quote or newline.
std::string csv_field(std::string_view value);

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

/// Strict full-string parse; nullopt on junk or empty input.
std::optional<double> parse_double(std::string_view text);

}  // namespace reach
