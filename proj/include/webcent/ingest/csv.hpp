#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace webcent::ingest {

// Splits one RFC 4180 record. Returns nullopt on an unterminated quote.
std::optional<std::vector<std::string>> split_csv(std::string_view line, char sep = ',');

// Quotes a field when it contains the separator, a quote, or a line break.
std::string csv_field(std::string_view field, char sep = ',');

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields, char sep = ',');

struct LineError {
  std::size_t line = 0;
  std::string message;
};

// Row-level outcome of loading a line-oriented input.
struct ParseReport {
  std::string source;
  std::size_t rows = 0;  // data rows seen, excluding headers/comments/blanks
  std::vector<LineError> errors;

  void reject(std::size_t line, std::string message) { errors.push_back({line, std::move(message)}); }
  double error_rate() const;
  // Throws DataError listing the offending lines when more than `max_rate`
  // of the rows were rejected.
  void enforce(double max_rate) const;
  std::string summary(std::size_t max_lines = 10) const;
};

}  // namespace webcent::ingest
