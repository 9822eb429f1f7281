#include "webcent/ingest/csv.hpp"

#include <sstream>

#include "webcent/error.hpp"

namespace webcent::ingest {

std::optional<std::vector<std::string>> split_csv(std::string_view line, char sep) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          current.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        current.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == sep) {
      fields.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (quoted) return std::nullopt;
  fields.push_back(std::move(current));
  return fields;
}

std::string csv_field(std::string_view field, char sep) {
  if (field.find_first_of(std::string{sep, '"', '\n', '\r'}) == std::string_view::npos) {
    return std::string(field);
  }
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields, char sep) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out << sep;
    out << csv_field(fields[i], sep);
  }
  out << '\n';
}

double ParseReport::error_rate() const {
  if (rows == 0) return errors.empty() ? 0.0 : 1.0;
  return static_cast<double>(errors.size()) / static_cast<double>(rows);
}

std::string ParseReport::summary(std::size_t max_lines) const {
  std::ostringstream out;
  out << source << ": " << errors.size() << " of " << rows << " rows rejected";
  for (std::size_t i = 0; i < errors.size() && i < max_lines; ++i) {
    out << "\n  line " << errors[i].line << ": " << errors[i].message;
  }
  if (errors.size() > max_lines) out << "\n  ... " << errors.size() - max_lines << " more";
  return out.str();
}

void ParseReport::enforce(double max_rate) const {
  if (error_rate() > max_rate) throw DataError(summary());
}

}  // namespace webcent::ingest
