#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace cardie::csv {

using Row = std::vector<std::string>;

struct Document {
  Row header;
  std::vector<Row> rows;

  /// Index of a header column, or -1.
  int column(std::string_view name) const;
};

/// RFC 4180 parse: quoted fields, doubled quotes, CRLF tolerated. Blank lines skipped.
Document parse(std::string_view text);
Document read_file(const std::filesystem::path& path);

/// Quotes a field only when it contains a separator, quote or newline.
std::string escape(std::string_view field);
std::string format_row(const Row& row);

/// Shortest round-trip decimal form; "nan", "inf" and "-inf" for non-finite values.
std::string format_double(double value);
double parse_double(std::string_view text);

class Writer {
 public:
  explicit Writer(Row header);
  void add(Row row);
  std::string str() const;
  void save(const std::filesystem::path& path) const;
  const Row& header() const { return header_; }

 private:
  Row header_;
  std::vector<Row> rows_;
};

}  // namespace cardie::csv
