#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace kcblb::csv {

/// 17 significant digits, std::chars_format::general, locale independent.
std::string format_double(double value);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;  // data rows, header excluded

  /// Position of `name` in the header, or -1.
  long column(const std::string& name) const;
};

/// RFC-4180 reader: comma delimiter, double-quote quoting with "" escapes,
/// quoted fields may span lines, CRLF or LF record ends. The first record is
/// the header. Throws Error(UnparseableRow) for an unterminated quote or a
/// record whose field count differs from the header; the reported row is the
/// 1-based data row.
Table read(std::istream& in);
Table read_file(const std::string& path);

/// Quotes a field when it contains a comma, quote, CR or LF.
std::string escape(const std::string& field);

/// Writes one record terminated by a single LF.
void write_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace kcblb::csv
