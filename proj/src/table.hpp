#pragma once

#include <string>
#include <vector>

namespace cql {

// String-valued rectangular table; the one shape every CLI artifact shares.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void validate() const;  // rectangular, throws std::invalid_argument
};

// Fixed 6 significant digits with trailing zeros kept: 0.6366197 -> "0.636620".
std::string format_real(double x);

// RFC-4180 body with LF line endings.
std::string render_csv(const Table& t);

// Column-aligned plain text for terminals.
std::string render_pretty(const Table& t);

// Writes render_csv(t); path "-" echoes to standard output instead.
void emit_csv_table(const Table& t, const std::string& path);

}  // namespace cql
