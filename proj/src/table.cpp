#include "table.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include "util.hpp"

namespace cql {

namespace {

bool needs_quotes(const std::string& s) {
  return s.find_first_of(",\"\n\r") != std::string::npos;
}

void append_field(std::string& out, const std::string& s) {
  if (!needs_quotes(s)) {
    out += s;
    return;
  }
  out += '"';
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
}

}  // namespace

void Table::validate() const {
  for (const auto& row : rows)
    if (row.size() != header.size())
      throw std::invalid_argument("table row width differs from header");
}

std::string format_real(double x) { return format_sig(x, 6); }

std::string render_csv(const Table& t) {
  t.validate();
  std::string out;
  for (std::size_t c = 0; c < t.header.size(); ++c) {
    if (c > 0) out += ',';
    append_field(out, t.header[c]);
  }
  out += '\n';
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c > 0) out += ',';
      append_field(out, row[c]);
    }
    out += '\n';
  }
  return out;
}

std::string render_pretty(const Table& t) {
  t.validate();
  std::vector<std::size_t> width(t.header.size(), 0);
  for (std::size_t c = 0; c < t.header.size(); ++c) width[c] = t.header[c].size();
  for (const auto& row : t.rows)
    for (std::size_t c = 0; c < row.size(); ++c)
      width[c] = std::max(width[c], row[c].size());

  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c > 0) out += "  ";
      out += cells[c];
      out.append(width[c] - cells[c].size(), ' ');
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    out += '\n';
  };
  line(t.header);
  std::vector<std::string> rule;
  for (std::size_t c = 0; c < t.header.size(); ++c)
    rule.push_back(std::string(width[c], '-'));
  line(rule);
  for (const auto& row : t.rows) line(row);
  return out;
}

void emit_csv_table(const Table& t, const std::string& path) {
  const std::string body = render_csv(t);
  if (path == "-") {
    std::cout << body;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open '" + path + "' for writing");
  out << body;
  out.flush();
  if (!out) throw io_error("failed writing '" + path + "'");
}

}  // namespace cql
