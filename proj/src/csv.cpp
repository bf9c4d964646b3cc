#include "csv.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "util.hpp"

namespace cql {

namespace {

// One RFC-4180 record; handles quoted fields and embedded quotes. Newlines
// inside quotes are not supported (numeric tables never need them).
std::vector<std::string> split_record(const std::string& line, int file_row) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      if (!cur.empty())
        throw io_error("row " + format_int(file_row) + ": stray quote");
      quoted = true;
    } else if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) throw io_error("row " + format_int(file_row) + ": unterminated quote");
  fields.push_back(cur);
  return fields;
}

double parse_cell(const std::string& s, int file_row, const std::string& col) {
  const char* begin = s.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  while (end && *end == ' ') ++end;
  if (end == begin || (end && *end != '\0'))
    throw io_error("row " + format_int(file_row) + ", column " + col +
                   ": cannot parse '" + s + "' as a number");
  return v;
}

}  // namespace

LoadedCsv parse_csv_dataset(const std::string& text, const std::string& response) {
  std::vector<std::string> lines;
  std::string cur;
  for (char c : text) {
    if (c == '\n') {
      if (!cur.empty() && cur.back() == '\r') cur.pop_back();
      lines.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) {
    if (cur.back() == '\r') cur.pop_back();
    lines.push_back(cur);
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw io_error("empty file");

  const std::vector<std::string> header = split_record(lines[0], 1);
  int ycol = -1;
  for (std::size_t c = 0; c < header.size(); ++c)
    if (header[c] == response) ycol = int(c);
  if (ycol < 0) throw io_error("column " + response + " not found");

  LoadedCsv out;
  out.response = response;
  for (std::size_t c = 0; c < header.size(); ++c)
    if (int(c) != ycol) out.x_names.push_back(header[c]);

  const int n = int(lines.size()) - 1;
  const int p = int(header.size()) - 1;
  if (n < 1) throw io_error("no data rows");
  if (p < 1) throw io_error("no predictor columns besides " + response);
  out.data.X.resize(n, p);
  out.data.y.resize(n);

  for (int i = 0; i < n; ++i) {
    const int file_row = i + 2;
    const std::vector<std::string> rec = split_record(lines[std::size_t(i) + 1], file_row);
    if (rec.size() != header.size())
      throw io_error("row " + format_int(file_row) + " has " +
                     format_int(static_cast<long long>(rec.size())) +
                     " fields, expected " +
                     format_int(static_cast<long long>(header.size())));
    int xj = 0;
    for (std::size_t c = 0; c < rec.size(); ++c) {
      const double v = parse_cell(rec[c], file_row, header[c]);
      if (int(c) == ycol)
        out.data.y[i] = v;
      else
        out.data.X(i, xj++) = v;
    }
  }
  return out;
}

LoadedCsv load_csv_dataset(const std::string& path, const std::string& response) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv_dataset(buf.str(), response);
}

}  // namespace cql
