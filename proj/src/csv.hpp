#pragma once

#include <string>
#include <vector>

#include "solver.hpp"

namespace cql {

struct LoadedCsv {
  Dataset data;
  std::vector<std::string> x_names;  // predictor columns in header order
  std::string response;
};

// First row is the header; the named response column becomes y and the rest
// become X in header order. Throws io_error naming the offending row/column.
LoadedCsv load_csv_dataset(const std::string& path, const std::string& response);

// Same contract on in-memory text (the file loader delegates here).
LoadedCsv parse_csv_dataset(const std::string& text, const std::string& response);

}  // namespace cql
