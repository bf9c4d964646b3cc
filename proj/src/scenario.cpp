#include "scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "util.hpp"

namespace cql {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& msg) { throw std::invalid_argument(msg); }

double as_real(const json& j, const char* key) {
  if (!j.is_number()) bad(std::string("scenario key '") + key + "' must be a number");
  return j.get<double>();
}

int as_int(const json& j, const char* key) {
  if (!j.is_number_integer())
    bad(std::string("scenario key '") + key + "' must be an integer");
  return j.get<int>();
}

}  // namespace

Scenario parse_scenario(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("scenario is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) bad("scenario must be a JSON object");

  static const std::set<std::string> known = {
      "n",    "p",        "beta_star",   "rho",      "dist",
      "methods", "reps",  "cv_folds",    "lambda_grid", "seed",
      "sigma", "zero_tol", "cv_squared_loss"};
  for (auto it = doc.begin(); it != doc.end(); ++it)
    if (!known.count(it.key())) bad("unknown scenario key '" + it.key() + "'");

  for (const char* req : {"n", "p", "dist", "methods"})
    if (!doc.contains(req)) bad(std::string("scenario key '") + req + "' is required");

  Scenario sc;
  sc.n = as_int(doc["n"], "n");
  sc.p = as_int(doc["p"], "p");

  if (doc.contains("beta_star")) {
    if (!doc["beta_star"].is_array()) bad("beta_star must be a list of [index, value]");
    for (const auto& pair : doc["beta_star"]) {
      if (!pair.is_array() || pair.size() != 2)
        bad("beta_star entries must be [index, value] pairs");
      sc.beta_star.emplace_back(as_int(pair[0], "beta_star index"),
                                as_real(pair[1], "beta_star value"));
    }
  }

  if (doc.contains("rho")) sc.rho = as_real(doc["rho"], "rho");

  double sigma = 1.0;
  if (doc.contains("sigma")) sigma = as_real(doc["sigma"], "sigma");
  if (!doc["dist"].is_string()) bad("scenario key 'dist' must be a string");
  const std::string dist_key = doc["dist"].get<std::string>();
  const auto kind = ErrorDist::parse(dist_key);
  if (!kind) {
    std::string names;
    for (const auto& k : ErrorDist::catalog_keys()) {
      if (!names.empty()) names += ", ";
      names += k;
    }
    bad("unknown error distribution '" + dist_key + "' (catalog: " + names + ")");
  }
  if (sigma != 1.0 && *kind != ErrorDist::Kind::normal)
    bad("sigma is only configurable for the normal distribution");
  if (!(sigma > 0.0)) bad("sigma must be positive");
  sc.dist = ErrorDist::make(*kind, sigma);

  if (!doc["methods"].is_array()) bad("scenario key 'methods' must be a list");
  for (const auto& m : doc["methods"]) {
    if (!m.is_string()) bad("method names must be strings");
    sc.methods.push_back(m.get<std::string>());
  }

  if (doc.contains("reps")) sc.reps = as_int(doc["reps"], "reps");
  if (doc.contains("cv_folds")) sc.cv_folds = as_int(doc["cv_folds"], "cv_folds");
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_integer()) bad("scenario key 'seed' must be an integer");
    sc.seed = doc["seed"].get<std::uint64_t>();
  }
  if (doc.contains("lambda_grid")) {
    if (!doc["lambda_grid"].is_array()) bad("lambda_grid must be a list of numbers");
    for (const auto& v : doc["lambda_grid"])
      sc.lambda_grid.push_back(as_real(v, "lambda_grid"));
  }
  if (doc.contains("zero_tol")) sc.zero_tol = as_real(doc["zero_tol"], "zero_tol");
  if (doc.contains("cv_squared_loss")) {
    if (!doc["cv_squared_loss"].is_boolean()) bad("cv_squared_loss must be a boolean");
    sc.cv_squared_loss = doc["cv_squared_loss"].get<bool>();
  }

  sc.validate();
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

}  // namespace cql
