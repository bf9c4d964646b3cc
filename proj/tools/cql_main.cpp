#include <algorithm>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cql.h"

namespace {

// Exit codes: 0 success, 2 input problems, 3 numerical failure.
int exit_code(int status) {
  switch (status) {
    case CQL_OK: return 0;
    case CQL_ERR_INVALID:
    case CQL_ERR_IO: return 2;
    default: return 3;
  }
}

int report(int status) {
  if (status != CQL_OK) std::fprintf(stderr, "error: %s\n", cql_last_error());
  return exit_code(status);
}

using dataset_ptr = std::unique_ptr<cql_dataset, decltype(&cql_dataset_free)>;
using fit_ptr = std::unique_ptr<cql_fit, decltype(&cql_fit_free)>;
using scenario_ptr = std::unique_ptr<cql_scenario, decltype(&cql_scenario_free)>;
using table_ptr = std::unique_ptr<cql_table, decltype(&cql_table_free)>;

void print_pretty(const cql_table* t) {
  int rows = 0, cols = 0;
  cql_table_dims(t, &rows, &cols);
  std::vector<std::size_t> width(std::size_t(cols), 0);
  for (int c = 0; c < cols; ++c)
    width[std::size_t(c)] = std::string(cql_table_header(t, c)).size();
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      width[std::size_t(c)] =
          std::max(width[std::size_t(c)], std::string(cql_table_cell(t, r, c)).size());
  auto line = [&](auto cell_of) {
    std::string out;
    for (int c = 0; c < cols; ++c) {
      if (c > 0) out += "  ";
      const std::string s = cell_of(c);
      out += s;
      out.append(width[std::size_t(c)] - s.size(), ' ');
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    std::printf("%s\n", out.c_str());
  };
  line([&](int c) { return std::string(cql_table_header(t, c)); });
  line([&](int c) { return std::string(width[std::size_t(c)], '-'); });
  for (int r = 0; r < rows; ++r)
    line([&](int c) { return std::string(cql_table_cell(t, r, c)); });
}

// Pretty listing to stdout; CSV behind --out ("-" switches stdout to CSV).
int deliver(const cql_table* t, const std::string& out) {
  if (out == "-") return report(cql_table_write_csv(t, "-"));
  print_pretty(t);
  if (!out.empty()) return report(cql_table_write_csv(t, out.c_str()));
  return 0;
}

int write_text(const std::string& text, const std::string& path) {
  if (path == "-" || path.empty()) {
    std::fputs(text.c_str(), stdout);
    return 0;
  }
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) {
    std::fprintf(stderr, "error: cannot open '%s' for writing\n", path.c_str());
    return 2;
  }
  const bool ok = std::fwrite(text.data(), 1, text.size(), f) == text.size();
  std::fclose(f);
  if (!ok) {
    std::fprintf(stderr, "error: failed writing '%s'\n", path.c_str());
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"penalized composite quasi-likelihood regression"};
  app.require_subcommand(1);

  std::string data_path, response = "y", basis = "cqr9", penalty = "scad";
  std::string lambda = "auto", out_path, per_rep_path, scenario_path;
  std::string dists = "all", methods = "all", k_list = "9", mode = "constrained";
  std::string weights_out;
  unsigned long long seed = 0;
  int cv_folds = 5, keep = 100, weights_k = 9;

  auto* fit = app.add_subcommand("fit", "penalized composite fit on a CSV dataset");
  fit->add_option("--data", data_path, "input CSV")->required();
  fit->add_option("--response", response, "response column name");
  fit->add_option("--basis", basis, "cqrK | l1l2 | l1 | l2");
  fit->add_option("--penalty", penalty, "scad | lasso | adaptive");
  fit->add_option("--lambda", lambda, "'auto' or a positive number");
  fit->add_option("--seed", seed, "seed for cross-validation folds");
  fit->add_option("--cv-folds", cv_folds, "cross-validation folds");
  fit->add_option("--out", out_path, "JSON report path ('-' = stdout)");

  auto* weights = app.add_subcommand("weights", "estimated moments and optimal weights");
  weights->add_option("--data", data_path, "input CSV")->required();
  weights->add_option("--response", response, "response column name");
  weights->add_option("--basis", basis, "cqrK | l1l2 | l1 | l2");
  weights->add_option("--mode", mode, "constrained | unconstrained");
  weights->add_option("--seed", seed, "seed for cross-validation folds");
  weights->add_option("--out", out_path, "CSV path ('-' = CSV to stdout)");

  auto* eff = app.add_subcommand("efficiency", "population efficiency tables");
  eff->add_option("--dists", dists, "'all' or comma-separated catalog names");
  eff->add_option("--methods", methods, "'all' or comma-separated method names");
  eff->add_option("--K", k_list, "comma-separated quantile counts");
  eff->add_option("--out", out_path, "CSV path ('-' = CSV to stdout)");
  eff->add_option("--weights-out", weights_out, "also write the weight pattern CSV");
  eff->add_option("--weights-K", weights_k, "quantile count for the weight pattern");

  auto* sim = app.add_subcommand("simulate", "replication study from a scenario file");
  sim->add_option("--scenario", scenario_path, "scenario JSON")->required();
  sim->add_option("--out", out_path, "summary CSV path ('-' = CSV to stdout)");
  sim->add_option("--per-rep", per_rep_path, "per-replication CSV path");

  auto* screen = app.add_subcommand("screen", "marginal F-statistic screening");
  screen->add_option("--data", data_path, "input CSV")->required();
  screen->add_option("--response", response, "response column name");
  screen->add_option("--keep", keep, "how many columns to keep");
  screen->add_option("--out", out_path, "CSV path ('-' = CSV to stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (fit->parsed()) {
    cql_dataset* draw = nullptr;
    int rc = cql_dataset_load_csv(data_path.c_str(), response.c_str(), &draw);
    if (rc != CQL_OK) return report(rc);
    dataset_ptr data(draw, cql_dataset_free);
    cql_fit* fraw = nullptr;
    rc = cql_fit_run(data.get(), basis.c_str(), penalty.c_str(), lambda.c_str(),
                     seed, cv_folds, &fraw);
    if (rc != CQL_OK) return report(rc);
    fit_ptr f(fraw, cql_fit_free);
    char* json = nullptr;
    rc = cql_fit_report_json(f.get(), &json);
    if (rc != CQL_OK) return report(rc);
    const std::string text = json;
    cql_string_free(json);
    return write_text(text, out_path);
  }

  if (weights->parsed()) {
    cql_dataset* draw = nullptr;
    int rc = cql_dataset_load_csv(data_path.c_str(), response.c_str(), &draw);
    if (rc != CQL_OK) return report(rc);
    dataset_ptr data(draw, cql_dataset_free);
    cql_table* traw = nullptr;
    rc = cql_weights_table(data.get(), basis.c_str(), mode.c_str(), seed, &traw);
    if (rc != CQL_OK) return report(rc);
    table_ptr t(traw, cql_table_free);
    return deliver(t.get(), out_path);
  }

  if (eff->parsed()) {
    cql_table* traw = nullptr;
    int rc = cql_efficiency_table(dists.c_str(), methods.c_str(), k_list.c_str(), &traw);
    if (rc != CQL_OK) return report(rc);
    table_ptr t(traw, cql_table_free);
    const int first = deliver(t.get(), out_path);
    if (first != 0) return first;
    if (!weights_out.empty()) {
      cql_table* wraw = nullptr;
      rc = cql_weight_pattern_table(dists.c_str(), weights_k, &wraw);
      if (rc != CQL_OK) return report(rc);
      table_ptr wt(wraw, cql_table_free);
      return report(cql_table_write_csv(wt.get(), weights_out.c_str()));
    }
    return 0;
  }

  if (sim->parsed()) {
    cql_scenario* sraw = nullptr;
    int rc = cql_scenario_load(scenario_path.c_str(), &sraw);
    if (rc != CQL_OK) return report(rc);
    scenario_ptr sc(sraw, cql_scenario_free);
    cql_table* sumraw = nullptr;
    cql_table* repraw = nullptr;
    rc = cql_simulate_run(sc.get(), &sumraw,
                          per_rep_path.empty() ? nullptr : &repraw);
    if (rc != CQL_OK) return report(rc);
    table_ptr summary(sumraw, cql_table_free);
    table_ptr reps(repraw, cql_table_free);
    const int first = deliver(summary.get(), out_path);
    if (first != 0) return first;
    if (reps) return report(cql_table_write_csv(reps.get(), per_rep_path.c_str()));
    return 0;
  }

  if (screen->parsed()) {
    cql_dataset* draw = nullptr;
    int rc = cql_dataset_load_csv(data_path.c_str(), response.c_str(), &draw);
    if (rc != CQL_OK) return report(rc);
    dataset_ptr data(draw, cql_dataset_free);
    cql_table* traw = nullptr;
    rc = cql_screen_table(data.get(), keep, &traw);
    if (rc != CQL_OK) return report(rc);
    table_ptr t(traw, cql_table_free);
    return deliver(t.get(), out_path);
  }

  return 2;
}
