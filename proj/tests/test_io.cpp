#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "adapt.hpp"
#include "csv.hpp"
#include "fitjson.hpp"
#include "scenario.hpp"
#include "table.hpp"
#include "util.hpp"

using namespace cql;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(bool(in));
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name) : path("io_test_" + name) {}
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("reals render with six significant digits and kept zeros") {
  CHECK(format_real(0.63661977236758138) == "0.636620");
  CHECK(format_real(1.0) == "1.00000");
  CHECK(format_real(0.0) == "0.00000");
  CHECK(format_real(-3.0) == "-3.00000");
  CHECK(format_real(12345.678) == "12345.7");
}

TEST_CASE("tables must stay rectangular") {
  Table t;
  t.header = {"a", "b"};
  t.rows = {{"1", "2"}, {"3"}};
  CHECK_THROWS_AS(t.validate(), std::invalid_argument);
  t.rows[1].push_back("4");
  CHECK_NOTHROW(t.validate());
}

TEST_CASE("csv output quotes exactly the fields that need it") {
  Table t;
  t.header = {"name", "note"};
  t.rows = {{"plain", "has,comma"},
            {"quote\"inside", "line\nbreak"}};
  const std::string csv = render_csv(t);
  CHECK(csv ==
        "name,note\n"
        "plain,\"has,comma\"\n"
        "\"quote\"\"inside\",\"line\nbreak\"\n");

  Table bare;
  bare.header = {"only"};
  CHECK(render_csv(bare) == "only\n");
}

TEST_CASE("csv files are written byte for byte") {
  Table t;
  t.header = {"k", "v"};
  t.rows = {{"x", "1.5"}};
  TempFile f("emit.csv");
  emit_csv_table(t, f.path);
  CHECK(slurp(f.path) == "k,v\nx,1.5\n");
}

TEST_CASE("pretty rendering aligns columns") {
  Table t;
  t.header = {"method", "mme"};
  t.rows = {{"L1", "0.5"}, {"WCQR(9)", "0.25"}};
  const std::string text = render_pretty(t);
  CHECK(text.find("method") != std::string::npos);
  CHECK(text.find("WCQR(9)") != std::string::npos);
  // header separator appears once
  CHECK(text.find("---") != std::string::npos);
}

TEST_CASE("dataset loading maps the response and keeps predictor order") {
  TempFile f("data.csv");
  {
    std::ofstream out(f.path, std::ios::binary);
    out << "x1,y,x2\n0.25,1.5,-3\n1,2,3\n4,5,6\n";
  }
  LoadedCsv loaded = load_csv_dataset(f.path, "y");
  CHECK(loaded.response == "y");
  CHECK(loaded.x_names == std::vector<std::string>{"x1", "x2"});
  REQUIRE(loaded.data.n() == 3);
  REQUIRE(loaded.data.p() == 2);
  // exact binary fractions and small integers round-trip exactly
  CHECK(loaded.data.X(0, 0) == 0.25);
  CHECK(loaded.data.y[0] == 1.5);
  CHECK(loaded.data.X(0, 1) == -3.0);
  CHECK(loaded.data.X(2, 1) == 6.0);
}

TEST_CASE("dataset loading pinpoints bad cells") {
  CHECK_THROWS_WITH_AS(parse_csv_dataset("x1,y\n1,2\n", "z"),
                       "column z not found", io_error);

  CHECK_THROWS_WITH_AS(parse_csv_dataset("x1,y\n1,2\nNA,4\n", "y"),
                       "row 3, column x1: cannot parse 'NA' as a number",
                       io_error);

  // ragged row
  CHECK_THROWS_AS(parse_csv_dataset("x1,y\n1\n", "y"), io_error);
  // nothing but a header
  CHECK_THROWS_AS(parse_csv_dataset("x1,y\n", "y"), io_error);
  // response is the only column
  CHECK_THROWS_AS(parse_csv_dataset("y\n1\n", "y"), io_error);
  CHECK_THROWS_AS(load_csv_dataset("definitely_missing_file.csv", "y"), io_error);
}

TEST_CASE("scenario documents parse with defaults filled in") {
  const std::string text = R"({
    "n": 100, "p": 8,
    "beta_star": [[1, 3.0], [2, 1.5], [5, 2.0]],
    "rho": 0.5, "dist": "de",
    "methods": ["lasso", "wcqr9"],
    "reps": 10, "seed": 42
  })";
  Scenario sc = parse_scenario(text);
  CHECK(sc.n == 100);
  CHECK(sc.p == 8);
  CHECK(sc.cv_folds == 5);  // default
  CHECK(sc.reps == 10);
  CHECK(sc.seed == 42);
  CHECK(sc.dist.kind() == ErrorDist::Kind::de);
  CHECK(sc.methods == std::vector<std::string>{"lasso", "wcqr9"});
  Eigen::VectorXd b = sc.beta_vector();
  CHECK(b[0] == 3.0);
  CHECK(b[1] == 1.5);
  CHECK(b[4] == 2.0);
  CHECK(sc.support() == std::vector<int>{0, 1, 4});
}

TEST_CASE("scenario parsing rejects unknown names and misplaced keys") {
  const std::string base = R"({"n": 20, "p": 3, "dist": "normal", "methods": ["l1"]})";
  CHECK_NOTHROW(parse_scenario(base));

  CHECK_THROWS_AS(parse_scenario("not json at all"), std::invalid_argument);
  CHECK_THROWS_AS(parse_scenario("[1,2]"), std::invalid_argument);

  // unknown distributions list the whole catalog
  try {
    parse_scenario(R"({"n": 20, "p": 3, "dist": "cauchy", "methods": ["l1"]})");
    FAIL("expected a throw");
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    CHECK(msg.find("cauchy") != std::string::npos);
    for (const char* name : {"de", "t4", "normal", "gamma", "beta", "mns", "mnl"})
      CHECK(msg.find(name) != std::string::npos);
  }

  CHECK_THROWS_AS(
      parse_scenario(R"({"n": 20, "p": 3, "dist": "normal", "methods": ["l1"], "bogus": 1})"),
      std::invalid_argument);

  // sigma only makes sense for the normal family
  CHECK_THROWS_AS(
      parse_scenario(R"({"n": 20, "p": 3, "dist": "de", "methods": ["l1"], "sigma": 2.0})"),
      std::invalid_argument);
  CHECK_NOTHROW(
      parse_scenario(R"({"n": 20, "p": 3, "dist": "normal", "methods": ["l1"], "sigma": 2.0})"));

  // positions are 1-based
  CHECK_THROWS_AS(
      parse_scenario(
          R"({"n": 20, "p": 3, "dist": "normal", "methods": ["l1"], "beta_star": [[0, 1.0]]})"),
      std::invalid_argument);

  // required keys
  CHECK_THROWS_AS(parse_scenario(R"({"n": 20, "p": 3, "dist": "normal"})"),
                  std::invalid_argument);

  TempFile f("sc.json");
  {
    std::ofstream out(f.path, std::ios::binary);
    out << base;
  }
  CHECK_NOTHROW(load_scenario(f.path));
  CHECK_THROWS_AS(load_scenario("missing_scenario.json"), io_error);
}

TEST_CASE("fit reports round-trip every coefficient bit") {
  Rng rng(211);
  const int n = 60, p = 4;
  Dataset d;
  d.X.resize(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) d.X(i, j) = rng.normal();
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  beta[0] = 1.7;
  beta[2] = -0.9;
  d.y = d.X * beta;
  for (int i = 0; i < n; ++i) d.y[i] += rng.normal();

  PenaltyRule rule;
  rule.kind = PenaltyKind::scad;
  rule.lambda = 0.1;
  TwoStepOptions opts;
  opts.seed = 17;
  TwoStepResult res = two_step_fit(d, LossBasis::l1l2(), rule, opts);

  const std::string doc = fit_report_json(res, {"a", "b", "c", "d"}, "l1l2", "scad", 1.25);
  const nlohmann::json parsed = nlohmann::json::parse(doc);

  CHECK(parsed["basis"] == "l1l2");
  CHECK(parsed["penalty"] == "scad");
  CHECK(parsed["sigma_hat_w"] == 1.25);
  CHECK(parsed["converged"].is_boolean());
  CHECK(parsed["iterations"].is_number_integer());
  REQUIRE(parsed["beta"].size() == 4);
  for (int j = 0; j < p; ++j) {
    const double back = parsed["beta"][std::size_t(j)].get<double>();
    CHECK(back == res.fit.beta[j]);
  }
  REQUIRE(parsed["weights"]["w"].size() == res.weights.w.size());
  for (std::size_t k = 0; k < res.weights.w.size(); ++k)
    CHECK(parsed["weights"]["w"][k].get<double>() == res.weights.w[k]);
  CHECK(parsed["lambda_final"].get<double>() == res.lambda_final);
  CHECK(parsed["columns"] == nlohmann::json({"a", "b", "c", "d"}));
  // active set rendered as column names
  for (const auto& name : parsed["active"]) {
    bool found = false;
    for (const auto& col : parsed["columns"])
      if (col == name) found = true;
    CHECK(found);
  }

  // name count must match
  CHECK_THROWS_AS(fit_report_json(res, {"only_one"}, "l1l2", "scad", 1.0),
                  std::invalid_argument);
}
