#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "simulate.hpp"
#include "util.hpp"

using namespace cql;

namespace {

Scenario small_scenario() {
  Scenario sc;
  sc.n = 50;
  sc.p = 5;
  sc.beta_star = {{1, 2.0}, {4, -1.0}};
  sc.rho = 0.5;
  sc.dist = ErrorDist::make(ErrorDist::Kind::normal);
  sc.methods = {"l1"};
  sc.reps = 1;
  sc.seed = 3;
  return sc;
}

}  // namespace

TEST_CASE("data generation is reproducible per replicate") {
  Scenario sc = small_scenario();
  sc.reps = 4;
  Dataset a = generate_data(sc, 2);
  Dataset b = generate_data(sc, 2);
  CHECK(a.X == b.X);
  CHECK(a.y == b.y);

  Dataset c = generate_data(sc, 3);
  CHECK(a.y != c.y);
}

TEST_CASE("design columns carry the requested autocorrelation") {
  Scenario sc = small_scenario();
  sc.n = 100000;
  sc.p = 4;

  sc.rho = 0.0;
  Dataset ind = generate_data(sc, 0);
  auto corr = [](const Dataset& d, int i, int j) {
    const Eigen::VectorXd a = d.X.col(i).array() - d.X.col(i).mean();
    const Eigen::VectorXd b = d.X.col(j).array() - d.X.col(j).mean();
    return a.dot(b) / std::sqrt(a.squaredNorm() * b.squaredNorm());
  };
  CHECK(std::abs(corr(ind, 0, 1)) < 0.02);
  CHECK(std::abs(ind.X.col(0).squaredNorm() / double(sc.n) - 1.0) < 0.02);

  sc.rho = 0.5;
  Dataset ar = generate_data(sc, 0);
  CHECK(corr(ar, 0, 1) == doctest::Approx(0.5).epsilon(0.05));
  CHECK(corr(ar, 0, 2) == doctest::Approx(0.25).epsilon(0.10));
}

TEST_CASE("model error contracts the gap through the design covariance") {
  Eigen::VectorXd bs = Eigen::VectorXd::Zero(6);
  CHECK(model_error(bs, bs, 0.5) == 0.0);

  Eigen::VectorXd bh = bs;
  bh[2] = 1.0;
  CHECK(model_error(bh, bs, 0.5) == doctest::Approx(1.0).epsilon(1e-12));

  bh[3] = 1.0;  // adjacent pair: 1 + 1 + 2*rho
  CHECK(model_error(bh, bs, 0.5) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(model_error(bh, bs, 0.0) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("support counting separates hits from false positives") {
  Eigen::VectorXd bs = Eigen::VectorXd::Zero(8);
  bs[1] = 3.0;
  bs[2] = 1.5;
  bs[5] = 2.0;

  Eigen::VectorXd bh = bs;
  CHECK(count_tp_fp(bh, bs) == std::make_pair(3, 0));

  bh.setZero();
  CHECK(count_tp_fp(bh, bs) == std::make_pair(0, 0));

  bh.setZero();
  bh[1] = 2.9;
  bh[5] = -0.1;
  bh[7] = 0.4;
  CHECK(count_tp_fp(bh, bs) == std::make_pair(2, 1));

  // magnitudes at or below the tolerance count as zero
  bh.setZero();
  bh[1] = 1e-9;
  CHECK(count_tp_fp(bh, bs, 1e-8) == std::make_pair(0, 0));
  CHECK(count_tp_fp(bh, bs, 1e-10) == std::make_pair(1, 0));
}

TEST_CASE("single-replicate summaries equal the replicate itself") {
  Scenario sc = small_scenario();
  ScenarioSummary out = run_scenario(sc);
  REQUIRE(out.reps.size() == 1);
  REQUIRE(out.methods.size() == 1);
  const MethodRep& cell = out.reps[0].methods[0];
  REQUIRE_FALSE(cell.failed);
  CHECK(out.methods[0].mme == cell.model_error);
  CHECK(out.methods[0].mean_tp == double(cell.tp));
  CHECK(out.methods[0].mean_fp == double(cell.fp));
  CHECK(out.methods[0].reps_used == 1);
  CHECK(out.methods[0].failures == 0);
  CHECK(out.methods[0].method == "L1");
}

TEST_CASE("samples too small for moment estimation are reported as failures") {
  Scenario sc = small_scenario();
  sc.n = 8;
  sc.p = 3;
  sc.beta_star = {{1, 2.0}};
  sc.methods = {"wcqr9", "l2"};
  sc.reps = 2;
  ScenarioSummary out = run_scenario(sc);
  REQUIRE(out.methods.size() == 2);
  for (const auto& ms : out.methods) {
    CHECK(ms.failures == 2);
    CHECK(ms.reps_used == 0);
  }
  // the weight-adapted oracle needs residual moments too; the squared-loss
  // oracle is plain least squares and survives
  CHECK(out.methods[0].oracle_failures == 2);
  CHECK(out.methods[1].oracle_failures == 0);
  for (const auto& rep : out.reps) {
    REQUIRE(rep.methods.size() == 2);
    for (const auto& cell : rep.methods) {
      CHECK(cell.failed);
      CHECK_FALSE(cell.error.empty());
    }
    CHECK(rep.methods[0].oracle_failed);
    CHECK_FALSE(rep.methods[1].oracle_failed);
  }
}

TEST_CASE("screening ranks a perfect predictor first") {
  Rng rng(101);
  Dataset d;
  const int n = 40, p = 5;
  d.X.resize(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) d.X(i, j) = rng.normal();
  d.y.resize(n);
  for (int i = 0; i < n; ++i) d.y[i] = rng.normal();
  d.X.col(2) = d.y;  // exact copy

  ScreenResult res = screen_marginal(d, 3);
  REQUIRE(res.kept.size() == 3);
  CHECK(res.kept[0] == 2);
  CHECK(std::isinf(res.f[2]));
}

TEST_CASE("screening keeps everything in statistic order when asked") {
  Rng rng(103);
  Dataset d;
  const int n = 60, p = 6;
  d.X.resize(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) d.X(i, j) = rng.normal();
  d.X.col(4).setConstant(2.5);  // no spread, no signal
  d.y = d.X.col(1) * 1.5;
  for (int i = 0; i < n; ++i) d.y[i] += rng.normal();

  ScreenResult res = screen_marginal(d, p);
  REQUIRE(int(res.kept.size()) == p);
  CHECK(res.f[4] == 0.0);
  for (std::size_t i = 1; i < res.kept.size(); ++i) {
    const double prev = res.f[res.kept[i - 1]];
    const double cur = res.f[res.kept[i]];
    CHECK(prev >= cur);
    if (prev == cur) CHECK(res.kept[i - 1] < res.kept[i]);
  }
  CHECK(res.kept[0] == 1);
}

TEST_CASE("screening keeps the true predictor against pure noise") {
  Rng rng(107);
  Dataset d;
  const int n = 80, p = 10;
  d.X.resize(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) d.X(i, j) = rng.normal();
  d.y = 3.0 * d.X.col(0);
  for (int i = 0; i < n; ++i) d.y[i] += 0.3 * rng.normal();

  ScreenResult res = screen_marginal(d, 1);
  REQUIRE(res.kept.size() == 1);
  CHECK(res.kept[0] == 0);

  CHECK_THROWS_AS(screen_marginal(d, 0), std::invalid_argument);
  CHECK_THROWS_AS(screen_marginal(d, p + 1), std::invalid_argument);
}

TEST_CASE("scenario validation rejects malformed inputs") {
  Scenario ok = small_scenario();
  CHECK_NOTHROW(ok.validate());

  Scenario sc = ok;
  sc.rho = 1.0;
  CHECK_THROWS_AS(sc.validate(), std::invalid_argument);

  sc = ok;
  sc.beta_star = {{0, 1.0}};  // positions are 1-based
  CHECK_THROWS_AS(sc.validate(), std::invalid_argument);

  sc = ok;
  sc.beta_star = {{6, 1.0}};  // past p
  CHECK_THROWS_AS(sc.validate(), std::invalid_argument);

  sc = ok;
  sc.methods = {"L3"};
  CHECK_THROWS_AS(sc.validate(), std::invalid_argument);

  sc = ok;
  sc.reps = 0;
  CHECK_THROWS_AS(sc.validate(), std::invalid_argument);

  sc = ok;
  sc.cv_folds = 1;
  CHECK_THROWS_AS(sc.validate(), std::invalid_argument);

  sc = ok;
  sc.methods = {};
  CHECK_THROWS_AS(sc.validate(), std::invalid_argument);
}

TEST_CASE("true coefficients embed at their one-based positions") {
  Scenario sc = small_scenario();
  Eigen::VectorXd b = sc.beta_vector();
  REQUIRE(b.size() == 5);
  CHECK(b[0] == 2.0);
  CHECK(b[3] == -1.0);
  CHECK(b[1] == 0.0);
  CHECK(sc.support() == std::vector<int>{0, 3});
}
