#include <doctest.h>

#include <algorithm>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "penalty.hpp"

using namespace cql;

namespace {

PenaltyRule scad_rule(double lambda, double a = 3.7) {
  PenaltyRule r;
  r.kind = PenaltyKind::scad;
  r.a = a;
  r.lambda = lambda;
  return r;
}

}  // namespace

TEST_CASE("scad gamma branch values") {
  auto rule = scad_rule(1.0);
  CHECK(penalty_gamma(rule, 0.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(penalty_gamma(rule, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(penalty_gamma(rule, 2.0) == doctest::Approx(1.7 / 2.7).epsilon(1e-12));
  CHECK(penalty_gamma(rule, 3.7) == 0.0);
  CHECK(penalty_gamma(rule, 5.0) == 0.0);
}

TEST_CASE("scad gamma is continuous at both breakpoints") {
  auto rule = scad_rule(0.8);
  double eps = 1e-9;
  CHECK(std::abs(penalty_gamma(rule, 0.8 - eps) - penalty_gamma(rule, 0.8 + eps)) <
        1e-7);
  double knee = 3.7 * 0.8;
  CHECK(std::abs(penalty_gamma(rule, knee - eps) - penalty_gamma(rule, knee + eps)) <
        1e-7);
}

TEST_CASE("scad gamma is non-increasing") {
  auto rule = scad_rule(0.5);
  std::mt19937_64 eng(3);
  std::uniform_real_distribution<double> u(0.0, 4.0);
  std::vector<double> xs(200);
  for (auto& x : xs) x = u(eng);
  std::sort(xs.begin(), xs.end());
  for (std::size_t i = 1; i < xs.size(); ++i)
    CHECK(penalty_gamma(rule, xs[i]) <= penalty_gamma(rule, xs[i - 1]) + 1e-15);
}

TEST_CASE("lasso weights are identically one") {
  PenaltyRule rule;
  rule.kind = PenaltyKind::lasso;
  rule.lambda = 0.5;
  Eigen::VectorXd beta0(3);
  beta0 << 7.0, 0.0, -2.0;
  auto pv = penalty_vector(rule, beta0);
  CHECK(pv.lambda == 0.5);
  for (int j = 0; j < 3; ++j) CHECK(pv.d[j] == 1.0);
}

TEST_CASE("scad weights from an initial estimate") {
  auto rule = scad_rule(1.0);
  Eigen::VectorXd beta0(2);
  beta0 << 0.0, 5.0;
  auto pv = penalty_vector(rule, beta0);
  CHECK(pv.d[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(pv.d[1] == 0.0);
  // negative entries count through their magnitude
  beta0 << -2.0, 2.0;
  pv = penalty_vector(rule, beta0);
  CHECK(pv.d[0] == doctest::Approx(pv.d[1]).epsilon(1e-15));
  CHECK(pv.d[0] == doctest::Approx(1.7 / 2.7).epsilon(1e-12));
}

TEST_CASE("scad weights live in the unit interval") {
  auto rule = scad_rule(0.37);
  std::mt19937_64 eng(17);
  std::normal_distribution<double> g(0.0, 2.0);
  Eigen::VectorXd beta0(50);
  for (int j = 0; j < 50; ++j) beta0[j] = g(eng);
  auto pv = penalty_vector(rule, beta0);
  for (int j = 0; j < 50; ++j) {
    CHECK(pv.d[j] >= 0.0);
    CHECK(pv.d[j] <= 1.0);
  }
}

TEST_CASE("adaptive weights invert the magnitude and are capped") {
  PenaltyRule rule;
  rule.kind = PenaltyKind::adaptive;
  rule.a = 1.0;
  rule.lambda = 1.0;
  Eigen::VectorXd beta0(2);
  beta0 << 2.0, 0.5;
  auto pv = penalty_vector(rule, beta0);
  CHECK(pv.d[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(pv.d[1] == doctest::Approx(2.0).epsilon(1e-12));

  Eigen::VectorXd with_zero(1);
  with_zero << 0.0;
  auto capped = penalty_vector(rule, with_zero);
  CHECK(capped.d[0] == rule.d_max);
}

TEST_CASE("scad and adaptive weights need a positive lambda") {
  auto rule = scad_rule(0.0);
  Eigen::VectorXd beta0 = Eigen::VectorXd::Ones(2);
  CHECK_THROWS_AS(penalty_vector(rule, beta0), std::invalid_argument);
  PenaltyRule ad;
  ad.kind = PenaltyKind::adaptive;
  ad.a = 1.0;
  ad.lambda = 0.0;
  CHECK_THROWS_AS(penalty_vector(ad, beta0), std::invalid_argument);
}

TEST_CASE("rule validation rejects bad shape parameters") {
  PenaltyRule r;
  r.kind = PenaltyKind::scad;
  r.a = 2.0;  // needs a > 2
  r.lambda = 1.0;
  CHECK_THROWS_AS(r.validate(), std::invalid_argument);
  r.kind = PenaltyKind::adaptive;
  r.a = 0.0;  // needs a > 0
  CHECK_THROWS_AS(r.validate(), std::invalid_argument);
  r.kind = PenaltyKind::lasso;
  r.a = 3.7;
  r.lambda = -1.0;
  CHECK_THROWS_AS(r.validate(), std::invalid_argument);
}

TEST_CASE("gamma rejects negative input") {
  auto rule = scad_rule(1.0);
  CHECK_THROWS_AS(penalty_gamma(rule, -0.1), std::invalid_argument);
}
