#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "efficiency.hpp"

using namespace cql;

namespace {

double table_cell(const EfficiencyTable& t, const std::string& method,
                  const std::string& dist) {
  for (std::size_t i = 0; i < t.methods.size(); ++i)
    for (std::size_t j = 0; j < t.dists.size(); ++j)
      if (t.methods[i] == method && t.dists[j] == dist)
        return t.eff(int(i), int(j));
  FAIL("missing table cell");
  return 0.0;
}

}  // namespace

TEST_CASE("population offsets move the kinks to the distribution quantiles") {
  auto normal = ErrorDist::make(ErrorDist::Kind::normal);
  auto basis = population_offsets(normal, LossBasis::cqr(3));
  CHECK(basis.parts[0].offset == doctest::Approx(normal.quantile(0.25)).epsilon(1e-10));
  CHECK(basis.parts[1].offset == doctest::Approx(0.0).epsilon(1e-10));
  auto l1l2 = population_offsets(normal, LossBasis::l1l2());
  CHECK(l1l2.parts[0].offset == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(l1l2.parts[1].offset == 0.0);  // squared part has no nuisance location
}

TEST_CASE("single-loss asymptotic variances have closed forms") {
  auto normal = ErrorDist::make(ErrorDist::Kind::normal);
  auto w1 = CompositeWeights::constrained({1.0});
  // squared loss reproduces the error variance
  CHECK(sigma2_composite(normal, LossBasis::squared_only(), w1) ==
        doctest::Approx(1.0).epsilon(1e-9));
  // median regression: (1/4)/phi(0)^2 = pi/2
  auto med = population_offsets(normal, LossBasis::cqr(1));
  CHECK(sigma2_composite(normal, med, w1) ==
        doctest::Approx(std::numbers::pi / 2.0).epsilon(1e-9));
}

TEST_CASE("composite variance is invariant to weight rescaling") {
  auto dist = ErrorDist::make(ErrorDist::Kind::mns);
  auto basis = population_offsets(dist, LossBasis::cqr(5));
  std::vector<double> w = {0.1, 0.3, 0.2, 0.25, 0.15};
  std::vector<double> w3 = w;
  for (auto& x : w3) x *= 3.0;
  double v1 = sigma2_composite(dist, basis, CompositeWeights::constrained(w));
  double v3 = sigma2_composite(dist, basis, CompositeWeights::constrained(w3));
  CHECK(v1 == doctest::Approx(v3).epsilon(1e-12));
}

TEST_CASE("absolute plus squared constants for the normal") {
  auto c = l1l2_constants(ErrorDist::make(ErrorDist::Kind::normal));
  double root_2_over_pi = std::sqrt(2.0 / std::numbers::pi);
  CHECK(c.B == doctest::Approx(root_2_over_pi).epsilon(1e-9));
  CHECK(c.a_eps == doctest::Approx(root_2_over_pi).epsilon(1e-9));
  CHECK(c.b_eps == doctest::Approx(1.0 / std::sqrt(2.0 * std::numbers::pi)).epsilon(1e-9));
  CHECK(c.a_eps == doctest::Approx(2.0 * c.b_eps).epsilon(1e-9));
}

TEST_CASE("absolute plus squared constants for the uniform test distribution") {
  auto dist = ErrorDist::make(ErrorDist::Kind::uniform);
  auto c = l1l2_constants(dist);
  CHECK(c.a_eps == doctest::Approx(std::sqrt(3.0) / 2.0).epsilon(1e-9));
  CHECK(c.b_eps == doctest::Approx(1.0 / std::sqrt(12.0)).epsilon(1e-9));

  auto opt = l1l2_optimal(dist, WeightMode::unconstrained);
  CHECK(opt.c == doctest::Approx(-2.0 / std::sqrt(3.0)).epsilon(1e-9));
  CHECK(opt.d_eps == doctest::Approx(0.75).epsilon(1e-9));
}

TEST_CASE("constrained mixing for the normal collapses to least squares") {
  auto opt = l1l2_optimal(ErrorDist::make(ErrorDist::Kind::normal),
                          WeightMode::constrained);
  CHECK(std::abs(opt.c) < 1e-8);
  CHECK(opt.d_eps == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("mixing constants respect the documented bounds") {
  for (auto& dist : catalog_dists()) {
    CAPTURE(dist.key());
    auto c = l1l2_constants(dist);
    CHECK(std::abs(c.a_eps) <= 1.0 + 1e-9);
    CHECK(c.b_eps >= 0.0);
    for (auto mode : {WeightMode::constrained, WeightMode::unconstrained}) {
      auto opt = l1l2_optimal(dist, mode);
      CHECK(opt.d_eps <= 1.0 + 1e-9);
      CHECK(opt.d_eps <= 1.0 / (4.0 * c.b_eps * c.b_eps) + 1e-9);
      CHECK(opt.d_eps > 0.0);
    }
  }
}

TEST_CASE("unconstrained mixing never loses to constrained mixing") {
  for (auto& dist : catalog_dists()) {
    CAPTURE(dist.key());
    auto unc = l1l2_optimal(dist, WeightMode::unconstrained);
    auto con = l1l2_optimal(dist, WeightMode::constrained);
    CHECK(unc.d_eps <= con.d_eps + 1e-9);
  }
}

TEST_CASE("quantile covariance matrix") {
  auto m = cqr_numerator({1.0 / 3.0, 2.0 / 3.0});
  CHECK(m(0, 0) == doctest::Approx(2.0 / 9.0).epsilon(1e-12));
  CHECK(m(0, 1) == doctest::Approx(1.0 / 9.0).epsilon(1e-12));
  CHECK(m(1, 0) == doctest::Approx(1.0 / 9.0).epsilon(1e-12));
  CHECK(m(1, 1) == doctest::Approx(2.0 / 9.0).epsilon(1e-12));
}

TEST_CASE("quantile covariance matrix is positive semidefinite") {
  auto m = cqr_numerator(quantile_grid(19));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  CHECK(es.eigenvalues().minCoeff() >= -1e-12);
}

TEST_CASE("single median quantile variance equals the check-loss formula") {
  auto normal = ErrorDist::make(ErrorDist::Kind::normal);
  CHECK(cqr_sigma2(normal, {0.5}, {1.0}) ==
        doctest::Approx(std::numbers::pi / 2.0).epsilon(1e-9));
  auto de = ErrorDist::make(ErrorDist::Kind::de);
  // f(0) = 1/2, so (1/4)/f(0)^2 = 1
  CHECK(cqr_sigma2(de, {0.5}, {1.0}) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("equal-weight nine-quantile efficiency for the normal") {
  auto normal = ErrorDist::make(ErrorDist::Kind::normal);
  auto taus = quantile_grid(9);
  double s2 = cqr_sigma2(normal, taus, std::vector<double>(9, 1.0 / 9.0));
  double eff = (1.0 / fisher_information(normal)) / s2;
  CHECK(eff == doctest::Approx(0.92).epsilon(0.011));
}

TEST_CASE("analytic efficiency cells") {
  auto t = efficiency_table(catalog_dists(), {"L1", "L2", "L1-L2+", "L1-L2"}, {9});
  // double exponential: median regression is the MLE
  CHECK(table_cell(t, "L1", "de") == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(table_cell(t, "L2", "de") == doctest::Approx(0.5).epsilon(1e-9));
  // normal: least squares is the MLE; L1 loses the classical 2/pi
  CHECK(table_cell(t, "L1", "normal") ==
        doctest::Approx(2.0 / std::numbers::pi).epsilon(1e-9));
  CHECK(table_cell(t, "L2", "normal") == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(table_cell(t, "L1-L2", "normal") == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(table_cell(t, "L1-L2+", "normal") == doctest::Approx(1.0).epsilon(1e-9));
  // t with 4 degrees of freedom: I = 5/7, median density 3/8, variance 2
  CHECK(table_cell(t, "L1", "t4") == doctest::Approx(63.0 / 80.0).epsilon(1e-9));
  CHECK(table_cell(t, "L2", "t4") == doctest::Approx(0.7).epsilon(1e-9));
  CHECK(table_cell(t, "L1-L2", "t4") == doctest::Approx(0.875).epsilon(1e-9));
}

TEST_CASE("all efficiencies live in the unit interval") {
  auto t = efficiency_table(catalog_dists(),
                            {"L1", "L2", "L1-L2+", "L1-L2", "ECQR", "WCQR+", "WCQR"},
                            {9});
  for (int i = 0; i < t.eff.rows(); ++i)
    for (int j = 0; j < t.eff.cols(); ++j) {
      CAPTURE(t.methods[std::size_t(i)]);
      CAPTURE(t.dists[std::size_t(j)]);
      CHECK(t.eff(i, j) > 0.0);
      CHECK(t.eff(i, j) <= 1.0 + 1e-9);
    }
}

TEST_CASE("richer weight families never hurt") {
  auto t = efficiency_table(catalog_dists(), {"ECQR", "WCQR+", "WCQR"}, {9});
  for (std::size_t j = 0; j < t.dists.size(); ++j) {
    double ecqr = t.eff(0, int(j));
    double plus = t.eff(1, int(j));
    double full = t.eff(2, int(j));
    CAPTURE(t.dists[j]);
    CHECK(plus >= ecqr - 1e-9);
    CHECK(full >= plus - 1e-9);
  }
}

TEST_CASE("optimal nine-quantile weights concentrate on the median for de") {
  auto de = ErrorDist::make(ErrorDist::Kind::de);
  auto w = cqr_optimal_weights(de, quantile_grid(9), WeightMode::constrained);
  REQUIRE(int(w.w.size()) == 9);
  double sum = 0.0;
  for (double x : w.w) sum += x;
  double off = 0.0;
  for (int k = 0; k < 9; ++k)
    if (k != 4) off += w.w[std::size_t(k)] / sum;
  CHECK(off <= 1e-3);
  CHECK(w.w[4] / sum == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("optimal normal weights are symmetric with heavy endpoints") {
  auto normal = ErrorDist::make(ErrorDist::Kind::normal);
  auto w = cqr_optimal_weights(normal, quantile_grid(9), WeightMode::constrained);
  double sum = 0.0;
  for (double x : w.w) sum += x;
  for (int k = 0; k < 4; ++k)
    CHECK(w.w[std::size_t(k)] ==
          doctest::Approx(w.w[std::size_t(8 - k)]).epsilon(1e-7));
  CHECK(w.w[0] / sum == doctest::Approx(0.20).epsilon(0.06));
  for (double x : w.w) CHECK(x > 0.0);
}

TEST_CASE("location-mixture weights zero out an interior block") {
  auto mnl = ErrorDist::make(ErrorDist::Kind::mnl);
  auto w = cqr_optimal_weights(mnl, quantile_grid(9), WeightMode::constrained);
  double sum = 0.0;
  for (double x : w.w) sum += x;
  for (int k = 4; k <= 7; ++k) CHECK(w.w[std::size_t(k)] / sum <= 1e-9);
  CHECK(w.w[8] / sum == doctest::Approx(0.2844).epsilon(0.04));
}

TEST_CASE("weight table columns are normalized to unit sum") {
  auto t = weight_table(catalog_dists(), 9);
  REQUIRE(t.w.rows() == 9);
  REQUIRE(int(t.dists.size()) == 7);
  for (int j = 0; j < t.w.cols(); ++j) {
    CHECK(t.w.col(j).sum() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(t.w.col(j).minCoeff() >= -1e-12);
  }
  CHECK(t.taus[0] == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("efficiency table rejects unknown method names") {
  CHECK_THROWS_AS(efficiency_table(catalog_dists(), {"L3"}, {9}),
                  std::invalid_argument);
  CHECK_THROWS_AS(efficiency_table(catalog_dists(), {"ECQR"}, {0}),
                  std::invalid_argument);
}

TEST_CASE("catalog display order matches the method labels") {
  auto dists = catalog_dists();
  REQUIRE(dists.size() == 7);
  CHECK(dists[0].key() == "de");
  CHECK(dists[1].key() == "t4");
  CHECK(dists[2].key() == "normal");
  CHECK(dists[3].key() == "gamma");
  CHECK(dists[4].key() == "beta");
  CHECK(dists[5].key() == "mns");
  CHECK(dists[6].key() == "mnl");
  auto t = efficiency_table(dists, {"ECQR", "WCQR+"}, {9});
  REQUIRE(t.methods.size() == 2);
  CHECK(t.methods[0] == "ECQR(9)");
  CHECK(t.methods[1] == "WCQR+(9)");
}

TEST_CASE("pair moment identity is distribution free") {
  // E psi_i psi_j at the population quantiles equals min(t_i,t_j) - t_i t_j
  // for any continuous error law; verified by quadrature on two catalogs.
  for (auto kind : {ErrorDist::Kind::normal, ErrorDist::Kind::gamma}) {
    auto dist = ErrorDist::make(kind);
    CAPTURE(dist.key());
    double ti = 0.3, tj = 0.7;
    double bi = dist.quantile(ti), bj = dist.quantile(tj);
    auto psi = [](double x, double b, double t) {
      return x < b ? t - 1.0 : t;
    };
    double quad = integrate(
        [&](double x) {
          return psi(x, bi, ti) * psi(x, bj, tj) * dist.pdf(x);
        },
        dist.support_lo(), dist.support_hi());
    CHECK(quad == doctest::Approx(0.3 - 0.21).epsilon(1e-6));
  }
}
