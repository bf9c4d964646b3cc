#include <doctest.h>

#include <cmath>
#include <vector>

#include "distributions.hpp"
#include "util.hpp"

using namespace cql;

namespace {

const std::vector<ErrorDist::Kind> kAllKinds = {
    ErrorDist::Kind::de,    ErrorDist::Kind::t4,  ErrorDist::Kind::normal,
    ErrorDist::Kind::gamma, ErrorDist::Kind::beta, ErrorDist::Kind::mns,
    ErrorDist::Kind::mnl,   ErrorDist::Kind::uniform};

}  // namespace

TEST_CASE("densities integrate to one with mean zero and the stated variance") {
  for (auto kind : kAllKinds) {
    auto d = ErrorDist::make(kind);
    CAPTURE(d.key());
    double mass = integrate([&](double x) { return d.pdf(x); }, d.support_lo(),
                            d.support_hi());
    double mean = integrate([&](double x) { return x * d.pdf(x); }, d.support_lo(),
                            d.support_hi());
    double second = integrate([&](double x) { return x * x * d.pdf(x); },
                              d.support_lo(), d.support_hi());
    CHECK(std::abs(mass - 1.0) < 1e-7);
    CHECK(std::abs(mean) < 1e-7);
    CHECK(std::abs(second - d.variance()) < 1e-7 * std::max(1.0, d.variance()));
  }
}

TEST_CASE("catalog variances") {
  CHECK(ErrorDist::make(ErrorDist::Kind::de).variance() ==
        doctest::Approx(2.0).epsilon(1e-12));
  CHECK(ErrorDist::make(ErrorDist::Kind::t4).variance() ==
        doctest::Approx(2.0).epsilon(1e-12));
  CHECK(ErrorDist::make(ErrorDist::Kind::normal).variance() ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ErrorDist::make(ErrorDist::Kind::gamma).variance() ==
        doctest::Approx(3.0).epsilon(1e-12));
  CHECK(ErrorDist::make(ErrorDist::Kind::beta).variance() ==
        doctest::Approx(15.0 / 576.0).epsilon(1e-12));
  CHECK(ErrorDist::make(ErrorDist::Kind::mns).variance() ==
        doctest::Approx(3.4).epsilon(1e-12));
  CHECK(ErrorDist::make(ErrorDist::Kind::mnl).variance() ==
        doctest::Approx(10.0 / 3.0).epsilon(1e-12));
  CHECK(ErrorDist::make(ErrorDist::Kind::uniform).variance() ==
        doctest::Approx(1.0).epsilon(1e-12));
  // the normal kind carries a configurable scale
  CHECK(ErrorDist::make(ErrorDist::Kind::normal, 2.0).variance() ==
        doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("cdf and quantile are inverse to each other") {
  for (auto kind : kAllKinds) {
    auto d = ErrorDist::make(kind);
    CAPTURE(d.key());
    for (double p : {0.01, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99}) {
      CHECK(std::abs(d.cdf(d.quantile(p)) - p) < 1e-8);
    }
  }
}

TEST_CASE("cdf matches integrated density") {
  for (auto kind : kAllKinds) {
    auto d = ErrorDist::make(kind);
    CAPTURE(d.key());
    for (double t : {-1.3, 0.0, 0.8}) {
      double direct = d.cdf(t);
      double quad = integrate([&](double x) { return d.pdf(x); }, d.support_lo(), t);
      CHECK(std::abs(direct - quad) < 1e-7);
    }
  }
}

TEST_CASE("density derivative agrees with central differences") {
  for (auto kind : kAllKinds) {
    auto d = ErrorDist::make(kind);
    CAPTURE(d.key());
    for (double x : {-1.1, -0.2, 0.3, 1.7}) {
      if (x <= d.support_lo() + 0.1 || x >= d.support_hi() - 0.1) continue;
      if (kind == ErrorDist::Kind::de && std::abs(x) < 0.2) continue;  // kink at 0
      double h = 1e-6;
      double num = (d.pdf(x + h) - d.pdf(x - h)) / (2.0 * h);
      CHECK(d.pdf_deriv(x) == doctest::Approx(num).epsilon(1e-4));
    }
  }
}

TEST_CASE("partial upper means match quadrature") {
  for (auto kind : kAllKinds) {
    auto d = ErrorDist::make(kind);
    CAPTURE(d.key());
    for (double t : {-1.0, 0.0, 0.7}) {
      double direct = d.partial_mean(t);
      double quad = integrate([&](double x) { return x * d.pdf(x); }, t,
                              d.support_hi());
      CHECK(std::abs(direct - quad) < 1e-7);
    }
  }
}

TEST_CASE("partial mean from deep in the lower tail approaches the mean") {
  for (auto kind : kAllKinds) {
    auto d = ErrorDist::make(kind);
    CAPTURE(d.key());
    double t = std::max(d.support_lo(), -40.0);
    // the t4 tail is polynomial, hence the loose bound
    CHECK(std::abs(d.partial_mean(t)) < 1e-4);
  }
}

TEST_CASE("fisher information closed forms") {
  CHECK(fisher_information(ErrorDist::make(ErrorDist::Kind::de)) ==
        doctest::Approx(1.0).epsilon(1e-8));
  CHECK(fisher_information(ErrorDist::make(ErrorDist::Kind::t4)) ==
        doctest::Approx(5.0 / 7.0).epsilon(1e-8));
  CHECK(fisher_information(ErrorDist::make(ErrorDist::Kind::normal)) ==
        doctest::Approx(1.0).epsilon(1e-8));
  CHECK(fisher_information(ErrorDist::make(ErrorDist::Kind::gamma)) ==
        doctest::Approx(1.0).epsilon(1e-8));
  // shifted beta(3,5): I = integral of ((2/u - 4/(1-u)) f)^2 ... = 56
  CHECK(fisher_information(ErrorDist::make(ErrorDist::Kind::beta)) ==
        doctest::Approx(56.0).epsilon(1e-7));
  CHECK(fisher_information(ErrorDist::make(ErrorDist::Kind::normal, 2.0)) ==
        doctest::Approx(0.25).epsilon(1e-8));
}

TEST_CASE("information lower bound holds across the catalog") {
  // I(f) * var >= 1, equality only for the Gaussian
  for (auto kind : kAllKinds) {
    if (kind == ErrorDist::Kind::uniform) continue;
    auto d = ErrorDist::make(kind);
    CAPTURE(d.key());
    double prod = fisher_information(d) * d.variance();
    CHECK(prod >= 1.0 - 1e-9);
  }
  auto n = ErrorDist::make(ErrorDist::Kind::normal);
  CHECK(fisher_information(n) * n.variance() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("uniform location information diverges") {
  // the density jump makes the location information infinite
  CHECK_THROWS_AS(fisher_information(ErrorDist::make(ErrorDist::Kind::uniform)),
                  numeric_error);
}

TEST_CASE("mixture information pins") {
  // quadrature stability pins; the lower-bound test above is the real check
  CHECK(fisher_information(ErrorDist::make(ErrorDist::Kind::mns)) ==
        doctest::Approx(0.798178).epsilon(1e-4));
  CHECK(fisher_information(ErrorDist::make(ErrorDist::Kind::mnl)) ==
        doctest::Approx(0.644854).epsilon(1e-4));
}

TEST_CASE("sampling is deterministic and matches the first two moments") {
  for (auto kind : kAllKinds) {
    auto d = ErrorDist::make(kind);
    CAPTURE(d.key());
    Rng r1(42), r2(42);
    for (int i = 0; i < 100; ++i) CHECK(d.sample(r1) == d.sample(r2));

    Rng rng(2024);
    const int n = 200000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
      double x = d.sample(rng);
      sum += x;
      sum2 += x * x;
    }
    double mean = sum / n, var = sum2 / n - mean * mean;
    double sd = std::sqrt(d.variance() / n);
    CHECK(std::abs(mean) < 6.0 * sd + 1e-3);
    CHECK(std::abs(var - d.variance()) < 0.12 * std::max(1.0, d.variance()));
  }
}

TEST_CASE("samples honor the distribution support") {
  auto beta = ErrorDist::make(ErrorDist::Kind::beta);
  Rng rng(7);
  for (int i = 0; i < 1000; ++i) {
    double x = beta.sample(rng);
    CHECK(x > beta.support_lo() - 1e-12);
    CHECK(x < beta.support_hi() + 1e-12);
  }
  auto gamma = ErrorDist::make(ErrorDist::Kind::gamma);
  for (int i = 0; i < 1000; ++i) CHECK(gamma.sample(rng) > gamma.support_lo());
}

TEST_CASE("catalog parsing") {
  CHECK(ErrorDist::parse("de") == ErrorDist::Kind::de);
  CHECK(ErrorDist::parse("t4") == ErrorDist::Kind::t4);
  CHECK(ErrorDist::parse("normal") == ErrorDist::Kind::normal);
  CHECK(ErrorDist::parse("gamma") == ErrorDist::Kind::gamma);
  CHECK(ErrorDist::parse("beta") == ErrorDist::Kind::beta);
  CHECK(ErrorDist::parse("mns") == ErrorDist::Kind::mns);
  CHECK(ErrorDist::parse("mnl") == ErrorDist::Kind::mnl);
  CHECK_FALSE(ErrorDist::parse("cauchy").has_value());
  // the uniform test distribution is not a catalog member
  CHECK_FALSE(ErrorDist::parse("uniform").has_value());
  CHECK(ErrorDist::catalog_keys().size() == 7);
}

TEST_CASE("the normal scale must be positive and finite") {
  CHECK_THROWS_AS(ErrorDist::make(ErrorDist::Kind::normal, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(ErrorDist::make(ErrorDist::Kind::normal, -1.0),
                  std::invalid_argument);
  CHECK_NOTHROW(ErrorDist::make(ErrorDist::Kind::normal, 3.0));
}
