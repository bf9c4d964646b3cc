#include "distributions.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace cql {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Mixture parameters from the catalog: scale mixture 0.1 N(0,25) + 0.9 N(0,1)
// and location mixture 0.7 N(-1,1) + 0.3 N(7/3,1); the latter already has
// mean zero.
struct MixPart {
  double p, mu, sd;
};

const MixPart kMnsParts[2] = {{0.1, 0.0, 5.0}, {0.9, 0.0, 1.0}};
const MixPart kMnlParts[2] = {{0.7, -1.0, 1.0}, {0.3, 7.0 / 3.0, 1.0}};

const boost::math::students_t& t4_dist() {
  static const boost::math::students_t d(4.0);
  return d;
}
const boost::math::gamma_distribution<>& gamma_dist() {
  static const boost::math::gamma_distribution<> d(3.0, 1.0);
  return d;
}
const boost::math::beta_distribution<>& beta_dist() {
  static const boost::math::beta_distribution<> d(3.0, 5.0);
  return d;
}

double phi(double z) {
  static const double c = 0.3989422804014326779;
  return c * std::exp(-0.5 * z * z);
}

double Phi(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

const double kGammaShift = 3.0;        // mean of Gamma(3,1)
const double kBetaShift = 3.0 / 8.0;   // mean of Beta(3,5)
const double kUniHalf = std::sqrt(3.0);

template <int N>
double mix_pdf(const MixPart (&parts)[N], double x) {
  double acc = 0.0;
  for (const auto& m : parts) acc += m.p * phi((x - m.mu) / m.sd) / m.sd;
  return acc;
}
template <int N>
double mix_pdf_deriv(const MixPart (&parts)[N], double x) {
  double acc = 0.0;
  for (const auto& m : parts) {
    const double z = (x - m.mu) / m.sd;
    acc += m.p * phi(z) / m.sd * (-z / m.sd);
  }
  return acc;
}
template <int N>
double mix_cdf(const MixPart (&parts)[N], double x) {
  double acc = 0.0;
  for (const auto& m : parts) acc += m.p * Phi((x - m.mu) / m.sd);
  return acc;
}
template <int N>
double mix_quantile(const MixPart (&parts)[N], double p) {
  double lo = kInf, hi = -kInf;
  for (const auto& m : parts) {
    lo = std::min(lo, m.mu - 12.0 * m.sd);
    hi = std::max(hi, m.mu + 12.0 * m.sd);
  }
  // Bisection then Newton polish; the mixture CDF is smooth and increasing.
  for (int it = 0; it < 200 && hi - lo > 1e-13 * (1.0 + std::abs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    (mix_cdf(parts, mid) < p ? lo : hi) = mid;
  }
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 4; ++it) {
    const double d = mix_pdf(parts, x);
    if (d <= 0.0) break;
    x -= (mix_cdf(parts, x) - p) / d;
  }
  return x;
}

}  // namespace

ErrorDist ErrorDist::make(Kind kind, double sigma) {
  if (kind == Kind::normal) {
    if (!(sigma > 0.0) || !std::isfinite(sigma))
      throw std::invalid_argument("normal sigma must be positive and finite");
  }
  return ErrorDist(kind, sigma);
}

std::optional<ErrorDist::Kind> ErrorDist::parse(const std::string& key) {
  if (key == "de") return Kind::de;
  if (key == "t4") return Kind::t4;
  if (key == "normal") return Kind::normal;
  if (key == "gamma") return Kind::gamma;
  if (key == "beta") return Kind::beta;
  if (key == "mns") return Kind::mns;
  if (key == "mnl") return Kind::mnl;
  return std::nullopt;
}

const std::vector<std::string>& ErrorDist::catalog_keys() {
  static const std::vector<std::string> keys = {"de",   "t4",  "normal", "gamma",
                                                "beta", "mns", "mnl"};
  return keys;
}

std::string ErrorDist::key() const {
  switch (kind_) {
    case Kind::de: return "de";
    case Kind::t4: return "t4";
    case Kind::normal: return "normal";
    case Kind::gamma: return "gamma";
    case Kind::beta: return "beta";
    case Kind::mns: return "mns";
    case Kind::mnl: return "mnl";
    case Kind::uniform: return "uniform";
  }
  return "?";
}

std::string ErrorDist::label() const {
  switch (kind_) {
    case Kind::de: return "DE";
    case Kind::t4: return "t4";
    case Kind::normal: return sigma_ == 1.0 ? "N(0,1)" : "N(0," + format_sig(sigma_ * sigma_, 3) + ")";
    case Kind::gamma: return "Gamma(3,1)";
    case Kind::beta: return "Beta(3,5)";
    case Kind::mns: return "MN_s";
    case Kind::mnl: return "MN_l";
    case Kind::uniform: return "Uniform(-sqrt3,sqrt3)";
  }
  return "?";
}

double ErrorDist::pdf(double x) const {
  switch (kind_) {
    case Kind::de: return 0.5 * std::exp(-std::abs(x));
    case Kind::t4: return boost::math::pdf(t4_dist(), x);
    case Kind::normal: return phi(x / sigma_) / sigma_;
    case Kind::gamma: {
      const double u = x + kGammaShift;
      return u > 0.0 ? boost::math::pdf(gamma_dist(), u) : 0.0;
    }
    case Kind::beta: {
      const double u = x + kBetaShift;
      return (u > 0.0 && u < 1.0) ? boost::math::pdf(beta_dist(), u) : 0.0;
    }
    case Kind::mns: return mix_pdf(kMnsParts, x);
    case Kind::mnl: return mix_pdf(kMnlParts, x);
    case Kind::uniform:
      return std::abs(x) <= kUniHalf ? 1.0 / (2.0 * kUniHalf) : 0.0;
  }
  return 0.0;
}

double ErrorDist::pdf_deriv(double x) const {
  switch (kind_) {
    case Kind::de:
      return x == 0.0 ? 0.0 : -(x > 0 ? 1.0 : -1.0) * pdf(x);
    case Kind::t4:
      return -5.0 * x / (4.0 + x * x) * pdf(x);
    case Kind::normal:
      return -(x / (sigma_ * sigma_)) * pdf(x);
    case Kind::gamma: {
      const double u = x + kGammaShift;
      return u > 0.0 ? (2.0 / u - 1.0) * pdf(x) : 0.0;
    }
    case Kind::beta: {
      const double u = x + kBetaShift;
      return (u > 0.0 && u < 1.0) ? (2.0 / u - 4.0 / (1.0 - u)) * pdf(x) : 0.0;
    }
    case Kind::mns: return mix_pdf_deriv(kMnsParts, x);
    case Kind::mnl: return mix_pdf_deriv(kMnlParts, x);
    case Kind::uniform: return 0.0;
  }
  return 0.0;
}

double ErrorDist::cdf(double x) const {
  switch (kind_) {
    case Kind::de:
      return x < 0.0 ? 0.5 * std::exp(x) : 1.0 - 0.5 * std::exp(-x);
    case Kind::t4: return boost::math::cdf(t4_dist(), x);
    case Kind::normal: return Phi(x / sigma_);
    case Kind::gamma: {
      const double u = x + kGammaShift;
      return u > 0.0 ? boost::math::cdf(gamma_dist(), u) : 0.0;
    }
    case Kind::beta: {
      const double u = x + kBetaShift;
      if (u <= 0.0) return 0.0;
      if (u >= 1.0) return 1.0;
      return boost::math::cdf(beta_dist(), u);
    }
    case Kind::mns: return mix_cdf(kMnsParts, x);
    case Kind::mnl: return mix_cdf(kMnlParts, x);
    case Kind::uniform: {
      if (x <= -kUniHalf) return 0.0;
      if (x >= kUniHalf) return 1.0;
      return (x + kUniHalf) / (2.0 * kUniHalf);
    }
  }
  return 0.0;
}

double ErrorDist::quantile(double p) const {
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument("quantile level must be in (0,1)");
  switch (kind_) {
    case Kind::de:
      return p < 0.5 ? std::log(2.0 * p) : -std::log(2.0 * (1.0 - p));
    case Kind::t4: return boost::math::quantile(t4_dist(), p);
    case Kind::normal:
      return sigma_ * boost::math::quantile(boost::math::normal(), p);
    case Kind::gamma:
      return boost::math::quantile(gamma_dist(), p) - kGammaShift;
    case Kind::beta:
      return boost::math::quantile(beta_dist(), p) - kBetaShift;
    case Kind::mns: return mix_quantile(kMnsParts, p);
    case Kind::mnl: return mix_quantile(kMnlParts, p);
    case Kind::uniform: return (2.0 * p - 1.0) * kUniHalf;
  }
  return 0.0;
}

double ErrorDist::variance() const {
  switch (kind_) {
    case Kind::de: return 2.0;
    case Kind::t4: return 2.0;
    case Kind::normal: return sigma_ * sigma_;
    case Kind::gamma: return 3.0;
    case Kind::beta: return 15.0 / (64.0 * 9.0);
    case Kind::mns: return 0.1 * 25.0 + 0.9;
    case Kind::mnl: {
      double acc = 0.0;
      for (const auto& m : kMnlParts) acc += m.p * (m.mu * m.mu + m.sd * m.sd);
      return acc;
    }
    case Kind::uniform: return 1.0;
  }
  return 0.0;
}

double ErrorDist::support_lo() const {
  switch (kind_) {
    case Kind::gamma: return -kGammaShift;
    case Kind::beta: return -kBetaShift;
    case Kind::uniform: return -kUniHalf;
    default: return -kInf;
  }
}

double ErrorDist::support_hi() const {
  switch (kind_) {
    case Kind::beta: return 1.0 - kBetaShift;
    case Kind::uniform: return kUniHalf;
    default: return kInf;
  }
}

double ErrorDist::sample(Rng& rng) const {
  switch (kind_) {
    case Kind::de: {
      // inverse CDF, one uniform
      return quantile(rng.uniform());
    }
    case Kind::t4: return boost::math::quantile(t4_dist(), rng.uniform());
    case Kind::normal: return sigma_ * rng.normal();
    case Kind::gamma:
      return boost::math::quantile(gamma_dist(), rng.uniform()) - kGammaShift;
    case Kind::beta:
      return boost::math::quantile(beta_dist(), rng.uniform()) - kBetaShift;
    case Kind::mns: {
      const double u = rng.uniform();
      const auto& m = u < kMnsParts[0].p ? kMnsParts[0] : kMnsParts[1];
      return m.mu + m.sd * rng.normal();
    }
    case Kind::mnl: {
      const double u = rng.uniform();
      const auto& m = u < kMnlParts[0].p ? kMnlParts[0] : kMnlParts[1];
      return m.mu + m.sd * rng.normal();
    }
    case Kind::uniform: return (2.0 * rng.uniform() - 1.0) * kUniHalf;
  }
  return 0.0;
}

namespace {

// int_t^inf x phi_{mu,sd}(x) dx
double normal_tail_mean(double mu, double sd, double t) {
  const double z = (t - mu) / sd;
  return mu * (1.0 - Phi(z)) + sd * phi(z);
}

template <int N>
double mix_partial_mean(const MixPart (&parts)[N], double t) {
  double acc = 0.0;
  for (const auto& m : parts) acc += m.p * normal_tail_mean(m.mu, m.sd, t);
  return acc;
}

}  // namespace

double ErrorDist::partial_mean(double t) const {
  const double hi = support_hi();
  if (t >= hi) return 0.0;
  switch (kind_) {
    case Kind::de:
      return t >= 0.0 ? 0.5 * (t + 1.0) * std::exp(-t)
                      : 0.5 * (1.0 - t) * std::exp(t);
    case Kind::t4:
      return 4.0 * std::pow(4.0 + t * t, -1.5);
    case Kind::normal:
      return normal_tail_mean(0.0, sigma_, t);
    case Kind::mns:
      return mix_partial_mean(kMnsParts, t);
    case Kind::mnl:
      return mix_partial_mean(kMnlParts, t);
    case Kind::uniform: {
      const double lo = std::max(t, -kUniHalf);
      return (3.0 - lo * lo) / (4.0 * kUniHalf);
    }
    default: {
      const double lo = std::max(t, support_lo());
      return integrate([this](double x) { return x * pdf(x); }, lo, hi);
    }
  }
}

double integrate(const std::function<double(double)>& f, double lo, double hi) {
  using boost::math::quadrature::gauss_kronrod;
  double err = 0.0;
  const double v = gauss_kronrod<double, 61>::integrate(f, lo, hi, 15, 1e-12, &err);
  if (!std::isfinite(v)) throw numeric_error("quadrature diverged");
  return v;
}

double fisher_information(const ErrorDist& dist) {
  switch (dist.kind()) {
    case ErrorDist::Kind::de:
      return 1.0;  // score is +-1
    case ErrorDist::Kind::normal:
      return 1.0 / dist.variance();
    default: {
      const double v = integrate(
          [&dist](double x) {
            const double f = dist.pdf(x);
            if (f <= 0.0) return 0.0;
            const double s = dist.pdf_deriv(x) / f;
            return s * s * f;
          },
          dist.support_lo(), dist.support_hi());
      if (!std::isfinite(v) || v <= 0.0)
        throw numeric_error("Fisher information integral diverged");
      return v;
    }
  }
}

}  // namespace cql
