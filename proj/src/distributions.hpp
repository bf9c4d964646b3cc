#pragma once

#include <optional>
#include <string>
#include <vector>

#include "util.hpp"

namespace cql {

// Error-distribution catalog, every member centered to mean zero.
// `uniform` is a test-only member and is not part of the scenario catalog.
class ErrorDist {
 public:
  enum class Kind { de, t4, normal, gamma, beta, mns, mnl, uniform };

  static ErrorDist make(Kind kind, double sigma = 1.0);
  static std::optional<Kind> parse(const std::string& key);
  static const std::vector<std::string>& catalog_keys();  // the seven names

  Kind kind() const { return kind_; }
  std::string key() const;    // short name used in CLI/CSV
  std::string label() const;  // display label

  double pdf(double x) const;
  double pdf_deriv(double x) const;
  double cdf(double x) const;
  double quantile(double p) const;  // p in (0,1)
  double variance() const;
  double support_lo() const;
  double support_hi() const;

  // One draw; consumes a fixed number of uniforms per call.
  double sample(Rng& rng) const;

  // integral over (t, support_hi) of x f(x) dx
  double partial_mean(double t) const;

 private:
  explicit ErrorDist(Kind k, double sigma) : kind_(k), sigma_(sigma) {}
  Kind kind_;
  double sigma_;  // normal kind only
};

// Adaptive Gauss-Kronrod on (lo, hi); infinite endpoints allowed.
double integrate(const std::function<double(double)>& f, double lo, double hi);

// I(f) = integral of (f'/f)^2 f, with the analytic score per catalog kind.
double fisher_information(const ErrorDist& dist);

}  // namespace cql
