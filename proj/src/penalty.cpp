#include "penalty.hpp"

#include <cmath>
#include <stdexcept>

namespace cql {

void PenaltyRule::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("penalty lambda must be finite and >= 0");
  if (kind == PenaltyKind::scad && !(a > 2.0))
    throw std::invalid_argument("scad requires a > 2");
  if (kind == PenaltyKind::adaptive && !(a > 0.0))
    throw std::invalid_argument("adaptive requires a > 0");
  if (!(d_max > 0.0)) throw std::invalid_argument("d_max must be positive");
}

double penalty_gamma(const PenaltyRule& rule, double x) {
  rule.validate();
  if (!(x >= 0.0)) throw std::invalid_argument("gamma argument must be >= 0");
  const double lam = rule.lambda;
  switch (rule.kind) {
    case PenaltyKind::lasso:
      return lam;
    case PenaltyKind::scad: {
      if (x <= lam) return lam;
      const double num = std::max(rule.a * lam - x, 0.0);
      return num / (rule.a - 1.0);
    }
    case PenaltyKind::adaptive: {
      const double w = x > 0.0 ? std::pow(x, -rule.a) : rule.d_max;
      return lam * std::min(w, rule.d_max);
    }
  }
  return 0.0;
}

PenaltyVector penalty_vector(const PenaltyRule& rule, Eigen::Ref<const Eigen::VectorXd> beta0) {
  rule.validate();
  if (rule.kind != PenaltyKind::lasso && rule.lambda == 0.0)
    throw std::invalid_argument("scad/adaptive penalty weights need lambda > 0");
  PenaltyVector out;
  out.lambda = rule.lambda;
  out.d.resize(beta0.size());
  for (Eigen::Index j = 0; j < beta0.size(); ++j) {
    if (rule.kind == PenaltyKind::lasso) {
      out.d[j] = 1.0;
    } else {
      out.d[j] = penalty_gamma(rule, std::abs(beta0[j])) / rule.lambda;
    }
  }
  return out;
}

}  // namespace cql
