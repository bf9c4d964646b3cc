#pragma once

#include <Eigen/Dense>

namespace cql {

enum class PenaltyKind { lasso, scad, adaptive };

struct PenaltyRule {
  PenaltyKind kind = PenaltyKind::lasso;
  double a = 3.7;        // scad: a > 2; adaptive: exponent a > 0
  double lambda = 0.0;   // >= 0; scad/adaptive weights need lambda > 0
  double d_max = 1e6;    // cap for adaptive weights at small |beta0|

  PenaltyRule with_lambda(double lam) const {
    PenaltyRule r = *this;
    r.lambda = lam;
    return r;
  }
  void validate() const;
};

struct PenaltyVector {
  Eigen::VectorXd d;  // per-coefficient multipliers, all in [0, d_max]
  double lambda = 0.0;
};

// gamma_lambda(x): lasso -> lambda; scad -> lambda{ 1(x<=lambda) +
// (a*lambda-x)_+ / ((a-1)*lambda) 1(x>lambda) }; adaptive -> lambda*x^(-a),
// capped so the objective stays finite.
double penalty_gamma(const PenaltyRule& rule, double x);

// d_j = gamma(|beta0_j|)/lambda; identically 1 for lasso.
PenaltyVector penalty_vector(const PenaltyRule& rule, Eigen::Ref<const Eigen::VectorXd> beta0);

}  // namespace cql
