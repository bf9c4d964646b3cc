#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "distributions.hpp"
#include "loss.hpp"

namespace cql {

// Constants of the absolute+squared family for one error distribution.
// c is the mixing ratio w_abs/w_sq scaled by sigma; +-inf is a valid value
// (all mass on the absolute component). c and d_eps are NaN until filled in
// by l1l2_optimal.
struct L1L2Constants {
  double a_eps = 0.0;  // B / sigma, in [-1, 1]
  double b_eps = 0.0;  // sigma * f(median)
  double B = 0.0;      // E eps * sgn(eps - median)
  double c = 0.0;
  double d_eps = 0.0;  // variance ratio vs least squares at the chosen c
};

// Copy of `basis` with offsets at the population values: F^{-1}(tau_k) for
// quantile parts, the median for absolute parts.
LossBasis population_offsets(const ErrorDist& dist, LossBasis basis);

// Population asymptotic variance sigma2_w of the composite estimator.
// Offsets must already be at their population values.
double sigma2_composite(const ErrorDist& dist, const LossBasis& basis,
                        const CompositeWeights& w);

// a_eps, b_eps, B only.
L1L2Constants l1l2_constants(const ErrorDist& dist);

// Adds the optimal mixing ratio c and variance ratio d_eps = g(c).
// Constrained mode restricts c >= 0.
L1L2Constants l1l2_optimal(const ErrorDist& dist, WeightMode mode);

// min(tau_i, tau_j) - tau_i*tau_j, the Brownian-bridge covariance.
Eigen::MatrixXd cqr_numerator(const std::vector<double>& taus);

// a_k = f(F^{-1}(tau_k))
Eigen::VectorXd cqr_a(const ErrorDist& dist, const std::vector<double>& taus);

double cqr_sigma2(const ErrorDist& dist, const std::vector<double>& taus,
                  const std::vector<double>& w);

// Population optimal weights on the quantile grid; the constrained problem
// goes through the same QP as the data-driven path.
CompositeWeights cqr_optimal_weights(const ErrorDist& dist,
                                     const std::vector<double>& taus,
                                     WeightMode mode);

struct EfficiencyTable {
  std::vector<std::string> methods;  // row labels
  std::vector<std::string> dists;    // column labels
  Eigen::MatrixXd eff;               // methods x dists, (1/I)/sigma2
};

// methods: any of L1, L2, L1-L2+, L1-L2, ECQR, WCQR+, WCQR ("all" callers
// pass the full list); the CQR families expand over K_list.
EfficiencyTable efficiency_table(const std::vector<ErrorDist>& dists,
                                 const std::vector<std::string>& methods,
                                 const std::vector<int>& K_list);

struct WeightTable {
  std::vector<double> taus;
  std::vector<std::string> dists;
  Eigen::MatrixXd w;  // K x dists, each column rescaled to sum 1
};

// Constrained population CQR weights per distribution, displayed sum-1.
WeightTable weight_table(const std::vector<ErrorDist>& dists, int K);

// The seven catalog distributions in display order.
std::vector<ErrorDist> catalog_dists();

}  // namespace cql
