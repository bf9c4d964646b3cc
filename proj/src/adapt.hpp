#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "solver.hpp"

namespace cql {

struct MomentEstimate {
  Eigen::MatrixXd M;  // K x K, (1/n) sum psi_k psi_l on the residuals
  Eigen::VectorXd a;  // K, estimated E d/du psi_k
  int n_used = 0;
  // Empirical offsets b_k the psi values were taken at, and the KDE bandwidth;
  // kept so downstream surrogates evaluate at the same points.
  std::vector<double> offsets;
  double bandwidth = 0.0;
};

struct CovarianceEstimate {
  double sigma2_w = 0.0;
  Eigen::MatrixXd cov;  // s x s over the active set
  std::vector<int> active_set;
};

enum class BandwidthRule { silverman };

// Empirical M and a on residuals. Offsets are the empirical check-loss
// quantiles of the residuals; a_k is exact for the squared kind and a
// Gaussian-KDE density value at the offset otherwise.
MomentEstimate estimate_moments(Eigen::Ref<const Eigen::VectorXd> residuals,
                                const LossBasis& basis,
                                BandwidthRule rule = BandwidthRule::silverman);

// argmin w'Mw over {w >= 0, a'w = 1} (constrained; exact support enumeration
// for K <= 12, projected gradient + KKT polish above) or the linear solve
// M w = a (unconstrained; ridge-regularized when M is near-singular, which
// sets the `regularized` flag on the result).
CompositeWeights optimal_weights(const MomentEstimate& m, WeightMode mode);

struct TwoStepOptions {
  std::optional<double> lasso_lambda;      // stage-1 lambda; CV when absent
  std::optional<double> composite_lambda;  // stage-2 lambda; CV when absent
  std::vector<double> lambda_grid;         // empty -> default_lambda_grid
  int cv_folds = 5;
  std::uint64_t seed = 0;
  bool cv_squared_loss = false;  // score CV folds by squared error instead of
                                 // the method's own composite loss
  // Fixed weights (e.g. equal weights) instead of the moment-optimal ones.
  std::optional<CompositeWeights> fixed_weights;
  SolverOptions solver;
};

struct TwoStepResult {
  FitResult fit;
  CompositeWeights weights;
  MomentEstimate moments;
  FitResult init;  // stage-1 lasso fit
  double lambda_init = 0.0;
  double lambda_final = 0.0;
};

// Lasso init -> residual moments -> constrained optimal (or fixed) weights ->
// penalty vector from the initial coefficients -> composite refit.
TwoStepResult two_step_fit(const Dataset& data, const LossBasis& basis,
                           const PenaltyRule& rule, const TwoStepOptions& opts);

// Newton-type correction on the active set of `fit`, with the KDE surrogate
// standing in for the derivative of the nonsmooth psi parts. Weights of any
// sign are accepted; inactive coordinates stay zero.
FitResult one_step_update(const Dataset& data, const LossBasis& basis,
                          const CompositeWeights& w, const FitResult& fit,
                          BandwidthRule rule = BandwidthRule::silverman);

// sigma2_w from the residual moments and cov = sigma2_w * (S'S)^{-1} on the
// active columns S.
CovarianceEstimate covariance_estimate(const Dataset& data, const LossBasis& basis,
                                       const CompositeWeights& w, const FitResult& fit);

// sigma2_w alone (no active-set requirement).
double sigma2_estimate(const MomentEstimate& m, const CompositeWeights& w);

}  // namespace cql
