#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "loss.hpp"
#include "penalty.hpp"

namespace cql {

struct Dataset {
  Eigen::MatrixXd X;  // n x p, rows are observations
  Eigen::VectorXd y;  // length n

  int n() const { return int(X.rows()); }
  int p() const { return int(X.cols()); }
  void validate() const;  // n >= 2, finite entries, y length matches

  Dataset subset_rows(const std::vector<int>& rows) const;
  Dataset subset_cols(const std::vector<int>& cols) const;
};

struct FitResult {
  Eigen::VectorXd beta;          // length p, original scale
  std::vector<double> offsets;   // fitted b_k, one per basis part; empty for squared-only
  Eigen::VectorXd residuals;     // y - X*beta
  std::vector<int> active_set;   // j with beta_j != 0
  double objective = 0.0;        // loss + n*lambda*sum_j d_j |beta_j * scale_j|
  int iterations = 0;
  bool converged = false;
  // Unit-RMS column scales used internally; all ones when standardize was off.
  // Kept so the reported objective can be recomputed from the inputs.
  Eigen::VectorXd scales;
  // Objective after each outer iteration (best iterate so far; non-increasing).
  std::vector<double> objective_trace;
};

struct SolverOptions {
  double tol = 1e-7;      // relative objective change
  int max_iter = 10000;
  double admm_rho = 1.0;  // initial splitting penalty, adapted during the run
  bool standardize = true;
  // Hold offsets at their initial-residual quantiles instead of co-optimizing.
  bool plugin_offsets = false;
  // When positive, also probe the optimality certificate after this many
  // non-improving iterations without waiting for the splitting to settle.
  // Cross-validation fits use this; final fits leave it off.
  int probe_stagnation = 0;

  void validate() const;
};

struct KktCertificate {
  double stationarity_gap = 0.0;  // max over active j of the scaled score defect
  double inactive_score = 0.0;    // max over inactive j of |score_j / d_j|
  double threshold = 0.0;         // n * lambda
  bool passed = false;
  // inactive coordinates with d_j = 0 cannot be certified and are listed here
  std::vector<int> skipped_zero_penalty;
};

// Least squares + n*lambda*sum|beta_j| by cyclic coordinate descent.
FitResult fit_lasso(const Dataset& data, double lambda, const SolverOptions& opts,
                    const FitResult* warm = nullptr);

// Composite objective sum_i rho_w(y_i - x_i'beta) + n*lambda*sum_j d_j|beta_j|,
// minimized jointly over beta and the offsets b_k. Constrained weights only;
// sign-unrestricted weights make the problem nonconvex (use one_step_update).
FitResult fit_composite(const Dataset& data, const LossBasis& basis,
                        const CompositeWeights& w, const PenaltyVector& pen,
                        const SolverOptions& opts, const FitResult* warm = nullptr);

// Subgradient optimality certificate for the weighted-L1 problem. The score
// is the loss gradient d/dbeta_j = -sum_i psi_w(r_i) x_ij, evaluated as an
// interval when residuals sit within kink_tol of a kink (ties at the fitted
// quantiles are structural, not numerical noise). kink_tol < 0 picks a
// default proportional to the residual scale.
KktCertificate check_kkt(const Dataset& data, const LossBasis& basis,
                         const CompositeWeights& w, const PenaltyVector& pen,
                         const FitResult& fit, double tol,
                         double kink_tol = -1.0);

struct CvResult {
  double lambda = 0.0;
  std::vector<double> grid;     // descending
  std::vector<double> cv_loss;  // mean holdout loss per grid point
  int folds = 0;
};

using CvFitFn =
    std::function<FitResult(const Dataset& train, double lambda, const FitResult* warm)>;
// Mean holdout loss of a fitted model.
using CvLossFn = std::function<double(const Dataset& holdout, const FitResult& fit)>;

// K-fold CV: seeded shuffle, contiguous blocks, warm starts along the
// descending grid within each fold. Ties pick the smaller lambda.
CvResult cross_validate(const Dataset& data, const CvFitFn& fit_fn,
                        const CvLossFn& loss_fn, std::vector<double> grid,
                        int folds, std::uint64_t seed);

// 30 log-spaced values from lambda_max (smallest lambda zeroing the lasso
// fit on unit-RMS columns) down to 0.001*lambda_max.
std::vector<double> default_lambda_grid(const Dataset& data);

// Root-mean-square of each column; the internal standardization scale.
Eigen::VectorXd column_scales(const Eigen::MatrixXd& X);

}  // namespace cql
