#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "distributions.hpp"
#include "pipeline.hpp"
#include "solver.hpp"

namespace cql {

// One Monte Carlo design: AR(rho) Gaussian predictors, sparse truth, centered
// errors. beta_star holds 1-based (index, value) pairs as they appear in
// scenario files.
struct Scenario {
  int n = 0;
  int p = 0;
  std::vector<std::pair<int, double>> beta_star;
  double rho = 0.5;
  ErrorDist dist = ErrorDist::make(ErrorDist::Kind::normal);
  std::vector<std::string> methods;
  int reps = 100;
  int cv_folds = 5;
  std::vector<double> lambda_grid;
  std::uint64_t seed = 0;
  double zero_tol = 1e-8;
  bool cv_squared_loss = false;

  void validate() const;
  Eigen::VectorXd beta_vector() const;  // dense, 0-based
  std::vector<int> support() const;     // 0-based, ascending
};

Dataset generate_data(const Scenario& sc, int rep);

// (beta_hat - beta_star)' Sigma (beta_hat - beta_star) with Sigma_ij =
// rho^|i-j|, evaluated analytically in O(p).
double model_error(Eigen::Ref<const Eigen::VectorXd> beta_hat,
                   Eigen::Ref<const Eigen::VectorXd> beta_star, double rho);

std::pair<int, int> count_tp_fp(Eigen::Ref<const Eigen::VectorXd> beta_hat,
                                Eigen::Ref<const Eigen::VectorXd> beta_star,
                                double zero_tol = 1e-8);

struct MethodRep {
  std::string method;
  double model_error = 0.0;
  int tp = 0;
  int fp = 0;
  double sigma_hat_w = 0.0;
  bool converged = false;
  bool failed = false;
  std::string error;
  double oracle_model_error = 0.0;
  bool oracle_failed = false;
  std::string oracle_error;
};

struct RepSummary {
  int rep = 0;
  std::uint64_t seed = 0;
  std::vector<MethodRep> methods;
};

struct MethodSummary {
  std::string method;
  int reps_used = 0;
  int failures = 0;
  double mme = 0.0;
  double mean_tp = 0.0;
  double mean_fp = 0.0;
  double mean_sigma_hat_w = 0.0;
  double oracle_mme = 0.0;
  int oracle_failures = 0;
};

struct ScenarioSummary {
  std::vector<MethodSummary> methods;
  std::vector<RepSummary> reps;
};

// Runs every (rep, method) cell; failures are captured per cell and left out
// of the aggregates. Deterministic for a fixed seed regardless of the worker
// count.
ScenarioSummary run_scenario(const Scenario& sc);

struct ScreenResult {
  std::vector<int> kept;  // 0-based, by descending F, ties by lower index
  Eigen::VectorXd f;      // per-column statistic; +inf when R^2 = 1
};

ScreenResult screen_marginal(const Dataset& data, int keep);

}  // namespace cql
