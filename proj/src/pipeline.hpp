#pragma once

#include <optional>
#include <string>
#include <vector>

#include "adapt.hpp"
#include "loss.hpp"
#include "penalty.hpp"
#include "solver.hpp"

namespace cql {

// One estimator from the comparison suite. The CQR families carry the number
// of quantile levels; the others ignore K.
struct MethodSpec {
  enum class Family { lasso, l1, l2, l1l2_plus, l1l2, ecqr, wcqr_plus, wcqr };
  Family family = Family::lasso;
  int K = 0;

  std::string label() const;
  LossBasis basis() const;  // throws for lasso, which has no composite basis
  bool needs_one_step() const {
    return family == Family::l1l2 || family == Family::wcqr;
  }
};

// Accepts "lasso", "l1", "l2", "l1l2+", "l1l2", "ecqr9", "wcqr+9", "wcqr9"
// (also the parenthesized forms "ecqr(9)" etc., case-insensitive).
MethodSpec parse_method(const std::string& text);

struct MethodOptions {
  std::vector<double> lambda_grid;  // empty: derived from the data
  int cv_folds = 5;
  std::uint64_t seed = 0;
  bool cv_squared_loss = false;
  PenaltyRule penalty{PenaltyKind::scad};
  SolverOptions solver;
};

struct MethodResult {
  FitResult fit;
  CompositeWeights weights;
  double sigma_hat_w = 0.0;
  double lambda_init = 0.0;
  double lambda_final = 0.0;
};

// The full data-driven pipeline for one method descriptor.
MethodResult run_method(const Dataset& data, const MethodSpec& spec,
                        const MethodOptions& opts);

// Same estimator family fit unpenalized on the given support columns; beta
// comes back embedded at full length.
FitResult run_oracle(const Dataset& data, const MethodSpec& spec,
                     const std::vector<int>& support, const MethodOptions& opts);

}  // namespace cql
