#pragma once

#include <string>

#include "simulate.hpp"

namespace cql {

// JSON object with keys n, p, beta_star ([[index, value], ...], 1-based),
// rho, dist, methods, reps, cv_folds, lambda_grid, seed, sigma, zero_tol,
// cv_squared_loss. Omitted keys take the Scenario defaults; unknown keys and
// unknown distribution names are rejected.
Scenario parse_scenario(const std::string& json_text);

Scenario load_scenario(const std::string& path);

}  // namespace cql
