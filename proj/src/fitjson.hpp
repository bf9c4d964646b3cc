#pragma once

#include <string>
#include <vector>

#include "adapt.hpp"
#include "solver.hpp"

namespace cql {

// Machine-readable fit report. Reals carry 17 significant digits so the
// serialized coefficients round-trip exactly.
std::string fit_report_json(const TwoStepResult& result,
                            const std::vector<std::string>& x_names,
                            const std::string& basis_name,
                            const std::string& penalty_name,
                            double sigma_hat_w);

}  // namespace cql
