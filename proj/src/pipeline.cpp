#include "pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

#include "util.hpp"

namespace cql {

namespace {

int parse_levels(const std::string& text, std::size_t pos) {
  std::string digits;
  for (std::size_t i = pos; i < text.size(); ++i)
    if (std::isdigit(static_cast<unsigned char>(text[i]))) digits += text[i];
  if (digits.empty() || digits.size() > 3)
    throw std::invalid_argument("method '" + text + "' needs a quantile count, e.g. ecqr9");
  const int K = std::stoi(digits);
  if (K < 1) throw std::invalid_argument("quantile count must be positive");
  return K;
}

FitResult embed(const FitResult& sub, const std::vector<int>& support, int p) {
  FitResult out;
  out.beta = Eigen::VectorXd::Zero(p);
  for (std::size_t i = 0; i < support.size(); ++i)
    out.beta[support[i]] = sub.beta[int(i)];
  out.offsets = sub.offsets;
  out.residuals = sub.residuals;
  for (int j = 0; j < p; ++j)
    if (out.beta[j] != 0.0) out.active_set.push_back(j);
  out.objective = sub.objective;
  out.iterations = sub.iterations;
  out.converged = sub.converged;
  out.scales = Eigen::VectorXd::Ones(p);
  out.objective_trace = sub.objective_trace;
  return out;
}

}  // namespace

std::string MethodSpec::label() const {
  switch (family) {
    case Family::lasso: return "Lasso";
    case Family::l1: return "L1";
    case Family::l2: return "L2";
    case Family::l1l2_plus: return "L1-L2+";
    case Family::l1l2: return "L1-L2";
    case Family::ecqr: return "ECQR(" + format_int(K) + ")";
    case Family::wcqr_plus: return "WCQR+(" + format_int(K) + ")";
    case Family::wcqr: return "WCQR(" + format_int(K) + ")";
  }
  return "?";
}

LossBasis MethodSpec::basis() const {
  switch (family) {
    case Family::lasso:
      throw std::logic_error("lasso has no composite basis");
    case Family::l1: return LossBasis::absolute_only();
    case Family::l2: return LossBasis::squared_only();
    case Family::l1l2_plus:
    case Family::l1l2: return LossBasis::l1l2();
    default: return LossBasis::cqr(K);
  }
}

MethodSpec parse_method(const std::string& text) {
  std::string t;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c)) && c != '(' && c != ')' &&
        c != '-' && c != '_')
      t += char(std::tolower(static_cast<unsigned char>(c)));
  MethodSpec spec;
  if (t == "lasso") {
    spec.family = MethodSpec::Family::lasso;
  } else if (t == "l1") {
    spec.family = MethodSpec::Family::l1;
  } else if (t == "l2") {
    spec.family = MethodSpec::Family::l2;
  } else if (t == "l1l2+" || t == "l1l2p") {
    spec.family = MethodSpec::Family::l1l2_plus;
  } else if (t == "l1l2") {
    spec.family = MethodSpec::Family::l1l2;
  } else if (t.rfind("ecqr", 0) == 0) {
    spec.family = MethodSpec::Family::ecqr;
    spec.K = parse_levels(t, 4);
  } else if (t.rfind("wcqr+", 0) == 0 || t.rfind("wcqrp", 0) == 0) {
    spec.family = MethodSpec::Family::wcqr_plus;
    spec.K = parse_levels(t, 5);
  } else if (t.rfind("wcqr", 0) == 0) {
    spec.family = MethodSpec::Family::wcqr;
    spec.K = parse_levels(t, 4);
  } else {
    throw std::invalid_argument(
        "unknown method '" + text +
        "' (expected lasso, l1, l2, l1l2+, l1l2, ecqrK, wcqr+K, or wcqrK)");
  }
  return spec;
}

MethodResult run_method(const Dataset& data, const MethodSpec& spec,
                        const MethodOptions& opts) {
  MethodResult out;

  if (spec.family == MethodSpec::Family::lasso) {
    std::vector<double> grid =
        opts.lambda_grid.empty() ? default_lambda_grid(data) : opts.lambda_grid;
    SolverOptions cv_solver = opts.solver;
    cv_solver.max_iter = std::min(cv_solver.max_iter, 1500);
    cv_solver.tol = std::max(cv_solver.tol, 1e-6);
    auto fit_fn = [&](const Dataset& train, double lambda, const FitResult* warm) {
      return fit_lasso(train, lambda, cv_solver, warm);
    };
    auto loss_fn = [](const Dataset& hold, const FitResult& fit) {
      return (hold.y - hold.X * fit.beta).squaredNorm() / double(hold.n());
    };
    const double lam = cross_validate(data, fit_fn, loss_fn, grid, opts.cv_folds,
                                      mix_seed(opts.seed, 0, 0x731)).lambda;
    out.fit = fit_lasso(data, lam, opts.solver);
    out.lambda_init = out.lambda_final = lam;
    out.weights = CompositeWeights::constrained({1.0});
    const MomentEstimate m =
        estimate_moments(out.fit.residuals, LossBasis::squared_only());
    out.sigma_hat_w = std::sqrt(sigma2_estimate(m, out.weights));
    return out;
  }

  const LossBasis basis = spec.basis();
  TwoStepOptions ts;
  ts.lambda_grid = opts.lambda_grid;
  ts.cv_folds = opts.cv_folds;
  ts.seed = opts.seed;
  ts.cv_squared_loss = opts.cv_squared_loss;
  ts.solver = opts.solver;
  switch (spec.family) {
    case MethodSpec::Family::l1:
    case MethodSpec::Family::l2:
      ts.fixed_weights = CompositeWeights::constrained({1.0});
      break;
    case MethodSpec::Family::ecqr:
      ts.fixed_weights = CompositeWeights::constrained(
          std::vector<double>(std::size_t(spec.K), 1.0 / double(spec.K)));
      break;
    default:
      break;  // constrained optimum from the first-stage residuals
  }

  TwoStepResult two = two_step_fit(data, basis, opts.penalty, ts);
  out.fit = two.fit;
  out.weights = two.weights;
  out.lambda_init = two.lambda_init;
  out.lambda_final = two.lambda_final;

  if (spec.needs_one_step() && !two.fit.active_set.empty()) {
    const MomentEstimate m2 = estimate_moments(two.fit.residuals, basis);
    const CompositeWeights wu = optimal_weights(m2, WeightMode::unconstrained);
    out.fit = one_step_update(data, basis, wu, two.fit);
    out.weights = wu;
  }

  const MomentEstimate mf = estimate_moments(out.fit.residuals, basis);
  out.sigma_hat_w = std::sqrt(sigma2_estimate(mf, out.weights));
  return out;
}

FitResult run_oracle(const Dataset& data, const MethodSpec& spec,
                     const std::vector<int>& support, const MethodOptions& opts) {
  if (support.empty())
    throw std::invalid_argument("oracle fit needs a nonempty support");
  const Dataset sub = data.subset_cols(support);
  const int s = int(support.size());
  const PenaltyVector nopen{Eigen::VectorXd::Zero(s), 0.0};

  const auto least_squares = [&](const Dataset& on) {
    return fit_composite(on, LossBasis::squared_only(),
                         CompositeWeights::constrained({1.0}),
                         PenaltyVector{Eigen::VectorXd::Zero(on.p()), 0.0},
                         opts.solver);
  };

  FitResult subfit;
  switch (spec.family) {
    case MethodSpec::Family::lasso:
    case MethodSpec::Family::l2:
      subfit = least_squares(sub);
      break;
    case MethodSpec::Family::l1:
      subfit = fit_composite(sub, LossBasis::absolute_only(),
                             CompositeWeights::constrained({1.0}), nopen,
                             opts.solver);
      break;
    case MethodSpec::Family::ecqr:
      subfit = fit_composite(
          sub, spec.basis(),
          CompositeWeights::constrained(
              std::vector<double>(std::size_t(spec.K), 1.0 / double(spec.K))),
          nopen, opts.solver);
      break;
    default: {
      const LossBasis basis = spec.basis();
      const FitResult pilot = least_squares(sub);
      const MomentEstimate m = estimate_moments(pilot.residuals, basis);
      const CompositeWeights wc = optimal_weights(m, WeightMode::constrained);
      subfit = fit_composite(sub, basis, wc, nopen, opts.solver, &pilot);
      if (spec.needs_one_step() && !subfit.active_set.empty()) {
        const MomentEstimate m2 = estimate_moments(subfit.residuals, basis);
        const CompositeWeights wu = optimal_weights(m2, WeightMode::unconstrained);
        subfit = one_step_update(sub, basis, wu, subfit);
      }
      break;
    }
  }
  return embed(subfit, support, data.p());
}

}  // namespace cql
