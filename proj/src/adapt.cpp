#include "adapt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "util.hpp"

namespace cql {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

double gauss_kernel(double u, double h) {
  static const double c = 0.3989422804014326779;
  const double z = u / h;
  return c * std::exp(-0.5 * z * z) / h;
}

struct KktSolve {
  Eigen::VectorXd w;  // full length, zeros off the support
  double mu = 0.0;
  double value = 0.0;
  bool ok = false;
};

// Equality-constrained piece on a fixed support: 2 M_SS w_S = mu a_S with
// a_S' w_S = 1. Solved as one bordered linear system so rank-deficient M_SS
// still yields a usable candidate when consistent.
KktSolve solve_support(const Eigen::MatrixXd& M, const Eigen::VectorXd& a,
                       const std::vector<int>& support) {
  const int s = int(support.size());
  const int K = int(a.size());
  Eigen::MatrixXd sys = Eigen::MatrixXd::Zero(s + 1, s + 1);
  for (int i = 0; i < s; ++i) {
    for (int j = 0; j < s; ++j) sys(i, j) = 2.0 * M(support[std::size_t(i)], support[std::size_t(j)]);
    sys(i, s) = -a[support[std::size_t(i)]];
    sys(s, i) = a[support[std::size_t(i)]];
  }
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(s + 1);
  rhs[s] = 1.0;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(sys);
  KktSolve out;
  if (!lu.isInvertible()) {
    // fall back to least squares; accept only if it actually solves the system
    Eigen::VectorXd sol = sys.completeOrthogonalDecomposition().solve(rhs);
    if ((sys * sol - rhs).cwiseAbs().maxCoeff() > 1e-9) return out;
    out.w = Eigen::VectorXd::Zero(K);
    for (int i = 0; i < s; ++i) out.w[support[std::size_t(i)]] = sol[i];
    out.mu = sol[s];
    out.value = out.w.dot(M * out.w);
    out.ok = true;
    return out;
  }
  Eigen::VectorXd sol = lu.solve(rhs);
  out.w = Eigen::VectorXd::Zero(K);
  for (int i = 0; i < s; ++i) out.w[support[std::size_t(i)]] = sol[i];
  out.mu = sol[s];
  out.value = out.w.dot(M * out.w);
  out.ok = true;
  return out;
}

// Euclidean projection onto {w >= 0, a'w = 1}: w = (v - theta*a)_+ with theta
// solving the monotone piecewise-linear equation a'(v - theta*a)_+ = 1.
Eigen::VectorXd project_simplex_slice(const Eigen::VectorXd& v,
                                      const Eigen::VectorXd& a) {
  const int K = int(v.size());
  std::vector<double> breaks;
  breaks.reserve(std::size_t(K));
  for (int k = 0; k < K; ++k)
    if (a[k] != 0.0) breaks.push_back(v[k] / a[k]);
  std::sort(breaks.begin(), breaks.end());
  auto g = [&](double theta) {
    double acc = 0.0;
    for (int k = 0; k < K; ++k)
      acc += a[k] * std::max(0.0, v[k] - theta * a[k]);
    return acc - 1.0;
  };
  // bracket: g decreases from +inf to a negative limit
  double lo = breaks.empty() ? -1.0 : breaks.front() - 1.0;
  double hi = breaks.empty() ? 1.0 : breaks.back() + 1.0;
  while (g(lo) < 0.0) lo -= std::max(1.0, hi - lo);
  while (g(hi) > 0.0) hi += std::max(1.0, hi - lo);
  // On the bracketing interval the active set is fixed between breakpoints,
  // so one more linear solve after a short bisection is exact enough.
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) > 0.0 ? lo : hi) = mid;
  }
  double A = 0.0, B = 0.0;
  const double theta0 = 0.5 * (lo + hi);
  for (int k = 0; k < K; ++k) {
    if (v[k] - theta0 * a[k] > 0.0) {
      A += a[k] * v[k];
      B += a[k] * a[k];
    }
  }
  const double theta = B > 0.0 ? (A - 1.0) / B : theta0;
  Eigen::VectorXd w(K);
  for (int k = 0; k < K; ++k) w[k] = std::max(0.0, v[k] - theta * a[k]);
  return w;
}

Eigen::VectorXd constrained_qp(const Eigen::MatrixXd& M, const Eigen::VectorXd& a) {
  const int K = int(a.size());
  constexpr int kEnumLimit = 12;

  if (K <= kEnumLimit) {
    double best_value = std::numeric_limits<double>::infinity();
    Eigen::VectorXd best;
    for (unsigned mask = 1; mask < (1u << K); ++mask) {
      std::vector<int> support;
      for (int k = 0; k < K; ++k)
        if (mask & (1u << k)) support.push_back(k);
      const KktSolve cand = solve_support(M, a, support);
      if (!cand.ok) continue;
      bool feasible = true;
      for (int k : support)
        if (cand.w[k] < -1e-10) feasible = false;
      if (!feasible) continue;
      if (cand.value < best_value - 1e-15) {
        best_value = cand.value;
        best = cand.w;
      }
    }
    if (best.size() == 0) throw numeric_error("weight program found no feasible support");
    return best;
  }

  // Projected gradient to locate the face, then an active-set polish for an
  // exact vertex/face solution.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  const double L = std::max(1e-12, 2.0 * es.eigenvalues().maxCoeff());
  Eigen::VectorXd w = project_simplex_slice(Eigen::VectorXd::Ones(K), a);
  for (int it = 0; it < 200000; ++it) {
    Eigen::VectorXd next = project_simplex_slice(w - (2.0 / L) * (M * w), a);
    const double move = (next - w).cwiseAbs().maxCoeff();
    w = next;
    if (move <= 1e-14) break;
  }

  std::vector<int> support;
  for (int k = 0; k < K; ++k)
    if (w[k] > 1e-9) support.push_back(k);
  Eigen::VectorXd polished = w;
  for (int round = 0; round < 4 * K; ++round) {
    if (support.empty()) break;
    KktSolve sol = solve_support(M, a, support);
    if (!sol.ok) break;
    int worst = -1;
    double worst_val = -1e-12;
    for (std::size_t i = 0; i < support.size(); ++i) {
      const double wi = sol.w[support[i]];
      if (wi < worst_val) {
        worst_val = wi;
        worst = int(i);
      }
    }
    if (worst >= 0) {
      support.erase(support.begin() + worst);
      continue;
    }
    polished = sol.w.cwiseMax(0.0);
    // dual feasibility on the zero coordinates
    Eigen::VectorXd grad = 2.0 * (M * polished);
    int add = -1;
    double viol = 1e-11;
    for (int k = 0; k < K; ++k) {
      if (std::find(support.begin(), support.end(), k) != support.end()) continue;
      const double v = sol.mu * a[k] - grad[k];
      if (v > viol) {
        viol = v;
        add = k;
      }
    }
    if (add < 0) return polished;
    support.push_back(add);
    std::sort(support.begin(), support.end());
  }
  return polished;
}

}  // namespace

MomentEstimate estimate_moments(Eigen::Ref<const Eigen::VectorXd> residuals,
                                const LossBasis& basis, BandwidthRule rule) {
  basis.validate();
  (void)rule;  // silverman is the only rule
  const int n = int(residuals.size());
  require(n >= 10, "need at least 10 residuals to estimate moments");
  require(residuals.allFinite(), "non-finite residuals");

  const Kde kde(residuals);
  std::vector<double> sorted(residuals.data(), residuals.data() + n);
  std::sort(sorted.begin(), sorted.end());

  const int K = basis.size();
  MomentEstimate out;
  out.n_used = n;
  out.bandwidth = kde.bandwidth();
  out.offsets.assign(std::size_t(K), 0.0);
  out.a.resize(K);

  Eigen::MatrixXd psi(n, K);
  for (int k = 0; k < K; ++k) {
    LossComponent part = basis.parts[std::size_t(k)];
    switch (part.kind) {
      case LossKind::squared:
        out.a[k] = 2.0;
        break;
      case LossKind::quantile:
        part.offset = quantile_minimizer_sorted(sorted, part.tau);
        out.a[k] = kde.density(part.offset);
        break;
      case LossKind::absolute:
        part.offset = quantile_minimizer_sorted(sorted, 0.5);
        out.a[k] = 2.0 * kde.density(part.offset);
        break;
    }
    out.offsets[std::size_t(k)] = part.offset;
    for (int i = 0; i < n; ++i) psi(i, k) = component_psi(part, residuals[i]);
  }
  out.M = (psi.transpose() * psi) / double(n);
  out.M = ((out.M + out.M.transpose()) / 2.0).eval();
  return out;
}

CompositeWeights optimal_weights(const MomentEstimate& m, WeightMode mode) {
  const int K = int(m.a.size());
  require(K >= 1, "empty moment estimate");
  require(m.M.rows() == K && m.M.cols() == K, "moment matrix shape mismatch");
  require(m.M.allFinite() && m.a.allFinite(), "non-finite moment estimate");

  if (mode == WeightMode::unconstrained) {
    const double eps = std::max(1e-10 * m.M.trace() / double(K), 1e-300);
    Eigen::MatrixXd Mr = m.M + eps * Eigen::MatrixXd::Identity(K, K);
    Eigen::VectorXd w = Mr.ldlt().solve(m.a);
    CompositeWeights out = CompositeWeights::unconstrained(
        std::vector<double>(w.data(), w.data() + K));
    const double scale = std::max(1.0, m.a.cwiseAbs().maxCoeff());
    out.regularized = (m.M * w - m.a).cwiseAbs().maxCoeff() > 1e-6 * scale;
    out.validate(K);
    return out;
  }

  if (m.a.maxCoeff() <= 0.0)
    throw numeric_error("constrained weights infeasible: no positive a_k");
  Eigen::VectorXd w = constrained_qp(m.M, m.a);
  w = w.cwiseMax(0.0);
  const double s = m.a.dot(w);
  if (!(s > 0.0)) throw numeric_error("weight program collapsed to zero");
  w /= s;
  CompositeWeights out =
      CompositeWeights::constrained(std::vector<double>(w.data(), w.data() + K));
  out.validate(K);
  return out;
}

double sigma2_estimate(const MomentEstimate& m, const CompositeWeights& w) {
  const int K = int(m.a.size());
  w.validate(K);
  const Eigen::Map<const Eigen::VectorXd> wv(w.w.data(), K);
  const double den = m.a.dot(wv);
  const double num = wv.dot(m.M * wv);
  if (std::abs(den) < 1e-300 * (1.0 + std::abs(num)))
    throw numeric_error("sigma2 denominator vanished: sum w_k a_k is zero");
  return std::max(0.0, num) / (den * den);
}

TwoStepResult two_step_fit(const Dataset& data, const LossBasis& basis,
                           const PenaltyRule& rule, const TwoStepOptions& opts) {
  data.validate();
  basis.validate();
  rule.validate();
  require(opts.cv_folds >= 2, "need at least two folds");

  std::vector<double> grid =
      opts.lambda_grid.empty() ? default_lambda_grid(data) : opts.lambda_grid;

  SolverOptions cv_solver = opts.solver;
  cv_solver.max_iter = std::min(cv_solver.max_iter, 1500);
  cv_solver.tol = std::max(cv_solver.tol, 1e-6);
  cv_solver.probe_stagnation = 25;

  TwoStepResult out;

  // Stage one: lasso, CV-scored by squared error.
  if (opts.lasso_lambda) {
    out.lambda_init = *opts.lasso_lambda;
  } else {
    auto fit1 = [&](const Dataset& train, double lambda, const FitResult* warm) {
      return fit_lasso(train, lambda, cv_solver, warm);
    };
    auto score1 = [](const Dataset& hold, const FitResult& fit) {
      return (hold.y - hold.X * fit.beta).squaredNorm() / double(hold.n());
    };
    out.lambda_init = cross_validate(data, fit1, score1, grid, opts.cv_folds,
                                     mix_seed(opts.seed, 0, 0x731)).lambda;
  }
  out.init = fit_lasso(data, out.lambda_init, opts.solver);

  out.moments = estimate_moments(out.init.residuals, basis);
  if (opts.fixed_weights) {
    out.weights = *opts.fixed_weights;
    out.weights.validate(basis.size());
    require(out.weights.mode == WeightMode::constrained,
            "two-step refit requires constrained weights");
  } else {
    out.weights = optimal_weights(out.moments, WeightMode::constrained);
  }

  // Penalty multipliers come from the standardized initial coefficients, at
  // whichever lambda is being tried.
  const Eigen::VectorXd beta0_std = out.init.scales.size() == data.p()
                                        ? out.init.beta.cwiseProduct(out.init.scales)
                                        : out.init.beta;
  auto pen_at = [&](double lambda) {
    return penalty_vector(rule.with_lambda(lambda), beta0_std);
  };

  if (opts.composite_lambda) {
    out.lambda_final = *opts.composite_lambda;
  } else {
    auto fit2 = [&](const Dataset& train, double lambda, const FitResult* warm) {
      const PenaltyVector pen = pen_at(lambda);
      return fit_composite(train, basis, out.weights, pen, cv_solver, warm);
    };
    auto score2 = [&](const Dataset& hold, const FitResult& fit) {
      if (opts.cv_squared_loss)
        return (hold.y - hold.X * fit.beta).squaredNorm() / double(hold.n());
      LossBasis scored = basis;
      if (int(fit.offsets.size()) == basis.size())
        for (int k = 0; k < basis.size(); ++k)
          if (scored.parts[std::size_t(k)].kind != LossKind::squared)
            scored.parts[std::size_t(k)].offset = fit.offsets[std::size_t(k)];
      const Eigen::VectorXd r = hold.y - hold.X * fit.beta;
      double acc = 0.0;
      for (int i = 0; i < r.size(); ++i)
        acc += composite_loss(scored, out.weights, r[i]);
      return acc / double(hold.n());
    };
    out.lambda_final = cross_validate(data, fit2, score2, grid, opts.cv_folds,
                                      mix_seed(opts.seed, 0, 0x732)).lambda;
  }

  out.fit = fit_composite(data, basis, out.weights, pen_at(out.lambda_final),
                          opts.solver, &out.init);
  return out;
}

FitResult one_step_update(const Dataset& data, const LossBasis& basis,
                          const CompositeWeights& w, const FitResult& fit,
                          BandwidthRule rule) {
  data.validate();
  basis.validate();
  w.validate(basis.size());
  require(!fit.active_set.empty(), "one-step update needs a nonempty active set");
  require(fit.beta.size() == data.p(), "fit dimensions do not match the data");

  const MomentEstimate est = estimate_moments(fit.residuals, basis, rule);
  const int s = int(fit.active_set.size());
  const int n = data.n();
  const int K = basis.size();

  Eigen::MatrixXd S(n, s);
  for (int i = 0; i < s; ++i) S.col(i) = data.X.col(fit.active_set[std::size_t(i)]);

  LossBasis cur = basis;
  for (int k = 0; k < K; ++k)
    if (cur.parts[std::size_t(k)].kind != LossKind::squared)
      cur.parts[std::size_t(k)].offset = est.offsets[std::size_t(k)];

  Eigen::VectorXd phi = Eigen::VectorXd::Zero(s);
  Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(s, s);
  for (int i = 0; i < n; ++i) {
    const double r = fit.residuals[i];
    phi += composite_subgradient(cur, w, r) * S.row(i).transpose();
    double c = 0.0;
    for (int k = 0; k < K; ++k) {
      const auto& part = cur.parts[std::size_t(k)];
      const double wk = w.w[std::size_t(k)];
      if (part.kind == LossKind::squared)
        c += 2.0 * wk;
      else if (part.kind == LossKind::quantile)
        c += wk * gauss_kernel(r - part.offset, est.bandwidth);
      else
        c += 2.0 * wk * gauss_kernel(r - part.offset, est.bandwidth);
    }
    omega += c * (S.row(i).transpose() * S.row(i));
  }

  Eigen::VectorXd delta = omega.ldlt().solve(phi);
  if (!delta.allFinite() ||
      (omega * delta - phi).cwiseAbs().maxCoeff() >
          1e-8 * (1.0 + phi.cwiseAbs().maxCoeff()))
    throw numeric_error("one-step information matrix is singular (active set " +
                        format_int(s) + " of " + format_int(n) + " rows)");

  FitResult out;
  out.beta = fit.beta;
  for (int i = 0; i < s; ++i) out.beta[fit.active_set[std::size_t(i)]] += delta[i];
  out.offsets = basis.has_offsets() ? est.offsets : std::vector<double>{};
  out.residuals = data.y - data.X * out.beta;
  for (int j = 0; j < data.p(); ++j)
    if (out.beta[j] != 0.0) out.active_set.push_back(j);
  double obj = 0.0;
  for (int i = 0; i < n; ++i) obj += composite_loss(cur, w, out.residuals[i]);
  out.objective = obj;
  out.iterations = 1;
  out.converged = true;
  out.scales = Eigen::VectorXd::Ones(data.p());
  return out;
}

CovarianceEstimate covariance_estimate(const Dataset& data, const LossBasis& basis,
                                       const CompositeWeights& w,
                                       const FitResult& fit) {
  data.validate();
  require(!fit.active_set.empty(), "covariance needs a nonempty active set");
  const MomentEstimate est = estimate_moments(fit.residuals, basis);

  CovarianceEstimate out;
  out.sigma2_w = sigma2_estimate(est, w);
  out.active_set = fit.active_set;

  const int s = int(fit.active_set.size());
  Eigen::MatrixXd S(data.n(), s);
  for (int i = 0; i < s; ++i) S.col(i) = data.X.col(fit.active_set[std::size_t(i)]);
  const Eigen::MatrixXd G = S.transpose() * S;
  Eigen::MatrixXd inv = G.ldlt().solve(Eigen::MatrixXd::Identity(s, s));
  if (!inv.allFinite() ||
      (G * inv - Eigen::MatrixXd::Identity(s, s)).cwiseAbs().maxCoeff() > 1e-6)
    throw numeric_error("active-column Gram matrix is singular");
  out.cov = out.sigma2_w * ((inv + inv.transpose()) / 2.0);
  return out;
}

}  // namespace cql
