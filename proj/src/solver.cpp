#include "solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "util.hpp"

namespace cql {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

struct Standardized {
  Eigen::MatrixXd X;          // columns scaled to unit RMS; zero columns untouched
  Eigen::VectorXd scales;     // original column RMS
  std::vector<bool> nonzero;  // column has any signal
};

Standardized standardize(const Dataset& data, bool enabled) {
  Standardized s;
  s.scales = column_scales(data.X);
  s.X = data.X;
  s.nonzero.assign(std::size_t(data.p()), true);
  for (int j = 0; j < data.p(); ++j) {
    if (s.scales[j] <= 0.0) {
      s.nonzero[std::size_t(j)] = false;
      s.scales[j] = 1.0;  // neutral; the column is held at beta_j = 0
    } else if (enabled) {
      s.X.col(j) /= s.scales[j];
    }
  }
  if (!enabled) s.scales.setOnes();
  return s;
}

// Penalized quadratic core: min_b sum_i wsq*(t_i - x_i'b)^2 + penalty*sum d_j|b_j|
// by cyclic coordinate descent on unit-RMS columns (so sum_i x_ij^2 = n for
// live columns). Exact minimizer of each scalar subproblem.
struct QuadCore {
  const Eigen::MatrixXd& X;
  const std::vector<bool>& live;
  double wsq;
  Eigen::VectorXd d;      // per-coordinate penalty factors (>= 0)
  double penalty = 0.0;   // n * lambda

  // One full sweep over coordinates; returns the largest coefficient move.
  double sweep(Eigen::VectorXd& beta, Eigen::VectorXd& r) const {
    const int n = int(X.rows());
    double max_move = 0.0;
    for (int j = 0; j < int(X.cols()); ++j) {
      if (!live[std::size_t(j)]) continue;
      const double old = beta[j];
      const double z = old + X.col(j).dot(r) / double(n);
      double next;
      if (penalty * d[j] > 0.0)
        next = soft_threshold(z, penalty * d[j] / (2.0 * wsq * double(n)));
      else
        next = z;
      if (next != old) {
        r += X.col(j) * (old - next);
        beta[j] = next;
        max_move = std::max(max_move, std::abs(next - old));
      }
    }
    return max_move;
  }

  double objective(const Eigen::VectorXd& beta, const Eigen::VectorXd& r) const {
    return wsq * r.squaredNorm() + penalty * d.cwiseAbs().dot(beta.cwiseAbs());
  }
};

std::vector<int> nonzero_indices(const Eigen::VectorXd& beta) {
  std::vector<int> idx;
  for (int j = 0; j < beta.size(); ++j)
    if (beta[j] != 0.0) idx.push_back(j);
  return idx;
}

// Offsets minimizing the composite loss on fixed residuals: the check-loss
// quantile for quantile parts, the median for absolute parts.
std::vector<double> best_offsets(const LossBasis& basis, const Eigen::VectorXd& r) {
  std::vector<double> sorted(r.data(), r.data() + r.size());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> b(std::size_t(basis.size()), 0.0);
  for (int k = 0; k < basis.size(); ++k) {
    const auto& part = basis.parts[std::size_t(k)];
    if (part.kind == LossKind::quantile)
      b[std::size_t(k)] = quantile_minimizer_sorted(sorted, part.tau);
    else if (part.kind == LossKind::absolute)
      b[std::size_t(k)] = quantile_minimizer_sorted(sorted, 0.5);
  }
  return b;
}

LossBasis with_offsets(LossBasis basis, const std::vector<double>& b) {
  for (int k = 0; k < basis.size(); ++k) {
    if (basis.parts[std::size_t(k)].kind != LossKind::squared)
      basis.parts[std::size_t(k)].offset = b[std::size_t(k)];
  }
  return basis;
}

double total_loss(const LossBasis& basis, const CompositeWeights& w,
                  const Eigen::VectorXd& r) {
  double acc = 0.0;
  for (int i = 0; i < r.size(); ++i) acc += composite_loss(basis, w, r[i]);
  return acc;
}

struct Incumbent {
  Eigen::VectorXd beta;
  std::vector<double> offsets;
  double objective = std::numeric_limits<double>::infinity();
};

FitResult finish(const Dataset& data, const Standardized& std_x,
                 const Eigen::VectorXd& beta_std, std::vector<double> offsets,
                 double objective, int iterations, bool converged,
                 std::vector<double> trace) {
  FitResult out;
  out.beta = beta_std.cwiseQuotient(std_x.scales);
  out.offsets = std::move(offsets);
  out.residuals = data.y - data.X * out.beta;
  out.active_set = nonzero_indices(beta_std);
  out.objective = objective;
  out.iterations = iterations;
  out.converged = converged;
  out.scales = std_x.scales;
  out.objective_trace = std::move(trace);
  return out;
}

}  // namespace

void Dataset::validate() const {
  require(X.rows() >= 2, "need at least two observations");
  require(X.cols() >= 1, "need at least one predictor column");
  require(y.size() == X.rows(), "response length must match the row count");
  require(X.allFinite() && y.allFinite(), "non-finite entries in the data");
}

Dataset Dataset::subset_rows(const std::vector<int>& rows) const {
  Dataset out;
  out.X.resize(long(rows.size()), X.cols());
  out.y.resize(long(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.X.row(long(i)) = X.row(rows[i]);
    out.y[long(i)] = y[rows[i]];
  }
  return out;
}

Dataset Dataset::subset_cols(const std::vector<int>& cols) const {
  Dataset out;
  out.X.resize(X.rows(), long(cols.size()));
  out.y = y;
  for (std::size_t j = 0; j < cols.size(); ++j) out.X.col(long(j)) = X.col(cols[j]);
  return out;
}

void SolverOptions::validate() const {
  require(tol > 0.0 && std::isfinite(tol), "tol must be positive");
  require(max_iter >= 1, "max_iter must be at least 1");
  require(admm_rho > 0.0 && std::isfinite(admm_rho), "admm_rho must be positive");
  require(probe_stagnation >= 0, "probe_stagnation must be nonnegative");
}

Eigen::VectorXd column_scales(const Eigen::MatrixXd& X) {
  Eigen::VectorXd s(X.cols());
  for (int j = 0; j < X.cols(); ++j)
    s[j] = std::sqrt(X.col(j).squaredNorm() / double(X.rows()));
  return s;
}

std::vector<double> default_lambda_grid(const Dataset& data) {
  data.validate();
  const Standardized sx = standardize(data, true);
  double lmax = 0.0;
  for (int j = 0; j < data.p(); ++j) {
    if (!sx.nonzero[std::size_t(j)]) continue;
    lmax = std::max(lmax, 2.0 * std::abs(sx.X.col(j).dot(data.y)) / double(data.n()));
  }
  if (!(lmax > 0.0) || !std::isfinite(lmax)) lmax = 1.0;
  std::vector<double> grid(30);
  for (int i = 0; i < 30; ++i)
    grid[std::size_t(i)] = lmax * std::pow(1e-3, double(i) / 29.0);
  return grid;
}

FitResult fit_lasso(const Dataset& data, double lambda, const SolverOptions& opts,
                    const FitResult* warm) {
  data.validate();
  opts.validate();
  require(lambda > 0.0 && std::isfinite(lambda), "lasso lambda must be positive");

  const int n = data.n(), p = data.p();
  const Standardized sx = standardize(data, opts.standardize);

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  if (warm && warm->beta.size() == p)
    beta = warm->beta.cwiseProduct(sx.scales);
  for (int j = 0; j < p; ++j)
    if (!sx.nonzero[std::size_t(j)]) beta[j] = 0.0;
  Eigen::VectorXd r = data.y - sx.X * beta;

  QuadCore core{sx.X, sx.nonzero, 1.0, Eigen::VectorXd::Ones(p),
                double(n) * lambda};
  std::vector<double> trace;
  double obj = core.objective(beta, r);
  trace.push_back(obj);
  bool converged = false;
  int it = 0;
  for (; it < opts.max_iter; ++it) {
    const double move = core.sweep(beta, r);
    const double next = core.objective(beta, r);
    trace.push_back(next);
    // objective stalls well before the coefficients settle under correlated
    // columns, so gate on the sweep movement too
    const double move_tol =
        1e-2 * opts.tol * std::max(1.0, beta.cwiseAbs().maxCoeff());
    const bool stable =
        std::abs(obj - next) <= opts.tol * std::max(1.0, std::abs(next)) &&
        move <= move_tol;
    obj = next;
    if (move == 0.0 || stable) {
      converged = true;
      ++it;
      break;
    }
  }
  return finish(data, sx, beta, {}, obj, it, converged, std::move(trace));
}

namespace {

// Shared by fit_lasso-style problems and squared-only composite bases.
FitResult fit_quadratic(const Dataset& data, const Standardized& sx, double wsq,
                        const PenaltyVector& pen, const SolverOptions& opts,
                        const Eigen::VectorXd& beta0, bool emit_offsets,
                        const LossBasis& basis) {
  const int n = data.n();
  Eigen::VectorXd beta = beta0;
  Eigen::VectorXd r = data.y - sx.X * beta;
  QuadCore core{sx.X, sx.nonzero, wsq, pen.d, double(n) * pen.lambda};

  std::vector<double> trace;
  double obj = core.objective(beta, r);
  trace.push_back(obj);
  bool converged = false;
  int it = 0;
  for (; it < opts.max_iter; ++it) {
    const double move = core.sweep(beta, r);
    const double next = core.objective(beta, r);
    trace.push_back(next);
    const double move_tol =
        1e-2 * opts.tol * std::max(1.0, beta.cwiseAbs().maxCoeff());
    const bool stable =
        std::abs(obj - next) <= opts.tol * std::max(1.0, std::abs(next)) &&
        move <= move_tol;
    obj = next;
    if (move == 0.0 || stable) {
      converged = true;
      ++it;
      break;
    }
  }
  std::vector<double> offsets;
  if (emit_offsets) offsets = best_offsets(basis, r);
  return finish(data, sx, beta, std::move(offsets), obj, it, converged,
                std::move(trace));
}

}  // namespace

FitResult fit_composite(const Dataset& data, const LossBasis& basis,
                        const CompositeWeights& w, const PenaltyVector& pen,
                        const SolverOptions& opts, const FitResult* warm) {
  data.validate();
  opts.validate();
  basis.validate();
  w.validate(basis.size());
  if (w.mode != WeightMode::constrained)
    throw std::invalid_argument(
        "sign-unrestricted weights make the objective nonconvex; "
        "use the one-step update instead");
  require(pen.d.size() == data.p(), "penalty vector length must match p");
  require(pen.lambda >= 0.0 && std::isfinite(pen.lambda), "lambda must be >= 0");
  require(pen.d.minCoeff() >= 0.0 && pen.d.allFinite(),
          "penalty multipliers must be finite and nonnegative");

  const int n = data.n(), p = data.p();
  const int K = basis.size();

  // Which parts actually matter: zero-weight kinks do not shape the objective.
  double wsq = 0.0;
  bool any_kink = false;
  for (int k = 0; k < K; ++k) {
    if (basis.parts[std::size_t(k)].kind == LossKind::squared)
      wsq += w.w[std::size_t(k)];
    else if (w.w[std::size_t(k)] > 0.0)
      any_kink = true;
  }

  const bool offsets_free = basis.has_offsets() && !opts.plugin_offsets;
  if (offsets_free && any_kink) {
    for (int j = 0; j < p; ++j) {
      const double v0 = data.X(0, j);
      if (v0 != 0.0 && (data.X.col(j).array() == v0).all())
        throw std::invalid_argument(
            "constant predictor column is unidentifiable when the loss "
            "offsets are free");
    }
  }

  const Standardized sx = standardize(data, opts.standardize);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  if (warm && warm->beta.size() == p) beta = warm->beta.cwiseProduct(sx.scales);
  for (int j = 0; j < p; ++j)
    if (!sx.nonzero[std::size_t(j)]) beta[j] = 0.0;

  if (!any_kink) {
    // Pure quadratic loss: direct coordinate descent, no splitting needed.
    require(wsq > 0.0, "all-zero composite weights");
    return fit_quadratic(data, sx, wsq, pen, opts, beta, basis.has_offsets(),
                         basis);
  }

  // Two-block splitting. Consensus per observation AND part:
  // z_ik = y_i - x_i'beta - b_k (kink parts; b_k = 0 for squared parts), so
  // the z-step is a trivial scalar prox and the offsets live in the quadratic
  // block, where they are eliminated exactly as per-part residual means.
  // Cycling b as a third block instead can stall at points that are
  // stationary in each coordinate but not jointly.
  Eigen::VectorXd r = data.y - sx.X * beta;

  std::vector<double> b = warm && int(warm->offsets.size()) == K
                              ? warm->offsets
                              : best_offsets(basis, r);
  const std::vector<double> b_fixed = b;
  std::vector<bool> b_free(std::size_t(K), false);
  for (int k = 0; k < K; ++k)
    b_free[std::size_t(k)] =
        basis.parts[std::size_t(k)].kind != LossKind::squared &&
        !opts.plugin_offsets;
  for (int k = 0; k < K; ++k)
    if (basis.parts[std::size_t(k)].kind == LossKind::squared)
      b[std::size_t(k)] = 0.0;

  Eigen::MatrixXd Z(n, K), U = Eigen::MatrixXd::Zero(n, K);
  for (int k = 0; k < K; ++k) Z.col(k).array() = r.array() - b[std::size_t(k)];
  double rho = opts.admm_rho;

  const double yscale = std::max(1.0, std::sqrt(data.y.squaredNorm()));
  auto objective_at = [&](const Eigen::VectorXd& bet, const Eigen::VectorXd& res,
                          const std::vector<double>& off) {
    return total_loss(with_offsets(basis, off), w, res) +
           double(n) * pen.lambda * pen.d.cwiseAbs().dot(bet.cwiseAbs());
  };

  Incumbent best;
  std::vector<double> trace;
  auto consider = [&](const Eigen::VectorXd& bet, const Eigen::VectorXd& res) {
    std::vector<double> off = opts.plugin_offsets ? b_fixed : best_offsets(basis, res);
    const double val = objective_at(bet, res, off);
    if (val < best.objective) {
      best.beta = bet;
      best.offsets = std::move(off);
      best.objective = val;
    }
    trace.push_back(best.objective);
    return val;
  };
  consider(beta, r);

  // scalar prox of w_k * rho_k at penalty weight 1/rho
  auto part_prox = [&](int k, double v) {
    const auto& part = basis.parts[std::size_t(k)];
    const double wk = w.w[std::size_t(k)];
    if (part.kind == LossKind::squared) return v / (1.0 + 2.0 * wk / rho);
    const double up = part.kind == LossKind::quantile ? part.tau : 1.0;
    const double dn = part.kind == LossKind::quantile ? 1.0 - part.tau : 1.0;
    if (v > wk * up / rho) return v - wk * up / rho;
    if (v < -wk * dn / rho) return v + wk * dn / rho;
    return 0.0;
  };

  QuadCore core{sx.X, sx.nonzero, 1.0, pen.d, double(n) * pen.lambda};
  bool converged = false;
  int it = 0;
  int stalled = 0;
  double prev_best = best.objective;
  for (; it < opts.max_iter && !converged; ++it) {
    const Eigen::MatrixXd z_old = Z;
    for (int k = 0; k < K; ++k)
      for (int i = 0; i < n; ++i)
        Z(i, k) = part_prox(k, r[i] - b[std::size_t(k)] + U(i, k));

    // (beta, b)-step: minimize (rho/2) sum_ik (t_ik - x_i'beta - b_k)^2
    // + n lambda sum_j d_j |beta_j|, alternating the exact b means with
    // coordinate-descent sweeps for beta.
    Eigen::MatrixXd T = (U - Z).colwise() + data.y;  // t_ik = y_i - z_ik + u_ik

    core.wsq = rho * double(K) / 2.0;
    for (int pass = 0; pass < 3; ++pass) {
      const Eigen::VectorXd xb = sx.X * beta;
      double bmove = 0.0;
      for (int k = 0; k < K; ++k)
        if (b_free[std::size_t(k)]) {
          const double nb = (T.col(k) - xb).mean();
          bmove = std::max(bmove, std::abs(nb - b[std::size_t(k)]));
          b[std::size_t(k)] = nb;
        }
      Eigen::VectorXd tbar = Eigen::VectorXd::Zero(n);
      for (int k = 0; k < K; ++k)
        tbar.array() += T.col(k).array() - b[std::size_t(k)];
      tbar /= double(K);
      Eigen::VectorXd q = tbar - xb;
      double move = 0.0;
      for (int s = 0; s < 5; ++s)
        if ((move = core.sweep(beta, q)) <= 1e-12) break;
      if (bmove <= 1e-10 && move <= 1e-12) break;
    }
    r = data.y - sx.X * beta;

    // dual ascent on the per-part consensus gap
    Eigen::MatrixXd C(n, K);
    for (int k = 0; k < K; ++k) C.col(k).array() = r.array() - b[std::size_t(k)];
    U += C - Z;

    consider(beta, r);

    const double primal = (C - Z).norm();
    const double dual = rho * (Z - z_old).norm();
    if ((it + 1) % 10 == 0) {
      if (primal > 10.0 * dual && rho < 1e8) {
        rho *= 2.0;
        U /= 2.0;
      } else if (dual > 10.0 * primal && rho > 1e-8) {
        rho /= 2.0;
        U *= 2.0;
      }
    }

    // The subgradient certificate alone is weak on small n (a single tied
    // residual widens the score interval), so require the splitting to have
    // actually settled before probing it.
    const bool improved =
        prev_best - best.objective >
        opts.tol * std::max(1.0, std::abs(best.objective));
    const bool stable = !improved && primal <= opts.tol * yscale;
    stalled = improved ? 0 : stalled + 1;
    prev_best = best.objective;
    const bool impatient =
        opts.probe_stagnation > 0 && stalled >= opts.probe_stagnation;
    if ((stable || impatient) && it % 5 == 0) {
      FitResult probe = finish(data, sx, best.beta, best.offsets, best.objective,
                               it + 1, false, {});
      if (check_kkt(data, basis, w, pen, probe, 1e-5).passed) converged = true;
    }
  }

  return finish(data, sx, best.beta, best.offsets, best.objective, it, converged,
                std::move(trace));
}

KktCertificate check_kkt(const Dataset& data, const LossBasis& basis,
                         const CompositeWeights& w, const PenaltyVector& pen,
                         const FitResult& fit, double tol, double kink_tol) {
  data.validate();
  basis.validate();
  w.validate(basis.size());
  require(fit.beta.size() == data.p(), "fit dimensions do not match the data");
  require(pen.d.size() == data.p(), "penalty vector length must match p");

  const int n = data.n(), p = data.p();
  Eigen::VectorXd scales = fit.scales.size() == p
                               ? fit.scales
                               : Eigen::VectorXd::Ones(p);
  const Eigen::VectorXd r = data.y - data.X * fit.beta;
  const LossBasis cur = int(fit.offsets.size()) == basis.size()
                            ? with_offsets(basis, fit.offsets)
                            : basis;
  if (kink_tol < 0.0)
    kink_tol = 1e-5 * std::max(1.0, r.cwiseAbs().maxCoeff());

  // Per-observation subdifferential interval of psi_w at the residual.
  Eigen::VectorXd lo(n), hi(n);
  for (int i = 0; i < n; ++i)
    composite_psi_interval(cur, w.w, r[i], kink_tol, lo[i], hi[i]);

  std::vector<bool> active(std::size_t(p), false);
  for (int j : fit.active_set) active[std::size_t(j)] = true;

  KktCertificate cert;
  cert.threshold = double(n) * pen.lambda;
  for (int j = 0; j < p; ++j) {
    // score interval for d/dbeta_j of the loss: -sum_i psi_w(r_i) x_ij,
    // on the standardized column.
    double slo = 0.0, shi = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = data.X(i, j) / scales[j];
      if (x >= 0.0) {
        slo -= hi[i] * x;
        shi -= lo[i] * x;
      } else {
        slo -= lo[i] * x;
        shi -= hi[i] * x;
      }
    }
    if (active[std::size_t(j)]) {
      const double target = -cert.threshold * pen.d[j] *
                            (fit.beta[j] > 0.0 ? 1.0 : -1.0);
      const double gap = std::max({0.0, slo - target, target - shi}) / double(n);
      cert.stationarity_gap = std::max(cert.stationarity_gap, gap);
    } else {
      if (pen.d[j] <= 0.0) {
        cert.skipped_zero_penalty.push_back(j);
        continue;
      }
      const double mag =
          (slo <= 0.0 && shi >= 0.0) ? 0.0 : std::min(std::abs(slo), std::abs(shi));
      cert.inactive_score = std::max(cert.inactive_score, mag / pen.d[j]);
    }
  }
  cert.passed = cert.stationarity_gap <= tol &&
                cert.inactive_score <= cert.threshold * (1.0 + tol);
  return cert;
}

CvResult cross_validate(const Dataset& data, const CvFitFn& fit_fn,
                        const CvLossFn& loss_fn, std::vector<double> grid,
                        int folds, std::uint64_t seed) {
  data.validate();
  require(!grid.empty(), "empty lambda grid");
  require(folds >= 2, "need at least two folds");
  const int n = data.n();
  if (n / folds < 2)
    throw std::invalid_argument("a fold would hold fewer than two rows");

  std::sort(grid.begin(), grid.end(), std::greater<double>());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[std::size_t(i)] = i;
  Rng rng(mix_seed(seed, 0, 0x6376));  // dedicated shuffle stream
  rng.shuffle(order);

  std::vector<double> loss_sum(grid.size(), 0.0);
  int start = 0;
  for (int f = 0; f < folds; ++f) {
    const int len = n / folds + (f < n % folds ? 1 : 0);
    std::vector<int> hold(order.begin() + start, order.begin() + start + len);
    std::vector<int> train;
    train.reserve(std::size_t(n - len));
    train.insert(train.end(), order.begin(), order.begin() + start);
    train.insert(train.end(), order.begin() + start + len, order.end());
    start += len;

    const Dataset dtrain = data.subset_rows(train);
    const Dataset dhold = data.subset_rows(hold);
    FitResult warm;
    bool have_warm = false;
    for (std::size_t g = 0; g < grid.size(); ++g) {
      FitResult fit = fit_fn(dtrain, grid[g], have_warm ? &warm : nullptr);
      loss_sum[g] += loss_fn(dhold, fit);
      warm = std::move(fit);
      have_warm = true;
    }
  }

  CvResult out;
  out.folds = folds;
  out.grid = grid;
  out.cv_loss.resize(grid.size());
  std::size_t bestg = 0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    out.cv_loss[g] = loss_sum[g] / double(folds);
    // grid is descending, so <= prefers the smaller lambda on ties
    if (out.cv_loss[g] <= out.cv_loss[bestg]) bestg = g;
  }
  out.lambda = grid[bestg];
  return out;
}

}  // namespace cql
