#include "simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "util.hpp"

namespace cql {

namespace {

constexpr std::uint64_t kStreamX = 0x78;
constexpr std::uint64_t kStreamEps = 0x65;

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size();
  if (m == 0) return std::numeric_limits<double>::quiet_NaN();
  return m % 2 == 1 ? v[m / 2] : 0.5 * (v[m / 2 - 1] + v[m / 2]);
}

}  // namespace

void Scenario::validate() const {
  if (n < 2) throw std::invalid_argument("scenario needs n >= 2");
  if (p < 1) throw std::invalid_argument("scenario needs p >= 1");
  if (!(rho >= 0.0 && rho < 1.0))
    throw std::invalid_argument("scenario needs 0 <= rho < 1");
  if (reps < 1) throw std::invalid_argument("scenario needs reps >= 1");
  if (cv_folds < 2) throw std::invalid_argument("scenario needs cv_folds >= 2");
  if (!(zero_tol >= 0.0)) throw std::invalid_argument("zero_tol must be >= 0");
  if (methods.empty()) throw std::invalid_argument("scenario lists no methods");
  for (const auto& m : methods) parse_method(m);
  for (const auto& [idx, val] : beta_star) {
    if (idx < 1 || idx > p)
      throw std::invalid_argument("beta_star index " + format_int(idx) +
                                  " outside 1.." + format_int(p));
    if (!std::isfinite(val))
      throw std::invalid_argument("beta_star value must be finite");
  }
}

Eigen::VectorXd Scenario::beta_vector() const {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(p);
  for (const auto& [idx, val] : beta_star) b[idx - 1] = val;
  return b;
}

std::vector<int> Scenario::support() const {
  const Eigen::VectorXd b = beta_vector();
  std::vector<int> s;
  for (int j = 0; j < p; ++j)
    if (b[j] != 0.0) s.push_back(j);
  return s;
}

Dataset generate_data(const Scenario& sc, int rep) {
  sc.validate();
  if (rep < 0 || rep >= sc.reps)
    throw std::invalid_argument("rep index outside 0..reps-1");

  Dataset d;
  d.X.resize(sc.n, sc.p);
  d.y.resize(sc.n);

  Rng rx(mix_seed(sc.seed, std::uint64_t(rep), kStreamX));
  const double carry = std::sqrt(1.0 - sc.rho * sc.rho);
  for (int i = 0; i < sc.n; ++i) {
    double prev = 0.0;
    for (int j = 0; j < sc.p; ++j) {
      const double z = rx.normal();
      const double x = (j == 0) ? z : sc.rho * prev + carry * z;
      d.X(i, j) = x;
      prev = x;
    }
  }

  const Eigen::VectorXd beta = sc.beta_vector();
  Rng re(mix_seed(sc.seed, std::uint64_t(rep), kStreamEps));
  for (int i = 0; i < sc.n; ++i) d.y[i] = d.X.row(i).dot(beta) + sc.dist.sample(re);
  return d;
}

double model_error(Eigen::Ref<const Eigen::VectorXd> beta_hat,
                   Eigen::Ref<const Eigen::VectorXd> beta_star, double rho) {
  if (beta_hat.size() != beta_star.size())
    throw std::invalid_argument("model_error: coefficient lengths differ");
  const Eigen::VectorXd delta = beta_hat - beta_star;
  double acc = delta.squaredNorm();
  double tail = 0.0;  // tail_j = sum_{i<j} delta_i rho^{j-i}
  for (Eigen::Index j = 1; j < delta.size(); ++j) {
    tail = rho * (tail + delta[j - 1]);
    acc += 2.0 * delta[j] * tail;
  }
  return acc;
}

std::pair<int, int> count_tp_fp(Eigen::Ref<const Eigen::VectorXd> beta_hat,
                                Eigen::Ref<const Eigen::VectorXd> beta_star,
                                double zero_tol) {
  if (beta_hat.size() != beta_star.size())
    throw std::invalid_argument("count_tp_fp: coefficient lengths differ");
  int tp = 0, fp = 0;
  for (Eigen::Index j = 0; j < beta_hat.size(); ++j) {
    if (std::abs(beta_hat[j]) <= zero_tol) continue;
    (beta_star[j] != 0.0 ? tp : fp) += 1;
  }
  return {tp, fp};
}

ScenarioSummary run_scenario(const Scenario& sc) {
  sc.validate();
  std::vector<MethodSpec> specs;
  specs.reserve(sc.methods.size());
  for (const auto& m : sc.methods) specs.push_back(parse_method(m));

  const Eigen::VectorXd beta_star = sc.beta_vector();
  const std::vector<int> support = sc.support();

  ScenarioSummary out;
  out.reps.assign(std::size_t(sc.reps), RepSummary{});

  parallel_for(sc.reps, thread_budget(sc.reps), [&](int rep) {
    RepSummary& row = out.reps[std::size_t(rep)];
    row.rep = rep;
    row.seed = mix_seed(sc.seed, std::uint64_t(rep), 0);
    const Dataset data = generate_data(sc, rep);
    row.methods.resize(specs.size());
    for (std::size_t m = 0; m < specs.size(); ++m) {
      MethodRep& cell = row.methods[m];
      cell.method = specs[m].label();
      MethodOptions opts;
      opts.lambda_grid = sc.lambda_grid;
      opts.cv_folds = sc.cv_folds;
      opts.seed = mix_seed(sc.seed, std::uint64_t(rep), 0x6d00 + std::uint64_t(m));
      opts.cv_squared_loss = sc.cv_squared_loss;
      try {
        const MethodResult res = run_method(data, specs[m], opts);
        cell.model_error = model_error(res.fit.beta, beta_star, sc.rho);
        const auto counts = count_tp_fp(res.fit.beta, beta_star, sc.zero_tol);
        cell.tp = counts.first;
        cell.fp = counts.second;
        cell.sigma_hat_w = res.sigma_hat_w;
        cell.converged = res.fit.converged;
      } catch (const std::exception& e) {
        cell.failed = true;
        cell.error = e.what();
      }
      if (support.empty()) {
        cell.oracle_failed = true;
        cell.oracle_error = "true support is empty";
        continue;
      }
      try {
        const FitResult ofit = run_oracle(data, specs[m], support, MethodOptions{});
        cell.oracle_model_error = model_error(ofit.beta, beta_star, sc.rho);
      } catch (const std::exception& e) {
        cell.oracle_failed = true;
        cell.oracle_error = e.what();
      }
    }
  });

  for (std::size_t m = 0; m < specs.size(); ++m) {
    MethodSummary s;
    s.method = specs[m].label();
    std::vector<double> mes, omes;
    double tp = 0, fp = 0, sig = 0;
    for (const auto& row : out.reps) {
      const MethodRep& cell = row.methods[m];
      if (cell.failed) {
        s.failures += 1;
      } else {
        mes.push_back(cell.model_error);
        tp += cell.tp;
        fp += cell.fp;
        sig += cell.sigma_hat_w;
      }
      if (cell.oracle_failed)
        s.oracle_failures += 1;
      else
        omes.push_back(cell.oracle_model_error);
    }
    s.reps_used = int(mes.size());
    s.mme = median_of(mes);
    if (!mes.empty()) {
      tp /= double(mes.size());
      fp /= double(mes.size());
      sig /= double(mes.size());
    }
    s.mean_tp = tp;
    s.mean_fp = fp;
    s.mean_sigma_hat_w = sig;
    s.oracle_mme = median_of(omes);
    out.methods.push_back(std::move(s));
  }
  return out;
}

ScreenResult screen_marginal(const Dataset& data, int keep) {
  data.validate();
  if (keep < 1 || keep > data.p())
    throw std::invalid_argument("keep must lie in 1..p");
  if (data.n() < 3)
    throw std::invalid_argument("marginal screening needs n >= 3");

  const int n = data.n(), p = data.p();
  const double ybar = data.y.mean();
  const Eigen::VectorXd yc = data.y.array() - ybar;
  const double syy = yc.squaredNorm();

  ScreenResult out;
  out.f.resize(p);
  for (int j = 0; j < p; ++j) {
    const Eigen::VectorXd xc = data.X.col(j).array() - data.X.col(j).mean();
    const double sxx = xc.squaredNorm();
    if (sxx <= 0.0 || syy <= 0.0) {
      out.f[j] = 0.0;
      continue;
    }
    const double sxy = xc.dot(yc);
    const double r2 = (sxy * sxy) / (sxx * syy);
    if (r2 >= 1.0 - 1e-15) {
      out.f[j] = std::numeric_limits<double>::infinity();
      continue;
    }
    out.f[j] = double(n - 2) * r2 / (1.0 - r2);
  }

  std::vector<int> order(std::size_t(p), 0);
  for (int j = 0; j < p; ++j) order[std::size_t(j)] = j;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (out.f[a] != out.f[b]) return out.f[a] > out.f[b];
    return a < b;
  });
  out.kept.assign(order.begin(), order.begin() + keep);
  return out;
}

}  // namespace cql
