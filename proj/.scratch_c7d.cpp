#include <cstdio>
#include "adapt.hpp"
#include "simulate.hpp"
#include "solver.hpp"
#include "loss.hpp"
#include "penalty.hpp"
#include "util.hpp"
using namespace cql;

int main() {
  Scenario sc;
  sc.n = 100; sc.p = 500;
  sc.beta_star = {{1, 3.0}, {2, 1.5}, {5, 2.0}};
  sc.rho = 0.5;
  sc.dist = ErrorDist::make(ErrorDist::Kind::de);
  sc.methods = {"lasso", "wcqr9"};
  sc.reps = 20; sc.seed = 20117;
  const Dataset data = generate_data(sc, 18);
  const std::uint64_t seed = mix_seed(sc.seed, 18, 0x6d01);

  // stage 1 exactly as two_step_fit runs it
  std::vector<double> grid = default_lambda_grid(data);
  SolverOptions cvs; cvs.max_iter = 1500; cvs.tol = 1e-6; cvs.probe_stagnation = 25;
  SolverOptions full;
  auto fit1 = [&](const Dataset& tr, double lam, const FitResult* w) {
    return fit_lasso(tr, lam, cvs, w);
  };
  auto score1 = [](const Dataset& ho, const FitResult& f) {
    return (ho.y - ho.X * f.beta).squaredNorm() / double(ho.n());
  };
  const CvResult cv1 = cross_validate(data, fit1, score1, grid, 5,
                                      mix_seed(seed, 0, 0x731));
  const FitResult init = fit_lasso(data, cv1.lambda, full);
  std::printf("stage1 lambda %.4f actives %d\n", cv1.lambda, int(init.active_set.size()));

  const LossBasis basis = LossBasis::cqr(9);
  const MomentEstimate m = estimate_moments(init.residuals, basis);
  const CompositeWeights w = optimal_weights(m, WeightMode::constrained);

  const Eigen::VectorXd beta0_std = init.beta.cwiseProduct(init.scales);
  PenaltyRule rule; rule.kind = PenaltyKind::scad; rule.lambda = 1.0;
  auto pen_at = [&](double lam) {
    return penalty_vector(rule.with_lambda(lam), beta0_std);
  };
  auto score2 = [&](const Dataset& ho, const FitResult& f) {
    LossBasis scored = basis;
    if (int(f.offsets.size()) == basis.size())
      for (int k = 0; k < basis.size(); ++k)
        if (scored.parts[std::size_t(k)].kind != LossKind::squared)
          scored.parts[std::size_t(k)].offset = f.offsets[std::size_t(k)];
    const Eigen::VectorXd r = ho.y - ho.X * f.beta;
    double acc = 0.0;
    for (int i = 0; i < r.size(); ++i) acc += composite_loss(scored, w, r[i]);
    return acc / double(ho.n());
  };

  // fold split identical to cross_validate's
  const int n = 100, folds = 5;
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  Rng rng(mix_seed(mix_seed(seed, 0, 0x732), 0, 0x6376));
  rng.shuffle(order);
  std::sort(grid.begin(), grid.end(), std::greater<double>());

  SolverOptions thorough; thorough.max_iter = 10000; thorough.tol = 1e-7;

  for (int mode = 0; mode < 2; ++mode) {
    const SolverOptions& so = mode == 0 ? cvs : thorough;
    std::printf("--- %s stage-2 curve\n", mode == 0 ? "capped(1500,probe25)" : "thorough(10000)");
    std::vector<double> loss_sum(grid.size(), 0.0);
    std::vector<int> capped(grid.size(), 0);
    std::vector<int> acts(grid.size(), 0);
    int start = 0;
    for (int f = 0; f < folds; ++f) {
      const int len = n / folds;
      std::vector<int> hold(order.begin() + start, order.begin() + start + len);
      std::vector<int> train;
      train.insert(train.end(), order.begin(), order.begin() + start);
      train.insert(train.end(), order.begin() + start + len, order.end());
      start += len;
      const Dataset dtr = data.subset_rows(train), dho = data.subset_rows(hold);
      FitResult warm; bool have = false;
      for (std::size_t g = 0; g < grid.size(); ++g) {
        FitResult fit = fit_composite(dtr, basis, w, pen_at(grid[g]), so,
                                      have ? &warm : nullptr);
        loss_sum[g] += score2(dho, fit);
        if (!fit.converged) ++capped[g];
        acts[g] += int(fit.active_set.size());
        warm = std::move(fit); have = true;
      }
    }
    std::size_t best = 0;
    for (std::size_t g = 0; g < grid.size(); ++g)
      if (loss_sum[g] <= loss_sum[best]) best = g;
    for (std::size_t g = 0; g < grid.size(); ++g)
      std::printf("  lambda %8.4f  cv_loss %9.5f  uncapped %d/5  avg_act %5.1f%s\n",
                  grid[g], loss_sum[g] / folds, 5 - capped[g], acts[g] / 5.0,
                  g == best ? "  <-- argmin" : "");
    std::fflush(stdout);
  }
  return 0;
}
