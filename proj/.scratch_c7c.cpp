#include <cstdio>
#include "simulate.hpp"
#include "solver.hpp"
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
  const std::uint64_t seed = mix_seed(mix_seed(sc.seed, 18, 0x6d01), 0, 0x731);

  // replicate the fold split
  const int n = 100, folds = 5;
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  Rng rng(mix_seed(seed, 0, 0x6376));
  rng.shuffle(order);

  SolverOptions cvs;  cvs.max_iter = 1500; cvs.tol = 1e-6;
  SolverOptions full; // defaults: 10000, 1e-7

  for (double lam : {0.8597, 0.2613, 0.1623, 0.0626}) {
    double warm_loss = 0.0, cold_loss = 0.0;
    int warm_act = 0, cold_act = 0;
    int start = 0;
    for (int f = 0; f < folds; ++f) {
      const int len = n / folds;
      std::vector<int> hold(order.begin() + start, order.begin() + start + len);
      std::vector<int> train;
      train.insert(train.end(), order.begin(), order.begin() + start);
      train.insert(train.end(), order.begin() + start + len, order.end());
      start += len;
      const Dataset dtr = data.subset_rows(train), dho = data.subset_rows(hold);

      // warm chain from the grid top down to lam, mimicking cross_validate
      std::vector<double> grid = default_lambda_grid(data);
      std::sort(grid.begin(), grid.end(), std::greater<double>());
      FitResult warm; bool have = false;
      for (double g : grid) {
        if (g < lam * 0.999) break;
        warm = fit_lasso(dtr, g, cvs, have ? &warm : nullptr);
        have = true;
      }
      warm_loss += (dho.y - dho.X * warm.beta).squaredNorm() / double(dho.n());
      warm_act += int(warm.active_set.size());

      const FitResult cold = fit_lasso(dtr, lam, full);
      cold_loss += (dho.y - dho.X * cold.beta).squaredNorm() / double(dho.n());
      cold_act += int(cold.active_set.size());
    }
    std::printf("lambda %.4f  warm-path loss %.4f (avg act %.1f)   cold-full loss %.4f (avg act %.1f)\n",
                lam, warm_loss / folds, warm_act / 5.0, cold_loss / folds, cold_act / 5.0);
  }
  return 0;
}
