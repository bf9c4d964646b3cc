#include <cstdio>
#include "simulate.hpp"
#include "pipeline.hpp"
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

  const std::uint64_t seed_wcqr = mix_seed(sc.seed, 18, 0x6d00 + 1);
  const std::uint64_t seed_lasso = mix_seed(sc.seed, 18, 0x6d00 + 0);

  SolverOptions cv_solver;
  cv_solver.max_iter = 1500;
  cv_solver.tol = 1e-6;
  cv_solver.probe_stagnation = 25;

  auto fit1 = [&](const Dataset& train, double lambda, const FitResult* warm) {
    return fit_lasso(train, lambda, cv_solver, warm);
  };
  auto score1 = [](const Dataset& hold, const FitResult& fit) {
    return (hold.y - hold.X * fit.beta).squaredNorm() / double(hold.n());
  };
  const std::vector<double> grid = default_lambda_grid(data);

  for (int which = 0; which < 2; ++which) {
    const std::uint64_t s = which ? seed_wcqr : seed_lasso;
    const CvResult cv = cross_validate(data, fit1, score1, grid, 5,
                                       mix_seed(s, 0, 0x731));
    std::printf("--- shuffle %s: chose lambda %.4f\n",
                which ? "wcqr9" : "lasso", cv.lambda);
    SolverOptions full;
    for (std::size_t g = 0; g < cv.grid.size(); ++g) {
      const FitResult f = fit_lasso(data, cv.grid[g], full);
      std::printf("  lambda %8.4f  cv_loss %10.4f  full-data actives %3d\n",
                  cv.grid[g], cv.cv_loss[g], int(f.active_set.size()));
    }
  }
  return 0;
}
