#include <cstdio>
#include <limits>
#include <algorithm>
#include "solver.hpp"
#include "loss.hpp"
using namespace cql;
int main() {
  Dataset d;
  d.X.resize(7, 1);
  d.X << -1.9, -1.1, -0.4, 0.2, 0.8, 1.5, 2.3;
  d.y.resize(7);
  d.y << -3.6, -2.4, -0.5, 0.9, 1.3, 3.2, 4.4;
  auto basis = LossBasis::cqr(1);
  auto w = CompositeWeights::constrained({1.0});
  PenaltyVector pen{Eigen::VectorXd::Zero(1), 0.0};
  auto fit = fit_composite(d, basis, w, pen, SolverOptions{});
  std::printf("solver: beta=%.10f b=%.10f obj=%.10f iters=%d conv=%d\n",
              fit.beta[0], fit.offsets[0], fit.objective, fit.iterations,
              int(fit.converged));
  double best = std::numeric_limits<double>::infinity();
  double bb = 0, bo = 0;
  for (int g1 = 0; g1 <= 4000; ++g1) {
    double beta = -1.0 + 3.0 * g1 / 4000.0;
    for (int g2 = 0; g2 <= 4000; ++g2) {
      double b = -2.0 + 4.0 * g2 / 4000.0;
      double obj = 0.0;
      for (int i = 0; i < 7; ++i)
        obj += component_loss(LossComponent::quantile(0.5, b), d.y[i] - beta * d.X(i,0));
      if (obj < best) { best = obj; bb = beta; bo = b; }
    }
  }
  std::printf("grid:   beta=%.10f b=%.10f obj=%.10f\n", bb, bo, best);
  std::printf("gap = %.3e\n", fit.objective - best);
  return 0;
}
