#include <chrono>
#include <cstdio>
#include "simulate.hpp"
#include "adapt.hpp"
#include "pipeline.hpp"
using namespace cql;
int main() {
  Scenario sc;
  sc.n = 100; sc.p = 500; sc.rho = 0.5;
  sc.beta_star = {{1, 3.0}, {2, 1.5}, {5, 2.0}};
  sc.dist = ErrorDist::make(ErrorDist::Kind::de);
  sc.methods = {"wcqr9"}; sc.reps = 1; sc.seed = 7;
  Dataset d = generate_data(sc, 0);
  MethodSpec spec = parse_method("wcqr9");
  MethodOptions mo; mo.seed = 99;
  auto t0 = std::chrono::steady_clock::now();
  MethodResult res = run_method(d, spec, mo);
  auto t1 = std::chrono::steady_clock::now();
  std::printf("total %.2fs iters=%d conv=%d lam_init=%g lam_final=%g\n",
              std::chrono::duration<double>(t1 - t0).count(),
              res.fit.iterations, int(res.fit.converged),
              res.lambda_init,
              res.lambda_final);
  return 0;
}
