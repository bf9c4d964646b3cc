#include <cstdio>
#include "simulate.hpp"
#include "pipeline.hpp"
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
  const Eigen::VectorXd bstar = sc.beta_vector();
  std::vector<MethodSpec> specs;
  for (const auto& m : sc.methods) specs.push_back(parse_method(m));
  for (int rep = 0; rep < sc.reps; ++rep) {
    const Dataset data = generate_data(sc, rep);
    for (std::size_t m = 0; m < specs.size(); ++m) {
      MethodOptions opts;
      opts.seed = mix_seed(sc.seed, std::uint64_t(rep), 0x6d00 + std::uint64_t(m));
      const MethodResult res = run_method(data, specs[m], opts);
      const auto c = count_tp_fp(res.fit.beta, bstar);
      std::printf("rep %2d %-7s tp %d fp %3d me %.4f lam1 %.4f lam2 %.4f\n",
                  rep, specs[m].label().c_str(), c.first, c.second,
                  model_error(res.fit.beta, bstar, sc.rho),
                  res.lambda_init, res.lambda_final);
      std::fflush(stdout);
    }
  }
  return 0;
}
