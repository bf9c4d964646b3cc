#pragma once

#include <string>
#include <vector>

namespace cql {

enum class LossKind { quantile, absolute, squared };

struct LossComponent {
  LossKind kind = LossKind::squared;
  double tau = 0.5;     // quantile level, quantile kind only
  double offset = 0.0;  // nuisance location b_k; fixed at 0 for squared

  static LossComponent quantile(double tau, double b = 0.0);
  static LossComponent absolute(double b = 0.0);
  static LossComponent squared();
};

// Ordered loss components. Quantile levels must be strictly increasing and at
// most one squared component is allowed (a duplicate would make the moment
// matrix singular by construction).
struct LossBasis {
  std::vector<LossComponent> parts;

  static LossBasis cqr(int K);  // quantile grid k/(K+1), offsets 0
  static LossBasis l1l2();      // {absolute, squared}
  static LossBasis squared_only();
  static LossBasis absolute_only();

  int size() const { return int(parts.size()); }
  bool has_offsets() const;  // any non-squared component
  void validate() const;     // throws std::invalid_argument
};

enum class WeightMode { constrained, unconstrained };

struct CompositeWeights {
  std::vector<double> w;
  WeightMode mode = WeightMode::constrained;
  // set when an unconstrained solve needed ridge regularization
  bool regularized = false;

  static CompositeWeights constrained(std::vector<double> w);
  static CompositeWeights unconstrained(std::vector<double> w);
  void validate(int K) const;
};

double component_loss(const LossComponent& c, double r);
// Fixed subgradient selection at kinks: psi = tau for quantile, 0 for absolute.
double component_psi(const LossComponent& c, double r);
// One-sided derivatives; lo < hi only when r sits within `kink_tol` of a kink.
void component_psi_interval(const LossComponent& c, double r, double kink_tol,
                            double& lo, double& hi);

double composite_loss(const LossBasis& basis, const CompositeWeights& w, double r);
double composite_subgradient(const LossBasis& basis, const CompositeWeights& w, double r);
void composite_psi_interval(const LossBasis& basis, const std::vector<double>& w,
                            double r, double kink_tol, double& lo, double& hi);

// argmin_z { sum_k w_k rho_k(z) + (z-v)^2 / (2*step) }, exact.
// Closed form when only squared components carry weight; otherwise a sorted
// breakpoint scan over the <=K kinks. Unconstrained weights are refused.
double prox_composite(const LossBasis& basis, const CompositeWeights& w,
                      double v, double step);

std::vector<double> quantile_grid(int K);

std::string loss_kind_name(LossKind k);

}  // namespace cql
