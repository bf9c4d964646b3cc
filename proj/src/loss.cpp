#include "loss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cql {

namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

LossComponent LossComponent::quantile(double tau, double b) {
  return {LossKind::quantile, tau, b};
}
LossComponent LossComponent::absolute(double b) {
  return {LossKind::absolute, 0.5, b};
}
LossComponent LossComponent::squared() { return {LossKind::squared, 0.5, 0.0}; }

LossBasis LossBasis::cqr(int K) {
  LossBasis b;
  for (double tau : quantile_grid(K)) b.parts.push_back(LossComponent::quantile(tau));
  return b;
}

LossBasis LossBasis::l1l2() {
  LossBasis b;
  b.parts.push_back(LossComponent::absolute());
  b.parts.push_back(LossComponent::squared());
  return b;
}

LossBasis LossBasis::squared_only() {
  LossBasis b;
  b.parts.push_back(LossComponent::squared());
  return b;
}

LossBasis LossBasis::absolute_only() {
  LossBasis b;
  b.parts.push_back(LossComponent::absolute());
  return b;
}

bool LossBasis::has_offsets() const {
  for (const auto& c : parts)
    if (c.kind != LossKind::squared) return true;
  return false;
}

void LossBasis::validate() const {
  require(!parts.empty(), "loss basis must have at least one component");
  int n_squared = 0;
  double last_tau = 0.0;
  bool seen_quantile = false;
  for (const auto& c : parts) {
    require(std::isfinite(c.offset), "loss offset must be finite");
    switch (c.kind) {
      case LossKind::quantile:
        require(c.tau > 0.0 && c.tau < 1.0, "quantile level must be in (0,1)");
        require(!seen_quantile || c.tau > last_tau,
                "quantile levels must be strictly increasing");
        last_tau = c.tau;
        seen_quantile = true;
        break;
      case LossKind::absolute:
        break;
      case LossKind::squared:
        require(c.offset == 0.0, "squared component carries no offset");
        ++n_squared;
        break;
    }
  }
  require(n_squared <= 1, "at most one squared component is allowed");
}

CompositeWeights CompositeWeights::constrained(std::vector<double> w) {
  return {std::move(w), WeightMode::constrained};
}
CompositeWeights CompositeWeights::unconstrained(std::vector<double> w) {
  return {std::move(w), WeightMode::unconstrained};
}

void CompositeWeights::validate(int K) const {
  require(int(w.size()) == K, "weight vector length does not match basis size");
  bool any = false;
  for (double x : w) {
    require(std::isfinite(x), "weights must be finite");
    if (mode == WeightMode::constrained) require(x >= 0.0, "constrained weights must be nonnegative");
    if (x != 0.0) any = true;
  }
  require(any, "weights must not be all zero");
}

double component_loss(const LossComponent& c, double r) {
  switch (c.kind) {
    case LossKind::quantile: {
      const double u = r - c.offset;
      return u >= 0.0 ? c.tau * u : (c.tau - 1.0) * u;
    }
    case LossKind::absolute:
      return std::abs(r - c.offset);
    case LossKind::squared:
      return r * r;
  }
  return 0.0;
}

double component_psi(const LossComponent& c, double r) {
  switch (c.kind) {
    case LossKind::quantile:
      return c.tau - (r - c.offset < 0.0 ? 1.0 : 0.0);
    case LossKind::absolute: {
      const double u = r - c.offset;
      return u > 0.0 ? 1.0 : (u < 0.0 ? -1.0 : 0.0);
    }
    case LossKind::squared:
      return 2.0 * r;
  }
  return 0.0;
}

void component_psi_interval(const LossComponent& c, double r, double kink_tol,
                            double& lo, double& hi) {
  switch (c.kind) {
    case LossKind::quantile:
      if (std::abs(r - c.offset) <= kink_tol) {
        lo = c.tau - 1.0;
        hi = c.tau;
      } else {
        lo = hi = component_psi(c, r);
      }
      return;
    case LossKind::absolute:
      if (std::abs(r - c.offset) <= kink_tol) {
        lo = -1.0;
        hi = 1.0;
      } else {
        lo = hi = component_psi(c, r);
      }
      return;
    case LossKind::squared:
      lo = hi = 2.0 * r;
      return;
  }
}

double composite_loss(const LossBasis& basis, const CompositeWeights& w, double r) {
  w.validate(basis.size());
  double acc = 0.0;
  for (int k = 0; k < basis.size(); ++k) acc += w.w[std::size_t(k)] * component_loss(basis.parts[std::size_t(k)], r);
  return acc;
}

double composite_subgradient(const LossBasis& basis, const CompositeWeights& w, double r) {
  w.validate(basis.size());
  double acc = 0.0;
  for (int k = 0; k < basis.size(); ++k) acc += w.w[std::size_t(k)] * component_psi(basis.parts[std::size_t(k)], r);
  return acc;
}

void composite_psi_interval(const LossBasis& basis, const std::vector<double>& w,
                            double r, double kink_tol, double& lo, double& hi) {
  lo = hi = 0.0;
  for (int k = 0; k < basis.size(); ++k) {
    double l = 0.0, h = 0.0;
    component_psi_interval(basis.parts[std::size_t(k)], r, kink_tol, l, h);
    const double wk = w[std::size_t(k)];
    if (wk >= 0.0) {
      lo += wk * l;
      hi += wk * h;
    } else {
      lo += wk * h;
      hi += wk * l;
    }
  }
}

double prox_composite(const LossBasis& basis, const CompositeWeights& w,
                      double v, double step) {
  basis.validate();
  w.validate(basis.size());
  require(w.mode == WeightMode::constrained,
          "prox refuses unconstrained weights: combination may be nonconvex");
  require(std::isfinite(v), "prox point must be finite");
  require(std::isfinite(step) && step > 0.0, "prox step must be positive");

  double wsq = 0.0;  // total weight on squared components
  struct Kink {
    double at;
    double left;   // slope contribution left of the kink
    double right;  // slope contribution right of the kink
  };
  std::vector<Kink> kinks;
  for (int k = 0; k < basis.size(); ++k) {
    const auto& c = basis.parts[std::size_t(k)];
    const double wk = w.w[std::size_t(k)];
    if (wk == 0.0) continue;
    switch (c.kind) {
      case LossKind::squared:
        wsq += wk;
        break;
      case LossKind::quantile:
        kinks.push_back({c.offset, wk * (c.tau - 1.0), wk * c.tau});
        break;
      case LossKind::absolute:
        kinks.push_back({c.offset, -wk, wk});
        break;
    }
  }

  // Smooth part g(z) = 2*wsq*z + (z - v)/step is strictly increasing; the
  // minimizer is the unique z with 0 in g(z) + d(piecewise-linear part)(z).
  const double denom = 1.0 + 2.0 * wsq * step;
  if (kinks.empty()) return v / denom;

  std::sort(kinks.begin(), kinks.end(),
            [](const Kink& a, const Kink& b) { return a.at < b.at; });
  // Merge coincident kinks so the scan sees one jump per location.
  std::vector<Kink> merged;
  for (const auto& k : kinks) {
    if (!merged.empty() && merged.back().at == k.at) {
      merged.back().left += k.left;
      merged.back().right += k.right;
    } else {
      merged.push_back(k);
    }
  }

  double slope = 0.0;  // piecewise-linear slope on the current interval
  for (const auto& k : merged) slope += k.left;

  double lower = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i <= merged.size(); ++i) {
    const double upper =
        i < merged.size() ? merged[i].at : std::numeric_limits<double>::infinity();
    const double z = (v - step * slope) / denom;
    if (z >= lower && z <= upper) return z;
    if (i == merged.size()) break;
    // Check the kink itself: need -g(t) within [slope_left, slope_right].
    const double t = merged[i].at;
    const double g = 2.0 * wsq * t + (t - v) / step;
    const double next_slope = slope - merged[i].left + merged[i].right;
    if (-g >= slope && -g <= next_slope) return t;
    slope = next_slope;
    lower = t;
  }
  // Monotonicity of the optimality map makes this unreachable.
  throw std::logic_error("prox breakpoint scan found no root");
}

std::vector<double> quantile_grid(int K) {
  require(K >= 1, "quantile grid needs K >= 1");
  std::vector<double> taus(static_cast<std::size_t>(K));
  for (int k = 1; k <= K; ++k) taus[std::size_t(k - 1)] = double(k) / double(K + 1);
  return taus;
}

std::string loss_kind_name(LossKind k) {
  switch (k) {
    case LossKind::quantile: return "quantile";
    case LossKind::absolute: return "absolute";
    case LossKind::squared: return "squared";
  }
  return "?";
}

}  // namespace cql
