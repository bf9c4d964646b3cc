#include "efficiency.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "adapt.hpp"
#include "util.hpp"

namespace cql {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

void check_taus(const std::vector<double>& taus) {
  require(!taus.empty(), "quantile grid is empty");
  double prev = 0.0;
  for (double t : taus) {
    require(t > prev && t < 1.0, "quantile levels must be strictly increasing in (0,1)");
    prev = t;
  }
}

// E[psi_k psi_l] for population offsets, reduced to CDF and partial-mean
// values. E[x 1{x<b}] = -pm(b) because the mean is zero.
double pair_moment(const ErrorDist& dist, const LossComponent& ck,
                   const LossComponent& cl) {
  const bool sqk = ck.kind == LossKind::squared;
  const bool sql = cl.kind == LossKind::squared;
  if (sqk && sql) return 4.0 * dist.variance();
  if (sqk || sql) {
    const LossComponent& c = sqk ? cl : ck;
    const double pm = dist.partial_mean(c.offset);
    // E[2x(tau - 1{x<b})] = 2 pm(b); the absolute sign is 1 - 2*1{x<b}.
    return c.kind == LossKind::quantile ? 2.0 * pm : 4.0 * pm;
  }
  auto level = [](const LossComponent& c) {
    return c.kind == LossKind::quantile ? c.tau : 0.5;
  };
  auto scale = [](const LossComponent& c) {
    return c.kind == LossKind::quantile ? 1.0 : 2.0;
  };
  // psi = s*(t - 1{x<b}) with (s,t) = (1,tau) for quantile, (2,1/2) for absolute
  const double tk = level(ck), tl = level(cl);
  const double Fk = dist.cdf(ck.offset), Fl = dist.cdf(cl.offset);
  const double Fkl = dist.cdf(std::min(ck.offset, cl.offset));
  return scale(ck) * scale(cl) * (tk * tl - tk * Fl - tl * Fk + Fkl);
}

double component_a(const ErrorDist& dist, const LossComponent& c) {
  switch (c.kind) {
    case LossKind::squared: return 2.0;
    case LossKind::quantile: return dist.pdf(c.offset);
    case LossKind::absolute: return 2.0 * dist.pdf(c.offset);
  }
  return 0.0;
}

// g(c) = (c^2/4 + 1 + a c) / (b c + 1)^2, the variance ratio of the
// absolute+squared mix against least squares; g(+-inf) = 1/(4b^2).
double l1l2_g(double a, double b, double c) {
  if (std::isinf(c)) return 1.0 / (4.0 * b * b);
  const double den = b * c + 1.0;
  return (0.25 * c * c + 1.0 + a * c) / (den * den);
}

std::string canon_method(const std::string& name) {
  std::string s;
  for (char ch : name) {
    if (ch == '-' || ch == '_' || ch == ' ') continue;
    s += char(std::tolower(static_cast<unsigned char>(ch)));
  }
  if (s == "l1") return "L1";
  if (s == "l2") return "L2";
  if (s == "l1l2+") return "L1-L2+";
  if (s == "l1l2") return "L1-L2";
  if (s == "ecqr") return "ECQR";
  if (s == "wcqr+") return "WCQR+";
  if (s == "wcqr") return "WCQR";
  throw std::invalid_argument("unknown efficiency method: " + name);
}

}  // namespace

LossBasis population_offsets(const ErrorDist& dist, LossBasis basis) {
  for (auto& part : basis.parts) {
    if (part.kind == LossKind::quantile)
      part.offset = dist.quantile(part.tau);
    else if (part.kind == LossKind::absolute)
      part.offset = dist.quantile(0.5);
  }
  return basis;
}

double sigma2_composite(const ErrorDist& dist, const LossBasis& basis,
                        const CompositeWeights& w) {
  basis.validate();
  w.validate(basis.size());
  const int K = basis.size();
  double den = 0.0, num = 0.0;
  for (int k = 0; k < K; ++k) den += w.w[k] * component_a(dist, basis.parts[k]);
  for (int k = 0; k < K; ++k)
    for (int l = 0; l < K; ++l)
      num += w.w[k] * w.w[l] * pair_moment(dist, basis.parts[k], basis.parts[l]);
  if (std::abs(den) < 1e-300 * (1.0 + std::abs(num)))
    throw numeric_error("degenerate weight/distribution pair: sum w_k a_k is zero");
  return num / (den * den);
}

L1L2Constants l1l2_constants(const ErrorDist& dist) {
  const double var = dist.variance();
  if (!std::isfinite(var) || var <= 0.0)
    throw numeric_error("distribution needs a positive finite variance");
  const double sigma = std::sqrt(var);
  const double b0 = dist.quantile(0.5);
  L1L2Constants c;
  c.B = 2.0 * dist.partial_mean(b0);
  c.a_eps = c.B / sigma;
  c.b_eps = sigma * dist.pdf(b0);
  c.c = kNaN;
  c.d_eps = kNaN;
  return c;
}

L1L2Constants l1l2_optimal(const ErrorDist& dist, WeightMode mode) {
  L1L2Constants k = l1l2_constants(dist);
  const double a = k.a_eps, b = k.b_eps;
  const double D = 1.0 - 2.0 * a * b;
  if (mode == WeightMode::constrained) {
    if (std::abs(D) <= 1e-9) {
      // On the boundary a*b = 1/2 the mix degenerates: either every c is a
      // minimizer (2b = a) or the infimum is approached by pure L1.
      k.c = (2.0 * b - a > 1e-9) ? kInf : 0.0;
    } else if (D < 0.0) {
      k.c = kInf;  // g decreases toward its limit; only reachable with a*b > 1/2
    } else {
      k.c = std::max(0.0, 2.0 * (2.0 * b - a) / D);
    }
    k.d_eps = l1l2_g(a, b, k.c);
  } else {
    const double den = 4.0 * b * b - 4.0 * a * b + 1.0;  // (2b-a)^2 + 1 - a^2
    if (den <= 1e-12) throw numeric_error("degenerate L1-L2 family: flat objective");
    if (std::abs(D) <= 1e-9) {
      const double diff = 2.0 * b - a;
      k.c = std::abs(diff) <= 1e-9 ? 0.0 : (diff > 0.0 ? kInf : -kInf);
    } else {
      k.c = 2.0 * (2.0 * b - a) / D;
    }
    k.d_eps = (1.0 - a * a) / den;
  }
  return k;
}

Eigen::MatrixXd cqr_numerator(const std::vector<double>& taus) {
  check_taus(taus);
  const int K = int(taus.size());
  Eigen::MatrixXd N(K, K);
  for (int i = 0; i < K; ++i)
    for (int j = 0; j < K; ++j)
      N(i, j) = std::min(taus[i], taus[j]) - taus[i] * taus[j];
  return N;
}

Eigen::VectorXd cqr_a(const ErrorDist& dist, const std::vector<double>& taus) {
  check_taus(taus);
  Eigen::VectorXd a(taus.size());
  for (std::size_t k = 0; k < taus.size(); ++k)
    a[long(k)] = dist.pdf(dist.quantile(taus[k]));
  return a;
}

double cqr_sigma2(const ErrorDist& dist, const std::vector<double>& taus,
                  const std::vector<double>& w) {
  require(w.size() == taus.size(), "weight length must match the quantile grid");
  const Eigen::MatrixXd N = cqr_numerator(taus);
  const Eigen::VectorXd a = cqr_a(dist, taus);
  const Eigen::Map<const Eigen::VectorXd> wv(w.data(), long(w.size()));
  const double den = a.dot(wv);
  const double num = wv.dot(N * wv);
  if (std::abs(den) < 1e-300 * (1.0 + std::abs(num)))
    throw numeric_error("degenerate quantile weights: sum w_k f(q_k) is zero");
  return num / (den * den);
}

CompositeWeights cqr_optimal_weights(const ErrorDist& dist,
                                     const std::vector<double>& taus,
                                     WeightMode mode) {
  MomentEstimate m;
  m.M = cqr_numerator(taus);
  m.a = cqr_a(dist, taus);
  m.n_used = 0;
  return optimal_weights(m, mode);
}

std::vector<ErrorDist> catalog_dists() {
  std::vector<ErrorDist> out;
  for (const auto& key : ErrorDist::catalog_keys())
    out.push_back(ErrorDist::make(*ErrorDist::parse(key)));
  return out;
}

EfficiencyTable efficiency_table(const std::vector<ErrorDist>& dists,
                                 const std::vector<std::string>& methods,
                                 const std::vector<int>& K_list) {
  require(!dists.empty(), "no distributions requested");
  require(!methods.empty(), "no methods requested");

  struct Row {
    std::string label;
    std::string family;
    int K = 0;
  };
  std::vector<Row> rows;
  for (const auto& name : methods) {
    const std::string fam = canon_method(name);
    if (fam == "ECQR" || fam == "WCQR+" || fam == "WCQR") {
      require(!K_list.empty(), "CQR methods need a K list");
      for (int K : K_list) {
        require(K >= 1, "K must be positive");
        rows.push_back({fam + "(" + format_int(K) + ")", fam, K});
      }
    } else {
      rows.push_back({fam, fam, 0});
    }
  }

  EfficiencyTable table;
  for (const auto& r : rows) table.methods.push_back(r.label);
  for (const auto& d : dists) table.dists.push_back(d.key());
  table.eff.resize(long(rows.size()), long(dists.size()));

  std::vector<double> inv_fisher(dists.size());
  for (std::size_t j = 0; j < dists.size(); ++j)
    inv_fisher[j] = 1.0 / fisher_information(dists[j]);

  const int cells = int(rows.size() * dists.size());
  parallel_for(cells, thread_budget(cells), [&](int cell) {
    const int i = cell / int(dists.size());
    const int j = cell % int(dists.size());
    const ErrorDist& dist = dists[std::size_t(j)];
    const Row& row = rows[std::size_t(i)];
    double sigma2;
    if (row.family == "L1") {
      sigma2 = cqr_sigma2(dist, {0.5}, {1.0});
    } else if (row.family == "L2") {
      sigma2 = dist.variance();
    } else if (row.family == "L1-L2+" || row.family == "L1-L2") {
      const auto mode = row.family == "L1-L2+" ? WeightMode::constrained
                                               : WeightMode::unconstrained;
      sigma2 = dist.variance() * l1l2_optimal(dist, mode).d_eps;
    } else {
      const auto taus = quantile_grid(row.K);
      if (row.family == "ECQR") {
        sigma2 = cqr_sigma2(dist, taus, std::vector<double>(taus.size(), 1.0));
      } else {
        const auto mode = row.family == "WCQR+" ? WeightMode::constrained
                                                : WeightMode::unconstrained;
        sigma2 = cqr_sigma2(dist, taus, cqr_optimal_weights(dist, taus, mode).w);
      }
    }
    table.eff(i, j) = inv_fisher[std::size_t(j)] / sigma2;
  });
  return table;
}

WeightTable weight_table(const std::vector<ErrorDist>& dists, int K) {
  require(K >= 1, "K must be positive");
  WeightTable t;
  t.taus = quantile_grid(K);
  for (const auto& d : dists) t.dists.push_back(d.key());
  t.w.resize(K, long(dists.size()));
  parallel_for(int(dists.size()), thread_budget(int(dists.size())), [&](int j) {
    const auto w =
        cqr_optimal_weights(dists[std::size_t(j)], t.taus, WeightMode::constrained).w;
    double sum = 0.0;
    for (double v : w) sum += v;
    for (int k = 0; k < K; ++k) t.w(k, j) = w[std::size_t(k)] / sum;
  });
  return t;
}

}  // namespace cql
