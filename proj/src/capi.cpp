#include "cql.h"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "adapt.hpp"
#include "csv.hpp"
#include "efficiency.hpp"
#include "fitjson.hpp"
#include "pipeline.hpp"
#include "scenario.hpp"
#include "simulate.hpp"
#include "table.hpp"
#include "util.hpp"

struct cql_dataset {
  cql::LoadedCsv v;
};
struct cql_fit {
  cql::TwoStepResult two;
  std::vector<std::string> x_names;
  std::string basis_name;
  std::string penalty_name;
  double sigma_hat_w = std::numeric_limits<double>::quiet_NaN();
};
struct cql_scenario {
  cql::Scenario v;
};
struct cql_table {
  cql::Table v;
};

namespace {

thread_local std::string g_error;

int fail(int code, const char* what) {
  g_error = what;
  return code;
}

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    fn();
    return CQL_OK;
  } catch (const cql::io_error& e) {
    return fail(CQL_ERR_IO, e.what());
  } catch (const cql::numeric_error& e) {
    return fail(CQL_ERR_NUMERIC, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(CQL_ERR_INVALID, e.what());
  } catch (const std::exception& e) {
    return fail(CQL_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(CQL_ERR_INTERNAL, "unknown failure");
  }
}

int require_arg(bool ok, const char* what) {
  return ok ? CQL_OK : fail(CQL_ERR_INVALID, what);
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

cql::LossBasis parse_basis(const std::string& text) {
  std::string t;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c)))
      t += char(std::tolower(static_cast<unsigned char>(c)));
  if (t == "l1l2") return cql::LossBasis::l1l2();
  if (t == "l1" || t == "absolute") return cql::LossBasis::absolute_only();
  if (t == "l2" || t == "squared") return cql::LossBasis::squared_only();
  if (t.rfind("cqr", 0) == 0) {
    const std::string digits = t.substr(3);
    if (!digits.empty() && digits.find_first_not_of("0123456789") == std::string::npos)
      return cql::LossBasis::cqr(std::stoi(digits));
  }
  throw std::invalid_argument("unknown basis '" + text +
                              "' (expected cqrK, l1l2, l1, or l2)");
}

cql::PenaltyRule parse_penalty(const std::string& text) {
  std::string t;
  for (char c : text) t += char(std::tolower(static_cast<unsigned char>(c)));
  cql::PenaltyRule rule;
  if (t == "scad")
    rule.kind = cql::PenaltyKind::scad;
  else if (t == "lasso")
    rule.kind = cql::PenaltyKind::lasso;
  else if (t == "adaptive") {
    rule.kind = cql::PenaltyKind::adaptive;
    rule.a = 1.0;
  } else {
    throw std::invalid_argument("unknown penalty '" + text +
                                "' (expected scad, lasso, or adaptive)");
  }
  return rule;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::vector<cql::ErrorDist> parse_dists(const std::string& text) {
  if (text == "all") return cql::catalog_dists();
  std::vector<cql::ErrorDist> out;
  for (const auto& key : split_list(text)) {
    const auto kind = cql::ErrorDist::parse(key);
    if (!kind) {
      std::string names;
      for (const auto& k : cql::ErrorDist::catalog_keys()) {
        if (!names.empty()) names += ", ";
        names += k;
      }
      throw std::invalid_argument("unknown error distribution '" + key +
                                  "' (catalog: " + names + ")");
    }
    out.push_back(cql::ErrorDist::make(*kind));
  }
  if (out.empty()) throw std::invalid_argument("empty distribution list");
  return out;
}

}  // namespace

extern "C" {

const char* cql_version(void) { return "0.1.0"; }

const char* cql_last_error(void) { return g_error.c_str(); }

void cql_string_free(char* s) { std::free(s); }

int cql_dataset_load_csv(const char* path, const char* response,
                         cql_dataset** out) {
  if (int rc = require_arg(path && response && out, "null argument")) return rc;
  return guarded([&] { *out = new cql_dataset{cql::load_csv_dataset(path, response)}; });
}

int cql_dataset_parse_csv(const char* text, const char* response,
                          cql_dataset** out) {
  if (int rc = require_arg(text && response && out, "null argument")) return rc;
  return guarded([&] { *out = new cql_dataset{cql::parse_csv_dataset(text, response)}; });
}

int cql_dataset_dims(const cql_dataset* d, int* n, int* p) {
  if (int rc = require_arg(d != nullptr, "null dataset")) return rc;
  if (n) *n = d->v.data.n();
  if (p) *p = d->v.data.p();
  return CQL_OK;
}

void cql_dataset_free(cql_dataset* d) { delete d; }

int cql_fit_run(const cql_dataset* d, const char* basis, const char* penalty,
                const char* lambda, unsigned long long seed, int cv_folds,
                cql_fit** out) {
  if (int rc = require_arg(d && basis && penalty && lambda && out, "null argument"))
    return rc;
  return guarded([&] {
    auto fit = std::make_unique<cql_fit>();
    fit->x_names = d->v.x_names;
    fit->basis_name = basis;
    fit->penalty_name = penalty;

    const cql::LossBasis b = parse_basis(basis);
    cql::TwoStepOptions opts;
    opts.cv_folds = cv_folds;
    opts.seed = seed;
    const std::string lam = lambda;
    if (lam != "auto") {
      char* end = nullptr;
      const double v = std::strtod(lam.c_str(), &end);
      if (end == lam.c_str() || *end != '\0' || !(v > 0.0))
        throw std::invalid_argument("lambda must be 'auto' or a positive number");
      opts.composite_lambda = v;
    }
    fit->two = cql::two_step_fit(d->v.data, b, parse_penalty(penalty), opts);
    try {
      const cql::MomentEstimate m =
          cql::estimate_moments(fit->two.fit.residuals, b);
      fit->sigma_hat_w = std::sqrt(cql::sigma2_estimate(m, fit->two.weights));
    } catch (const std::exception&) {
      // report stays usable without the diagnostic multiplier
    }
    *out = fit.release();
  });
}

int cql_fit_report_json(const cql_fit* f, char** json_out) {
  if (int rc = require_arg(f && json_out, "null argument")) return rc;
  return guarded([&] {
    *json_out = copy_string(cql::fit_report_json(
        f->two, f->x_names, f->basis_name, f->penalty_name, f->sigma_hat_w));
    if (!*json_out) throw std::bad_alloc();
  });
}

void cql_fit_free(cql_fit* f) { delete f; }

int cql_weights_table(const cql_dataset* d, const char* basis, const char* mode,
                      unsigned long long seed, cql_table** out) {
  if (int rc = require_arg(d && basis && mode && out, "null argument")) return rc;
  return guarded([&] {
    const cql::LossBasis b = parse_basis(basis);
    const std::string m = mode;
    cql::WeightMode wm;
    if (m == "constrained")
      wm = cql::WeightMode::constrained;
    else if (m == "unconstrained")
      wm = cql::WeightMode::unconstrained;
    else
      throw std::invalid_argument("mode must be constrained or unconstrained");

    // Initial residuals from the cross-validated lasso stage.
    cql::TwoStepOptions opts;
    opts.seed = seed;
    std::vector<double> grid = cql::default_lambda_grid(d->v.data);
    auto fit_fn = [&](const cql::Dataset& train, double lam, const cql::FitResult* warm) {
      return cql::fit_lasso(train, lam, opts.solver, warm);
    };
    auto loss_fn = [](const cql::Dataset& hold, const cql::FitResult& fit) {
      return (hold.y - hold.X * fit.beta).squaredNorm() / double(hold.n());
    };
    const double lam =
        cql::cross_validate(d->v.data, fit_fn, loss_fn, grid, opts.cv_folds,
                            cql::mix_seed(seed, 0, 0x731))
            .lambda;
    const cql::FitResult init = cql::fit_lasso(d->v.data, lam, opts.solver);
    const cql::MomentEstimate est = cql::estimate_moments(init.residuals, b);
    const cql::CompositeWeights w = cql::optimal_weights(est, wm);

    const int K = b.size();
    cql::Table t;
    t.header.push_back("quantity");
    for (int k = 1; k <= K; ++k) t.header.push_back("k" + cql::format_int(k));
    auto push_row = [&](const std::string& name, const std::vector<double>& vals) {
      std::vector<std::string> row{name};
      for (double v : vals) row.push_back(cql::format_real(v));
      t.rows.push_back(std::move(row));
    };
    std::vector<double> taus, offs(est.offsets), av(K), wv(w.w);
    bool any_tau = false;
    for (int k = 0; k < K; ++k) {
      const auto& part = b.parts[std::size_t(k)];
      taus.push_back(part.kind == cql::LossKind::quantile ? part.tau : 0.5);
      if (part.kind == cql::LossKind::quantile) any_tau = true;
      av[std::size_t(k)] = est.a[k];
    }
    if (any_tau) push_row("tau", taus);
    push_row("offset", offs);
    push_row("a", av);
    push_row("w", wv);
    for (int k = 0; k < K; ++k) {
      std::vector<double> mrow(static_cast<std::size_t>(K));
      for (int l = 0; l < K; ++l) mrow[std::size_t(l)] = est.M(k, l);
      push_row("M" + cql::format_int(k + 1), mrow);
    }
    *out = new cql_table{std::move(t)};
  });
}

int cql_efficiency_table(const char* dists, const char* methods,
                         const char* k_list, cql_table** out) {
  if (int rc = require_arg(dists && methods && k_list && out, "null argument"))
    return rc;
  return guarded([&] {
    const std::vector<cql::ErrorDist> dd = parse_dists(dists);
    std::vector<std::string> mm;
    if (std::string(methods) == "all")
      mm = {"L1", "L2", "L1-L2+", "L1-L2", "ECQR", "WCQR+", "WCQR"};
    else
      mm = split_list(methods);
    std::vector<int> ks;
    for (const auto& tok : split_list(k_list)) {
      if (tok.find_first_not_of("0123456789") != std::string::npos)
        throw std::invalid_argument("K list must contain integers");
      ks.push_back(std::stoi(tok));
    }
    const cql::EfficiencyTable et = cql::efficiency_table(dd, mm, ks);

    cql::Table t;
    t.header.push_back("method");
    for (const auto& k : et.dists) t.header.push_back(k);
    for (std::size_t r = 0; r < et.methods.size(); ++r) {
      std::vector<std::string> row{et.methods[r]};
      for (int c = 0; c < et.eff.cols(); ++c)
        row.push_back(cql::format_real(et.eff(int(r), c)));
      t.rows.push_back(std::move(row));
    }
    *out = new cql_table{std::move(t)};
  });
}

int cql_weight_pattern_table(const char* dists, int levels, cql_table** out) {
  if (int rc = require_arg(dists && out, "null argument")) return rc;
  return guarded([&] {
    const cql::WeightTable wt = cql::weight_table(parse_dists(dists), levels);
    cql::Table t;
    t.header.push_back("tau");
    for (const auto& k : wt.dists) t.header.push_back(k);
    for (std::size_t r = 0; r < wt.taus.size(); ++r) {
      std::vector<std::string> row{cql::format_real(wt.taus[r])};
      for (int c = 0; c < wt.w.cols(); ++c)
        row.push_back(cql::format_real(wt.w(int(r), c)));
      t.rows.push_back(std::move(row));
    }
    *out = new cql_table{std::move(t)};
  });
}

int cql_scenario_load(const char* path, cql_scenario** out) {
  if (int rc = require_arg(path && out, "null argument")) return rc;
  return guarded([&] { *out = new cql_scenario{cql::load_scenario(path)}; });
}

int cql_scenario_parse(const char* json_text, cql_scenario** out) {
  if (int rc = require_arg(json_text && out, "null argument")) return rc;
  return guarded([&] { *out = new cql_scenario{cql::parse_scenario(json_text)}; });
}

void cql_scenario_free(cql_scenario* s) { delete s; }

int cql_simulate_run(const cql_scenario* s, cql_table** summary,
                     cql_table** per_rep) {
  if (int rc = require_arg(s != nullptr, "null scenario")) return rc;
  return guarded([&] {
    const cql::ScenarioSummary res = cql::run_scenario(s->v);

    if (summary) {
      cql::Table t;
      t.header = {"method",     "mme",      "mean_tp",         "mean_fp",
                  "mean_sigma_hat_w", "oracle_mme", "failures",
                  "oracle_failures",  "reps_used"};
      for (const auto& m : res.methods) {
        t.rows.push_back({m.method, cql::format_real(m.mme),
                          cql::format_real(m.mean_tp), cql::format_real(m.mean_fp),
                          cql::format_real(m.mean_sigma_hat_w),
                          cql::format_real(m.oracle_mme),
                          cql::format_int(m.failures),
                          cql::format_int(m.oracle_failures),
                          cql::format_int(m.reps_used)});
      }
      *summary = new cql_table{std::move(t)};
    }
    if (per_rep) {
      cql::Table t;
      t.header = {"rep", "method", "model_error"};
      for (const auto& rep : res.reps)
        for (const auto& cell : rep.methods)
          if (!cell.failed)
            t.rows.push_back({cql::format_int(rep.rep), cell.method,
                              cql::format_real(cell.model_error)});
      *per_rep = new cql_table{std::move(t)};
    }
  });
}

int cql_screen_table(const cql_dataset* d, int keep, cql_table** out) {
  if (int rc = require_arg(d && out, "null argument")) return rc;
  return guarded([&] {
    const cql::ScreenResult res = cql::screen_marginal(d->v.data, keep);
    cql::Table t;
    t.header = {"rank", "column", "index", "f_statistic"};
    for (std::size_t r = 0; r < res.kept.size(); ++r) {
      const int j = res.kept[r];
      t.rows.push_back({cql::format_int(static_cast<long long>(r) + 1),
                        d->v.x_names[std::size_t(j)], cql::format_int(j + 1),
                        cql::format_real(res.f[j])});
    }
    *out = new cql_table{std::move(t)};
  });
}

int cql_table_dims(const cql_table* t, int* rows, int* cols) {
  if (int rc = require_arg(t != nullptr, "null table")) return rc;
  if (rows) *rows = int(t->v.rows.size());
  if (cols) *cols = int(t->v.header.size());
  return CQL_OK;
}

const char* cql_table_header(const cql_table* t, int col) {
  if (!t || col < 0 || col >= int(t->v.header.size())) return nullptr;
  return t->v.header[std::size_t(col)].c_str();
}

const char* cql_table_cell(const cql_table* t, int row, int col) {
  if (!t || row < 0 || row >= int(t->v.rows.size()) || col < 0 ||
      col >= int(t->v.header.size()))
    return nullptr;
  return t->v.rows[std::size_t(row)][std::size_t(col)].c_str();
}

int cql_table_csv(const cql_table* t, char** csv_out) {
  if (int rc = require_arg(t && csv_out, "null argument")) return rc;
  return guarded([&] {
    *csv_out = copy_string(cql::render_csv(t->v));
    if (!*csv_out) throw std::bad_alloc();
  });
}

int cql_table_write_csv(const cql_table* t, const char* path) {
  if (int rc = require_arg(t && path, "null argument")) return rc;
  return guarded([&] { cql::emit_csv_table(t->v, path); });
}

void cql_table_free(cql_table* t) { delete t; }

}  // extern "C"
