#include "fitjson.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace cql {

namespace {

// %.17g round-trips every finite double; JSON has no inf/nan literals so
// those become null.
std::string real17(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  out += '"';
  return out;
}

template <typename Seq, typename Fn>
std::string list_of(const Seq& seq, Fn&& render) {
  std::string out = "[";
  bool first = true;
  for (const auto& v : seq) {
    if (!first) out += ",";
    first = false;
    out += render(v);
  }
  out += "]";
  return out;
}

}  // namespace

std::string fit_report_json(const TwoStepResult& result,
                            const std::vector<std::string>& x_names,
                            const std::string& basis_name,
                            const std::string& penalty_name,
                            double sigma_hat_w) {
  const FitResult& fit = result.fit;
  if (!x_names.empty() && int(x_names.size()) != fit.beta.size())
    throw std::invalid_argument("fit report: name count differs from beta length");

  std::vector<double> beta(fit.beta.data(), fit.beta.data() + fit.beta.size());
  std::vector<double> w = result.weights.w;

  std::string out = "{\n";
  out += "  \"basis\": " + quoted(basis_name) + ",\n";
  out += "  \"penalty\": " + quoted(penalty_name) + ",\n";
  out += "  \"lambda_init\": " + real17(result.lambda_init) + ",\n";
  out += "  \"lambda_final\": " + real17(result.lambda_final) + ",\n";
  out += "  \"weights\": {\"mode\": " +
         quoted(result.weights.mode == WeightMode::constrained ? "constrained"
                                                               : "unconstrained") +
         ", \"w\": " + list_of(w, real17) + "},\n";
  if (!x_names.empty())
    out += "  \"columns\": " + list_of(x_names, quoted) + ",\n";
  out += "  \"beta\": " + list_of(beta, real17) + ",\n";
  out += "  \"offsets\": " + list_of(fit.offsets, real17) + ",\n";
  out += "  \"active\": " +
         list_of(fit.active_set,
                 [&](int j) {
                   return x_names.empty() ? std::string("\"x") + std::to_string(j + 1) + "\""
                                          : quoted(x_names[std::size_t(j)]);
                 }) +
         ",\n";
  out += "  \"sigma_hat_w\": " + real17(sigma_hat_w) + ",\n";
  out += "  \"objective\": " + real17(fit.objective) + ",\n";
  out += "  \"iterations\": " + std::to_string(fit.iterations) + ",\n";
  out += std::string("  \"converged\": ") + (fit.converged ? "true" : "false") + "\n";
  out += "}\n";
  return out;
}

}  // namespace cql
