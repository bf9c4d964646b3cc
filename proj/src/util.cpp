#include "util.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <mutex>
#include <thread>

#include <boost/math/special_functions/erf.hpp>

namespace cql {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t tag) {
  std::uint64_t h = splitmix64(seed ^ 0x1234567855aa55aaULL);
  h = splitmix64(h ^ stream);
  h = splitmix64(h ^ (tag * 0x9e3779b97f4a7c15ULL));
  return h ? h : 0x853c49e6748fea9bULL;
}

double Rng::normal() {
  // Inverse-CDF transform keeps streams reproducible across platforms.
  return -boost::math::erfc_inv(2.0 * uniform()) * std::sqrt(2.0);
}

double quantile_minimizer_sorted(const std::vector<double>& s, double tau) {
  const std::size_t n = s.size();
  if (n == 0) throw std::invalid_argument("quantile of empty sample");
  if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("quantile level must be in (0,1)");
  const double m = double(n) * tau;
  const double r = std::round(m);
  if (std::abs(m - r) < 1e-9 * double(n)) {
    auto k = std::size_t(r);
    if (k == 0) return s.front();
    if (k >= n) return s.back();
    return 0.5 * (s[k - 1] + s[k]);
  }
  auto k = std::size_t(std::ceil(m));
  if (k < 1) k = 1;
  if (k > n) k = n;
  return s[k - 1];
}

double quantile_minimizer(Eigen::Ref<const Eigen::VectorXd> v, double tau) {
  std::vector<double> s(v.data(), v.data() + v.size());
  std::sort(s.begin(), s.end());
  return quantile_minimizer_sorted(s, tau);
}

double median(Eigen::Ref<const Eigen::VectorXd> v) {
  return quantile_minimizer(v, 0.5);
}

Kde::Kde(Eigen::Ref<const Eigen::VectorXd> sample) {
  const auto n = sample.size();
  if (n < 2) throw std::invalid_argument("kernel density needs at least 2 points");
  pts_.assign(sample.data(), sample.data() + n);
  std::vector<double> s = pts_;
  std::sort(s.begin(), s.end());
  const double mean = sample.mean();
  const double sd = std::sqrt((sample.array() - mean).square().sum() / double(n - 1));
  const double iqr =
      quantile_minimizer_sorted(s, 0.75) - quantile_minimizer_sorted(s, 0.25);
  double shat = std::min(sd, iqr / 1.34);
  if (!(shat > 0.0)) shat = std::max(sd, iqr / 1.34);
  if (!(shat > 0.0))
    throw std::invalid_argument("kernel density bandwidth is zero: sample has no spread");
  h_ = 1.06 * shat * std::pow(double(n), -0.2);
}

double Kde::kernel(double u) const {
  static const double inv_sqrt_2pi = 0.3989422804014326779;
  const double t = u / h_;
  return inv_sqrt_2pi * std::exp(-0.5 * t * t) / h_;
}

double Kde::density(double x) const {
  double acc = 0.0;
  for (double p : pts_) acc += kernel(x - p);
  return acc / double(pts_.size());
}

int thread_budget(int njobs) {
  if (njobs <= 1) return 1;
  int hw = int(std::thread::hardware_concurrency());
  if (hw <= 0) hw = 1;
  int cap = hw;
  if (const char* env = std::getenv("CQL_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end && *end == '\0' && v >= 1) cap = int(std::min<long>(v, 1024));
  }
  return std::max(1, std::min(cap, njobs));
}

void parallel_for(int n, int threads, const std::function<void(int)>& f) {
  if (n <= 0) return;
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex err_mu;
  auto worker = [&]() {
    for (;;) {
      int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        f(i);
      } catch (...) {
        std::lock_guard<std::mutex> lk(err_mu);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(std::size_t(threads));
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::string format_sig(double v, int digits) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%#.*g", digits, v);
  return buf;
}

std::string format_int(long long v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%lld", v);
  return buf;
}

}  // namespace cql
