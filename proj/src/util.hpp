#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace cql {

// Thrown for numerical breakdowns (singular systems, diverged solves).
// Invalid input keeps std::invalid_argument; file problems use io_error.
struct numeric_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::uint64_t splitmix64(std::uint64_t x);

// Deterministic stream seed for (seed, stream, tag) triples. Sub-streams for
// different reps or purposes never depend on scheduling order.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t tag);

// Deterministic RNG wrapper: all transforms are explicit so sequences do not
// depend on the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // Uniform on the open interval (0,1).
  double uniform() { return (double(eng_() >> 11) + 0.5) * 0x1.0p-53; }
  double normal();
  std::uint64_t bits() { return eng_(); }

  // Fisher-Yates; modulo bias is ~2^-53 and irrelevant here.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = std::size_t(eng_() % i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 eng_;
};

// Empirical tau-quantile as the minimizer of the check loss: the midpoint of
// the minimizing interval when n*tau is integral, the unique order statistic
// otherwise. `sorted` must be ascending.
double quantile_minimizer_sorted(const std::vector<double>& sorted, double tau);
double quantile_minimizer(Eigen::Ref<const Eigen::VectorXd> v, double tau);

double median(Eigen::Ref<const Eigen::VectorXd> v);

// Gaussian kernel density with bandwidth 1.06 * shat * n^(-1/5),
// shat = min(sd, IQR/1.34); falls back to whichever is positive.
class Kde {
 public:
  explicit Kde(Eigen::Ref<const Eigen::VectorXd> sample);
  double bandwidth() const { return h_; }
  double density(double x) const;
  // k_h(u) = phi(u/h)/h
  double kernel(double u) const;

 private:
  std::vector<double> pts_;
  double h_;
};

// Worker count for parallel sections: min(CQL_THREADS, hardware, njobs).
int thread_budget(int njobs);

// Runs f(i) for i in [0, n) on up to `threads` workers. Rethrows the first
// exception after all workers finish. Results must be written to per-index
// slots by the caller so output never depends on scheduling.
void parallel_for(int n, int threads, const std::function<void(int)>& f);

// printf %#.<digits>g: fixed number of significant digits, trailing zeros kept.
std::string format_sig(double v, int digits);

std::string format_int(long long v);

}  // namespace cql
