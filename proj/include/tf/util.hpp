#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace tf {

using cplx = std::complex<double>;
inline constexpr double pi = 3.14159265358979323846;

// Portable 64-bit generator (splitmix64, Steele et al.).  State advances by
// the additive constant 0x9E3779B97F4A7C15; output is finalized with the
// xor-shift-multiply constants 0xBF58476D1CE4E5B9 and 0x94D049BB133111EB.
// Chosen so that result tables reproduce bit-identically across platforms
// and languages.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // uniform in [0,1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // uniform integer in [lo, hi] inclusive
  long long uniform_int(long long lo, long long hi) {
    std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<long long>(next_u64() % span);
  }

  cplx unit_complex() {
    double th = 2.0 * pi * uniform();
    return {std::cos(th), std::sin(th)};
  }

  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    if (u1 <= 0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * pi * u2);
  }

 private:
  std::uint64_t state_;
};

// C-infinity step: 0 for t<=0, 1 for t>=1, smooth and flat at both ends.
inline double smooth_step(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  double a = std::exp(-1.0 / t);
  double b = std::exp(-1.0 / (1.0 - t));
  return a / (a + b);
}

// smooth ramp from 1 to 0 as t runs over [lo, hi]
inline double smooth_cutoff(double t, double lo, double hi) {
  return 1.0 - smooth_step((t - lo) / (hi - lo));
}

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvariantError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline double sqr(double x) { return x * x; }

// least-squares slope of log(y) against log(x); used for scaling exponents
inline double fit_log_slope(const std::vector<double>& x,
                            const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("fit_log_slope: need matching sizes >= 2");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double lx = std::log(x[i]);
    double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace tf
