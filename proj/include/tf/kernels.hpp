#pragma once

// Kernel families: the smooth averaging kernel and the truncated Hilbert
// kernel, symbol validation against the multiplier conditions, the eta /
// Littlewood-Paley splitting of the symbol, theta multipliers, and the
// discrete transfer kernels H, A, S, O.

#include <functional>
#include <map>
#include <vector>

#include "tf/signals.hpp"
#include "tf/util.hpp"

namespace tf {

enum class KernelKind { Average, Hilbert, Custom };

// K_M for averages: 1 on [0,1], C-infinity ramps of width 1/M on both sides,
// so that 1_{[0,1]} <= K_M <= 1_{[-1/M, 1+1/M]} holds pointwise.
inline double average_kernel_eval(double x, int M) {
  double w = 1.0 / M;
  if (x <= -w || x >= 1.0 + w) return 0.0;
  if (x < 0.0) return smooth_step((x + w) * M);
  if (x <= 1.0) return 1.0;
  return smooth_step((1.0 + w - x) * M);
}

// K_M for the Hilbert series: exactly 1/x for |x| >= 1, ramped to 0 on
// 1 - 1/M <= |x| <= 1, vanishing inside.  |K_M 1_{[-1,1]}| <= 2 for M >= 2.
inline double hilbert_kernel_eval(double x, int M) {
  double ax = std::abs(x);
  if (ax <= 1.0 - 1.0 / M) return 0.0;
  if (ax >= 1.0) return 1.0 / x;
  return smooth_step((ax - (1.0 - 1.0 / M)) * M) / x;
}

struct KernelSpec {
  KernelKind kind = KernelKind::Custom;
  int M = 0;
  SampledFunction space;  // samples on (a, b)
  SampledFunction hat;    // symbol on the dual grid (b-1, a+1)
};

namespace detail {
// Simpson quadrature of fn over [lo, hi]
template <class F>
double simpson(F&& fn, double lo, double hi, int n /* even */) {
  double h = (hi - lo) / n;
  double s = fn(lo) + fn(hi);
  for (int i = 1; i < n; ++i) s += fn(lo + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}
}  // namespace detail

// The symbol is computed semi-analytically so that the slow spatial tail of
// the Hilbert kernel does not pollute it: K_hilbert = pv 1/x + R with R odd,
// supported in [-1,1] and R(x)sin(2 pi x xi) bounded; the pv part transforms
// to -i pi sgn(xi) exactly.
inline KernelSpec make_kernel(KernelKind kind, int M, int a = 5, int b = 8) {
  if (kind == KernelKind::Custom) throw ConfigError("make_kernel: custom needs samples");
  if (M < 2) throw ConfigError("make_kernel: M must be >= 2");
  KernelSpec K;
  K.kind = kind;
  K.M = M;
  if (kind == KernelKind::Average) {
    K.space = SampledFunction::from(a, b, [M](double x) { return average_kernel_eval(x, M); });
    K.hat = SampledFunction(b - 1, a + 1);
    int nq = 1 << 12;
    double w = 1.0 / M;
    for (std::size_t j = 0; j < K.hat.n(); ++j) {
      double xi = K.hat.x(j);
      double re = detail::simpson(
          [&](double x) { return average_kernel_eval(x, M) * std::cos(2 * pi * x * xi); },
          -w, 1.0 + w, nq);
      double im = -detail::simpson(
          [&](double x) { return average_kernel_eval(x, M) * std::sin(2 * pi * x * xi); },
          -w, 1.0 + w, nq);
      K.hat.v[j] = {re, im};
    }
  } else {
    K.space = SampledFunction::from(a, b, [M](double x) { return hilbert_kernel_eval(x, M); });
    K.hat = SampledFunction(b - 1, a + 1);
    int nq = 1 << 12;
    for (std::size_t j = 0; j < K.hat.n(); ++j) {
      double xi = K.hat.x(j);
      // FT of R = K - pv(1/x), odd and supported in [-1,1]:
      // -2i * int_0^1 R(x) sin(2 pi x xi) dx, with the x -> 0 limit -2 pi xi.
      auto integrand = [&](double x) {
        if (x < 1e-12) return -2.0 * pi * xi;
        double R = hilbert_kernel_eval(x, M) - 1.0 / x;
        return R * std::sin(2 * pi * x * xi);
      };
      double im = -2.0 * detail::simpson(integrand, 0.0, 1.0, nq);
      double sgn = xi > 0 ? 1.0 : (xi < 0 ? -1.0 : 0.0);
      K.hat.v[j] = cplx(0.0, -pi * sgn + im);
    }
  }
  return K;
}

struct ValidationReport {
  // constants[n] = sup over the xi-grid (0 excluded) of |d^n K^ / d xi^n|
  // divided by min{1,1/|xi|} (n = 0) resp. |xi|^{-n} min{|xi|, 1/|xi|} (n >= 1)
  std::vector<double> constants;
  double near_zero_linear_ratio = 0;  // sup_{0<|xi|<=1/2} |K^(xi)| / |xi|
  bool flag_1a14 = false;
};

inline ValidationReport validate_kernel(const KernelSpec& K, int order_max,
                                        double linear_threshold = 50.0) {
  const SampledFunction& H = K.hat;
  double dxi = H.dx();
  ValidationReport rep;
  for (int n = 0; n <= order_max; ++n) {
    // n-th forward difference, attributed to the stencil midpoint
    std::vector<double> binom(n + 1, 1.0);
    for (int r = 1; r <= n; ++r)
      for (int t = r - 1; t >= 1; --t) binom[t] += binom[t - 1];
    double best = 0;
    for (std::size_t j = 0; j + n < H.n(); ++j) {
      double xi = H.x(j) + 0.5 * n * dxi;
      double axi = std::abs(xi);
      if (axi < (n + 2) * dxi) continue;            // discontinuity at 0
      if (axi > 0.9 * H.half()) continue;           // edge of the symbol grid
      cplx d = 0;
      for (int r = 0; r <= n; ++r) d += ((n - r) % 2 ? -1.0 : 1.0) * binom[r] * H.v[j + r];
      double deriv = std::abs(d) / std::pow(dxi, n);
      double maj = n == 0 ? std::min(1.0, 1.0 / axi)
                          : std::pow(axi, -n) * std::min(axi, 1.0 / axi);
      best = std::max(best, deriv / maj);
    }
    rep.constants.push_back(best);
  }
  for (std::size_t j = 0; j < H.n(); ++j) {
    double axi = std::abs(H.x(j));
    if (axi < 0.5 * dxi || axi > 0.5) continue;
    rep.near_zero_linear_ratio = std::max(rep.near_zero_linear_ratio, std::abs(H.v[j]) / axi);
  }
  rep.flag_1a14 = rep.near_zero_linear_ratio <= linear_threshold;
  return rep;
}

// annulus partition: q(xi) = S(log2|xi| + 1) - S(log2|xi|), telescoping to 1
inline double q_partition(double xi) {
  if (xi == 0) return 0.0;
  double t = std::log2(std::abs(xi));
  return smooth_step(t + 1.0) - smooth_step(t);
}

struct ThetaProfile {
  double c_lo = 1000.0;
  double c_hi = 4000.0;

  static ThetaProfile literal() { return {}; }
  static ThetaProfile desk() { return {8.0, 32.0}; }
};

// C-infinity multiplier, 1 on |xi| <= c_lo, 0 on |xi| >= c_hi
inline double theta_fn(double xi, const ThetaProfile& p = {}) {
  return 1.0 - smooth_step((std::abs(xi) - p.c_lo) / (p.c_hi - p.c_lo));
}

// theta_i(xi) = theta(2^i xi) - theta(2^{i+1} xi); support in
// {c_lo 2^{-i-1} <= |xi| <= c_hi 2^{-i}}
inline double theta_i_fn(double xi, int i, const ThetaProfile& p = {}) {
  return theta_fn(std::ldexp(xi, i), p) - theta_fn(std::ldexp(xi, i + 1), p);
}

struct KernelSplit {
  cplx limit_pos, limit_neg;  // one-sided limits of K^ at 0
  SampledFunction eta_hat;
  std::vector<std::pair<int, SampledFunction>> g_hats;  // (j, g_j samples on the xi grid)
};

// raised-cosine taper from 1 at t=0 to 0 at t=1
inline double rc_taper(double t) {
  if (t <= 0) return 1.0;
  if (t >= 1) return 0.0;
  return 0.5 * (1.0 + std::cos(pi * t));
}

inline KernelSplit split_kernel(const KernelSpec& K) {
  const SampledFunction& H = K.hat;
  KernelSplit sp;
  // one-sided limits read off just outside the origin
  std::size_t mid = H.n() / 2;  // xi = 0
  sp.limit_pos = H.v[mid + 1];
  sp.limit_neg = H.v[mid - 1];
  sp.eta_hat = SampledFunction(H.a, H.b);
  for (std::size_t j = 0; j < H.n(); ++j) {
    double xi = H.x(j);
    if (xi == 0) {
      sp.eta_hat.v[j] = (sp.limit_pos + sp.limit_neg) / 2.0;
      continue;
    }
    cplx lim = xi > 0 ? sp.limit_pos : sp.limit_neg;
    sp.eta_hat.v[j] = lim * rc_taper(2.0 * (std::abs(xi) - 0.5));
  }
  // pieces g_j = (K^ - eta^) q(xi / 2^j) over the scales resolvable on the grid
  for (int j = -(H.b + 1); j <= H.a + 1; ++j) {
    SampledFunction g(H.a, H.b);
    double mass = 0;
    for (std::size_t t = 0; t < H.n(); ++t) {
      double qq = q_partition(H.x(t) * std::ldexp(1.0, -j));
      g.v[t] = (H.v[t] - sp.eta_hat.v[t]) * qq;
      mass += std::norm(g.v[t]);
    }
    if (mass > 1e-24) sp.g_hats.emplace_back(j, std::move(g));
  }
  return sp;
}

// ---------------------------------------------------------------------------
// Discrete transfer kernels (integer-indexed)

struct DiscreteKernels {
  int k = 1, M = 2;
  long long W = 0;  // support window: indices -W..W
  std::vector<double> H, A, S, O;  // index i stored at position i + W

  double at(const std::vector<double>& v, long long i) const {
    if (i < -W || i > W) return 0.0;
    return v[std::size_t(i + W)];
  }
  double h(long long i) const { return at(H, i); }
  double a(long long i) const { return at(A, i); }
  double s(long long i) const { return at(S, i); }
  double o(long long i) const { return at(O, i); }
};

inline DiscreteKernels discrete_kernels(int k, int M, long long W) {
  if (k < 1) throw ConfigError("discrete_kernels: k must be >= 1");
  DiscreteKernels D;
  D.k = k;
  D.M = M;
  D.W = W;
  long long span = 1LL << k;
  D.H.resize(std::size_t(2 * W + 1));
  D.A.resize(std::size_t(2 * W + 1));
  D.S.resize(std::size_t(2 * W + 1));
  D.O.resize(std::size_t(2 * W + 1));
  for (long long i = -W; i <= W; ++i) {
    std::size_t p = std::size_t(i + W);
    if (i >= -span && i <= span - 1)
      D.H[p] = std::ldexp(1.0, -k) * hilbert_kernel_eval(std::ldexp(double(i), -k), M);
    else
      D.H[p] = 1.0 / double(i);
    D.A[p] = (i >= -span && i <= span) ? D.H[p] : 0.0;
    D.S[p] = (i != 0 && i >= -span && i <= span) ? 1.0 / double(i) : 0.0;
    D.O[p] = D.A[p] - D.S[p];
  }
  return D;
}

// max over real y (sampled at step 1/8) of |H_{k,M}(y) - Dil^1_{2^k} K_M(y)|
// over the majorant 2^{-2k} (|y| <= 2^k) / y^{-2} (outside).  H is the step
// function with value H(floor(y)).
inline double discrete_comparison_constant(const DiscreteKernels& D) {
  double best = 0;
  long long span = 1LL << D.k;
  for (long long t = -8 * D.W; t < 8 * D.W; ++t) {
    double y = double(t) / 8.0;
    long long i = (long long)std::floor(y);
    double dil = std::ldexp(1.0, -D.k) * hilbert_kernel_eval(std::ldexp(y, -D.k), D.M);
    double diff = std::abs(D.h(i) - dil);
    double maj = (std::abs(y) <= double(span)) ? std::ldexp(1.0, -2 * D.k)
                                               : 1.0 / (y * y);
    best = std::max(best, diff / maj);
  }
  return best;
}

}  // namespace tf
