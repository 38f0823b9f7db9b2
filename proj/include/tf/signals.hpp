#pragma once

// Sampled functions on the centered window [-2^a, 2^a) with step 2^{-b},
// discrete Fourier transforms with Riemann-sum normalization, norms, the
// weak-L1 functional, the Hardy-Littlewood maximal function, and random
// generators for the normalized test classes X(E) and X2(E).

#include <algorithm>
#include <cmath>
#include <vector>

#include "tf/grids.hpp"
#include "tf/util.hpp"

namespace tf {

struct SampledFunction {
  int a = 5;  // window half-length 2^a
  int b = 8;  // step 2^{-b}
  std::vector<cplx> v;

  SampledFunction() = default;
  SampledFunction(int a_, int b_) : a(a_), b(b_) {
    if (a_ + b_ + 1 < 2 || a_ + b_ + 1 > 26)
      throw ConfigError("SampledFunction: resolution out of range");
    v.assign(std::size_t(1) << (a_ + b_ + 1), cplx(0.0));
  }

  std::size_t n() const { return v.size(); }
  double dx() const { return std::ldexp(1.0, -b); }
  double half() const { return std::ldexp(1.0, a); }
  double x(std::size_t j) const { return (double(j) - double(n()) / 2) * dx(); }
  // index of the sample at x (x must be within the window)
  long long index_of(double xq) const {
    return std::llround(xq / dx() + double(n()) / 2);
  }
  cplx at(long long j) const {  // zero outside the window
    if (j < 0 || j >= (long long)n()) return 0.0;
    return v[std::size_t(j)];
  }
  // linear interpolation, zero outside
  cplx eval(double xq) const {
    double t = xq / dx() + double(n()) / 2;
    double fl = std::floor(t);
    long long j = (long long)fl;
    return at(j) * (1.0 - (t - fl)) + at(j + 1) * (t - fl);
  }

  template <class F>
  static SampledFunction from(int a, int b, F&& fn) {
    SampledFunction f(a, b);
    for (std::size_t j = 0; j < f.n(); ++j) f.v[j] = fn(f.x(j));
    return f;
  }

  double norm1() const {
    double s = 0;
    for (auto& z : v) s += std::abs(z);
    return s * dx();
  }
  double norm2() const {
    double s = 0;
    for (auto& z : v) s += std::norm(z);
    return std::sqrt(s * dx());
  }
  double norm_sup() const {
    double s = 0;
    for (auto& z : v) s = std::max(s, std::abs(z));
    return s;
  }

  SampledFunction& operator+=(const SampledFunction& o) {
    check_same(o);
    for (std::size_t j = 0; j < n(); ++j) v[j] += o.v[j];
    return *this;
  }
  SampledFunction& operator-=(const SampledFunction& o) {
    check_same(o);
    for (std::size_t j = 0; j < n(); ++j) v[j] -= o.v[j];
    return *this;
  }
  SampledFunction& operator*=(cplx c) {
    for (auto& z : v) z *= c;
    return *this;
  }
  friend SampledFunction operator+(SampledFunction f, const SampledFunction& g) {
    return f += g;
  }
  friend SampledFunction operator-(SampledFunction f, const SampledFunction& g) {
    return f -= g;
  }
  friend SampledFunction operator*(cplx c, SampledFunction f) { return f *= c; }

  void check_same(const SampledFunction& o) const {
    if (a != o.a || b != o.b) throw ConfigError("resolution mismatch");
  }
};

// Riemann-sum inner product <f, g> = dx * sum f conj(g)
inline cplx inner(const SampledFunction& f, const SampledFunction& g) {
  f.check_same(g);
  cplx s = 0;
  for (std::size_t j = 0; j < f.n(); ++j) s += f.v[j] * std::conj(g.v[j]);
  return s * f.dx();
}

namespace detail {
// In-place radix-2 FFT computing X_k = sum_j x_j e^{-2 pi i sign jk/n}.
inline void fft_pow2(std::vector<cplx>& x, int sign) {
  const std::size_t n = x.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(x[i], x[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    double ang = -sign * 2.0 * pi / double(len);
    cplx wl(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      cplx w = 1.0;
      for (std::size_t k = 0; k < len / 2; ++k) {
        cplx u = x[i + k], t = w * x[i + k + len / 2];
        x[i + k] = u + t;
        x[i + k + len / 2] = u - t;
        w *= wl;
      }
    }
  }
}
}  // namespace detail

// Continuous-convention transform: approximates f^(xi) = int f(x)e^{-2 pi i x xi}dx.
// Output lives on the dual grid: window half-length 2^{b-1}, step 2^{-(a+1)}.
// With centered grids and n divisible by 4 the phase factors reduce to
// alternating signs.
inline SampledFunction transform(const SampledFunction& f) {
  SampledFunction F(f.b - 1, f.a + 1);
  std::vector<cplx> buf(f.n());
  for (std::size_t j = 0; j < f.n(); ++j) buf[j] = (j % 2 ? -f.v[j] : f.v[j]);
  detail::fft_pow2(buf, +1);
  double w = f.dx();
  for (std::size_t k = 0; k < f.n(); ++k) F.v[k] = (k % 2 ? -buf[k] : buf[k]) * w;
  return F;
}

inline SampledFunction inverse_transform(const SampledFunction& F) {
  SampledFunction f(F.b - 1, F.a + 1);
  std::vector<cplx> buf(F.n());
  for (std::size_t k = 0; k < F.n(); ++k) buf[k] = (k % 2 ? -F.v[k] : F.v[k]);
  detail::fft_pow2(buf, -1);
  double w = F.dx();
  for (std::size_t j = 0; j < F.n(); ++j) f.v[j] = (j % 2 ? -buf[j] : buf[j]) * w;
  return f;
}

// periodic translation by an exact grid shift t (a multiple of 2^{-b})
inline SampledFunction translate(const SampledFunction& f, double t) {
  long long sh = std::llround(t / f.dx());
  if (std::abs(sh * f.dx() - t) > 1e-12)
    throw ConfigError("translate: shift not grid-aligned");
  SampledFunction g(f.a, f.b);
  long long n = (long long)f.n();
  for (long long j = 0; j < n; ++j) g.v[std::size_t(((j + sh) % n + n) % n)] = f.v[std::size_t(j)];
  return g;
}

// Mod_theta f(x) = e^{2 pi i theta x} f(x)
inline SampledFunction modulate(const SampledFunction& f, double theta) {
  SampledFunction g(f.a, f.b);
  for (std::size_t j = 0; j < f.n(); ++j)
    g.v[j] = std::polar(1.0, 2.0 * pi * theta * f.x(j)) * f.v[j];
  return g;
}

// Dil^p_{2^k} f(x) = 2^{-k/p} f(x/2^k), same grid, interpolated
inline SampledFunction dilate_pow2(const SampledFunction& f, int k, double p) {
  SampledFunction g(f.a, f.b);
  double s = std::ldexp(1.0, k);
  double amp = std::pow(s, -1.0 / p);
  for (std::size_t j = 0; j < g.n(); ++j) g.v[j] = amp * f.eval(g.x(j) / s);
  return g;
}

// sup over distinct sample moduli v of v * |{|F| >= v}|
inline double weak_l1_norm(const SampledFunction& F) {
  std::vector<double> mods(F.n());
  for (std::size_t j = 0; j < F.n(); ++j) mods[j] = std::abs(F.v[j]);
  std::sort(mods.begin(), mods.end(), std::greater<double>());
  double best = 0;
  for (std::size_t j = 0; j < mods.size(); ++j) {
    if (mods[j] == 0) break;
    if (j + 1 < mods.size() && mods[j + 1] == mods[j]) continue;  // take the
    // largest superlevel count for this threshold
    best = std::max(best, mods[j] * double(j + 1) * F.dx());
  }
  return best;
}

// centered maximal averages over dyadic radii 2^{-b} .. 2^{a+1}
inline SampledFunction hl_maximal(const SampledFunction& f) {
  const std::size_t n = f.n();
  std::vector<double> pref(n + 1, 0.0);
  for (std::size_t j = 0; j < n; ++j) pref[j + 1] = pref[j] + std::abs(f.v[j]);
  SampledFunction M(f.a, f.b);
  for (int t = -f.b; t <= f.a + 1; ++t) {
    long long h = 1LL << (t + f.b);
    for (std::size_t j = 0; j < n; ++j) {
      long long lo = std::max<long long>(0, (long long)j - h);
      long long hi = std::min<long long>(n - 1, (long long)j + h);
      double avg = (pref[std::size_t(hi + 1)] - pref[std::size_t(lo)]) / double(2 * h + 1);
      if (avg > M.v[j].real()) M.v[j] = avg;
    }
  }
  return M;
}

// ---------------------------------------------------------------------------
// Test classes X(E), X2(E): support in E, sup bound 1 resp. |E|^{-1/2}.

struct IntervalSet {
  std::vector<RatInterval> parts;  // assumed pairwise disjoint

  Rat measure() const {
    Rat m(0);
    for (auto& I : parts) m += I.length();
    return m;
  }
  bool contains(double x) const {
    for (auto& I : parts)
      if (x >= to_double(I.lo) && x < to_double(I.hi)) return true;
    return false;
  }
};

// Random element of X(E): sup norm <= 1, support exactly inside E.
inline SampledFunction random_X(const IntervalSet& E, int a, int b, Rng& rng) {
  SampledFunction f(a, b);
  for (std::size_t j = 0; j < f.n(); ++j)
    if (E.contains(f.x(j))) f.v[j] = rng.uniform() * rng.unit_complex();
  return f;
}

// Random element of X2(E): sup norm <= |E|^{-1/2}, so ||f||_2 <= 1.
inline SampledFunction random_X2(const IntervalSet& E, int a, int b, Rng& rng) {
  SampledFunction f = random_X(E, a, b, rng);
  double amp = 1.0 / std::sqrt(to_double(E.measure()));
  return amp * f;
}

}  // namespace tf
