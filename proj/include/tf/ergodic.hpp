#pragma once

// Dynamical systems (irrational rotation, cyclic shift), bilinear averages and
// series along orbits, jump counting for scale-indexed value sequences, the
// discrete kernels H/A/S/O on the integers with the bilinear forms they weight,
// and the continuous-to-discrete sampling bridge.

#include <cmath>
#include <functional>
#include <vector>

#include "tf/kernels.hpp"
#include "tf/util.hpp"

namespace tf {

struct DynamicalSystem {
  enum class Kind { Rotation, Cyclic };
  Kind kind = Kind::Rotation;
  long double alpha = 0.41421356237309504880168872420969808L;  // sqrt(2) - 1
  long long P = 0;

  static DynamicalSystem rotation(long double a = 0.41421356237309504880168872420969808L) {
    DynamicalSystem s;
    s.kind = Kind::Rotation;
    s.alpha = a;
    return s;
  }
  static DynamicalSystem cyclic(long long P) {
    if (P < 1) throw ConfigError("DynamicalSystem: cyclic order must be positive");
    DynamicalSystem s;
    s.kind = Kind::Cyclic;
    s.P = P;
    return s;
  }

  // states tau^n x for n = nmin..nmax, accumulated incrementally in extended
  // precision; rotation states are phases in [0,1), cyclic states are integer
  // residues returned as doubles
  std::vector<double> states(double x, long long nmin, long long nmax) const {
    std::vector<double> out(std::size_t(nmax - nmin + 1));
    if (kind == Kind::Rotation) {
      long double p = x - std::floor((long double)x);
      long double q = p;
      out[std::size_t(-nmin)] = double(p);
      for (long long n = 1; n <= nmax; ++n) {
        p += alpha;
        if (p >= 1.0L) p -= 1.0L;
        out[std::size_t(n - nmin)] = double(p);
      }
      for (long long n = -1; n >= nmin; --n) {
        q -= alpha;
        if (q < 0.0L) q += 1.0L;
        out[std::size_t(n - nmin)] = double(q);
      }
    } else {
      long long x0 = (std::llround(x) % P + P) % P;
      for (long long n = nmin; n <= nmax; ++n)
        out[std::size_t(n - nmin)] = double(((x0 + n) % P + P) % P);
    }
    return out;
  }
};

using OrbitFn = std::function<cplx(double)>;

inline OrbitFn table_observable(std::vector<cplx> tab) {
  return [tab = std::move(tab)](double s) { return tab[std::size_t(std::llround(s))]; };
}

// (1/N) sum_{n=0}^{N-1} f(tau^n x) g(tau^{-n} x)
inline cplx bilinear_average(const DynamicalSystem& sys, const OrbitFn& f,
                             const OrbitFn& g, double x, long long N) {
  if (N < 1) throw ConfigError("bilinear_average: N must be positive");
  auto st = sys.states(x, -(N - 1), N - 1);
  long long off = N - 1;
  cplx acc = 0;
  for (long long n = 0; n < N; ++n)
    acc += f(st[std::size_t(off + n)]) * g(st[std::size_t(off - n)]);
  return acc / double(N);
}

// sum'_{n=-N}^{N} f(tau^n x) g(tau^{-n} x) / n, the n = 0 term excluded
inline cplx bilinear_series(const DynamicalSystem& sys, const OrbitFn& f,
                            const OrbitFn& g, double x, long long N) {
  if (N < 1) throw ConfigError("bilinear_series: N must be positive");
  auto st = sys.states(x, -N, N);
  long long off = N;
  cplx acc = 0;
  for (long long n = 1; n <= N; ++n)
    acc += (f(st[std::size_t(off + n)]) * g(st[std::size_t(off - n)]) -
            f(st[std::size_t(off - n)]) * g(st[std::size_t(off + n)])) /
           double(n);
  return acc;
}

// ---------------------------------------------------------------------------
// Jump counting

struct JumpReport {
  long long count = 0;
  std::vector<long long> u;  // realized block boundaries (indices into W)
};

// Greedy disjoint scan: starting from the current block start u, find the
// first v with some k in [u, v) satisfying |W_k - W_v| > alpha; that closes a
// block, and the scan restarts at v + 1.
inline JumpReport jump_count(const std::vector<cplx>& W, double alpha) {
  JumpReport rep;
  long long n = (long long)W.size();
  long long u = 0;
  if (n > 0) rep.u.push_back(0);
  while (u < n) {
    long long found = -1;
    for (long long v = u + 1; v < n && found < 0; ++v)
      for (long long k = u; k < v; ++k)
        if (std::abs(W[std::size_t(k)] - W[std::size_t(v)]) > alpha) {
          found = v;
          break;
        }
    if (found < 0) break;
    ++rep.count;
    rep.u.push_back(found);
    u = found + 1;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Discrete kernels on the integers

// step-kernel value on [b, b+1): scaled smooth kernel inside the span, 1/b outside
inline double h_kernel(long long b, int k, int M) {
  long long span = 1LL << k;
  if (b >= -span && b < span)
    return std::ldexp(hilbert_kernel_eval(std::ldexp(double(b), -k), M), -k);
  return 1.0 / double(b);
}

inline double a_kernel(long long b, int k, int M) {
  long long span = 1LL << k;
  return (b >= -span && b <= span) ? h_kernel(b, k, M) : 0.0;
}

inline double s_kernel(long long b, int k) {
  long long span = 1LL << k;
  return (b != 0 && b >= -span && b <= span) ? 1.0 / double(b) : 0.0;
}

inline double o_kernel(long long b, int k, int M) {
  return a_kernel(b, k, M) - s_kernel(b, k);
}

struct IntSeq {
  long long lo = 0;
  std::vector<double> v;

  long long hi() const { return lo + (long long)v.size(); }  // exclusive
  double at(long long i) const {
    i -= lo;
    return (i >= 0 && i < (long long)v.size()) ? v[std::size_t(i)] : 0.0;
  }
  double norm2() const {
    double s = 0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
  }
};

inline IntSeq random_int_seq(long long lo, std::size_t len, Rng& rng) {
  IntSeq s;
  s.lo = lo;
  s.v.resize(len);
  double n2 = 0;
  for (auto& x : s.v) {
    x = rng.uniform(-1.0, 1.0);
    n2 += x * x;
  }
  double inv = n2 > 0 ? 1.0 / std::sqrt(n2) : 1.0;
  for (auto& x : s.v) x *= inv;
  return s;
}

struct DiscreteBilinearResult {
  IntSeq h_form, o_form;   // a |-> sum_b phi(a+b) psi(a-b) * (kernel difference)
  double max_form_dev = 0;    // max |h_form - o_form|
  double max_kernel_dev = 0;  // max over scanned b of the two difference kernels
};

// Bilinear form weighted by H_{k,M} - H_{k',M}, with the same computation run
// through the O-kernel difference; the two weight sequences coincide.
inline DiscreteBilinearResult discrete_bilinear(const IntSeq& phi, const IntSeq& psi,
                                                int k, int kp, int M) {
  if (!(1 <= k && k < kp)) throw ConfigError("discrete_bilinear: need 1 <= k < k'");
  if (M < 2) throw ConfigError("discrete_bilinear: M must be at least 2");
  long long a_lo = (phi.lo + psi.lo) / 2 - 1;
  long long a_hi = (phi.hi() + psi.hi()) / 2 + 1;
  DiscreteBilinearResult res;
  res.h_form.lo = res.o_form.lo = a_lo;
  res.h_form.v.assign(std::size_t(a_hi - a_lo + 1), 0.0);
  res.o_form.v.assign(std::size_t(a_hi - a_lo + 1), 0.0);
  for (long long a = a_lo; a <= a_hi; ++a) {
    double hsum = 0, osum = 0;
    for (long long b = phi.lo - a; b < phi.hi() - a; ++b) {
      double pq = phi.at(a + b) * psi.at(a - b);
      if (pq == 0.0) continue;
      double dh = h_kernel(b, k, M) - h_kernel(b, kp, M);
      double dq = o_kernel(b, k, M) - o_kernel(b, kp, M);
      res.max_kernel_dev = std::max(res.max_kernel_dev, std::abs(dh - dq));
      hsum += pq * dh;
      osum += pq * dq;
    }
    res.h_form.v[std::size_t(a - a_lo)] = hsum;
    res.o_form.v[std::size_t(a - a_lo)] = osum;
    res.max_form_dev = std::max(res.max_form_dev, std::abs(hsum - osum));
  }
  return res;
}

// ---------------------------------------------------------------------------
// Sampling bridge between the real-line and integer bilinear forms

struct TransferBridgeResult {
  long long a_lo = 0;
  std::vector<double> continuous_form;  // per cell: 32 * integral over [a+1/4, a+1/2]
  std::vector<double> discrete_form;
  double max_err = 0;
};

// Spread phi and psi along the line as functions supported on the upper-middle
// quarter of each unit cell; the cell integral of the continuous bilinear form
// then reproduces the discrete form (the overlap geometry contributes the
// factor 1/32 per cell, split between the aligned and the wrapped match-up).
inline TransferBridgeResult transfer_bridge(const IntSeq& phi, const IntSeq& psi,
                                            int k, int kp, int M, int bres = 10) {
  if (!(1 <= k && k < kp)) throw ConfigError("transfer_bridge: need 1 <= k < k'");
  DiscreteBilinearResult d = discrete_bilinear(phi, psi, k, kp, M);
  TransferBridgeResult res;
  res.a_lo = d.h_form.lo;
  res.discrete_form = d.h_form.v;
  res.continuous_form.assign(d.h_form.v.size(), 0.0);
  double step = std::ldexp(1.0, -bres);
  long long nx = 1LL << (bres - 2);  // samples across [1/4, 1/2)
  for (std::size_t ai = 0; ai < res.continuous_form.size(); ++ai) {
    long long a = res.a_lo + (long long)ai;
    double acc = 0;
    for (long long t = 0; t < nx; ++t) {
      double x = double(a) + 0.25 + (double(t) + 0.5) * step;
      double bx = 0;
      for (long long c = phi.lo; c < phi.hi(); ++c) {
        if (phi.at(c) == 0.0) continue;
        // y keeping x + y inside cell c
        double y0 = double(c) - x;
        long long ny = 1LL << bres;
        for (long long q = 0; q < ny; ++q) {
          double y = y0 + (double(q) + 0.5) * step;
          double xf = x + y;
          double ff = xf - std::floor(xf);
          if (ff < 0.25 || ff > 0.5) continue;
          double xg = x - y;
          double cg = std::floor(xg);
          double fg = xg - cg;
          if (fg < 0.25 || fg > 0.5) continue;
          double gv = psi.at((long long)cg);
          if (gv == 0.0) continue;
          long long yb = (long long)std::floor(y);
          bx += phi.at(c) * gv * (h_kernel(yb, k, M) - h_kernel(yb, kp, M));
        }
      }
      acc += bx * step * step;
    }
    res.continuous_form[ai] = 32.0 * acc;
    res.max_err = std::max(res.max_err,
                           std::abs(res.continuous_form[ai] - res.discrete_form[ai]));
  }
  return res;
}

// ---------------------------------------------------------------------------
// Smoothed averages and the error-weight ledger

// weights of the difference between the kernel-smoothed average at width r and
// the sharp average (1/[r]) sum_{0 <= n <= r}
inline double error_weight_sum(double r, int M) {
  if (r <= 1.0) throw ConfigError("error_weight_sum: need r > 1");
  long long nlo = (long long)std::floor(-r / M) - 1;
  long long nhi = (long long)std::ceil(r * (1.0 + 1.0 / M)) + 1;
  double fl = std::floor(r);
  double s = 0;
  for (long long n = nlo; n <= nhi; ++n) {
    double w = average_kernel_eval(double(n) / r, M) / r;
    if (n >= 0 && double(n) <= r) w -= 1.0 / fl;
    s += std::abs(w);
  }
  return s;
}

struct LacunaryReport {
  std::vector<int> Ms;
  std::vector<double> weight_sums;    // sup over the r-grid per M
  double weight_C = 0;                // max over M of M * weight_sum
  std::vector<long long> tail_starts;
  std::vector<double> average_gap;    // mean over x of max-min past the tail start
  std::vector<double> series_gap;
};

inline LacunaryReport lacunary_convergence(const DynamicalSystem& sys, const OrbitFn& f,
                                           const OrbitFn& g,
                                           const std::vector<double>& xs, int kmax,
                                           int n, const std::vector<int>& Ms) {
  if (kmax < 3 || n < 1) throw ConfigError("lacunary_convergence: bad ladder");
  LacunaryReport rep;
  rep.Ms = Ms;
  for (int M : Ms) {
    double sup = 0;
    for (int k = 1; k <= kmax; ++k)
      sup = std::max(sup, error_weight_sum(std::exp2(double(k) / n), M));
    rep.weight_sums.push_back(sup);
    rep.weight_C = std::max(rep.weight_C, double(M) * sup);
  }
  int levels = kmax * n;
  std::vector<std::vector<cplx>> avals(xs.size()), svals(xs.size());
  for (std::size_t xi = 0; xi < xs.size(); ++xi)
    for (int t = n; t <= levels; ++t) {
      long long N = (long long)std::floor(std::exp2(double(t) / n));
      avals[xi].push_back(bilinear_average(sys, f, g, xs[xi], N));
      svals[xi].push_back(bilinear_series(sys, f, g, xs[xi], N));
    }
  std::size_t len = avals.empty() ? 0 : avals[0].size();
  for (std::size_t t0 = 0; t0 + 1 < len; t0 += std::max<std::size_t>(1, len / 6)) {
    rep.tail_starts.push_back((long long)t0);
    double ga = 0, gs = 0;
    for (std::size_t xi = 0; xi < xs.size(); ++xi) {
      auto gap = [&](const std::vector<cplx>& w) {
        double best = 0;
        for (std::size_t i = t0; i < w.size(); ++i)
          for (std::size_t j = i + 1; j < w.size(); ++j)
            best = std::max(best, std::abs(w[i] - w[j]));
        return best;
      };
      ga += gap(avals[xi]);
      gs += gap(svals[xi]);
    }
    rep.average_gap.push_back(ga / double(xs.size()));
    rep.series_gap.push_back(gs / double(xs.size()));
  }
  return rep;
}

}  // namespace tf
