#pragma once

// Continuous bilinear operators: the scale-k family B_k, the bilinear maximal
// function, oscillation seminorms over integer and 2^{1/n} scale ladders with
// the splitting majorant, the square function, and discrete model sums over
// multitile collections with stopping-time truncation.

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <vector>

#include "tf/kernels.hpp"
#include "tf/signals.hpp"
#include "tf/tiles.hpp"
#include "tf/wavepackets.hpp"

namespace tf {

struct BilinearKernel {
  std::function<double(double)> eval;
  // radius beyond which eval vanishes; infinity for slowly decaying kernels
  double support = std::numeric_limits<double>::infinity();
};

inline BilinearKernel average_bilinear_kernel(int M) {
  return {[M](double y) { return average_kernel_eval(y, M); }, 1.0 + 1.0 / M};
}

inline BilinearKernel hilbert_bilinear_kernel(int M) {
  return {[M](double y) { return hilbert_kernel_eval(y, M); },
          std::numeric_limits<double>::infinity()};
}

// kernel given by space samples (e.g. a split piece), linear interpolation
inline BilinearKernel sampled_bilinear_kernel(SampledFunction K) {
  double rad = K.half();
  return {[K = std::move(K)](double y) { return K.eval(y).real(); }, rad};
}

// B(x) = int f(x+y) g(x-y) K(y/s)/s dy as a Riemann sum on the common grid.
// Non-periodic: samples outside the window count as zero.
inline SampledFunction bilinear_apply(const SampledFunction& f, const SampledFunction& g,
                                      const BilinearKernel& ker, double scale) {
  f.check_same(g);
  double dy = f.dx();
  if (!(scale >= 2.0 * dy))
    throw ConfigError("bilinear_apply: scale below grid resolution");
  long long n = (long long)f.n();
  long long mmax = n - 1;
  if (std::isfinite(ker.support))
    mmax = std::min(mmax, (long long)std::floor(scale * ker.support / dy));
  std::vector<double> w(std::size_t(2 * mmax + 1));
  for (long long m = -mmax; m <= mmax; ++m)
    w[std::size_t(m + mmax)] = ker.eval(double(m) * dy / scale) / scale * dy;
  SampledFunction B(f.a, f.b);
  for (long long j = 0; j < n; ++j) {
    cplx acc = 0;
    for (long long m = -mmax; m <= mmax; ++m) {
      double wm = w[std::size_t(m + mmax)];
      if (wm != 0.0) acc += f.at(j + m) * g.at(j - m) * wm;
    }
    B.v[std::size_t(j)] = acc;
  }
  return B;
}

// sup over dyadic eps of (1/eps) int_{|y|<eps} |f(x+y) g(x-y)| dy
inline SampledFunction bilinear_maximal(const SampledFunction& f, const SampledFunction& g) {
  f.check_same(g);
  long long n = (long long)f.n();
  double dy = f.dx();
  SampledFunction M(f.a, f.b);
  for (long long j = 0; j < n; ++j) {
    double acc = std::abs(f.at(j)) * std::abs(g.at(j)) * dy;
    double best = 0;
    long long m = 1;
    for (int t = -f.b + 1; t <= f.a + 1; ++t) {
      long long h = 1LL << (t + f.b);  // eps = 2^t = h * dy
      for (; m < h; ++m)
        acc += (std::abs(f.at(j + m)) * std::abs(g.at(j - m)) +
                std::abs(f.at(j - m)) * std::abs(g.at(j + m))) * dy;
      best = std::max(best, acc / std::ldexp(1.0, t));
    }
    M.v[std::size_t(j)] = best;
  }
  return M;
}

// ---------------------------------------------------------------------------
// Oscillation over a scale ladder

struct ScaleSequence {
  std::vector<long long> u;  // u_1 < ... < u_J
  int n = 1;                 // lacunarity base d = 2^{1/n}

  void validate() const {
    if (u.size() < 2) throw ConfigError("ScaleSequence: need at least two levels");
    if (n < 1) throw ConfigError("ScaleSequence: base exponent must be positive");
    for (std::size_t j = 1; j < u.size(); ++j)
      if (u[j] <= u[j - 1]) throw ConfigError("ScaleSequence: levels must increase");
  }
  // a_j with a_j * n <= u_j < (a_j + 1) * n
  std::vector<long long> block_floors() const {
    std::vector<long long> a(u.size());
    for (std::size_t j = 0; j < u.size(); ++j) {
      long long q = u[j] / n;
      if (u[j] < 0 && q * n != u[j]) --q;
      a[j] = q;
    }
    return a;
  }
};

// lazily computed B at scale 2^{k/n}, shared across blocks
class BkCache {
 public:
  BkCache(const SampledFunction& f, const SampledFunction& g, BilinearKernel ker,
          int n = 1)
      : f_(f), g_(g), ker_(std::move(ker)), n_(n) {}

  const SampledFunction& at(long long k) {
    auto it = cache_.find(k);
    if (it != cache_.end()) return it->second;
    double scale = std::exp2(double(k) / double(n_));
    return cache_.emplace(k, bilinear_apply(f_, g_, ker_, scale)).first->second;
  }

 private:
  SampledFunction f_, g_;
  BilinearKernel ker_;
  int n_;
  std::map<long long, SampledFunction> cache_;
};

struct OscillationResult {
  SampledFunction osc;
  bool has_majorant = false;
  SampledFunction majorant;  // splitting majorant, base exponent n > 1 only
  double max_ratio = 0;      // max over samples of osc / majorant
};

// O(x) = (sum_j sup_{u_j <= k < u_{j+1}} |B_k(x) - B_{u_{j+1}}(x)|^2)^{1/2}
// with B at scales d^k, d = 2^{1/n}.  For n > 1 the integer-scale splitting
// majorant is also computed: block oscillations of each offset ladder plus the
// pairwise difference square functions between offsets.  When the integer
// blocks are strictly separated the triangle inequality gives the pointwise
// bound with constant 1, which is asserted.
inline OscillationResult oscillation(const SampledFunction& f, const SampledFunction& g,
                                     const BilinearKernel& ker, const ScaleSequence& U) {
  U.validate();
  f.check_same(g);
  BkCache cache(f, g, ker, U.n);
  const std::size_t ns = f.n();
  const std::size_t J = U.u.size();
  OscillationResult res;
  res.osc = SampledFunction(f.a, f.b);
  {
    std::vector<double> acc(ns, 0.0);
    for (std::size_t j = 0; j + 1 < J; ++j) {
      const SampledFunction& Bend = cache.at(U.u[j + 1]);
      std::vector<double> sup(ns, 0.0);
      for (long long k = U.u[j]; k < U.u[j + 1]; ++k) {
        const SampledFunction& Bk = cache.at(k);
        for (std::size_t t = 0; t < ns; ++t)
          sup[t] = std::max(sup[t], std::abs(Bk.v[t] - Bend.v[t]));
      }
      for (std::size_t t = 0; t < ns; ++t) acc[t] += sup[t] * sup[t];
    }
    for (std::size_t t = 0; t < ns; ++t) res.osc.v[t] = std::sqrt(acc[t]);
  }
  if (U.n == 1) return res;

  auto a = U.block_floors();
  res.has_majorant = true;
  res.majorant = SampledFunction(f.a, f.b);
  std::vector<double> maj(ns, 0.0);
  for (int i = 0; i < U.n; ++i) {
    // block oscillation of the offset-i integer ladder
    std::vector<double> acc(ns, 0.0);
    for (std::size_t j = 0; j + 1 < J; ++j) {
      if (a[j] == a[j + 1]) continue;
      const SampledFunction& Bend = cache.at(a[j + 1] * U.n + i);
      std::vector<double> sup(ns, 0.0);
      for (long long kap = a[j]; kap < a[j + 1]; ++kap) {
        const SampledFunction& Bk = cache.at(kap * U.n + i);
        for (std::size_t t = 0; t < ns; ++t)
          sup[t] = std::max(sup[t], std::abs(Bk.v[t] - Bend.v[t]));
      }
      for (std::size_t t = 0; t < ns; ++t) acc[t] += sup[t] * sup[t];
    }
    for (std::size_t t = 0; t < ns; ++t) maj[t] += std::sqrt(acc[t]);
  }
  for (int i = 0; i < U.n; ++i)
    for (int ip = 0; ip < U.n; ++ip) {
      if (i == ip) continue;
      std::vector<double> acc(ns, 0.0);
      for (long long kap = a.front(); kap <= a.back(); ++kap) {
        const SampledFunction& Bi = cache.at(kap * U.n + i);
        const SampledFunction& Bip = cache.at(kap * U.n + ip);
        for (std::size_t t = 0; t < ns; ++t) {
          double d = std::abs(Bi.v[t] - Bip.v[t]);
          acc[t] += d * d;
        }
      }
      for (std::size_t t = 0; t < ns; ++t) maj[t] += std::sqrt(acc[t]);
    }
  for (std::size_t t = 0; t < ns; ++t) res.majorant.v[t] = maj[t];
  bool separated = true;
  for (std::size_t j = 0; j + 1 < J; ++j)
    if (a[j] >= a[j + 1]) separated = false;
  double scale0 = 0;
  for (std::size_t t = 0; t < ns; ++t) {
    double m = maj[t];
    scale0 = std::max(scale0, m);
    if (m > 0) res.max_ratio = std::max(res.max_ratio, res.osc.v[t].real() / m);
  }
  if (separated)
    for (std::size_t t = 0; t < ns; ++t)
      if (res.osc.v[t].real() > maj[t] + 1e-9 * (1.0 + scale0))
        throw InvariantError("oscillation: splitting majorant violated");
  return res;
}

// ---------------------------------------------------------------------------
// Square function

struct SquareFunctionResult {
  SampledFunction S;  // (sum_k |B_k|^2)^{1/2} over the resolvable k-range
  int kmin = 0, kmax = 0;
  double tail_bound = 0;  // documented sup-norm proxy for the dropped scales
};

// Requires the near-zero linear symbol bound (flagged by validate_kernel);
// kernels failing it are rejected with the measured violation.
inline SquareFunctionResult square_function(const SampledFunction& f,
                                            const SampledFunction& g,
                                            const KernelSpec& K,
                                            const ValidationReport& rep) {
  f.check_same(g);
  if (!rep.flag_1a14)
    throw ConfigError("square_function: kernel symbol not vanishing linearly at 0, "
                      "measured near-zero ratio " + std::to_string(rep.near_zero_linear_ratio));
  BilinearKernel bk = sampled_bilinear_kernel(K.space);
  SquareFunctionResult res;
  res.kmin = -f.b + 1;
  res.kmax = f.a + 1;
  std::vector<double> acc(f.n(), 0.0);
  for (int k = res.kmin; k <= res.kmax; ++k) {
    SampledFunction B = bilinear_apply(f, g, bk, std::ldexp(1.0, k));
    for (std::size_t t = 0; t < f.n(); ++t) acc[t] += std::norm(B.v[t]);
  }
  res.S = SampledFunction(f.a, f.b);
  for (std::size_t t = 0; t < f.n(); ++t) res.S.v[t] = std::sqrt(acc[t]);
  // small scales: |B_k| <= sup|K^(2^k .)| ||f^||_1 ||g^||_1 with the linear
  // near-zero bound; large scales: |B_k| <= 2^{-k} sup|K| ||f||_2 ||g||_2
  double l1f = transform(f).norm1(), l1g = transform(g).norm1();
  double ximax = 2.0 * std::ldexp(1.0, f.b - 1);
  double tail_small =
      2.0 * rep.near_zero_linear_ratio * std::ldexp(ximax, res.kmin - 1) * l1f * l1g;
  double tail_large =
      2.0 * K.space.norm_sup() * std::ldexp(1.0, -res.kmax - 1) * f.norm2() * g.norm2();
  res.tail_bound = tail_small + tail_large;
  return res;
}

// ---------------------------------------------------------------------------
// Stopping data and model sums

struct StoppingData {
  std::vector<long long> u;                    // u_1 < ... < u_J
  std::vector<std::vector<long long>> kappa;   // per block, per sample; may be empty
  std::vector<SampledFunction> h;              // per block weights; may be empty

  std::size_t blocks() const { return u.size() - 1; }

  int block_of_scale(long long i) const {
    for (std::size_t j = 0; j + 1 < u.size(); ++j)
      if (u[j] <= i && i < u[j + 1]) return int(j);
    return -1;
  }

  void validate(std::size_t nsamples) const {
    if (u.size() < 2) throw ConfigError("StoppingData: need at least two levels");
    for (std::size_t j = 1; j < u.size(); ++j)
      if (u[j] <= u[j - 1]) throw ConfigError("StoppingData: levels must increase");
    if (!kappa.empty()) {
      if (kappa.size() != blocks()) throw ConfigError("StoppingData: kappa block count");
      for (std::size_t j = 0; j < kappa.size(); ++j) {
        if (kappa[j].size() != nsamples)
          throw ConfigError("StoppingData: kappa sample count");
        for (long long v : kappa[j])
          if (v < u[j] || v >= u[j + 1])
            throw ConfigError("StoppingData: kappa value out of block range");
      }
    }
    if (!h.empty()) {
      if (h.size() != blocks()) throw ConfigError("StoppingData: weight block count");
      for (std::size_t t = 0; t < nsamples; ++t) {
        double s = 0;
        for (const auto& hj : h) {
          if (hj.n() != nsamples) throw ConfigError("StoppingData: weight resolution");
          s += std::norm(hj.v[t]);
        }
        if (std::abs(s - 1.0) > 1e-10)
          throw InvariantError("StoppingData: weight squares do not sum to 1");
      }
    }
  }
};

// kappa_j == u_j everywhere: no truncation inside any block
inline StoppingData uniform_stopping(std::vector<long long> u, std::size_t nsamples) {
  StoppingData sd;
  sd.u = std::move(u);
  for (std::size_t j = 0; j + 1 < sd.u.size(); ++j)
    sd.kappa.emplace_back(nsamples, sd.u[j]);
  return sd;
}

inline StoppingData random_stopping(std::vector<long long> u, std::size_t nsamples,
                                    Rng& rng) {
  StoppingData sd;
  sd.u = std::move(u);
  for (std::size_t j = 0; j + 1 < sd.u.size(); ++j) {
    std::vector<long long> kj(nsamples);
    for (auto& v : kj) v = rng.uniform_int(sd.u[j], sd.u[j + 1] - 1);
    sd.kappa.push_back(std::move(kj));
  }
  return sd;
}

// random weights h_1..h_{J-1} with sum of squares exactly 1 at every sample
inline std::vector<SampledFunction> random_h_weights(std::size_t blocks, int a, int b,
                                                     Rng& rng) {
  std::vector<SampledFunction> h(blocks, SampledFunction(a, b));
  std::size_t ns = h[0].n();
  for (std::size_t t = 0; t < ns; ++t) {
    double s = 0;
    std::vector<double> raw(blocks);
    for (auto& r : raw) {
      r = 0.1 + rng.uniform();
      s += r * r;
    }
    for (std::size_t j = 0; j < blocks; ++j) h[j].v[t] = raw[j] / std::sqrt(s);
  }
  return h;
}

struct ModelSumResult {
  std::vector<SampledFunction> blocks;  // one per stopping block
  SampledFunction M;                    // (sum_j |block_j|^2)^{1/2}
};

namespace detail {
struct ModelTerm {
  int scale = 0;
  int block = -1;
  cplx coeff = 0;
  SampledFunction phi3;
};

inline std::vector<ModelTerm> model_terms(const std::vector<Multitile>& S,
                                          const SampledFunction& f,
                                          const SampledFunction& g,
                                          const StoppingData& sd) {
  std::vector<ModelTerm> terms;
  for (const auto& s : S) {
    int blk = sd.block_of_scale(s.i);
    if (blk < 0) continue;
    Packet p1 = make_packet(s.i, s.m, s.lj(1), f.a, f.b);
    Packet p2 = make_packet(s.i, s.m, s.lj(2), f.a, f.b);
    Packet p3 = make_packet(s.i, s.m, s.lj(3), f.a, f.b);
    cplx c = std::exp2(-0.5 * s.i) * inner(f, p1.space) * inner(g, p2.space);
    terms.push_back({s.i, blk, c, std::move(p3.space)});
  }
  return terms;
}
}  // namespace detail

// M(x) = (sum_j |sum_{s in block j, |I_s| >= 2^{kappa_j(x)}} c_s phi_{s,3}(x)|^2)^{1/2}
inline ModelSumResult model_sum(const std::vector<Multitile>& S, const SampledFunction& f,
                                const SampledFunction& g, const StoppingData& sd) {
  f.check_same(g);
  sd.validate(f.n());
  if (sd.kappa.empty()) throw ConfigError("model_sum: stopping functions required");
  auto terms = detail::model_terms(S, f, g, sd);
  ModelSumResult res;
  res.blocks.assign(sd.blocks(), SampledFunction(f.a, f.b));
  for (const auto& tm : terms) {
    SampledFunction& blk = res.blocks[std::size_t(tm.block)];
    const auto& kj = sd.kappa[std::size_t(tm.block)];
    for (std::size_t t = 0; t < f.n(); ++t)
      if (tm.scale >= kj[t]) blk.v[t] += tm.coeff * tm.phi3.v[t];
  }
  res.M = SampledFunction(f.a, f.b);
  for (std::size_t t = 0; t < f.n(); ++t) {
    double acc = 0;
    for (const auto& blk : res.blocks) acc += std::norm(blk.v[t]);
    res.M.v[t] = std::sqrt(acc);
  }
  return res;
}

// sup form: per sample, each block maximizes over its admissible stopping value
inline SampledFunction model_sum_sup(const std::vector<Multitile>& S,
                                     const SampledFunction& f, const SampledFunction& g,
                                     const std::vector<long long>& u) {
  StoppingData plain;
  plain.u = u;
  plain.validate(f.n());
  auto terms = detail::model_terms(S, f, g, plain);
  SampledFunction out(f.a, f.b);
  for (std::size_t t = 0; t < f.n(); ++t) {
    double acc = 0;
    for (std::size_t j = 0; j + 1 < u.size(); ++j) {
      double best = 0;
      for (long long kap = u[j]; kap < u[j + 1]; ++kap) {
        cplx sum = 0;
        for (const auto& tm : terms)
          if (tm.block == int(j) && tm.scale >= kap) sum += tm.coeff * tm.phi3.v[t];
        best = std::max(best, std::abs(sum));
      }
      acc += best * best;
    }
    out.v[t] = std::sqrt(acc);
  }
  return out;
}

// Single-scale operator int int f^(eta) g^(sigma) theta_i(sigma - eta)
// e^{2 pi i x (eta + sigma)} d eta d sigma; the exact discrete target of the
// full packet sum at scale i (all m over a complete residue system, all l).
inline SampledFunction theta_truncated_bilinear(const SampledFunction& f,
                                                const SampledFunction& g, int i,
                                                const ThetaProfile& prof) {
  f.check_same(g);
  SampledFunction F = transform(f), G = transform(g);
  SampledFunction H(F.a, F.b);
  long long n = (long long)F.n();
  for (long long k = 0; k < n; ++k) {
    double xi = F.x(std::size_t(k));
    cplx acc = 0;
    for (long long j = 0; j < n; ++j) {
      double th = theta_i_fn(xi - 2.0 * F.x(std::size_t(j)), i, prof);
      if (th == 0.0) continue;
      cplx gv = G.at(k - j + n / 2);
      if (gv == 0.0) continue;
      acc += F.v[std::size_t(j)] * gv * th;
    }
    H.v[std::size_t(k)] = acc * F.dx();
  }
  return inverse_transform(H);
}

}  // namespace tf
