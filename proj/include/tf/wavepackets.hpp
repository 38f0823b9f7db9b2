#pragma once

// The window with Fourier support [0, 2/5], Gabor packets on fifth-shifted
// frequency intervals, exact discrete analysis/synthesis, bilinear packets
// built through the theta_i multiplier, and the truncation-by-multiplier
// representation used for lacunary trees.

#include <map>
#include <utility>
#include <vector>

#include "tf/kernels.hpp"
#include "tf/signals.hpp"

namespace tf {

// |psi^|^2 is a smooth partition-of-unity member under fifth shifts:
// sin/cos profiles glued through a symmetric C-infinity step S with
// S(t) + S(1-t) = 1, so consecutive shifts add squares to exactly 1.
inline double window_hat(double xi) {
  if (xi <= 0.0 || xi >= 0.4) return 0.0;
  if (xi <= 0.2) return std::sin(0.5 * pi * smooth_step(5.0 * xi));
  return std::cos(0.5 * pi * smooth_step(5.0 * xi - 1.0));
}

struct Window {
  SampledFunction psi;      // space samples
  SampledFunction psi_hat;  // dual grid samples
};

inline Window make_window(int a = 5, int b = 8) {
  Window w;
  w.psi_hat = SampledFunction::from(b - 1, a + 1, [](double xi) { return window_hat(xi); });
  w.psi = inverse_transform(w.psi_hat);
  return w;
}

// psi^_{i,m,l/5}(xi) = 2^{i/2} psi^(2^i xi - l/5) e^{-2 pi i m (2^i xi - l/5)}
inline cplx packet_hat_value(int i, long long m, long long l, double xi) {
  double u = std::ldexp(xi, i) - double(l) / 5.0;
  double w = window_hat(u);
  if (w == 0.0) return 0.0;
  return std::pow(2.0, 0.5 * i) * w * std::polar(1.0, -2.0 * pi * double(m) * u);
}

struct Packet {
  int i = 0;
  long long m = 0, l = 0;  // frequency shift l/5
  SampledFunction hat;     // on the dual grid of (a,b)
  SampledFunction space;
};

inline Packet make_packet(int i, long long m, long long l, int a = 5, int b = 8) {
  if (i > a || i < -b + 2) throw ConfigError("make_packet: scale out of band");
  Packet p;
  p.i = i;
  p.m = m;
  p.l = l;
  p.hat = SampledFunction::from(
      b - 1, a + 1, [&](double xi) { return packet_hat_value(i, m, l, xi); });
  p.space = inverse_transform(p.hat);
  return p;
}

using PacketCoeffs = std::map<std::pair<long long, long long>, cplx>;  // (m,l)

// Coefficients <f, psi_{i,m,l/5}> for m over one spatial period and all l
// resolvable on the grid.  With m running over a complete residue system
// mod 2^{a+1-i} the expansion below is an exact discrete frame.
inline PacketCoeffs analyze(const SampledFunction& f, int i) {
  if (i > f.a || i < -f.b + 2) throw ConfigError("analyze: scale out of band");
  SampledFunction F = transform(f);
  double dxi = F.dx();
  long long mspan = 1LL << (f.a - i);
  double xmax = F.half();
  // support of psi^(2^i xi - l/5) is xi in [l/5, l/5 + 2/5] * 2^{-i}
  long long lmin = (long long)std::floor(-5.0 * xmax * std::ldexp(1.0, i)) - 2;
  long long lmax = (long long)std::ceil(5.0 * xmax * std::ldexp(1.0, i));
  PacketCoeffs out;
  for (long long l = lmin; l <= lmax; ++l) {
    double xi_lo = (double(l) / 5.0) * std::ldexp(1.0, -i);
    double xi_hi = (double(l) / 5.0 + 0.4) * std::ldexp(1.0, -i);
    long long j0 = std::max<long long>(0, (long long)std::floor((xi_lo + xmax) / dxi));
    long long j1 = std::min<long long>((long long)F.n() - 1,
                                       (long long)std::ceil((xi_hi + xmax) / dxi));
    if (j0 > j1) continue;
    for (long long m = -mspan; m < mspan; ++m) {
      cplx c = 0;
      for (long long j = j0; j <= j1; ++j) {
        cplx w = packet_hat_value(i, m, l, F.x(std::size_t(j)));
        if (w != 0.0) c += F.v[std::size_t(j)] * std::conj(w);
      }
      c *= dxi;
      if (std::abs(c) > 0) out[{m, l}] = c;
    }
  }
  return out;
}

inline SampledFunction synthesize(const PacketCoeffs& coeffs, int i, int a = 5, int b = 8) {
  SampledFunction G(b - 1, a + 1);
  double dxi = G.dx();
  double xmax = G.half();
  for (const auto& [ml, c] : coeffs) {
    auto [m, l] = ml;
    double xi_lo = (double(l) / 5.0) * std::ldexp(1.0, -i);
    double xi_hi = (double(l) / 5.0 + 0.4) * std::ldexp(1.0, -i);
    long long j0 = std::max<long long>(0, (long long)std::floor((xi_lo + xmax) / dxi));
    long long j1 = std::min<long long>((long long)G.n() - 1,
                                       (long long)std::ceil((xi_hi + xmax) / dxi));
    for (long long j = j0; j <= j1; ++j)
      G.v[std::size_t(j)] += c * packet_hat_value(i, m, l, G.x(std::size_t(j)));
  }
  return inverse_transform(G);
}

// ---------------------------------------------------------------------------
// Bilinear packets

struct BilinearPacket {
  int i = 0;
  long long m1 = 0, m2 = 0, l1 = 0, l2 = 0, l3 = 0;
  SampledFunction hat;
  SampledFunction space;
  double norm2 = 0;
  double external_energy_rel = 0;  // share of ||hat||^2 outside the l3 interval
};

// phi^(xi) = 2^{i/2} int psi^_1(eta) psi^_2(xi - eta) theta_i(xi - 2 eta) d eta
inline BilinearPacket make_bilinear_packet(int i, long long m1, long long m2,
                                           long long l1, long long l2,
                                           const ThetaProfile& prof = {}, int a = 5,
                                           int b = 8) {
  BilinearPacket p;
  p.i = i;
  p.m1 = m1;
  p.m2 = m2;
  p.l1 = l1;
  p.l2 = l2;
  p.l3 = l1 + l2;
  p.hat = SampledFunction(b - 1, a + 1);
  double dxi = p.hat.dx();
  double xmax = p.hat.half();
  double sc = std::ldexp(1.0, -i);
  // eta runs over the support of psi^_1
  double eta_lo = (double(l1) / 5.0) * sc, eta_hi = (double(l1) / 5.0 + 0.4) * sc;
  long long e0 = std::max<long long>(0, (long long)std::floor((eta_lo + xmax) / dxi));
  long long e1 = std::min<long long>((long long)p.hat.n() - 1,
                                     (long long)std::ceil((eta_hi + xmax) / dxi));
  // xi is confined to the sum of the two supports
  double xi_lo = (double(p.l3) / 5.0) * sc, xi_hi = (double(p.l3) / 5.0 + 0.8) * sc;
  long long k0 = std::max<long long>(0, (long long)std::floor((xi_lo + xmax) / dxi));
  long long k1 = std::min<long long>((long long)p.hat.n() - 1,
                                     (long long)std::ceil((xi_hi + xmax) / dxi));
  double amp = std::pow(2.0, 0.5 * i);
  for (long long k = k0; k <= k1; ++k) {
    double xi = p.hat.x(std::size_t(k));
    cplx acc = 0;
    for (long long j = e0; j <= e1; ++j) {
      double eta = p.hat.x(std::size_t(j));
      cplx w1 = packet_hat_value(i, m1, l1, eta);
      if (w1 == 0.0) continue;
      cplx w2 = packet_hat_value(i, m2, l2, xi - eta);
      if (w2 == 0.0) continue;
      double th = theta_i_fn(xi - 2.0 * eta, i, prof);
      if (th == 0.0) continue;
      acc += w1 * w2 * th;
    }
    p.hat.v[std::size_t(k)] = amp * acc * dxi;
  }
  double total = 0, outside = 0;
  double box_lo = (double(p.l3) / 5.0) * sc, box_hi = (double(p.l3) / 5.0 + 1.0) * sc;
  for (std::size_t j = 0; j < p.hat.n(); ++j) {
    double en = std::norm(p.hat.v[j]);
    total += en;
    double xi = p.hat.x(j);
    if (xi < box_lo || xi > box_hi) outside += en;
  }
  p.norm2 = std::sqrt(total * dxi);
  p.external_energy_rel = total > 0 ? outside / total : 0.0;
  p.space = inverse_transform(p.hat);
  return p;
}

// ---------------------------------------------------------------------------
// Multiplier representation of the upper part of a lacunary tree

struct ZetaProfile {
  double z1 = 0, z2 = 0;  // flat until z1, zero beyond z2

  static ZetaProfile from_e(long long e) { return {100.0 * std::abs(double(e)), 200.0 * std::abs(double(e))}; }
};

inline double zeta_fn(double t, const ZetaProfile& p) {
  return rc_taper((std::abs(t) - p.z1) / (p.z2 - p.z1));
}

struct TreeProjectionItem {
  int scale = 0;  // scale of I_s
  cplx coeff = 0;
  const SampledFunction* hat = nullptr;  // packet symbol on the dual grid
};

struct TreeProjectionResult {
  SampledFunction direct;      // sum over |I_s| >= 2^k only
  SampledFunction multiplier;  // zeta-truncated full sum
  double rel_error = 0;
};

// Sum over packets with scale >= k realized as a frequency multiplier
// zeta(2^k (xi - top_freq_center)) applied to the full sum.  Before asserting
// the identity we check the exact per-packet support conditions: kept packets
// must sit in the flat region of zeta and dropped ones outside its support;
// otherwise the configured zeta window cannot represent the truncation.
inline TreeProjectionResult tree_projection(const std::vector<TreeProjectionItem>& items,
                                            int k, double top_freq_center,
                                            const ZetaProfile& zp) {
  if (items.empty()) throw ConfigError("tree_projection: empty tree");
  const SampledFunction& proto = *items[0].hat;
  SampledFunction full(proto.a, proto.b), direct(proto.a, proto.b);
  for (const auto& it : items) {
    proto.check_same(*it.hat);
    double arg_lo = 1e300, arg_hi = -1e300;
    for (std::size_t j = 0; j < proto.n(); ++j) {
      cplx w = it.coeff * it.hat->v[j];
      full.v[j] += w;
      if (it.scale >= k) direct.v[j] += w;
      if (std::abs(it.hat->v[j]) > 1e-14) {
        double t = std::ldexp(proto.x(j) - top_freq_center, k);
        arg_lo = std::min(arg_lo, t);
        arg_hi = std::max(arg_hi, t);
      }
    }
    double extent = std::max(std::abs(arg_lo), std::abs(arg_hi));
    if (it.scale >= k && extent > zp.z1)
      throw InvariantError("tree_projection: kept packet leaves the flat zeta region");
    if (it.scale < k && arg_lo < zp.z2 && arg_hi > -zp.z2)
      throw InvariantError("tree_projection: dropped packet meets the zeta support");
  }
  TreeProjectionResult res;
  SampledFunction mult(proto.a, proto.b);
  for (std::size_t j = 0; j < proto.n(); ++j)
    mult.v[j] = full.v[j] * zeta_fn(std::ldexp(proto.x(j) - top_freq_center, k), zp);
  res.direct = inverse_transform(direct);
  res.multiplier = inverse_transform(mult);
  double num = 0, den = 0;
  for (std::size_t j = 0; j < res.direct.n(); ++j) {
    num += std::norm(res.direct.v[j] - res.multiplier.v[j]);
    den += std::norm(res.direct.v[j]);
  }
  res.rel_error = den > 0 ? std::sqrt(num / den) : std::sqrt(num);
  return res;
}

}  // namespace tf
