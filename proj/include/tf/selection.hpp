#pragma once

// Tree selection: the greedy forest decompositions behind the Bessel
// inequalities, the single-tree estimate with its boundary interval family,
// the global two-stage decomposition with its exceptional sets and ledgers,
// and the fixed-scale Gram / Schur orthogonality check.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <set>
#include <vector>

#include "tf/bilinear.hpp"
#include "tf/signals.hpp"
#include "tf/tiles.hpp"
#include "tf/wavepackets.hpp"

namespace tf {

// ---------------------------------------------------------------------------
// Greedy forest selection

struct ForestSelection {
  std::vector<Tree> forest;
  std::vector<Multitile> remainder;
  double final_size = 0;
};

namespace detail {

// membership lists: for each candidate top and tree type, the indices of
// multitiles sitting below it (the top itself included)
struct TreeIndex {
  std::array<std::vector<std::vector<int>>, 3> members;

  TreeIndex(const std::vector<Multitile>& S, const TileSystem& sys) {
    int n = (int)S.size();
    for (int i = 0; i < 3; ++i) members[std::size_t(i)].resize(std::size_t(n));
    for (int t = 0; t < n; ++t)
      for (int s = 0; s < n; ++s)
        for (int i = 1; i <= 3; ++i)
          if (s == t || compare(S[std::size_t(t)], S[std::size_t(s)], i, sys).lt)
            members[std::size_t(i - 1)][std::size_t(t)].push_back(s);
  }
};

}  // namespace detail

// Remove maximal trees until size_j of what is left drops to the threshold.
// Among trees exceeding it, the selected top has the lowest j-component
// frequency center, ties broken by leftmost time interval, then smallest
// scale, then tree type; for the chosen top the maximal i-trees of every
// type i != j are removed together as one forest member.
inline ForestSelection select_forest(const std::vector<Multitile>& S, int j,
                                     const CoeffMap& coeffs, double threshold,
                                     const TileSystem& sys) {
  ForestSelection out;
  int n = (int)S.size();
  if (n == 0) return out;
  detail::TreeIndex idx(S, sys);
  std::vector<char> alive(std::size_t(n), 1);
  std::vector<double> w((std::size_t)n);
  for (int s = 0; s < n; ++s) w[std::size_t(s)] = std::norm(coeff_of(coeffs, S[std::size_t(s)]));
  for (;;) {
    int best_top = -1, best_type = -1;
    for (int t = 0; t < n; ++t) {
      if (!alive[std::size_t(t)]) continue;
      const Multitile& top = S[std::size_t(t)];
      double invlen = 1.0 / to_double(top.time_iv().length());
      for (int i = 1; i <= 3; ++i) {
        if (i == j) continue;
        double mass = 0;
        for (int s : idx.members[std::size_t(i - 1)][std::size_t(t)])
          if (alive[std::size_t(s)]) mass += w[std::size_t(s)];
        double val = std::sqrt(mass * invlen);
        if (val <= threshold || val <= 0) continue;
        bool take = false;
        if (best_top < 0) {
          take = true;
        } else {
          const Multitile& bt = S[std::size_t(best_top)];
          Rat c = S[std::size_t(t)].omega(j).center(), bc = bt.omega(j).center();
          if (c != bc)
            take = c < bc;
          else if (top.time_iv().lo != bt.time_iv().lo)
            take = top.time_iv().lo < bt.time_iv().lo;
          else if (top.i != bt.i)
            take = top.i < bt.i;
          else
            take = i < best_type;
        }
        if (take) {
          best_top = t;
          best_type = i;
        }
      }
    }
    if (best_top < 0) break;
    Tree T;
    T.type = best_type;
    T.top = S[std::size_t(best_top)];
    for (int i = 1; i <= 3; ++i) {
      if (i == j) continue;
      for (int s : idx.members[std::size_t(i - 1)][std::size_t(best_top)])
        if (alive[std::size_t(s)]) {
          T.members.push_back(S[std::size_t(s)]);
          alive[std::size_t(s)] = 0;
        }
    }
    out.forest.push_back(std::move(T));
  }
  for (int s = 0; s < n; ++s)
    if (alive[std::size_t(s)]) out.remainder.push_back(S[std::size_t(s)]);
  out.final_size = size_of(out.remainder, j, coeffs, sys).value;
  return out;
}

struct BesselResult {
  double sigma = 0;
  std::vector<Multitile> remainder;
  std::vector<Tree> forest;
  double remainder_size = 0;
  double sum_tops = 0;    // sum |I_T| over the forest
  double coeff_mass = 0;  // sum |c_s|^2 over the input
  double ratio = 0;       // sum_tops * sigma^2 / coeff_mass
};

inline BesselResult bessel_decompose(const std::vector<Multitile>& S, int j,
                                     const CoeffMap& coeffs, const TileSystem& sys) {
  BesselResult res;
  res.sigma = size_of(S, j, coeffs, sys).value;
  ForestSelection sel = select_forest(S, j, coeffs, res.sigma / 2, sys);
  res.remainder = std::move(sel.remainder);
  res.forest = std::move(sel.forest);
  res.remainder_size = sel.final_size;
  for (const auto& T : res.forest) res.sum_tops += T.top_length();
  for (const auto& s : S) res.coeff_mass += std::norm(coeff_of(coeffs, s));
  res.ratio = res.coeff_mass > 0
                  ? res.sum_tops * res.sigma * res.sigma / res.coeff_mass
                  : 0.0;
  return res;
}

struct MaxBesselResult {
  BesselResult base;
  double sum_tops = 0;
  double bound_quarter = 0, bound_half = 0;  // J^{1/8} sigma^{-2} (sigma |E|^{1/2})^{-eps}
  double ratio_quarter = 0, ratio_half = 0;
};

// 3-size selection with coefficients <h h_{j(s)}, psi_{s,3}>
inline MaxBesselResult maximal_bessel_decompose(const std::vector<Multitile>& S,
                                                const SampledFunction& h,
                                                const StoppingData& sd,
                                                double E_measure,
                                                const TileSystem& sys) {
  sd.validate(h.n());
  if (sd.h.empty()) throw ConfigError("maximal_bessel_decompose: weights required");
  CoeffMap coeffs;
  for (const auto& s : S) {
    int blk = sd.block_of_scale(s.i);
    if (blk < 0) throw ConfigError("maximal_bessel_decompose: tile scale outside blocks");
    Packet p3 = make_packet(s.i, s.m, s.lj(3), h.a, h.b);
    SampledFunction Hs = h;
    for (std::size_t t = 0; t < Hs.n(); ++t) Hs.v[t] *= sd.h[std::size_t(blk)].v[t];
    coeffs[s] = inner(Hs, p3.space);
  }
  MaxBesselResult res;
  res.base = bessel_decompose(S, 3, coeffs, sys);
  res.sum_tops = res.base.sum_tops;
  double J = double(sd.u.size());
  double sig = res.base.sigma;
  if (sig > 0) {
    double scale = std::pow(J, 0.125) / (sig * sig);
    res.bound_quarter = scale * std::pow(sig * std::sqrt(E_measure), -0.25);
    res.bound_half = scale * std::pow(sig * std::sqrt(E_measure), -0.5);
    res.ratio_quarter = res.sum_tops / res.bound_quarter;
    res.ratio_half = res.sum_tops / res.bound_half;
  }
  return res;
}

// ---------------------------------------------------------------------------
// Single tree estimate

// dyadic I with I_s subset I subset I_{s'} for members s, s'
inline std::vector<DyadicInterval> time_convexification(const Tree& T) {
  std::vector<Multitile> mem = T.members;
  bool has_top = false;
  for (const auto& s : mem)
    if (s == T.top) has_top = true;
  if (!has_top) mem.push_back(T.top);
  int imax = mem[0].i;
  for (const auto& s : mem) imax = std::max(imax, s.i);
  std::set<std::pair<int, long long>> found;
  for (const auto& s : mem) {
    long long idx = s.m;
    for (int t = s.i; t <= imax; ++t) {
      bool inside = false;
      for (const auto& sp : mem) {
        if (sp.i < t) continue;
        long long anc = idx;
        int sh = sp.i - t;
        // arithmetic floor shift
        for (int q = 0; q < sh; ++q) anc = (anc >= 0 ? anc / 2 : (anc - 1) / 2);
        if (anc == sp.m) {
          inside = true;
          break;
        }
      }
      if (inside) found.insert({t, idx});
      idx = (idx >= 0 ? idx / 2 : (idx - 1) / 2);
    }
  }
  std::vector<DyadicInterval> out;
  for (const auto& [t, m] : found) out.push_back(DyadicInterval{t, m, Rat(0)});
  return out;
}

// Dyadic J meeting 2 I_T, whose triple contains no strictly smaller member of
// the convexification, and with one of its seven same-length neighbors (J
// itself included) in the convexification.
inline std::vector<DyadicInterval> boundary_family(const Tree& T,
                                                  const std::vector<DyadicInterval>& PT) {
  std::set<std::pair<int, long long>> pt;
  int tmin = T.top.i, tmax = T.top.i;
  for (const auto& I : PT) {
    pt.insert({I.scale, I.index});
    tmin = std::min(tmin, I.scale);
    tmax = std::max(tmax, I.scale);
  }
  RatInterval twoIT = T.top_time().enlarged(Rat(2));
  std::vector<DyadicInterval> out;
  for (int t = tmin; t <= tmax; ++t) {
    Rat len = pow2r(t);
    long long j0 = floor_rat(twoIT.lo / len) - 1;
    long long j1 = floor_rat(twoIT.hi / len) + 1;
    for (long long m = j0; m <= j1; ++m) {
      DyadicInterval J{t, m, Rat(0)};
      RatInterval Jiv = J.interval();
      if (Jiv.hi < twoIT.lo || Jiv.lo > twoIT.hi) continue;  // (a), closed overlap
      RatInterval threeJ = Jiv.enlarged(Rat(3));
      bool blocked = false;
      for (const auto& I : PT)
        if (I.scale < t && threeJ.contains(I.interval())) {
          blocked = true;
          break;
        }
      if (blocked) continue;  // (b)
      bool neighbor = false;
      for (long long d = -3; d <= 3 && !neighbor; ++d)
        if (pt.count({t, m + d})) neighbor = true;
      if (!neighbor) continue;  // (c)
      out.push_back(J);
    }
  }
  return out;
}

inline bool intervals_cover(std::vector<RatInterval> parts, const RatInterval& target) {
  if (parts.empty()) return !(target.lo < target.hi);
  std::sort(parts.begin(), parts.end(),
            [](const RatInterval& A, const RatInterval& B) { return A.lo < B.lo; });
  Rat reach = target.lo;
  for (const auto& I : parts) {
    if (I.lo > reach) return false;
    if (I.hi > reach) reach = I.hi;
    if (reach >= target.hi) return true;
  }
  return reach >= target.hi;
}

struct SingleTreeResult {
  double lhs = 0, rhs = 0, ratio = 0;
  std::vector<DyadicInterval> convexification;
  std::vector<DyadicInterval> boundary;
  bool covers = false;  // union of the boundary family contains 2 I_T
};

inline SingleTreeResult single_tree_check(const Tree& T, const IntervalSet& E,
                                          const SampledFunction& h,
                                          const StoppingData& sd,
                                          const TileSystem& sys) {
  if (!is_lacunary(T, 3, sys))
    throw ConfigError("single_tree_check: tree is not 3-lacunary");
  sd.validate(h.n());
  if (sd.h.empty()) throw ConfigError("single_tree_check: weights required");
  SingleTreeResult res;
  double mass = 0;
  for (const auto& s : T.members) {
    int blk = sd.block_of_scale(s.i);
    if (blk < 0) throw ConfigError("single_tree_check: tile scale outside blocks");
    Packet p3 = make_packet(s.i, s.m, s.lj(3), h.a, h.b);
    SampledFunction Hs = h;
    for (std::size_t t = 0; t < Hs.n(); ++t) Hs.v[t] *= sd.h[std::size_t(blk)].v[t];
    mass += std::norm(inner(Hs, p3.space));
  }
  res.lhs = std::sqrt(mass / T.top_length());
  res.convexification = time_convexification(T);
  for (const auto& I : res.convexification) {
    double acc = 0;
    for (std::size_t t = 0; t < h.n(); ++t) {
      double x = h.x(t);
      if (E.contains(x)) acc += chi_weight(I.interval(), x, 2);
    }
    acc *= h.dx() / to_double(I.length());
    res.rhs = std::max(res.rhs, acc);
  }
  res.boundary = boundary_family(T, res.convexification);
  std::vector<RatInterval> parts;
  for (const auto& J : res.boundary) parts.push_back(J.interval());
  res.covers = intervals_cover(parts, T.top_time().enlarged(Rat(2)));
  res.ratio = res.rhs > 0 ? res.lhs / res.rhs : (res.lhs > 0 ? 1e300 : 0.0);
  return res;
}

// ---------------------------------------------------------------------------
// Global decomposition

struct LevelInfo {
  int n = 0;
  std::vector<Tree> forest;
  std::size_t tiles = 0;
  double sum_tops = 0;
};

struct DecompositionReport {
  int Gamma = 0;
  std::vector<LevelInfo> levels;  // first stage, drives the 1- and 2-sizes down
  std::vector<Multitile> Sprime, Sdprime;
  std::vector<RatInterval> E;  // merged enlarged tops, levels Gamma..0
  double E_measure = 0;
  double E_measure_bound = 0;  // sum over levels of 2^{-n} sum |I_T|
  double V_measure = 0;
  std::vector<LevelInfo> levels3;  // second stage on the n > 0 part
  double ledger_final = 0;         // sum_m 2^{-3m} sum |I_T|
  std::vector<std::pair<double, double>> weak_l1;  // (lambda, lambda * measure)
};

inline std::vector<RatInterval> merge_intervals(std::vector<RatInterval> parts) {
  std::sort(parts.begin(), parts.end(),
            [](const RatInterval& A, const RatInterval& B) { return A.lo < B.lo; });
  std::vector<RatInterval> out;
  for (const auto& I : parts) {
    if (!out.empty() && I.lo <= out.back().hi)
      out.back().hi = std::max(out.back().hi, I.hi, std::less<Rat>());
    else
      out.push_back(I);
  }
  return out;
}

inline DecompositionReport full_decomposition(const std::vector<Multitile>& S,
                                              const SampledFunction& f,
                                              const SampledFunction& g,
                                              const std::vector<long long>& u,
                                              const TileSystem& sys,
                                              double v_thresh = 1.0, int n_max = 20) {
  f.check_same(g);
  DecompositionReport rep;
  if (S.empty()) return rep;
  CoeffMap cf, cg;
  for (const auto& s : S) {
    cf[s] = inner(f, make_packet(s.i, s.m, s.lj(1), f.a, f.b).space);
    cg[s] = inner(g, make_packet(s.i, s.m, s.lj(2), f.a, f.b).space);
  }
  double s1 = size_of(S, 1, cf, sys).value;
  double s2 = size_of(S, 2, cg, sys).value;
  double smax = std::max(s1, s2);
  if (smax <= 0) return rep;
  rep.Gamma = (int)std::floor(-std::log2(smax));
  std::vector<Multitile> rem = S;
  std::vector<RatInterval> eparts;
  for (int n = rep.Gamma; n <= n_max && !rem.empty(); ++n) {
    double thr = std::ldexp(1.0, -n - 1);
    ForestSelection f1 = select_forest(rem, 1, cf, thr, sys);
    ForestSelection f2 = select_forest(f1.remainder, 2, cg, thr, sys);
    LevelInfo lvl;
    lvl.n = n;
    lvl.forest = f1.forest;
    lvl.forest.insert(lvl.forest.end(), f2.forest.begin(), f2.forest.end());
    std::vector<Multitile> removed;
    for (const auto& T : lvl.forest)
      removed.insert(removed.end(), T.members.begin(), T.members.end());
    lvl.tiles = removed.size();
    for (const auto& T : lvl.forest) lvl.sum_tops += T.top_length();
    auto& bucket = (n <= 0) ? rep.Sprime : rep.Sdprime;
    bucket.insert(bucket.end(), removed.begin(), removed.end());
    if (n <= 0)
      for (const auto& T : lvl.forest) {
        eparts.push_back(T.top_time().enlarged(pow2r(-n)));
        rep.E_measure_bound += std::ldexp(T.top_length(), -n);
      }
    if (!lvl.forest.empty() || n == rep.Gamma) rep.levels.push_back(std::move(lvl));
    rem = std::move(f2.remainder);
  }
  // anything left after n_max is below every threshold; keep it in S''
  rep.Sdprime.insert(rep.Sdprime.end(), rem.begin(), rem.end());
  rep.E = merge_intervals(std::move(eparts));
  for (const auto& I : rep.E) rep.E_measure += to_double(I.length());

  StoppingData sd = uniform_stopping(u, f.n());
  ModelSumResult full = model_sum(S, f, g, sd);
  for (double lam : {0.0625, 0.125, 0.25, 0.5, 1.0, 2.0}) {
    long long cnt = 0;
    for (const auto& z : full.M.v)
      if (z.real() > lam) ++cnt;
    rep.weak_l1.push_back({lam, lam * double(cnt) * f.dx()});
  }

  if (rep.Sdprime.empty()) return rep;
  ModelSumResult mpp = model_sum(rep.Sdprime, f, g, sd);
  // weights realizing the square function: h_j = conj(F_j)/M where M > 0
  std::vector<SampledFunction> hw(sd.blocks(), SampledFunction(f.a, f.b));
  for (std::size_t t = 0; t < f.n(); ++t) {
    double m = mpp.M.v[t].real();
    if (m > 0)
      for (std::size_t j = 0; j < hw.size(); ++j)
        hw[j].v[t] = std::conj(mpp.blocks[j].v[t]) / m;
    else
      hw[0].v[t] = 1.0;
  }
  std::vector<char> inV(f.n(), 0);
  long long vcnt = 0;
  for (std::size_t t = 0; t < f.n(); ++t)
    if (mpp.M.v[t].real() >= v_thresh) {
      inV[t] = 1;
      ++vcnt;
    }
  rep.V_measure = double(vcnt) * f.dx();
  if (vcnt == 0) return rep;
  double amp = 1.0 / std::sqrt(rep.V_measure);
  CoeffMap c3;
  for (const auto& s : rep.Sdprime) {
    int blk = sd.block_of_scale(s.i);
    if (blk < 0) continue;
    Packet p3 = make_packet(s.i, s.m, s.lj(3), f.a, f.b);
    cplx acc = 0;
    for (std::size_t t = 0; t < f.n(); ++t)
      if (inV[t]) acc += amp * hw[std::size_t(blk)].v[t] * std::conj(p3.space.v[t]);
    c3[s] = acc * f.dx();
  }
  std::vector<Multitile> rem3 = rep.Sdprime;
  for (int m = 0; m <= n_max && !rem3.empty(); ++m) {
    double thr = std::ldexp(1.0, -m - 1);
    ForestSelection f1 = select_forest(rem3, 1, cf, thr, sys);
    ForestSelection f2 = select_forest(f1.remainder, 2, cg, thr, sys);
    ForestSelection f3 = select_forest(f2.remainder, 3, c3, thr, sys);
    LevelInfo lvl;
    lvl.n = m;
    lvl.forest = f1.forest;
    lvl.forest.insert(lvl.forest.end(), f2.forest.begin(), f2.forest.end());
    lvl.forest.insert(lvl.forest.end(), f3.forest.begin(), f3.forest.end());
    for (const auto& T : lvl.forest) {
      lvl.tiles += T.members.size();
      lvl.sum_tops += T.top_length();
    }
    rep.ledger_final += std::ldexp(lvl.sum_tops, -3 * m);
    if (!lvl.forest.empty() || m == 0) rep.levels3.push_back(std::move(lvl));
    rem3 = std::move(f3.remainder);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Fixed-scale orthogonality

struct GramResult {
  double quad_norm = 0;    // ||sum a_s psi_{s,3}||_2^2
  double coeff_mass = 0;   // sum |a_s|^2
  double ratio = 0;
  double schur_bound = 0;  // max absolute Gram row sum over the omega classes
  double decay_exponent = 0;  // fitted from off-diagonal entries
  double decay_constant = 0;  // max |G| (1 + dist/2^k)^{10}
};

inline GramResult fixed_scale_gram(const std::vector<Multitile>& S, int k,
                                   const std::vector<cplx>& a_s, int ra, int rb) {
  if (S.size() != a_s.size()) throw ConfigError("fixed_scale_gram: size mismatch");
  for (const auto& s : S)
    if (s.i != k) throw ConfigError("fixed_scale_gram: mixed scales");
  GramResult res;
  if (S.empty()) return res;
  std::vector<SampledFunction> psi;
  for (const auto& s : S) psi.push_back(make_packet(s.i, s.m, s.lj(3), ra, rb).space);
  SampledFunction total(ra, rb);
  for (std::size_t p = 0; p < S.size(); ++p) {
    for (std::size_t t = 0; t < total.n(); ++t) total.v[t] += a_s[p] * psi[p].v[t];
    res.coeff_mass += std::norm(a_s[p]);
  }
  double q = total.norm2();
  res.quad_norm = q * q;
  res.ratio = res.coeff_mass > 0 ? res.quad_norm / res.coeff_mass : 0.0;
  std::vector<double> lx, ly;
  for (std::size_t p = 0; p < S.size(); ++p) {
    double row = 0;
    for (std::size_t qi = 0; qi < S.size(); ++qi) {
      if (S[p].lj(3) != S[qi].lj(3)) continue;  // distinct omega classes: exactly disjoint
      double gpq = std::abs(inner(psi[p], psi[qi]));
      row += gpq;
      if (p != qi && gpq > 1e-14) {
        double dist = to_double(S[p].time_iv().dist(S[qi].time_iv()));
        double grow = 1.0 + std::ldexp(dist, -k);
        lx.push_back(grow);
        ly.push_back(gpq);
        res.decay_constant = std::max(res.decay_constant, gpq * std::pow(grow, 10.0));
      }
    }
    res.schur_bound = std::max(res.schur_bound, row);
  }
  if (lx.size() >= 2 &&
      *std::max_element(lx.begin(), lx.end()) > *std::min_element(lx.begin(), lx.end()))
    res.decay_exponent = -fit_log_slope(lx, ly);
  return res;
}

}  // namespace tf
