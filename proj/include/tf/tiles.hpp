#pragma once

// Multitile combinatorics: the tile system and its soundness checker, order
// relations, trees and lacunary trees, size, the tree paraproduct bound,
// strong disjointness, disintegration and forest statistics.  All interval
// predicates are exact-rational; only sizes and coefficients are floating.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "tf/grids.hpp"
#include "tf/util.hpp"

namespace tf {

// I_s = [m 2^i, (m+1) 2^i], omega_{s,j} = [l_j/5 2^{-i}, (l_j/5 + 1) 2^{-i}]
// with l_2 = l_1 + e and l_3 = l_1 + l_2.
struct Multitile {
  int i = 0;
  long long m = 0;
  long long l1 = 0;
  long long e = 0;

  long long lj(int j) const {
    switch (j) {
      case 1: return l1;
      case 2: return l1 + e;
      case 3: return 2 * l1 + e;
    }
    throw ConfigError("Multitile::lj: j must be 1, 2 or 3");
  }
  DyadicInterval time() const { return DyadicInterval{i, m, Rat(0)}; }
  RatInterval time_iv() const { return time().interval(); }
  RatInterval omega(int j) const {
    Rat len = pow2r(-i);
    Rat lo = Rat(lj(j), 5) * len;
    return {lo, lo + len};
  }
  bool operator==(const Multitile& o) const {
    return i == o.i && m == o.m && l1 == o.l1 && e == o.e;
  }
  bool operator<(const Multitile& o) const {
    if (i != o.i) return i < o.i;
    if (m != o.m) return m < o.m;
    return l1 < o.l1;
  }
  // the section 7 rescaling s -> s(k)
  Multitile rescaled(int k) const { return Multitile{i + k, m, l1, e}; }
};

struct TileSystem {
  long long e = 100;
  int Delta = 1000;
  Rat c_sep = Rat(10);
  Rat c_enl = Rat(0);  // 0 means the default 10|e|
  int t = 0;           // omega scales obey (-i) mod 4 == t
  int L1 = 0;          // l1 mod 5
  std::vector<int> scales;  // admitted time scales, pairwise Delta-separated

  Rat enl() const { return c_enl == Rat(0) ? Rat(10 * std::llabs(e)) : c_enl; }

  static TileSystem desk(int Delta = 4) {
    TileSystem s;
    s.e = 24;
    s.Delta = Delta;
    s.c_sep = Rat(2);
    return s;
  }

  bool admits_scale(int i) const {
    int r = ((-i) % 4 + 4) % 4;
    return r == t;
  }
  bool admits_l1(long long l) const { return ((l % 5) + 5) % 5 == L1; }

  // scales below the given start (finer tiles sit below coarser ones in trees)
  void fill_scales(int i_top, int count) {
    int step = Delta;
    while (step % 4 != 0) ++step;  // keep the omega-grid residue fixed
    scales.clear();
    for (int n = 0; n < count; ++n) scales.push_back(i_top - n * step);
  }
};

// Throws ConfigError naming the violated constraint.  The constraints are
// the sound parameter region in which the rank lemma below provably holds:
// with scale gap at least Delta, the index-transport slack is 5 (component
// matching the order) and at most 10 (the doubled component), which forces
// both the separation and the enlargement clause as long as
//   (|e| - 12.5)(1 - 2^-Delta) > 2.5 c_sep (1 + 2^-Delta)
//   (|e| - 10) (1 - 2^-Delta) > 5  c_sep (1 + 2^-Delta)
//   c_enl >= (2|e| + 20)/5 + 2.
inline void check_system(const TileSystem& sys) {
  if (sys.Delta < 1) throw ConfigError("tile system: Delta must be >= 1");
  if (sys.e == 0) throw ConfigError("tile system: e must be nonzero");
  if (sys.t < 0 || sys.t > 3 || sys.L1 < 0 || sys.L1 > 4)
    throw ConfigError("tile system: grid residues out of range");
  Rat eps = pow2r(-std::min(sys.Delta, 60));
  Rat ae(std::llabs(sys.e));
  Rat lo = Rat(1) - eps, hi = Rat(1) + eps;
  if (!((ae - Rat(25, 2)) * lo > Rat(5, 2) * sys.c_sep * hi))
    throw ConfigError("tile system: separation constraint (doubled component) fails");
  if (!((ae - Rat(10)) * lo > Rat(5) * sys.c_sep * hi))
    throw ConfigError("tile system: separation constraint (halved component) fails");
  if (!(sys.enl() >= (Rat(2) * ae + Rat(20)) / 5 + Rat(2)))
    throw ConfigError("tile system: enlargement constant too small");
  for (std::size_t p = 0; p < sys.scales.size(); ++p) {
    if (!sys.admits_scale(sys.scales[p]))
      throw ConfigError("tile system: scale breaks the omega-grid residue");
    for (std::size_t q = 0; q < p; ++q)
      if (std::abs(sys.scales[p] - sys.scales[q]) < sys.Delta)
        throw ConfigError("tile system: scale gap below 2^Delta");
  }
}

struct CompareFlags {
  bool lt = false;             // s'_j < s_j
  bool le = false;             // s'_j <= s_j
  bool lesssim = false;        // s'_j <~ s_j
  bool lesssim_prime = false;  // s'_j <~' s_j
};

// relations of s'_j against s_j
inline CompareFlags compare(const Multitile& s, const Multitile& sp, int j,
                            const TileSystem& sys) {
  CompareFlags f;
  RatInterval I = s.time_iv(), Ip = sp.time_iv();
  RatInterval w = s.omega(j), wp = sp.omega(j);
  bool same = I == Ip && w == wp;
  f.lt = I.contains_strictly(Ip) && wp.contains_strictly(w);
  f.le = f.lt || same;
  f.lesssim = I.contains(Ip) && wp.enlarged(sys.enl()).contains(w);
  f.lesssim_prime =
      f.lesssim && !w.enlarged(sys.c_sep).overlaps(wp.enlarged(sys.c_sep));
  return f;
}

inline std::vector<Multitile> generate_multitiles(const TileSystem& sys,
                                                  const RatInterval& time_window,
                                                  const RatInterval& freq_window) {
  std::vector<Multitile> out;
  for (int i : sys.scales) {
    Rat len = pow2r(i);
    long long m0 = floor_rat(time_window.lo / len);
    long long m1 = floor_rat(time_window.hi / len);
    Rat wlen = pow2r(-i);
    // omega_1 = [l1/5, l1/5+1] 2^{-i} inside the frequency window
    long long l_lo = floor_rat(freq_window.lo / wlen * 5);
    long long l_hi = floor_rat(freq_window.hi / wlen * 5);
    for (long long m = m0; m <= m1; ++m) {
      Multitile s{i, m, 0, sys.e};
      if (!s.time_iv().overlaps(time_window)) continue;
      if (!time_window.contains(s.time_iv())) continue;
      for (long long l = l_lo; l <= l_hi; ++l) {
        if (!sys.admits_l1(l)) continue;
        s.l1 = l;
        if (!freq_window.contains(s.omega(1))) continue;
        out.push_back(s);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

struct Tree {
  int type = 1;  // i-tree
  Multitile top;
  std::vector<Multitile> members;  // may or may not include the top

  RatInterval top_time() const { return top.time_iv(); }
  double top_length() const { return to_double(top.time_iv().length()); }
};

inline Tree maximal_tree(const std::vector<Multitile>& S, const Multitile& top, int i,
                         const TileSystem& sys) {
  Tree T;
  T.type = i;
  T.top = top;
  for (const auto& s : S) {
    if (s == top) {
      T.members.push_back(s);
      continue;
    }
    if (compare(top, s, i, sys).lt) T.members.push_back(s);
  }
  return T;
}

inline bool is_tree(const Tree& T, const TileSystem& sys) {
  std::set<std::pair<int, long long>> times;
  for (const auto& s : T.members) {
    if (!(s == T.top) && !compare(T.top, s, T.type, sys).lt) return false;
    if (!times.insert({s.i, s.m}).second) return false;  // one tile per time interval
  }
  return true;
}

inline bool is_lacunary(const Tree& T, int j, const TileSystem& sys) {
  for (const auto& s : T.members)
    if (!(s == T.top) && !compare(T.top, s, j, sys).lesssim_prime) return false;
  return true;
}

using CoeffMap = std::map<Multitile, cplx>;

inline cplx coeff_of(const CoeffMap& c, const Multitile& s) {
  auto it = c.find(s);
  return it == c.end() ? cplx(0) : it->second;
}

struct SizeResult {
  double value = 0;
  std::optional<Tree> argmax;
};

// size_j(S') = sup over lacunary-type-j trees in S' (i.e. i-trees, i != j) of
// the normalized l2 coefficient mass.  Tops scan S' itself.
inline SizeResult size_of(const std::vector<Multitile>& S, int j, const CoeffMap& coeffs,
                          const TileSystem& sys) {
  SizeResult best;
  for (const auto& top : S) {
    for (int i = 1; i <= 3; ++i) {
      if (i == j) continue;
      Tree T = maximal_tree(S, top, i, sys);
      double mass = 0;
      for (const auto& s : T.members) mass += std::norm(coeff_of(coeffs, s));
      double val = std::sqrt(mass / to_double(top.time_iv().length()));
      if (val > best.value) {
        best.value = val;
        best.argmax = T;
      }
    }
  }
  return best;
}

struct ParaproductResult {
  double lhs = 0, rhs = 0, ratio = 0;
};

inline ParaproductResult tree_paraproduct(const Tree& T, const CoeffMap& c1,
                                          const CoeffMap& c2, const CoeffMap& c3,
                                          const TileSystem& sys) {
  ParaproductResult r;
  for (const auto& s : T.members) {
    double len = to_double(s.time_iv().length());
    r.lhs += std::abs(coeff_of(c1, s)) * std::abs(coeff_of(c2, s)) *
             std::abs(coeff_of(c3, s)) / std::sqrt(len);
  }
  const CoeffMap* cs[3] = {&c1, &c2, &c3};
  r.rhs = to_double(T.top.time_iv().length());
  for (int j = 1; j <= 3; ++j)
    r.rhs *= size_of(T.members, j, *cs[j - 1], sys).value;
  r.ratio = r.rhs > 0 ? r.lhs / r.rhs : (r.lhs > 0 ? 1e300 : 0.0);
  return r;
}

struct DisjointnessWitness {
  Multitile s, sp;
  const char* clause = "";
};

// strong j-disjointness of two trees (tops always included in the scan)
inline std::optional<DisjointnessWitness> strongly_disjoint_witness(
    const Tree& T, const Tree& Tp, int j, const TileSystem& /*sys*/) {
  auto with_top = [](const Tree& t) {
    std::vector<Multitile> v = t.members;
    bool has = false;
    for (const auto& s : v)
      if (s == t.top) has = true;
    if (!has) v.push_back(t.top);
    return v;
  };
  std::vector<Multitile> A = with_top(T), B = with_top(Tp);
  for (const auto& s : A) {
    for (const auto& sp : B) {
      // tile disjointness of the j-components
      if (s.time_iv().overlaps(sp.time_iv()) && s.omega(j).overlaps(sp.omega(j)))
        return DisjointnessWitness{s, sp, "tile overlap"};
      if (sp.omega(j).contains_strictly(s.omega(j)) &&
          T.top.time_iv().overlaps(sp.time_iv()))
        return DisjointnessWitness{s, sp, "nesting vs top time"};
      if (s.omega(j).contains_strictly(sp.omega(j)) &&
          Tp.top.time_iv().overlaps(s.time_iv()))
        return DisjointnessWitness{s, sp, "nesting vs top time (reversed)"};
    }
  }
  return std::nullopt;
}

inline bool strongly_disjoint(const Tree& T, const Tree& Tp, int j, const TileSystem& sys) {
  return !strongly_disjoint_witness(T, Tp, j, sys).has_value();
}

// Decompose a subset of an i-tree into i-trees containing their tops, with
// pairwise disjoint top time intervals.  Tops are the <-maximal members.
inline std::vector<Tree> disintegrate(const std::vector<Multitile>& S_T, int i,
                                      const TileSystem& sys) {
  std::vector<Multitile> tops;
  for (const auto& s : S_T) {
    bool maximal = true;
    for (const auto& o : S_T)
      if (compare(o, s, i, sys).lt) {  // s_i < o_i
        maximal = false;
        break;
      }
    if (maximal) tops.push_back(s);
  }
  std::vector<Tree> out;
  std::set<Multitile> assigned;
  for (const auto& top : tops) {
    if (assigned.count(top)) continue;  // identical components cannot recur; keys differ
    Tree T;
    T.type = i;
    T.top = top;
    for (const auto& s : S_T)
      if (s == top || compare(top, s, i, sys).lt) {
        if (!assigned.count(s)) {
          T.members.push_back(s);
          assigned.insert(s);
        }
      }
    out.push_back(T);
  }
  if (assigned.size() != std::set<Multitile>(S_T.begin(), S_T.end()).size())
    throw InvariantError("disintegrate: input not contained in an i-tree");
  for (std::size_t p = 0; p < out.size(); ++p)
    for (std::size_t q = 0; q < p; ++q)
      if (out[p].top.time_iv().overlaps(out[q].top.time_iv()))
        throw InvariantError("disintegrate: top time intervals overlap");
  return out;
}

struct ForestStats {
  std::vector<std::pair<RatInterval, long long>> counting_steps;  // N_F as a step fn
  Rat n1 = Rat(0);     // ||N_F||_1 = sum |I_T|
  long long ninf = 0;  // ||N_F||_inf
  double bmo = 0;      // sup_I |I|^{-1} sum_{I_T subset I} |I_T|, dyadic I
};

inline ForestStats forest_stats(const std::vector<Tree>& forest) {
  ForestStats st;
  std::vector<RatInterval> tops;
  for (const auto& T : forest) {
    tops.push_back(T.top_time());
    st.n1 += T.top.time_iv().length();
  }
  // step function via endpoint sweep
  std::vector<Rat> cuts;
  for (const auto& I : tops) {
    cuts.push_back(I.lo);
    cuts.push_back(I.hi);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
    RatInterval cell{cuts[p], cuts[p + 1]};
    long long cnt = 0;
    for (const auto& I : tops)
      if (I.contains(cell)) ++cnt;
    if (cnt > 0) st.counting_steps.push_back({cell, cnt});
    st.ninf = std::max(st.ninf, cnt);
  }
  // BMO over dyadic ancestors of the tops
  std::set<std::pair<int, long long>> cands;
  int smax = 0;
  for (const auto& T : forest) smax = std::max(smax, T.top.i);
  for (const auto& T : forest) {
    for (int s = T.top.i; s <= smax + 2; ++s)
      cands.insert({s, floor_rat(T.top.time_iv().lo / pow2r(s))});
  }
  for (const auto& [s, idx] : cands) {
    RatInterval I = DyadicInterval{s, idx, Rat(0)}.interval();
    Rat mass(0);
    for (const auto& iv : tops)
      if (I.contains(iv)) mass += iv.length();
    double val = to_double(mass / I.length());
    st.bmo = std::max(st.bmo, val);
  }
  return st;
}

}  // namespace tf
