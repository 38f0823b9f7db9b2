#pragma once

// Dyadic and shifted-dyadic interval arithmetic.  All interval predicates are
// exact: endpoints are rationals of the form 2^scale * (index + offset) with a
// small rational offset, and containment/overlap tests never touch floating
// point.  Floating point appears only in the analytic weight chi_weight.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <boost/rational.hpp>

#include "tf/util.hpp"

namespace tf {

using Rat = boost::rational<long long>;

inline Rat pow2r(int s) {
  if (s >= 0) return Rat(1LL << s, 1);
  return Rat(1, 1LL << (-s));
}

inline long long floor_rat(const Rat& r) {
  long long n = r.numerator(), d = r.denominator();  // d > 0
  if (n >= 0) return n / d;
  return -((-n + d - 1) / d);
}

inline double to_double(const Rat& r) {
  return static_cast<double>(r.numerator()) / static_cast<double>(r.denominator());
}

struct RatInterval {
  Rat lo, hi;

  Rat length() const { return hi - lo; }
  Rat center() const { return (lo + hi) / 2; }
  bool contains(const RatInterval& o) const { return lo <= o.lo && o.hi <= hi; }
  bool contains_strictly(const RatInterval& o) const {
    return contains(o) && !(lo == o.lo && hi == o.hi);
  }
  bool contains_point(const Rat& x) const { return lo <= x && x < hi; }
  // overlap with positive measure
  bool overlaps(const RatInterval& o) const { return lo < o.hi && o.lo < hi; }
  bool operator==(const RatInterval& o) const { return lo == o.lo && hi == o.hi; }
  bool operator<(const RatInterval& o) const {
    return lo < o.lo || (lo == o.lo && hi < o.hi);
  }
  // same center, c times the length
  RatInterval enlarged(const Rat& c) const {
    Rat half = c * length() / 2;
    Rat mid = center();
    return {mid - half, mid + half};
  }
  Rat dist(const RatInterval& o) const {
    if (overlaps(o)) return Rat(0);
    if (hi <= o.lo) return o.lo - hi;
    return lo - o.hi;
  }
};

// Interval 2^scale * (index + offset, index + 1 + offset) with offset in [0,1).
struct DyadicInterval {
  int scale = 0;
  long long index = 0;
  Rat offset = Rat(0);

  Rat left() const { return pow2r(scale) * (Rat(index) + offset); }
  Rat right() const { return pow2r(scale) * (Rat(index + 1) + offset); }
  Rat length() const { return pow2r(scale); }
  Rat center() const { return pow2r(scale) * (Rat(2 * index + 1, 2) + offset); }
  RatInterval interval() const { return {left(), right()}; }

  bool operator==(const DyadicInterval& o) const {
    return scale == o.scale && index == o.index && offset == o.offset;
  }
  bool operator<(const DyadicInterval& o) const {
    if (scale != o.scale) return scale < o.scale;
    if (index != o.index) return index < o.index;
    return offset < o.offset;
  }
};

// chi_I(x)^M with chi_I(x) = (1 + (x-c(I))^2/|I|^2)^(-1/2)
inline double chi_weight(const RatInterval& I, double x, double M) {
  if (M < 0) throw ConfigError("chi_weight: exponent must be >= 0");
  double c = to_double(I.center());
  double len = to_double(I.length());
  double t = (x - c) / len;
  return std::pow(1.0 + t * t, -0.5 * M);
}

enum class GridKind {
  Standard,  // S: all scales, offset 0
  Shifted,   // D_d, d in {0,1,2}: all scales, alternating third-shifts
  Gntl       // G_{N,t,L}: scales == t (mod N-1), offset L/N
};

struct Grid {
  GridKind kind = GridKind::Standard;
  int d = 0;             // Shifted
  int N = 3, t = 0, L = 0;  // Gntl

  static Grid standard() { return Grid{}; }

  static Grid shifted(int d) {
    if (d < 0 || d > 2) throw ConfigError("grid D_d: d must be 0, 1 or 2");
    Grid g;
    g.kind = GridKind::Shifted;
    g.d = d;
    return g;
  }

  static Grid gntl(int N, int t, int L) {
    if (N < 3 || N % 2 == 0) throw ConfigError("grid G_{N,t,L}: N must be odd and >= 3");
    if (t < 0 || t > N - 2) throw ConfigError("grid G_{N,t,L}: t out of range");
    if (L < 0 || L > N - 1) throw ConfigError("grid G_{N,t,L}: L out of range");
    Grid g;
    g.kind = GridKind::Gntl;
    g.N = N;
    g.t = t;
    g.L = L;
    return g;
  }

  bool admits_scale(int s) const {
    if (kind != GridKind::Gntl) return true;
    int m = N - 1;
    int r = ((s - t) % m + m) % m;
    return r == 0;
  }

  // offset at scale s, normalized to [0,1)
  Rat offset_at(int s) const {
    switch (kind) {
      case GridKind::Standard:
        return Rat(0);
      case GridKind::Shifted: {
        if (d == 0) return Rat(0);
        // D_1 at paper scale i has shift (-1)^i/3 with length 2^{-i};
        // in our convention s = -i, so the sign is (-1)^s.
        int sign = (s % 2 == 0) ? 1 : -1;
        if (d == 2) sign = -sign;
        return sign > 0 ? Rat(1, 3) : Rat(2, 3);
      }
      case GridKind::Gntl:
        return Rat(L, N);
    }
    return Rat(0);
  }

  DyadicInterval member(int s, long long l) const {
    if (!admits_scale(s)) throw ConfigError("grid member: scale not admitted");
    return DyadicInterval{s, l, offset_at(s)};
  }
};

// All members with scale in [smin, smax] intersecting the window.
inline std::vector<DyadicInterval> grid_members(const Grid& g, int smin, int smax,
                                                const RatInterval& window) {
  if (smin > smax) throw ConfigError("grid_members: empty scale range");
  std::vector<DyadicInterval> out;
  for (int s = smin; s <= smax; ++s) {
    if (!g.admits_scale(s)) continue;
    Rat off = g.offset_at(s);
    Rat len = pow2r(s);
    // 2^s (l + off) < window.hi  and  2^s (l + 1 + off) > window.lo
    long long lmin = floor_rat(window.lo / len - off - Rat(1)) ;
    long long lmax = floor_rat(window.hi / len - off);
    for (long long l = lmin; l <= lmax; ++l) {
      DyadicInterval I{s, l, off};
      if (I.interval().overlaps(window)) out.push_back(I);
    }
  }
  return out;
}

struct NestednessReport {
  long long pairs_checked = 0;
  long long violations = 0;
  std::optional<std::pair<DyadicInterval, DyadicInterval>> witness;
};

// For every pair I', I of members with |I'| <= |I|, verify I' subset of I or
// measure-disjoint.  Larger partners are located by index arithmetic, so the
// cost is (members x scales), not quadratic.
inline NestednessReport check_nestedness(const std::vector<DyadicInterval>& members) {
  NestednessReport rep;
  std::map<int, std::set<long long>> by_scale;
  std::map<int, Rat> offsets;
  for (const auto& I : members) {
    by_scale[I.scale].insert(I.index);
    auto it = offsets.find(I.scale);
    if (it == offsets.end())
      offsets[I.scale] = I.offset;
    else if (it->second != I.offset)
      throw ConfigError("check_nestedness: mixed offsets at one scale");
  }
  for (const auto& I : members) {
    RatInterval small = I.interval();
    for (const auto& [s, idxs] : by_scale) {
      if (s <= I.scale) continue;
      Rat off = offsets[s];
      Rat len = pow2r(s);
      long long l0 = floor_rat(small.lo / len - off);
      for (long long l = l0 - 1; l <= l0 + 1; ++l) {
        if (!idxs.count(l)) continue;
        DyadicInterval big{s, l, off};
        RatInterval B = big.interval();
        if (!B.overlaps(small)) continue;
        ++rep.pairs_checked;
        if (!B.contains(small)) {
          ++rep.violations;
          if (!rep.witness) rep.witness = {I, big};
        }
      }
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// (A,d)-sparsity

struct SparsityProfile {
  // (i): scale gap >= gap_coeff * A powers of two.  (ii): same-scale distance
  // >= sep_coeff * A * |I'|.  Defaults are the literal thresholds (100, 100);
  // the desk-scale test profile uses (2, 2).
  Rat gap_coeff = Rat(100);
  Rat sep_coeff = Rat(100);

  static SparsityProfile literal() { return {}; }
  static SparsityProfile desk() { return {Rat(2), Rat(2)}; }
};

// Smallest k with 2^k >= r (r > 0).
inline int ceil_log2_rat(const Rat& r) {
  int k = 0;
  if (pow2r(k) >= r) {
    while (k > -62 && pow2r(k - 1) >= r) --k;
  } else {
    while (k < 62 && pow2r(k) < r) ++k;
  }
  return k;
}

// An interval of D_d squeezed between J and 3J, if any.
inline std::optional<DyadicInterval> d_enlargement(const RatInterval& J, int d) {
  Grid g = Grid::shifted(d);
  RatInterval J3 = J.enlarged(Rat(3));
  for (int k = ceil_log2_rat(J.length()); pow2r(k) <= J3.length(); ++k) {
    Rat off = g.offset_at(k);
    Rat len = pow2r(k);
    long long l0 = floor_rat(J3.lo / len - off);
    for (long long l = l0; l <= l0 + 3; ++l) {
      DyadicInterval cand{k, l, off};
      RatInterval C = cand.interval();
      if (C.contains(J) && J3.contains(C)) return cand;
    }
  }
  return std::nullopt;
}

struct SparseCheck {
  bool ok = false;
  std::string violation;  // empty when ok
  std::vector<DyadicInterval> enlargements;  // aligned with input when ok
};

inline SparseCheck is_sparse(const std::vector<DyadicInterval>& intervals, const Rat& A,
                             int d, const SparsityProfile& prof = {}) {
  if (A < 1) throw ConfigError("is_sparse: A must be >= 1");
  SparseCheck res;
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    if (intervals[i].offset != Rat(0))
      throw ConfigError("is_sparse: intervals must be standard-dyadic");
    for (std::size_t j = 0; j < i; ++j) {
      const auto &I = intervals[i], &J = intervals[j];
      if (I.scale != J.scale) {
        Rat gap(std::abs(I.scale - J.scale));
        if (gap < prof.gap_coeff * A) {
          res.violation = "scale gap " + std::to_string(std::abs(I.scale - J.scale)) +
                          " below threshold";
          return res;
        }
      } else if (I.index != J.index) {
        Rat dist = I.interval().dist(J.interval());
        if (dist < prof.sep_coeff * A * I.length()) {
          res.violation = "same-scale separation below threshold";
          return res;
        }
      }
    }
  }
  for (const auto& I : intervals) {
    auto enl = d_enlargement(I.interval().enlarged(A), d);
    if (!enl) {
      res.violation = "A-enlargement not d-regular for d=" + std::to_string(d);
      return res;
    }
    res.enlargements.push_back(*enl);
  }
  res.ok = true;
  return res;
}

inline std::set<int> admissible_ds(const DyadicInterval& I, const Rat& A) {
  std::set<int> out;
  for (int d = 0; d < 3; ++d)
    if (d_enlargement(I.interval().enlarged(A), d)) out.insert(d);
  return out;
}

struct SparseClass {
  int d = 0;
  std::vector<DyadicInterval> intervals;
};

// Greedy graph coloring: order by (scale, position); an interval joins the
// first class where no pairwise threshold is violated and a common d remains.
inline std::vector<SparseClass> sparsify(std::vector<DyadicInterval> intervals,
                                         const Rat& A,
                                         const SparsityProfile& prof = {}) {
  std::sort(intervals.begin(), intervals.end(), [](const auto& x, const auto& y) {
    if (x.scale != y.scale) return x.scale < y.scale;
    return x.index < y.index;
  });
  struct Cls {
    std::set<int> ds;
    std::vector<DyadicInterval> members;
  };
  std::vector<Cls> classes;
  for (const auto& I : intervals) {
    std::set<int> ds = admissible_ds(I, A);
    if (ds.empty())
      throw InvariantError("sparsify: interval admits no d-regular enlargement");
    bool placed = false;
    for (auto& c : classes) {
      std::set<int> common;
      std::set_intersection(ds.begin(), ds.end(), c.ds.begin(), c.ds.end(),
                            std::inserter(common, common.begin()));
      if (common.empty()) continue;
      bool conflict = false;
      for (const auto& J : c.members) {
        if (I.scale != J.scale) {
          if (Rat(std::abs(I.scale - J.scale)) < prof.gap_coeff * A) {
            conflict = true;
            break;
          }
        } else if (!(I == J)) {
          if (I.interval().dist(J.interval()) < prof.sep_coeff * A * I.length()) {
            conflict = true;
            break;
          }
        }
      }
      if (!conflict) {
        c.members.push_back(I);
        c.ds = common;
        placed = true;
        break;
      }
    }
    if (!placed) classes.push_back(Cls{ds, {I}});
  }
  std::vector<SparseClass> out;
  for (auto& c : classes) out.push_back(SparseClass{*c.ds.begin(), std::move(c.members)});
  return out;
}

}  // namespace tf
