#include <catch2/catch_amalgamated.hpp>

#include "tf/kernels.hpp"

using namespace tf;

TEST_CASE("averaging kernel sandwich") {
  for (int M : {2, 8, 32}) {
    double w = 1.0 / M;
    REQUIRE(average_kernel_eval(0.0, M) == 1.0);
    REQUIRE(average_kernel_eval(1.0, M) == 1.0);
    REQUIRE(average_kernel_eval(0.5, M) == 1.0);
    REQUIRE(average_kernel_eval(-w, M) == 0.0);
    REQUIRE(average_kernel_eval(1.0 + w, M) == 0.0);
    for (double x = -1.5; x <= 2.5; x += 0.01) {
      double v = average_kernel_eval(x, M);
      double lo = (x >= 0.0 && x <= 1.0) ? 1.0 : 0.0;
      double hi = (x > -w && x < 1.0 + w) ? 1.0 : 0.0;
      REQUIRE(v >= lo);
      REQUIRE(v <= hi);
    }
  }
}

TEST_CASE("averaging kernel mass via the symbol at 0") {
  for (int M : {4, 8}) {
    KernelSpec K = make_kernel(KernelKind::Average, M);
    cplx mass = K.hat.v[K.hat.n() / 2];  // K^(0) = integral of K
    REQUIRE(std::abs(mass.imag()) <= 1e-10);
    REQUIRE(mass.real() >= 1.0);
    REQUIRE(mass.real() <= 1.0 + 2.0 / M);
    // the symmetric ramps integrate to exactly 1/(2M) each
    REQUIRE(mass.real() == Catch::Approx(1.0 + 1.0 / M).epsilon(1e-8));
  }
}

TEST_CASE("Hilbert kernel values and symbol symmetry") {
  for (int M : {2, 8}) {
    REQUIRE(hilbert_kernel_eval(2.0, M) == 0.5);
    REQUIRE(hilbert_kernel_eval(-2.0, M) == -0.5);
    REQUIRE(hilbert_kernel_eval(0.5, M) == 0.0);
    REQUIRE(hilbert_kernel_eval(1.0 - 1.0 / M, M) == 0.0);
    for (double x = 0.1; x <= 3.0; x += 0.07)
      REQUIRE(hilbert_kernel_eval(-x, M) == -hilbert_kernel_eval(x, M));
  }
  KernelSpec K = make_kernel(KernelKind::Hilbert, 8);
  double worst_re = 0, worst_odd = 0;
  long long n = (long long)K.hat.n();
  for (long long j = 1; j < n; ++j) {
    worst_re = std::max(worst_re, std::abs(K.hat.v[std::size_t(j)].real()));
    long long jr = n - j;  // mirror sample at -xi
    if (jr > 0 && jr < n)
      worst_odd = std::max(worst_odd, std::abs(K.hat.v[std::size_t(j)].imag() +
                                               K.hat.v[std::size_t(jr)].imag()));
  }
  REQUIRE(worst_re <= 1e-8);   // purely imaginary symbol
  REQUIRE(worst_odd <= 1e-8);  // odd symbol
}

TEST_CASE("make_kernel input validation") {
  REQUIRE_THROWS_AS(make_kernel(KernelKind::Average, 1), ConfigError);
  REQUIRE_THROWS_AS(make_kernel(KernelKind::Custom, 8), ConfigError);
}

TEST_CASE("symbol validation flags the near-zero behavior") {
  KernelSpec K = make_kernel(KernelKind::Average, 8);
  ValidationReport full = validate_kernel(K, 2);
  REQUIRE_FALSE(full.flag_1a14);  // K^(0) ~ 1 does not vanish linearly

  KernelSplit sp = split_kernel(K);
  KernelSpec R;
  R.kind = KernelKind::Custom;
  R.hat = K.hat;
  for (std::size_t j = 0; j < R.hat.n(); ++j) R.hat.v[j] -= sp.eta_hat.v[j];
  R.space = inverse_transform(R.hat);
  ValidationReport rem = validate_kernel(R, 2);
  REQUIRE(rem.flag_1a14);
  for (double c : rem.constants) REQUIRE(std::isfinite(c));

  KernelSpec Z;
  Z.kind = KernelKind::Custom;
  Z.hat = SampledFunction(7, 6);
  Z.space = SampledFunction(5, 8);
  ValidationReport zr = validate_kernel(Z, 2);
  for (double c : zr.constants) REQUIRE(c == 0.0);
  REQUIRE(zr.flag_1a14);
}

TEST_CASE("eta split reconstructs the symbol") {
  for (KernelKind kind : {KernelKind::Average, KernelKind::Hilbert}) {
    KernelSpec K = make_kernel(kind, 8);
    KernelSplit sp = split_kernel(K);
    REQUIRE(!sp.g_hats.empty());
    double worst = 0;
    std::size_t mid = K.hat.n() / 2;  // xi = 0: q vanishes, eta averages the limits
    for (std::size_t j = 0; j < K.hat.n(); ++j) {
      if (j == mid) continue;
      cplx acc = sp.eta_hat.v[j];
      for (const auto& [jj, g] : sp.g_hats) acc += g.v[j];
      worst = std::max(worst, std::abs(acc - K.hat.v[j]));
    }
    REQUIRE(worst <= 1e-8);
    REQUIRE(std::abs(sp.eta_hat.v[mid] - (sp.limit_pos + sp.limit_neg) / 2.0) <= 1e-12);
  }
  // one-sided limits of the odd Hilbert symbol have equal magnitude
  KernelSplit hs = split_kernel(make_kernel(KernelKind::Hilbert, 8));
  REQUIRE(std::abs(std::abs(hs.limit_pos) - std::abs(hs.limit_neg)) <= 1e-6);
  REQUIRE(std::abs(hs.limit_pos + hs.limit_neg) <= 1e-6);
}

TEST_CASE("annulus partition telescopes") {
  double s = 0;
  for (int j = -4; j <= 4; ++j) s += q_partition(1.0 / std::ldexp(1.0, j));
  REQUIRE(s == Catch::Approx(1.0).epsilon(1e-12));
  for (double xi : {0.3, 1.0, 7.5}) {
    REQUIRE(q_partition(xi) >= 0.0);
    REQUIRE(q_partition(xi) <= 1.0);
  }
  REQUIRE(q_partition(0.0) == 0.0);
}

TEST_CASE("theta pieces telescope to the profile") {
  ThetaProfile p = ThetaProfile::desk();
  for (double xi : {0.37, 1.0, 2.9, 11.0, -5.3}) {
    int k = -3, K = 6;
    double s = 0;
    for (int i = k; i <= K; ++i) s += theta_i_fn(xi, i, p);
    double want = theta_fn(std::ldexp(xi, k), p) - theta_fn(std::ldexp(xi, K + 1), p);
    REQUIRE(s == Catch::Approx(want).margin(1e-12));
  }
}

TEST_CASE("discrete kernels H A S O") {
  for (auto [k, kp, M] : {std::array<int, 3>{3, 5, 4}, {4, 7, 16}}) {
    long long span = 1LL << k, W = (1LL << kp) + 8;
    DiscreteKernels D = discrete_kernels(k, M, W);
    DiscreteKernels Dp = discrete_kernels(kp, M, W);
    REQUIRE(D.s(0) == 0.0);
    REQUIRE(D.s(1) == 1.0);
    REQUIRE(D.s(-1) == -1.0);
    REQUIRE(D.s(span + 1) == 0.0);
    REQUIRE(D.a(span + 1) == 0.0);
    REQUIRE(D.h(span) == 1.0 / double(span));
    REQUIRE(D.h(-2 * span) == -0.5 / double(span));
    double worst = 0;
    for (long long i = -W; i <= W; ++i) {
      REQUIRE(D.o(i) == D.a(i) - D.s(i));
      // the two truncation differences coincide as kernels
      double dh = D.h(i) - Dp.h(i);
      double dq = D.o(i) - Dp.o(i);
      worst = std::max(worst, std::abs(dh - dq));
    }
    REQUIRE(worst <= 1e-12);
  }
  REQUIRE_THROWS_AS(discrete_kernels(0, 4, 8), ConfigError);
}

TEST_CASE("O kernel mass obeys the harmonic-sum and measured-constant bounds") {
  // Sum |O| collects the 1/i gap left by the smooth ramp, so it grows like the
  // harmonic number of the span; 800 is the frozen battery maximum of M * sum.
  for (int k = 3; k <= 8; ++k)
    for (int M : {4, 16, 64}) {
      DiscreteKernels D = discrete_kernels(k, M, (1LL << k) + 4);
      double s = 0;
      for (long long i = -D.W; i <= D.W; ++i) s += std::abs(D.o(i));
      INFO("k=" << k << " M=" << M << " sum=" << s);
      REQUIRE(s <= 2.0 * (k * std::log(2.0) + 1.0) + 1.0);
      REQUIRE(s <= 800.0 / M);
    }
}

TEST_CASE("step kernel versus dilated smooth kernel") {
  DiscreteKernels D = discrete_kernels(4, 4, 64);
  double c = discrete_comparison_constant(D);
  INFO("comparison constant " << c);
  REQUIRE(std::isfinite(c));
  REQUIRE(c > 0.0);
}
