#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "renc/rm.hpp"

using namespace renc;

namespace {
CostExponents zero_g() { return CostExponents{0.0, 0.0, 0.0}; }
}  // namespace

TEST_CASE("setup I purities at zero noise") {
  const double ln2 = std::log(2.0);
  RMPrediction p = rm_purities_setup1(0.25, zero_g(), 16);
  // d^{-N} + d^{-rN}
  CHECK(p.log_purity_B ==
        doctest::Approx(std::log(std::pow(2.0, -16) + std::pow(2.0, -4)))
            .epsilon(1e-12));
  CHECK(p.log_purity_RB ==
        doctest::Approx(std::log(std::pow(2.0, -20) + 1.0)).epsilon(1e-12));
  CHECK(p.info_per_site == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(p.regime == Regime::Protected);
  (void)ln2;
}

TEST_CASE("setup I coherent information min-formula") {
  // unital d=2, r=1/4, H2=2: min(1, 2.25) - min(1.25, 2) = -0.25
  CostExponents g{0.0, 2.0, 0.0};
  CHECK(rm_coherent_setup1(0.25, g) == doctest::Approx(-0.25).epsilon(1e-12));
  CHECK(classify_setup1(0.25, g) == Regime::Lost);

  // kink point H2 = 1 - r gives exactly r
  CostExponents gc{0.0, 0.75, 0.0};
  CHECK(rm_coherent_setup1(0.25, gc) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(classify_setup1(0.25, gc) == Regime::Critical);

  CHECK(rm_coherent_setup1(0.25, zero_g()) ==
        doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("coherent info bounds and continuity in H2") {
  for (double r : {0.1, 0.25, 0.5}) {
    double prev = r;
    for (double h2 = 0.0; h2 <= 2.0; h2 += 0.01) {
      CostExponents g{0.0, h2, 0.0};
      double v = rm_coherent_setup1(r, g);
      CHECK(v <= r + 1e-12);
      CHECK(v >= -r - 1e-12);
      CHECK(std::abs(v - prev) < 0.011);  // piecewise linear, slope <= 1
      prev = v;
    }
  }
}

TEST_CASE("purity degeneracy at criticality") {
  // at g_ss = g_se + 1 - r the two purity_B exponents coincide
  const double r = 0.25;
  CostExponents g{0.3, 0.3 + 1.0 - r, 0.0};
  RMPrediction p = rm_purities_setup1(r, g, 20);
  CHECK(p.log_purity_B ==
        doctest::Approx(std::log(2.0) - (g.g_se + 1.0) * 20 * std::log(2.0))
            .epsilon(1e-12));
  CHECK(p.regime == Regime::Critical);
}

TEST_CASE("setup II critical point and zero-noise consistency") {
  RMSetup2 p = rm_setup2(0.25, zero_g(), 0.3, 16);
  CHECK(p.critical_f2 == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(p.regime == Regime::Protected);
  CHECK(rm_setup2(0.25, zero_g(), 0.8, 16).regime == Regime::Lost);

  // f2 = 0 with g = 0 reduces to noiseless setup I
  RMSetup2 q = rm_setup2(0.25, zero_g(), 0.0, 16);
  RMPrediction s1 = rm_purities_setup1(0.25, zero_g(), 16);
  CHECK(q.log_purity_B == doctest::Approx(s1.log_purity_B).epsilon(1e-12));
  CHECK(q.log_purity_RB == doctest::Approx(s1.log_purity_RB).epsilon(1e-12));

  // amplitude damping feed-in shifts the critical point
  CostExponents gad = cost_exponents(amplitude_damping(0.1));
  RMSetup2 pad = rm_setup2(0.25, gad, 0.0, 16);
  CHECK(pad.critical_f2 ==
        doctest::Approx(0.75 * (1.0 + gad.g_se)).epsilon(1e-12));
}

TEST_CASE("holevo min-formula") {
  CHECK(rm_holevo(0.25, zero_g()) == doctest::Approx(0.25).epsilon(1e-12));
  CostExponents g{0.0, 2.0, 0.0};
  CHECK(rm_holevo(0.25, g) == doctest::Approx(0.0).epsilon(1e-12));
  // transition at H2 = 1 - r, same as the coherent information
  for (double h2 : {0.74, 0.76}) {
    CostExponents gg{0.0, h2, 0.0};
    bool flat = rm_holevo(0.25, gg) < 0.25 - 1e-12;
    CHECK(flat == (h2 > 0.75));
  }
  // never negative
  for (double h2 = 0.0; h2 <= 2.0; h2 += 0.05)
    CHECK(rm_holevo(0.3, CostExponents{0.1, h2, 0.0}) >= -1e-12);
}

TEST_CASE("alpha moments reduce to the setup II two-term sums at alpha=2") {
  const double ln2 = std::log(2.0);
  for (double f2 : {0.2, 0.75, 1.3}) {
    const int N = 16;
    const double log_F_tilde = -f2 * N / 2.0 * ln2;
    AlphaMoments am = alpha_moments(0.25, N, 2, log_F_tilde, 2);
    RMSetup2 rm = rm_setup2(0.25, zero_g(), f2, N);
    CHECK(am.log_purity_B_es == doctest::Approx(rm.log_purity_B).epsilon(1e-12));
    CHECK(am.log_purity_RB_es ==
          doctest::Approx(rm.log_purity_RB).epsilon(1e-12));
    // S_2 has only e and s, so restricted and full sums coincide
    CHECK(am.log_purity_B == doctest::Approx(am.log_purity_B_es).epsilon(1e-12));
    CHECK(am.f_alpha == doctest::Approx(f2).epsilon(1e-12));
  }
}

TEST_CASE("alpha moments noiseless recovery at alpha=3") {
  // F_tilde = 1: deep noiseless limit gives I_c = k up to d^{-O(N)} terms
  const int N = 24;
  AlphaMoments am = alpha_moments(0.25, N, 3, 0.0, 2);
  CHECK(am.coherent_info == doctest::Approx(0.25 * N).epsilon(1e-4));
}

TEST_CASE("restricted sum tracks the full S_3 sum in the protected phase") {
  const double ln2 = std::log(2.0);
  for (int N : {16, 24, 32}) {
    const double f3 = 0.4;  // protected: f_alpha < 1 - r
    const double log_F_tilde = -f3 * (3.0 - 1.0) / 3.0 * N * ln2;
    AlphaMoments am = alpha_moments(0.25, N, 3, log_F_tilde, 2);
    CHECK(am.log_purity_B ==
          doctest::Approx(am.log_purity_B_es).epsilon(0.01));
    CHECK(am.log_purity_RB ==
          doctest::Approx(am.log_purity_RB_es).epsilon(0.01));
  }
}

TEST_CASE("deep haar reference matches the deep lattice and stays finite") {
  LatticeSpec s;
  s.n_sites = 12;
  s.k_logical = 3;
  s.depth_t = 60;
  s.channel = depolarizing(2, 0.15);
  for (Target tg : {Target::PurityB, Target::PurityRB, Target::HolevoZero}) {
    CHECK(deep_haar_log(s, tg) ==
          doctest::Approx(contract(s, tg)).epsilon(1e-5));
  }
  // the mixed input is a product state at any depth
  s.depth_t = 2;
  CHECK(deep_haar_log(s, Target::HolevoMixed) ==
        doctest::Approx(contract(s, Target::HolevoMixed)).epsilon(1e-10));

  // log-domain evaluation survives N far beyond double overflow in q^2
  LatticeSpec big = s;
  big.n_sites = 512;
  big.k_logical = 128;
  const double v = deep_haar_log(big, Target::PurityB);
  CHECK(std::isfinite(v));
  CHECK(v < 0.0);

  LatticeSpec bad = s;
  bad.alpha = 3;
  CHECK_THROWS_AS(deep_haar_log(bad, Target::PurityB), std::invalid_argument);
  CHECK_THROWS_AS(deep_haar_log(s, Target::Fidelity), std::invalid_argument);
}

TEST_CASE("thouless timescale") {
  CHECK(thouless_tau(2) == doctest::Approx(1.0 / std::log(1.25)).epsilon(1e-12));
  CHECK(thouless_tau(2) == doctest::Approx(4.48142).epsilon(1e-5));
  CHECK(thouless_tau(3) == doctest::Approx(1.0 / std::log(10.0 / 6.0)).epsilon(1e-12));
  double prev = thouless_tau(2);
  for (int d = 3; d <= 10; ++d) {
    CHECK(thouless_tau(d) < prev);
    prev = thouless_tau(d);
  }
}

TEST_CASE("correction fits recover their generators") {
  const double tau = thouless_tau(2);
  std::vector<CorrectionPoint> s1, s2;
  for (int N : {64, 128}) {
    for (int t = 2; t <= 12; ++t) {
      s1.push_back({N, double(t), N * std::exp(-2.0 * t / tau)});
      s2.push_back({N, double(t), 0.7 * N / t});
    }
  }
  CorrectionFit f1 = fit_corrections(s1, FitModel::NExp2T, 2, 12);
  CHECK(f1.rate == doctest::Approx(2.0 / tau).epsilon(1e-6));
  CHECK(f1.prefactor == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(f1.residual < 1e-10);

  CorrectionFit f2 = fit_corrections(s2, FitModel::NOverT, 2, 12);
  CHECK(f2.rate == doctest::Approx(1.0).epsilon(1e-6));  // log-log slope -1
  CHECK(f2.prefactor == doctest::Approx(0.7).epsilon(1e-6));

  std::vector<CorrectionPoint> s3;
  for (int t = 4; t <= 10; ++t)
    s3.push_back({32, double(t), 2.5 * std::exp(-t / tau)});
  CorrectionFit f3 = fit_corrections(s3, FitModel::ExpT, 4, 10);
  CHECK(f3.rate == doctest::Approx(1.0 / tau).epsilon(1e-6));

  CHECK_THROWS_AS(fit_corrections(s3, FitModel::ExpT, 4, 6),
                  std::invalid_argument);  // too few points
  s3[2].delta = -1.0;
  CHECK_THROWS_AS(fit_corrections(s3, FitModel::ExpT, 4, 10),
                  std::invalid_argument);
}
