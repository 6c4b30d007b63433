#pragma once

#include <vector>

#include "renc/lattice.hpp"
#include "renc/noise.hpp"

// Infinite-depth (random-matrix) predictions for both setups, alpha-replica
// permutation sums, the Thouless timescale, and correction-scaling fits.
// Purity logs are natural logs; information measures are in log_d units.

namespace renc {

enum class Regime { Protected, Critical, Lost };

struct RMPrediction {
  double log_purity_B = 0.0;
  double log_purity_RB = 0.0;
  double info_per_site = 0.0;  // large-N min-combination
  Regime regime = Regime::Protected;
};

// Two-term finite-N purity sums of setup I and the large-N coherent
// information per site. Regime classified by H2 vs 1-r (tolerance 1e-9).
RMPrediction rm_purities_setup1(double r, const CostExponents& g, int N,
                                int d = 2);
double rm_coherent_setup1(double r, const CostExponents& g);
Regime classify_setup1(double r, const CostExponents& g);

struct RMSetup2 {
  double log_purity_B = 0.0;
  double log_purity_RB = 0.0;
  double info_per_site = 0.0;
  double critical_f2 = 0.0;  // (1-r)(1+g_se)
  Regime regime = Regime::Protected;
};

RMSetup2 rm_setup2(double r, const CostExponents& g, double f2, int N,
                   int d = 2);

// min(g_se+1, g_ss+r) - min(g_se+1, g_ss); never negative.
double rm_holevo(double r, const CostExponents& g);

struct AlphaMoments {
  double log_purity_B = 0.0;       // full S_alpha sum, natural log
  double log_purity_RB = 0.0;
  double log_purity_B_es = 0.0;    // {e, s}-restricted two-term sum
  double log_purity_RB_es = 0.0;
  double f_alpha = 0.0;            // -alpha/((alpha-1)N) log_d F_tilde
  double coherent_info = 0.0;      // total, log_d units, from the full sums
};

// Closed-form alpha-Renyi moments for setup II in the weak-noise limit,
// boundary-noise contributions neglected; log_F_tilde is ln(F - d^{-N}).
AlphaMoments alpha_moments(double r, int N, int alpha, double log_F_tilde,
                           int d);

// Purity-decay timescale 1/ln((d^2+1)/(2d)).
double thouless_tau(int d);

// Exact t -> infinity lattice value (single global Haar unitary): the
// Weingarten sum at q = d^N evaluated in signed log space, so it stays
// finite for N in the hundreds. Natural log. Setup I, alpha = 2, targets
// PurityB / PurityRB / HolevoMixed / HolevoZero only.
double deep_haar_log(const LatticeSpec& spec, Target target);

enum class FitModel { NExp2T, ExpT, NOverT, NExpT };

struct CorrectionFit {
  FitModel model = FitModel::ExpT;
  double rate = 0.0;       // decay rate (exponential models) or power (NOverT)
  double prefactor = 0.0;
  double residual = 0.0;   // rms residual of the log-form fit
};

struct CorrectionPoint {
  int N = 0;
  double t = 0.0;
  double delta = 0.0;  // |deviation from the RM value|, must be > 0
};

// Least squares on the model's log-form over t in [t_min, t_max].
// Throws std::invalid_argument on non-positive deltas or < 4 points.
CorrectionFit fit_corrections(const std::vector<CorrectionPoint>& series,
                              FitModel model, double t_min, double t_max);

}  // namespace renc
