#include "renc/rm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "renc/sym.hpp"

namespace renc {

namespace {

constexpr double kTieTol = 1e-9;

double logsumexp2(double a, double b) {
  double mx = std::max(a, b);
  return mx + std::log(std::exp(a - mx) + std::exp(b - mx));
}

double logsumexp(const std::vector<double>& xs) {
  double mx = xs[0];
  for (double x : xs) mx = std::max(mx, x);
  double acc = 0.0;
  for (double x : xs) acc += std::exp(x - mx);
  return mx + std::log(acc);
}

Regime classify(double h, double h_crit) {
  if (h < h_crit - kTieTol) return Regime::Protected;
  if (h > h_crit + kTieTol) return Regime::Lost;
  return Regime::Critical;
}

}  // namespace

RMPrediction rm_purities_setup1(double r, const CostExponents& g, int N,
                                int d) {
  if (r < 0.0 || r > 1.0) throw std::invalid_argument("r must be in [0,1]");
  const double ld = std::log(double(d));
  RMPrediction p;
  p.log_purity_B =
      logsumexp2(-(g.g_se + 1.0) * N * ld, -(g.g_ss + r) * N * ld);
  p.log_purity_RB =
      logsumexp2(-(g.g_se + 1.0 + r) * N * ld, -g.g_ss * N * ld);
  p.info_per_site = rm_coherent_setup1(r, g);
  p.regime = classify_setup1(r, g);
  return p;
}

double rm_coherent_setup1(double r, const CostExponents& g) {
  return std::min(g.g_se + 1.0, g.g_ss + r) -
         std::min(g.g_se + 1.0 + r, g.g_ss);
}

Regime classify_setup1(double r, const CostExponents& g) {
  return classify(g.g_ss - g.g_se, 1.0 - r);
}

RMSetup2 rm_setup2(double r, const CostExponents& g, double f2, int N, int d) {
  if (r < 0.0 || r > 1.0) throw std::invalid_argument("r must be in [0,1]");
  if (f2 < 0.0) throw std::invalid_argument("f2 must be >= 0");
  const double ld = std::log(double(d));
  RMSetup2 p;
  const double b1 = g.g_se + 1.0;
  const double b2 = f2 + r * (1.0 + g.g_se);
  const double rb1 = g.g_se + 1.0 + r * (g.g_es + 1.0);
  const double rb2 = f2 + g.g_ss * r;
  p.log_purity_B = logsumexp2(-b1 * N * ld, -b2 * N * ld);
  p.log_purity_RB = logsumexp2(-rb1 * N * ld, -rb2 * N * ld);
  p.info_per_site = std::min(b1, b2) - std::min(rb1, rb2);
  p.critical_f2 = (1.0 - r) * (1.0 + g.g_se);
  p.regime = classify(f2, p.critical_f2);
  return p;
}

double rm_holevo(double r, const CostExponents& g) {
  return std::min(g.g_se + 1.0, g.g_ss + r) - std::min(g.g_se + 1.0, g.g_ss);
}

AlphaMoments alpha_moments(double r, int N, int alpha, double log_F_tilde,
                           int d) {
  if (alpha < 2 || alpha > 6)
    throw std::invalid_argument("alpha_moments: alpha must be in [2,6]");
  const auto& G = SymmetricGroup::get(alpha);
  const double ld = std::log(double(d));
  const int e = G.identity_index();
  const int s = G.canonical_cycle_index();

  std::vector<double> terms_b, terms_rb, es_b, es_rb;
  for (int si = 0; si < G.size(); ++si) {
    const auto& p = G.element(si);
    const double cyc_s = G.rel_cycles(s, si);  // #cycles(s^{-1} sigma)
    const double cyc_e = p.cycle_count;        // #cycles(sigma)
    const double noise = (alpha - p.fixed_points) / double(N) * log_F_tilde;
    const double lb = N * (cyc_s * ld + noise + r * cyc_e * ld);
    const double lrb = N * ((1.0 + r) * cyc_s * ld + noise);
    terms_b.push_back(lb);
    terms_rb.push_back(lrb);
    if (si == e || si == s) {
      es_b.push_back(lb);
      es_rb.push_back(lrb);
    }
  }
  const double pre = -alpha * (1.0 + r) * N * ld;
  AlphaMoments out;
  out.log_purity_B = pre + logsumexp(terms_b);
  out.log_purity_RB = pre + logsumexp(terms_rb);
  out.log_purity_B_es = pre + logsumexp(es_b);
  out.log_purity_RB_es = pre + logsumexp(es_rb);
  out.f_alpha = -double(alpha) / ((alpha - 1.0) * N) * log_F_tilde / ld;
  out.coherent_info =
      (out.log_purity_B - out.log_purity_RB) / ld / (1.0 - alpha);
  return out;
}

double deep_haar_log(const LatticeSpec& spec, Target target) {
  spec.validate();
  if (spec.alpha != 2 || spec.setup != Setup::I)
    throw std::invalid_argument("deep_haar_log: setup I, alpha = 2 only");
  const int N = spec.n_sites, k = spec.k_logical, d = spec.local_dim;
  const double ld = std::log(double(d));
  const double lq = N * ld;  // log q with q = d^N
  // Wg(q) at alpha = 2: diagonal 1/(q^2-1), off-diagonal -1/(q(q^2-1))
  const double lq2m1 = 2.0 * lq + std::log1p(-std::exp(-2.0 * lq));
  const auto& g2 = SymmetricGroup::get(2);
  const int e = g2.identity_index(), s = g2.canonical_cycle_index();

  const Eigen::MatrixXd l1 =
      noisy_overlap(spec.channel, 2, all_replicas(2));
  auto log_bottom = [&](int si) {
    switch (target) {
      case Target::PurityB:
        return (g2.rel_cycles(e, si) - 2.0) * k * ld;
      case Target::PurityRB:
        return (g2.rel_cycles(s, si) - 2.0) * k * ld;
      case Target::HolevoMixed:
        return (g2.element(si).cycle_count - 2.0) * N * ld;
      case Target::HolevoZero:
        return 0.0;
      default:
        throw std::invalid_argument("deep_haar_log: unsupported target");
    }
  };

  double mx = -std::numeric_limits<double>::infinity();
  double lt[2][2];
  double sg[2][2];
  for (int pi = 0; pi < 2; ++pi)
    for (int si = 0; si < 2; ++si) {
      const double top = l1(s, pi);
      if (!(top > 0.0))
        throw std::runtime_error("deep_haar_log: non-positive top overlap");
      const double lwg = (pi == si) ? -lq2m1 : -(lq + lq2m1);
      lt[pi][si] = lwg + N * std::log(top) + log_bottom(si);
      sg[pi][si] = (pi == si) ? 1.0 : -1.0;
      mx = std::max(mx, lt[pi][si]);
    }
  double acc = 0.0;
  for (int pi = 0; pi < 2; ++pi)
    for (int si = 0; si < 2; ++si) acc += sg[pi][si] * std::exp(lt[pi][si] - mx);
  if (!(acc > 0.0))
    throw std::runtime_error("deep_haar_log: non-positive value");
  return mx + std::log(acc);
}

double thouless_tau(int d) {
  if (d < 2) throw std::invalid_argument("thouless_tau: d must be >= 2");
  return 1.0 / std::log((double(d) * d + 1.0) / (2.0 * d));
}

CorrectionFit fit_corrections(const std::vector<CorrectionPoint>& series,
                              FitModel model, double t_min, double t_max) {
  std::vector<double> xs, ys;
  for (const auto& p : series) {
    if (p.t < t_min || p.t > t_max) continue;
    if (!(p.delta > 0.0))
      throw std::invalid_argument(
          "fit_corrections: non-positive delta inside the window");
    double x = 0.0, y = 0.0;
    switch (model) {
      case FitModel::NExp2T:
      case FitModel::NExpT:
        x = p.t;
        y = std::log(p.delta / p.N);
        break;
      case FitModel::ExpT:
        x = p.t;
        y = std::log(p.delta);
        break;
      case FitModel::NOverT:
        x = std::log(p.t);
        y = std::log(p.delta / p.N);
        break;
    }
    xs.push_back(x);
    ys.push_back(y);
  }
  const int n = static_cast<int>(xs.size());
  if (n < 4)
    throw std::invalid_argument("fit_corrections: need >= 4 points in window");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double denom = n * sxx - sx * sx;
  if (std::abs(denom) < 1e-30)
    throw std::invalid_argument("fit_corrections: degenerate window");
  const double slope = (n * sxy - sx * sy) / denom;
  const double intercept = (sy - slope * sx) / n;
  CorrectionFit fit;
  fit.model = model;
  fit.rate = -slope;  // decay rate, or the power p in N/t^p
  fit.prefactor = std::exp(intercept);
  double ss = 0.0;
  for (int i = 0; i < n; ++i) {
    const double res = ys[i] - (intercept + slope * xs[i]);
    ss += res * res;
  }
  fit.residual = std::sqrt(ss / n);
  return fit;
}

}  // namespace renc
