#include "renc/oracle.hpp"

#include <cmath>
#include <complex>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace renc {

namespace {

using cd = std::complex<double>;
using cvec = Eigen::VectorXcd;
using cmat = Eigen::MatrixXcd;

long lpow(long b, int e) {
  long r = 1;
  while (e-- > 0) r *= b;
  return r;
}

void philox_round(std::uint32_t x[4], const std::uint32_t k[2]) {
  const std::uint64_t p0 = std::uint64_t(0xD2511F53u) * x[0];
  const std::uint64_t p1 = std::uint64_t(0xCD9E8D57u) * x[2];
  const std::uint32_t y0 = std::uint32_t(p1 >> 32) ^ x[1] ^ k[0];
  const std::uint32_t y1 = std::uint32_t(p1);
  const std::uint32_t y2 = std::uint32_t(p0 >> 32) ^ x[3] ^ k[1];
  const std::uint32_t y3 = std::uint32_t(p0);
  x[0] = y0; x[1] = y1; x[2] = y2; x[3] = y3;
}

}  // namespace

Philox::Philox(std::uint64_t key, std::uint64_t stream) {
  key_[0] = std::uint32_t(key);
  key_[1] = std::uint32_t(key >> 32);
  ctr_[0] = 0;
  ctr_[1] = 0;
  ctr_[2] = std::uint32_t(stream);
  ctr_[3] = std::uint32_t(stream >> 32);
}

void Philox::refill() {
  std::uint32_t x[4] = {ctr_[0], ctr_[1], ctr_[2], ctr_[3]};
  std::uint32_t k[2] = {key_[0], key_[1]};
  for (int r = 0; r < 10; ++r) {
    philox_round(x, k);
    k[0] += 0x9E3779B9u;
    k[1] += 0xBB67AE85u;
  }
  out_[0] = std::uint64_t(x[0]) | (std::uint64_t(x[1]) << 32);
  out_[1] = std::uint64_t(x[2]) | (std::uint64_t(x[3]) << 32);
  avail_ = 2;
  if (++ctr_[0] == 0) ++ctr_[1];
}

Philox::result_type Philox::operator()() {
  if (avail_ == 0) refill();
  return out_[--avail_];
}

double Philox::uniform() {
  // (0, 1]: 53-bit mantissa shifted off zero
  return double(((*this)() >> 11) + 1) * (1.0 / 9007199254740992.0);
}

double Philox::gaussian() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * M_PI * u2;
  spare_ = r * std::sin(a);
  have_spare_ = true;
  return r * std::cos(a);
}

std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + index * 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

Eigen::MatrixXcd sample_haar_gate(int d, Philox& rng) {
  const int q = d * d;
  cmat a(q, q);
  for (int j = 0; j < q; ++j)
    for (int i = 0; i < q; ++i) a(i, j) = cd(rng.gaussian(), rng.gaussian());
  Eigen::HouseholderQR<cmat> qr(a);
  cmat u = qr.householderQ() * cmat::Identity(q, q);
  const cmat& r = qr.matrixQR();
  for (int j = 0; j < q; ++j) {
    const cd rjj = r(j, j);
    const double m = std::abs(rjj);
    if (m > 0.0) u.col(j) *= rjj / m;
  }
  return u;
}

namespace {

// Applies a (rA*rB) x (rA*rB) matrix to the two register digits with
// strides sA, sB; the local index is a + rA*b with digit a at stride sA.
void apply_digits(cd* v, long n, long sA, int rA, long sB, int rB,
                  const cmat& m) {
  const int q = rA * rB;
  const long sLo = std::min(sA, sB), sHi = std::max(sA, sB);
  const int rLo = (sA < sB) ? rA : rB, rHi = (sA < sB) ? rB : rA;
  if (q == 4 && sLo >= 4) {
    // d = 2 hot path: split complex arithmetic into real parts so the
    // contiguous run of length sLo vectorizes
    double mr[4][4], mi[4][4];
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        mr[i][j] = m(i, j).real();
        mi[i][j] = m(i, j).imag();
      }
    for (long hi = 0; hi < n; hi += sHi * 2)
      for (long md = 0; md < sHi; md += sLo * 2) {
        double* p0 = reinterpret_cast<double*>(v + hi + md);
        double* p1 = reinterpret_cast<double*>(v + hi + md + sA);
        double* p2 = reinterpret_cast<double*>(v + hi + md + sB);
        double* p3 = reinterpret_cast<double*>(v + hi + md + sA + sB);
        for (long lo = 0; lo < 2 * sLo; lo += 2) {
          const double ar = p0[lo], ai = p0[lo + 1], br = p1[lo], bi = p1[lo + 1];
          const double cr = p2[lo], ci = p2[lo + 1], dr = p3[lo], di = p3[lo + 1];
          p0[lo]     = mr[0][0]*ar-mi[0][0]*ai + mr[0][1]*br-mi[0][1]*bi + mr[0][2]*cr-mi[0][2]*ci + mr[0][3]*dr-mi[0][3]*di;
          p0[lo + 1] = mr[0][0]*ai+mi[0][0]*ar + mr[0][1]*bi+mi[0][1]*br + mr[0][2]*ci+mi[0][2]*cr + mr[0][3]*di+mi[0][3]*dr;
          p1[lo]     = mr[1][0]*ar-mi[1][0]*ai + mr[1][1]*br-mi[1][1]*bi + mr[1][2]*cr-mi[1][2]*ci + mr[1][3]*dr-mi[1][3]*di;
          p1[lo + 1] = mr[1][0]*ai+mi[1][0]*ar + mr[1][1]*bi+mi[1][1]*br + mr[1][2]*ci+mi[1][2]*cr + mr[1][3]*di+mi[1][3]*dr;
          p2[lo]     = mr[2][0]*ar-mi[2][0]*ai + mr[2][1]*br-mi[2][1]*bi + mr[2][2]*cr-mi[2][2]*ci + mr[2][3]*dr-mi[2][3]*di;
          p2[lo + 1] = mr[2][0]*ai+mi[2][0]*ar + mr[2][1]*bi+mi[2][1]*br + mr[2][2]*ci+mi[2][2]*cr + mr[2][3]*di+mi[2][3]*dr;
          p3[lo]     = mr[3][0]*ar-mi[3][0]*ai + mr[3][1]*br-mi[3][1]*bi + mr[3][2]*cr-mi[3][2]*ci + mr[3][3]*dr-mi[3][3]*di;
          p3[lo + 1] = mr[3][0]*ai+mi[3][0]*ar + mr[3][1]*bi+mi[3][1]*br + mr[3][2]*ci+mi[3][2]*cr + mr[3][3]*di+mi[3][3]*dr;
        }
      }
    return;
  }
  if (q == 4) {  // unrolled kernel for short runs
    const cd m00 = m(0, 0), m01 = m(0, 1), m02 = m(0, 2), m03 = m(0, 3);
    const cd m10 = m(1, 0), m11 = m(1, 1), m12 = m(1, 2), m13 = m(1, 3);
    const cd m20 = m(2, 0), m21 = m(2, 1), m22 = m(2, 2), m23 = m(2, 3);
    const cd m30 = m(3, 0), m31 = m(3, 1), m32 = m(3, 2), m33 = m(3, 3);
    for (long hi = 0; hi < n; hi += sHi * rHi)
      for (long md = 0; md < sHi; md += sLo * rLo)
        for (long lo = 0; lo < sLo; ++lo) {
          cd* p = v + hi + md + lo;
          const cd t0 = p[0], t1 = p[sA], t2 = p[sB], t3 = p[sA + sB];
          p[0] = m00 * t0 + m01 * t1 + m02 * t2 + m03 * t3;
          p[sA] = m10 * t0 + m11 * t1 + m12 * t2 + m13 * t3;
          p[sB] = m20 * t0 + m21 * t1 + m22 * t2 + m23 * t3;
          p[sA + sB] = m30 * t0 + m31 * t1 + m32 * t2 + m33 * t3;
        }
    return;
  }
  std::vector<cd> tmp(q);
  for (long hi = 0; hi < n; hi += sHi * rHi)
    for (long md = 0; md < sHi; md += sLo * rLo)
      for (long lo = 0; lo < sLo; ++lo) {
        const long base = hi + md + lo;
        for (int b = 0; b < rB; ++b)
          for (int a = 0; a < rA; ++a) tmp[a + rA * b] = v[base + a * sA + b * sB];
        for (int i = 0; i < q; ++i) {
          cd acc = 0.0;
          for (int j = 0; j < q; ++j) acc += m(i, j) * tmp[j];
          v[base + (i % rA) * sA + (i / rA) * sB] = acc;
        }
      }
}

void apply_digit(cd* v, long n, long s, int r, const cmat& m) {
  std::vector<cd> tmp(r);
  for (long hi = 0; hi < n; hi += s * r)
    for (long lo = 0; lo < s; ++lo) {
      const long base = hi + lo;
      for (int j = 0; j < r; ++j) tmp[j] = v[base + j * s];
      for (int i = 0; i < r; ++i) {
        cd acc = 0.0;
        for (int j = 0; j < r; ++j) acc += m(i, j) * tmp[j];
        v[base + i * s] = acc;
      }
    }
}

// two-site gate on digits (x, x+1), local index s_x + d * s_{x+1}
void apply_gate(cvec& psi, int d, int x, const cmat& u) {
  apply_digits(psi.data(), psi.size(), lpow(d, x), d, lpow(d, x + 1), d, u);
}

// channel superoperator on site x of a density matrix over D_B = d^nb
// basis states; local index is ket*d + bra to match superoperator()
void apply_superop_site(cmat& rho, int d, int x, const cmat& s) {
  const long db = rho.rows();
  const long sk = lpow(d, x);
  apply_digits(rho.data(), db * db, db * sk, d, sk, d, s);
}

cmat site_density(const cvec& psi, int d, int x) {
  cmat rho = cmat::Zero(d, d);
  const long s = lpow(d, x);
  const long n = psi.size();
  for (long hi = 0; hi < n; hi += s * d)
    for (long lo = 0; lo < s; ++lo) {
      const long base = hi + lo;
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
          rho(i, j) += psi[base + i * s] * std::conj(psi[base + j * s]);
    }
  return rho;
}

void apply_random_kraus(cvec& psi, int d, int x,
                        const std::vector<cmat>& kraus, Philox& rng) {
  const cmat rs = site_density(psi, d, x);
  const double u = rng.uniform();
  double acc = 0.0;
  int pick = int(kraus.size()) - 1;
  double p_pick = 0.0;
  for (size_t a = 0; a < kraus.size(); ++a) {
    const double p = (kraus[a] * rs * kraus[a].adjoint()).trace().real();
    acc += p;
    if (u <= acc) {
      pick = int(a);
      p_pick = p;
      break;
    }
    p_pick = p;
  }
  if (p_pick < 1e-300) p_pick = 1e-300;
  apply_digit(psi.data(), psi.size(), lpow(d, x), d,
              kraus[pick] / std::sqrt(p_pick));
}

std::vector<int> layer_bonds(int N, int layer) {
  std::vector<int> b;
  for (int x = (layer % 2 == 1) ? 0 : 1; x + 1 < N; x += 2) b.push_back(x);
  return b;
}

double trace_power(const cmat& rho, int alpha) {
  if (alpha == 2) return rho.squaredNorm();  // Hermitian
  cmat p = rho;
  for (int j = 2; j < alpha; ++j) p = p * rho;
  return (p * rho).trace().real();
}

struct RunningStat {
  double sum = 0.0, sumsq = 0.0;
  long n = 0;
  void add(double x) {
    sum += x;
    sumsq += x * x;
    ++n;
  }
  McEstimate done() const {
    const double mean = sum / n;
    double var = (sumsq - n * mean * mean) / (n - 1.0);
    if (var < 0.0) var = 0.0;
    return {mean, std::sqrt(var / n), n};
  }
};

void check_oracle_mem(double bytes, double limit_gb, const char* what) {
  const double limit = limit_gb * double(1ull << 30);
  if (bytes > limit) {
    std::ostringstream os;
    os << "oracle size ceiling: " << what << " needs " << bytes / double(1ull << 20)
       << " MiB, limit " << limit_gb << " GiB";
    throw std::runtime_error(os.str());
  }
}

cvec bell_init(int d, int N, int kref) {
  // reference digits N..N+kref-1 maximally entangled with sites 0..kref-1
  const long dt = lpow(d, N + kref);
  cvec psi = cvec::Zero(dt);
  const long dk = lpow(d, kref);
  const double amp = 1.0 / std::sqrt(double(dk));
  const long dn = lpow(d, N);
  for (long r = 0; r < dk; ++r) psi[r + r * dn] = amp;
  return psi;
}

}  // namespace

McEstimate simulate_annealed(const LatticeSpec& spec, Target target,
                             long n_samples, std::uint64_t seed) {
  spec.validate();
  if (n_samples < 100)
    throw std::invalid_argument("simulate_annealed: need n_samples >= 100");
  if (target == Target::Fidelity && spec.setup == Setup::I)
    throw std::invalid_argument("fidelity is a setup II quantity");
  if (target == Target::Trace) return {1.0, 0.0, n_samples};

  const int d = spec.local_dim, N = spec.n_sites, k = spec.k_logical;
  const int t = spec.depth_t, alpha = spec.alpha;
  const std::vector<cmat>& kraus = spec.channel.kraus;

  if (spec.setup == Setup::I && target == Target::HolevoMixed) {
    // the maximally mixed input commutes with the unitary layer, so the
    // output is a circuit-independent product state
    cmat sig = cmat::Zero(d, d);
    for (const cmat& ka : kraus) sig += ka * ka.adjoint() / double(d);
    Eigen::SelfAdjointEigenSolver<cmat> es(sig);
    double p1 = 0.0;
    for (int i = 0; i < d; ++i) p1 += std::pow(es.eigenvalues()[i], alpha);
    return {std::pow(p1, N), 0.0, n_samples};
  }

  const bool setup1 = (spec.setup == Setup::I);
  int kref = 0;
  if (target == Target::PurityB || target == Target::PurityRB) kref = k;
  if (target == Target::HolevoMixed) kref = N;  // purifies I/d^N, setup II
  const long dn = lpow(d, N);
  const long dr = lpow(d, kref);
  const long dt_dim = dn * dr;

  // For alpha = 2 the RB purity reduces to a quadratic form in rho_B:
  // Tr rho_RB^2 = sum_{a,b} |Tr[(x_a1b1 x x_a2b2 x ...) rho_B]|^2 with
  // x_ab = K_a^dag K_b, which factorizes into a d^2 x d^2 form per site.
  // This avoids building the full (d^N d^k)-dimensional density matrix.
  const bool rb_quad = setup1 && target == Target::PurityRB && alpha == 2 &&
                       !spec.channel.is_identity();
  const int n_traj = setup1 ? 1 : (target == Target::Fidelity ? 2 : alpha);
  const long rho_dim =
      setup1 ? ((target == Target::PurityRB && !rb_quad) ? dt_dim : dn) : 0;
  check_oracle_mem(16.0 * (double(n_traj) * dt_dim + double(rho_dim) * rho_dim),
                   spec.mem_limit_gb, "statevector sample");
  if (setup1 && alpha > 2 &&
      double(n_samples) * rho_dim * rho_dim * rho_dim * alpha > 2e12)
    throw std::runtime_error("oracle size ceiling: dense alpha-power too large");

  const cmat super = superoperator(spec.channel);
  cmat omega;
  if (rb_quad) {
    omega = cmat::Zero(d * d, d * d);
    cvec w(d * d);
    for (const cmat& ka : kraus)
      for (const cmat& kb : kraus) {
        const cmat x = ka.adjoint() * kb;
        for (int r = 0; r < d; ++r)
          for (int c = 0; c < d; ++c) w[r + d * c] = std::conj(x(c, r));
        omega += w * w.adjoint();
      }
  }
  RunningStat stat;

  std::vector<cmat> gates;
  std::vector<cvec> traj(n_traj);
  for (long i = 0; i < n_samples; ++i) {
    const std::uint64_t skey = derive_stream(seed, std::uint64_t(i));
    Philox grng(skey, 0);
    gates.clear();
    for (int l = 1; l <= t; ++l)
      for (int x : layer_bonds(N, l)) {
        (void)x;
        gates.push_back(sample_haar_gate(d, grng));
      }

    if (setup1) {
      cvec psi = (kref > 0) ? bell_init(d, N, kref) : [&] {
        cvec p = cvec::Zero(dt_dim);
        p[0] = 1.0;
        return p;
      }();
      size_t gi = 0;
      for (int l = 1; l <= t; ++l)
        for (int x : layer_bonds(N, l)) apply_gate(psi, d, x, gates[gi++]);
      cmat rho;
      if (target == Target::PurityRB && !rb_quad) {
        rho = psi * psi.adjoint();
      } else {
        Eigen::Map<const cmat> m(psi.data(), dn, dr);
        rho = m * m.adjoint();
      }
      if (rb_quad) {
        cmat u = rho;
        for (int x = 0; x < N; ++x)
          apply_digits(u.data(), dn * dn, lpow(d, x), d, dn * lpow(d, x), d,
                       omega);
        stat.add(std::real(Eigen::Map<const cvec>(rho.data(), dn * dn)
                               .dot(Eigen::Map<const cvec>(u.data(), dn * dn))));
        continue;
      }
      if (!spec.channel.is_identity())
        for (int x = 0; x < N; ++x) apply_superop_site(rho, d, x, super);
      stat.add(trace_power(rho, alpha));
      continue;
    }

    // setup II: independent Kraus trajectories sharing the circuit
    for (int j = 0; j < n_traj; ++j) {
      Philox krng(skey, 1 + std::uint64_t(j));
      const bool noisy = !(target == Target::Fidelity && j == 0);
      cvec& psi = traj[j];
      psi = (kref > 0) ? bell_init(d, N, kref) : cvec::Zero(dt_dim);
      if (kref == 0) psi[0] = 1.0;
      size_t gi = 0;
      for (int l = 1; l <= t; ++l) {
        for (int x : layer_bonds(N, l)) apply_gate(psi, d, x, gates[gi++]);
        if (noisy)
          for (int x = 0; x < N; ++x) apply_random_kraus(psi, d, x, kraus, krng);
      }
    }
    double val = 0.0;
    if (target == Target::PurityB || target == Target::HolevoMixed) {
      std::vector<cmat> a(alpha);
      for (int j = 0; j < alpha; ++j) {
        Eigen::Map<const cmat> mj(traj[j].data(), dn, dr);
        Eigen::Map<const cmat> mn(traj[(j + 1) % alpha].data(), dn, dr);
        a[j] = mj.adjoint() * mn;
      }
      cmat prod = a[0];
      for (int j = 1; j < alpha; ++j) prod = prod * a[j];
      val = prod.trace().real();
    } else if (target == Target::Fidelity) {
      val = std::norm(traj[0].dot(traj[1]));
    } else {  // PurityRB, HolevoZero: pure-state overlap cycle
      cd prod = 1.0;
      for (int j = 0; j < alpha; ++j)
        prod *= traj[j].dot(traj[(j + 1) % alpha]);
      val = prod.real();
    }
    stat.add(val);
  }
  return stat.done();
}

std::vector<FrameResult> frame_potential_multi(int N, int t,
                                               const std::vector<int>& alphas,
                                               int n_states,
                                               std::uint64_t seed) {
  if (N < 2 || N % 2 != 0) throw std::invalid_argument("frame potential: N must be even");
  if (t < 0) throw std::invalid_argument("frame potential: t < 0");
  if (n_states < 16)
    throw std::invalid_argument("frame potential: need at least 16 states");
  for (int a : alphas)
    if (a < 1 || a > 6) throw std::invalid_argument("frame potential: alpha out of range");

  const int d = 2;
  const long dn = lpow(d, N);
  const long m = n_states;
  check_oracle_mem(16.0 * (double(dn) * m + double(m) * m), 3.0,
                   "frame potential state block");

  cmat states(dn, m);
  for (long i = 0; i < m; ++i) {
    Philox rng(derive_stream(seed, std::uint64_t(i)), 0);
    cvec psi = cvec::Zero(dn);
    psi[0] = 1.0;
    for (int l = 1; l <= t; ++l)
      for (int x : layer_bonds(N, l)) apply_gate(psi, d, x, sample_haar_gate(d, rng));
    states.col(i) = psi;
  }
  const Eigen::MatrixXd z = (states.adjoint() * states).cwiseAbs2();

  std::vector<FrameResult> out;
  for (int alpha : alphas) {
    Eigen::VectorXd rowsum = Eigen::VectorXd::Zero(m);
    double total = 0.0;
    for (long i = 0; i < m; ++i)
      for (long j = i + 1; j < m; ++j) {
        const double h = std::pow(z(i, j), alpha);
        total += h;
        rowsum[i] += h;
        rowsum[j] += h;
      }
    const double pairs = 0.5 * m * (m - 1.0);
    const double pairs1 = 0.5 * (m - 1.0) * (m - 2.0);
    const double theta = total / pairs;
    double jbar = 0.0;
    Eigen::VectorXd jk(m);
    for (long i = 0; i < m; ++i) {
      jk[i] = (total - rowsum[i]) / pairs1;
      jbar += jk[i];
    }
    jbar /= m;
    double ss = 0.0;
    for (long i = 0; i < m; ++i) ss += (jk[i] - jbar) * (jk[i] - jbar);
    const double se = std::sqrt((m - 1.0) / m * ss);

    double haar = 1.0, fact = 1.0;
    for (int j = 0; j < alpha; ++j) {
      haar *= double(j + 1) / double(dn + j);
      fact *= j + 1;
    }
    FrameResult r;
    r.estimate = {theta, se, long(pairs)};
    r.haar_state_ensemble = haar;
    r.haar_printed = fact * std::pow(double(dn), -2.0 * alpha);
    r.delta_f = theta / haar - 1.0;
    out.push_back(r);
  }
  return out;
}

FrameResult frame_potential(int N, int t, int alpha, int n_states,
                            std::uint64_t seed) {
  return frame_potential_multi(N, t, {alpha}, n_states, seed)[0];
}

}  // namespace renc
