#include "renc/noise.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace renc {

namespace {

using cd = std::complex<double>;

bool superop_is_identity(const KrausChannel& ch, double tol = 1e-12) {
  Eigen::MatrixXcd s = superoperator(ch);
  return (s - Eigen::MatrixXcd::Identity(s.rows(), s.cols())).norm() < tol;
}

bool superop_is_unital(const KrausChannel& ch, double tol = 1e-10) {
  const int d = ch.dim;
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(d, d);
  for (const auto& k : ch.kraus) acc += k * k.adjoint();
  return (acc - Eigen::MatrixXcd::Identity(d, d)).norm() < tol;
}

void check_trace_preserving(const KrausChannel& ch) {
  const int d = ch.dim;
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(d, d);
  for (const auto& k : ch.kraus) acc += k.adjoint() * k;
  if ((acc - Eigen::MatrixXcd::Identity(d, d)).norm() > 1e-10)
    throw std::runtime_error("channel is not trace preserving");
}

// Clock and shift matrices; W_{ab} = X^a Z^b generates the Weyl basis.
Eigen::MatrixXcd weyl(int d, int a, int b) {
  Eigen::MatrixXcd w = Eigen::MatrixXcd::Zero(d, d);
  const double twopi = 2.0 * std::acos(-1.0);
  for (int j = 0; j < d; ++j) {
    cd phase = std::polar(1.0, twopi * b * j / d);
    w((j + a) % d, j) = phase;
  }
  return w;
}

std::string trimmed(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double parse_named_double(const std::string& args, const std::string& key) {
  auto pos = args.find(key + "=");
  if (pos == std::string::npos)
    throw std::invalid_argument("channel spec: missing '" + key + "='");
  return std::stod(args.substr(pos + key.size() + 1));
}

}  // namespace

bool KrausChannel::is_identity() const { return superop_is_identity(*this); }

KrausChannel identity_channel(int d) {
  KrausChannel ch;
  ch.dim = d;
  ch.kraus = {Eigen::MatrixXcd::Identity(d, d)};
  ch.label = "identity";
  ch.unital = true;
  return ch;
}

KrausChannel depolarizing(int d, double gamma) {
  if (gamma < 0.0 || gamma > 1.0)
    throw std::invalid_argument("depolarizing: gamma must be in [0,1]");
  KrausChannel ch;
  ch.dim = d;
  ch.label = "depolarizing";
  ch.params = {gamma};
  ch.unital = true;
  // rho -> (1-gamma) rho + gamma I/d; in the Weyl basis every W_{ab} with
  // (a,b) != (0,0) carries weight gamma/d^2 and the identity keeps the rest.
  const double pid = 1.0 - gamma + gamma / (d * d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      double w = (a == 0 && b == 0) ? pid : gamma / (d * d);
      if (w <= 0.0) continue;
      ch.kraus.push_back(std::sqrt(w) * weyl(d, a, b));
    }
  check_trace_preserving(ch);
  return ch;
}

KrausChannel amplitude_damping(double gamma) {
  if (gamma < 0.0 || gamma > 1.0)
    throw std::invalid_argument("amplitude_damping: gamma must be in [0,1]");
  KrausChannel ch;
  ch.dim = 2;
  ch.label = "amplitude-damping";
  ch.params = {gamma};
  ch.unital = (gamma == 0.0);
  Eigen::MatrixXcd k0 = Eigen::MatrixXcd::Zero(2, 2);
  k0(0, 0) = 1.0;
  k0(1, 1) = std::sqrt(1.0 - gamma);
  Eigen::MatrixXcd k1 = Eigen::MatrixXcd::Zero(2, 2);
  k1(0, 1) = std::sqrt(gamma);
  ch.kraus = {k0, k1};
  check_trace_preserving(ch);
  return ch;
}

KrausChannel pauli_channel(double p0, double p1, double p2, double p3) {
  const double ps[4] = {p0, p1, p2, p3};
  double sum = 0.0;
  for (double p : ps) {
    if (p < -1e-12) throw std::invalid_argument("pauli: negative probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("pauli: probabilities must sum to 1");
  KrausChannel ch;
  ch.dim = 2;
  ch.label = "pauli";
  ch.params = {p0, p1, p2, p3};
  ch.unital = true;
  // order I, X, Y, Z; Y = i X Z up to global phase, which drops out.
  const Eigen::MatrixXcd paulis[4] = {weyl(2, 0, 0), weyl(2, 1, 0),
                                      cd(0, 1) * weyl(2, 1, 1), weyl(2, 0, 1)};
  for (int i = 0; i < 4; ++i)
    if (ps[i] > 0.0) ch.kraus.push_back(std::sqrt(ps[i]) * paulis[i]);
  check_trace_preserving(ch);
  return ch;
}

// File format: first line "d m" (local dimension and Kraus count), then m
// blocks of d lines, each line 2d numbers (re im interleaved).
KrausChannel kraus_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("kraus_from_file: cannot open " + path);
  int d = 0, m = 0;
  in >> d >> m;
  if (d < 2 || m < 1)
    throw std::runtime_error("kraus_from_file: bad header in " + path);
  KrausChannel ch;
  ch.dim = d;
  ch.label = "custom";
  for (int k = 0; k < m; ++k) {
    Eigen::MatrixXcd mat(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        double re, im;
        if (!(in >> re >> im))
          throw std::runtime_error("kraus_from_file: truncated file " + path);
        mat(i, j) = cd(re, im);
      }
    ch.kraus.push_back(std::move(mat));
  }
  check_trace_preserving(ch);
  ch.unital = superop_is_unital(ch);
  return ch;
}

KrausChannel parse_channel(const std::string& text) {
  std::string s = trimmed(text);
  auto open = s.find('(');
  if (open == std::string::npos || s.back() != ')')
    throw std::invalid_argument("channel spec: expected name(args): " + text);
  std::string name = trimmed(s.substr(0, open));
  std::string args = s.substr(open + 1, s.size() - open - 2);

  if (name == "depolarizing")
    return depolarizing(2, parse_named_double(args, "gamma"));
  if (name == "amplitude_damping")
    return amplitude_damping(parse_named_double(args, "gamma"));
  if (name == "pauli") {
    auto lb = args.find('[');
    auto rb = args.find(']');
    if (args.find("p=") == std::string::npos || lb == std::string::npos ||
        rb == std::string::npos || rb < lb)
      throw std::invalid_argument("channel spec: pauli needs p=[...]");
    std::string list = args.substr(lb + 1, rb - lb - 1);
    std::vector<double> p;
    std::stringstream ss(list);
    std::string tok;
    while (std::getline(ss, tok, ',')) p.push_back(std::stod(trimmed(tok)));
    if (p.size() != 4)
      throw std::invalid_argument("channel spec: pauli needs 4 probabilities");
    return pauli_channel(p[0], p[1], p[2], p[3]);
  }
  if (name == "kraus") {
    auto pos = args.find("file=");
    if (pos == std::string::npos)
      throw std::invalid_argument("channel spec: kraus needs file=path");
    return kraus_from_file(trimmed(args.substr(pos + 5)));
  }
  throw std::invalid_argument("channel spec: unknown channel '" + name + "'");
}

std::string channel_to_string(const KrausChannel& ch) {
  std::ostringstream os;
  os.precision(12);
  if (ch.label == "depolarizing") {
    os << "depolarizing(gamma=" << ch.params[0] << ")";
  } else if (ch.label == "amplitude-damping") {
    os << "amplitude_damping(gamma=" << ch.params[0] << ")";
  } else if (ch.label == "pauli") {
    os << "pauli(p=[" << ch.params[0] << "," << ch.params[1] << ","
       << ch.params[2] << "," << ch.params[3] << "])";
  } else if (ch.label == "identity") {
    os << "identity";
  } else {
    os << "custom(d=" << ch.dim << ",m=" << ch.kraus.size() << ")";
  }
  return os.str();
}

Eigen::MatrixXcd superoperator(const KrausChannel& ch) {
  const int d = ch.dim;
  Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(d * d, d * d);
  for (const auto& k : ch.kraus) {
    // M[(i,i'),(j,j')] = K[i][j] conj(K)[i'][j']
    for (int i = 0; i < d; ++i)
      for (int ip = 0; ip < d; ++ip)
        for (int j = 0; j < d; ++j)
          for (int jp = 0; jp < d; ++jp)
            s(i * d + ip, j * d + jp) += k(i, j) * std::conj(k(ip, jp));
  }
  return s;
}

Eigen::MatrixXd overlap_with_superop(const Eigen::MatrixXcd& super, int d,
                                     int alpha, unsigned affected_mask) {
  const auto& g = SymmetricGroup::get(alpha);
  const int n = g.size();
  long states = 1;
  for (int k = 0; k < alpha; ++k) states *= d;

  Eigen::MatrixXd out(n, n);
  std::vector<int> iv(alpha), jv(alpha);
  for (int pi = 0; pi < n; ++pi) {
    const auto& p = g.element(pi).images;
    for (int si = 0; si < n; ++si) {
      const auto& s = g.element(si).images;
      cd acc = 0.0;
      for (long ii = 0; ii < states; ++ii) {
        long rem = ii;
        for (int k = 0; k < alpha; ++k) {
          iv[k] = rem % d;
          rem /= d;
        }
        for (long jj = 0; jj < states; ++jj) {
          rem = jj;
          for (int k = 0; k < alpha; ++k) {
            jv[k] = rem % d;
            rem /= d;
          }
          // replica k contributes <i_k, i_{p(k)}| M |j_k, j_{s(k)}>,
          // or the identity matrix element when its mask bit is clear
          cd term = 1.0;
          for (int k = 0; k < alpha && term != 0.0; ++k) {
            int r = iv[k] * d + iv[p[k]];
            int c = jv[k] * d + jv[s[k]];
            if (affected_mask & (1u << k))
              term *= super(r, c);
            else if (r != c)
              term = 0.0;
          }
          acc += term;
        }
      }
      if (std::abs(acc.imag()) > 1e-9 * (1.0 + std::abs(acc.real())))
        throw std::runtime_error("overlap_with_superop: non-real overlap");
      out(pi, si) = acc.real();
    }
  }
  return out;
}

Eigen::MatrixXd noisy_overlap(const KrausChannel& ch, int alpha,
                              unsigned affected_mask) {
  return overlap_with_superop(superoperator(ch), ch.dim, alpha, affected_mask);
}

CostExponents cost_exponents(const KrausChannel& ch) {
  const int d = ch.dim;
  const auto& g = SymmetricGroup::get(2);
  const int e = g.identity_index();
  const int s = g.canonical_cycle_index();
  Eigen::MatrixXd clean = gram(d, 2);
  Eigen::MatrixXd noisy = noisy_overlap(ch, 2, all_replicas(2));
  auto cost = [&](int r, int c) {
    if (noisy(r, c) <= 0.0)
      throw std::runtime_error("cost_exponents: non-positive noisy overlap");
    return (std::log(clean(r, c)) - std::log(noisy(r, c))) / std::log(double(d));
  };
  CostExponents out;
  out.g_se = cost(s, e);
  out.g_ss = cost(s, s);
  out.g_es = cost(e, s);
  return out;
}

double hashing_h2(const KrausChannel& ch) {
  CostExponents g = cost_exponents(ch);
  return g.g_ss - g.g_se;
}

double hashing_h_alpha(int d, double gamma, int alpha) {
  if (alpha < 2) throw std::invalid_argument("hashing_h_alpha: alpha >= 2");
  // Renyi entropy of the Weyl weight distribution of the depolarizing
  // channel: p0 = 1 - gamma (d^2-1)/d^2, the other d^2-1 weights gamma/d^2.
  const double q2 = double(d) * d;
  const double p0 = 1.0 - gamma * (q2 - 1.0) / q2;
  const double pk = gamma / q2;
  double z = std::pow(p0, alpha) + (q2 - 1.0) * std::pow(pk, alpha);
  return std::log(z) / ((1.0 - alpha) * std::log(double(d)));
}

}  // namespace renc
