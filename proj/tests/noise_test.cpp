#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <unsupported/Eigen/KroneckerProduct>

#include "renc/noise.hpp"
#include "renc/sym.hpp"

using namespace renc;

namespace {

Eigen::VectorXcd perm_state_c(const std::vector<int>& images, int q) {
  const int alpha = static_cast<int>(images.size());
  long dim = 1;
  for (int k = 0; k < 2 * alpha; ++k) dim *= q;
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(dim);
  long nstates = 1;
  for (int k = 0; k < alpha; ++k) nstates *= q;
  std::vector<int> iv(alpha);
  for (long ii = 0; ii < nstates; ++ii) {
    long rem = ii;
    for (int k = 0; k < alpha; ++k) {
      iv[k] = rem % q;
      rem /= q;
    }
    long idx = 0, stride = 1;
    for (int k = 0; k < alpha; ++k) {
      idx += (iv[k] * q + iv[images[k]]) * stride;
      stride *= q * q;
    }
    v[idx] += 1.0;
  }
  return v;
}

// Dense oracle: apply kron of per-replica superoperators to |sigma>>
// and contract with <<pi|. Factor k is the least significant block.
Eigen::MatrixXd overlap_dense(const KrausChannel& ch, int alpha,
                              unsigned mask) {
  const int d = ch.dim;
  Eigen::MatrixXcd s = superoperator(ch);
  Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(d * d, d * d);
  Eigen::MatrixXcd full = Eigen::MatrixXcd::Identity(1, 1);
  for (int k = 0; k < alpha; ++k) {
    const Eigen::MatrixXcd& f = (mask & (1u << k)) ? s : id;
    full = Eigen::kroneckerProduct(f, full).eval();
  }
  const auto& g = SymmetricGroup::get(alpha);
  Eigen::MatrixXd out(g.size(), g.size());
  std::vector<Eigen::VectorXcd> states;
  for (const auto& p : g.elements()) states.push_back(perm_state_c(p.images, d));
  for (int i = 0; i < g.size(); ++i)
    for (int j = 0; j < g.size(); ++j)
      out(i, j) = (states[i].adjoint() * full * states[j]).real()(0, 0);
  return out;
}

}  // namespace

TEST_CASE("identity channel leaves the gram untouched") {
  KrausChannel id = identity_channel(2);
  CHECK(id.is_identity());
  Eigen::MatrixXd g = gram(2, 2);
  Eigen::MatrixXd n = noisy_overlap(id, 2, all_replicas(2));
  CHECK((g - n).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("depolarizing frozen overlaps at gamma=0.2") {
  KrausChannel ch = depolarizing(2, 0.2);
  Eigen::MatrixXd n = noisy_overlap(ch, 2, all_replicas(2));
  const auto& g = SymmetricGroup::get(2);
  int e = g.identity_index(), s = g.canonical_cycle_index();
  CHECK(n(e, e) == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(n(e, s) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(n(s, e) == doctest::Approx(2.0).epsilon(1e-12));  // unital
  // 1 + (d^2-1)(1-gamma)^2 = 2.92
  CHECK(n(s, s) == doctest::Approx(2.92).epsilon(1e-12));
}

TEST_CASE("amplitude damping frozen overlaps at gamma=0.3") {
  KrausChannel ch = amplitude_damping(0.3);
  Eigen::MatrixXd n = noisy_overlap(ch, 2, all_replicas(2));
  const auto& g = SymmetricGroup::get(2);
  int e = g.identity_index(), s = g.canonical_cycle_index();
  CHECK(n(e, e) == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(n(e, s) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(n(s, e) == doctest::Approx(2.0 + 2.0 * 0.09).epsilon(1e-12));  // 2.18
  // 2 (2 - 2 gamma + gamma^2) = 2.98
  CHECK(n(s, s) == doctest::Approx(2.98).epsilon(1e-12));

  CostExponents c = cost_exponents(ch);
  CHECK(c.g_es == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(c.g_se == doctest::Approx(-std::log2(1.0 + 0.09)).epsilon(1e-12));
  CHECK(c.g_ss ==
        doctest::Approx(-std::log2(1.0 - 0.3 * (2.0 - 0.3) / 2.0)).epsilon(1e-12));
}

TEST_CASE("noisy overlaps match the dense kron oracle") {
  for (const KrausChannel& ch :
       {depolarizing(2, 0.35), amplitude_damping(0.3),
        pauli_channel(0.7, 0.2, 0.05, 0.05)}) {
    for (int alpha : {2, 3}) {
      for (unsigned mask : {0u, 1u, all_replicas(alpha)}) {
        Eigen::MatrixXd fast = noisy_overlap(ch, alpha, mask);
        Eigen::MatrixXd slow = overlap_dense(ch, alpha, mask);
        CHECK((fast - slow).cwiseAbs().maxCoeff() < 1e-10);
      }
    }
  }
}

TEST_CASE("trace preservation pins the identity row") {
  // <<e| is a left fixed point of any trace-preserving superoperator,
  // so the identity row equals the clean gram and g_es vanishes
  for (const KrausChannel& ch :
       {depolarizing(2, 0.5), amplitude_damping(0.8),
        pauli_channel(0.4, 0.3, 0.2, 0.1)}) {
    Eigen::MatrixXd n = noisy_overlap(ch, 2, all_replicas(2));
    Eigen::MatrixXd g = gram(2, 2);
    CHECK((n.row(0) - g.row(0)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(cost_exponents(ch).g_es == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("unital channels have vanishing g_se") {
  for (double gamma : {0.1, 0.5, 0.9}) {
    CHECK(cost_exponents(depolarizing(2, gamma)).g_se ==
          doctest::Approx(0.0).epsilon(1e-12));
  }
  CHECK(cost_exponents(pauli_channel(0.25, 0.25, 0.25, 0.25)).g_se ==
        doctest::Approx(0.0).epsilon(1e-12));
  CHECK(std::abs(cost_exponents(amplitude_damping(0.5)).g_se) > 1e-3);
}

TEST_CASE("hashing entropies") {
  for (double gamma : {0.05, 0.189, 0.4}) {
    double h2 = hashing_h2(depolarizing(2, gamma));
    CHECK(h2 == doctest::Approx(2.0 - std::log2(1.0 + 3.0 * (1.0 - gamma) * (1.0 - gamma)))
                    .epsilon(1e-12));
    CHECK(h2 == doctest::Approx(hashing_h_alpha(2, gamma, 2)).epsilon(1e-12));
  }
  // pauli channel: H2 = -log2 sum p_i^2
  double p[4] = {0.85, 0.05, 0.05, 0.05};
  double s2 = 0.0;
  for (double x : p) s2 += x * x;
  CHECK(hashing_h2(pauli_channel(p[0], p[1], p[2], p[3])) ==
        doctest::Approx(-std::log2(s2)).epsilon(1e-12));
  // alpha -> 1 limits bracket H2 from above
  CHECK(hashing_h_alpha(2, 0.2, 3) < hashing_h_alpha(2, 0.2, 2));
}

TEST_CASE("depolarizing equals the uniform pauli mixture") {
  double gamma = 0.28;
  KrausChannel dep = depolarizing(2, gamma);
  KrausChannel pl = pauli_channel(1.0 - 0.75 * gamma, gamma / 4, gamma / 4, gamma / 4);
  CHECK((superoperator(dep) - superoperator(pl)).norm() < 1e-12);
}

TEST_CASE("channel grammar parses and round-trips") {
  KrausChannel a = parse_channel("depolarizing(gamma=0.15)");
  CHECK(a.label == "depolarizing");
  CHECK(a.params[0] == doctest::Approx(0.15));
  CHECK(parse_channel(channel_to_string(a)).params[0] == doctest::Approx(0.15));

  KrausChannel b = parse_channel(" amplitude_damping(gamma=0.3) ");
  CHECK(b.label == "amplitude-damping");

  KrausChannel c = parse_channel("pauli(p=[0.7, 0.1, 0.1, 0.1])");
  CHECK(c.label == "pauli");
  CHECK(c.params[1] == doctest::Approx(0.1));

  CHECK_THROWS(parse_channel("bitflip(p=0.1)"));
  CHECK_THROWS(parse_channel("depolarizing(gamma=1.5)"));
  CHECK_THROWS(parse_channel("pauli(p=[0.5,0.5])"));
}

TEST_CASE("kraus file loading") {
  const char* path = "kraus_ad_test.txt";
  {
    std::ofstream f(path);
    f.precision(17);
    double g = 0.3;
    f << "2 2\n";
    f << "1 0 0 0\n0 0 " << std::sqrt(1.0 - g) << " 0\n";
    f << "0 0 " << std::sqrt(g) << " 0\n0 0 0 0\n";
  }
  KrausChannel ch = kraus_from_file(path);
  CHECK(ch.dim == 2);
  CHECK(!ch.unital);
  CHECK((superoperator(ch) - superoperator(amplitude_damping(0.3))).norm() < 1e-12);
  KrausChannel via_grammar = parse_channel(std::string("kraus(file=") + path + ")");
  CHECK((superoperator(via_grammar) - superoperator(ch)).norm() < 1e-12);
  std::remove(path);

  {
    std::ofstream f("kraus_bad_test.txt");
    f << "2 1\n1 0 0 0\n0 0 0.5 0\n";  // not trace preserving
  }
  CHECK_THROWS(kraus_from_file("kraus_bad_test.txt"));
  std::remove("kraus_bad_test.txt");
}
