#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <vector>

#include "renc/sym.hpp"

// Single-qudit channels as Kraus sets, noisy permutation overlaps,
// boundary cost exponents and Hashing bounds.

namespace renc {

struct KrausChannel {
  int dim = 2;
  std::vector<Eigen::MatrixXcd> kraus;
  std::string label = "custom";  // depolarizing | amplitude-damping | pauli | custom
  std::vector<double> params;
  bool unital = false;

  bool is_identity() const;
};

KrausChannel identity_channel(int d);
KrausChannel depolarizing(int d, double gamma);
KrausChannel amplitude_damping(double gamma);
KrausChannel pauli_channel(double p0, double p1, double p2, double p3);
KrausChannel kraus_from_file(const std::string& path);

// Parses the CLI channel grammar:
//   depolarizing(gamma=0.1) | amplitude_damping(gamma=0.1)
//   | pauli(p=[p0,p1,p2,p3]) | kraus(file=path)
KrausChannel parse_channel(const std::string& text);
std::string channel_to_string(const KrausChannel& ch);

// Superoperator matrix, d^2 x d^2, acting on vec(rho) with (ket,bra)
// index order: M[(i,i'),(j,j')] = sum_a K_a[i][j] conj(K_a)[i'][j'].
Eigen::MatrixXcd superoperator(const KrausChannel& ch);

// Overlap matrix <<pi| M^{affected} (x) Id^{rest} |sigma>> over S_alpha,
// where M is a single-site superoperator applied to the replicas whose
// bits are set in `affected_mask`.
Eigen::MatrixXd overlap_with_superop(const Eigen::MatrixXcd& super, int d,
                                     int alpha, unsigned affected_mask);

// Noisy permutation overlap matrix; affected_mask selects replicas
// (all bits set -> noisy Gram, one bit -> single-replica overlap,
// none -> clean Gram).
Eigen::MatrixXd noisy_overlap(const KrausChannel& ch, int alpha,
                              unsigned affected_mask);

inline unsigned all_replicas(int alpha) { return (1u << alpha) - 1u; }

struct CostExponents {
  double g_se = 0.0;  // swap row, identity column
  double g_ss = 0.0;
  double g_es = 0.0;  // identity row, swap column
};

// g[pi][sigma] = log_d G[pi][sigma] - log_d Gtilde[pi][sigma] at alpha=2.
// Throws std::runtime_error if a noisy Gram entry is not positive.
CostExponents cost_exponents(const KrausChannel& ch);

// H2 = g_ss - g_se (Hashing bound in log_d units).
double hashing_h2(const KrausChannel& ch);

// Closed-form alpha-replica Hashing bound; depolarizing family only.
double hashing_h_alpha(int d, double gamma, int alpha);

}  // namespace renc
