#pragma once

#include <Eigen/Dense>
#include <vector>

#include "renc/noise.hpp"
#include "renc/sym.hpp"

// Exact contraction of the replica permutation-spin lattice for finite-depth
// brickwork circuits. Each two-site Haar gate is replaced by a spin over
// S_alpha weighted with Weingarten(d^2); vertical links carry permutation
// overlaps with the channel inserted per setup. Two exact contraction
// directions are provided: a time-direction transfer over one row of gate
// spins (state dimension |S_alpha|^{N/2+1}) and a space-direction transfer
// over one column of straddled gates (dimension |S_alpha|^{t+1}).

namespace renc {

enum class Setup { I, II };
enum class Direction { Time, Space, Auto };

enum class Target {
  PurityB,      // E Tr rho_B^alpha
  PurityRB,     // E Tr rho_RB^alpha
  HolevoMixed,  // E Tr Lambda(I/d^N)^alpha
  HolevoZero,   // E Tr Lambda(|0..0><0..0|)^alpha
  Fidelity,     // E <psi_clean| rho_noisy |psi_clean>, setup II
  Trace         // identity top boundary; exactly 1 for any channel
};

struct LatticeSpec {
  int n_sites = 4;        // N, even
  int k_logical = 1;      // contiguous logical block at sites 0..k-1
  int depth_t = 1;        // brick layers; layer 1 couples (0,1),(2,3),...
  int local_dim = 2;      // d
  int alpha = 2;          // replica count
  Setup setup = Setup::I;
  KrausChannel channel;
  Direction direction = Direction::Auto;
  double mem_limit_gb = 3.0;

  void validate() const;  // throws std::invalid_argument
};

struct GateTensor {
  int m = 0;
  std::vector<double> w;  // w[(pi*m + a)*m + b]
  double operator()(int pi, int a, int b) const { return w[(pi * m + a) * m + b]; }
};

// T[pi][a][b] = sum_sigma Wg_{pi,sigma}(d^2) M[sigma][a] M[sigma][b],
// with M the per-site link overlap shared by both legs.
GateTensor gate_tensor(int d, int alpha, const Eigen::MatrixXd& link_overlap);

// Natural log of the exact contraction value. Throws std::runtime_error
// when the required state exceeds spec.mem_limit_gb (with a size report)
// or the contraction yields a non-positive value.
double contract(const LatticeSpec& spec, Target target);

// One time-direction sweep closed at every requested depth (ascending).
// Cheaper than repeated contract() calls when scanning depth.
std::vector<double> contract_depths(const LatticeSpec& spec, Target target,
                                    const std::vector<int>& depths);

// Annealed alpha-Renyi coherent information in units of log_d:
//   I_c = (log_d E Tr rho_B^a - log_d E Tr rho_RB^a) / (1 - alpha).
double coherent_info(const LatticeSpec& spec);

// chi = log_d E Tr Lambda(|0..0>)^2 - log_d E Tr Lambda(I/d^N)^2.
double holevo_info(const LatticeSpec& spec);

struct FidelityResult {
  double F = 0.0;
  double f2 = 0.0;          // -(2/N) log_d (F - d^{-N})
  bool below_floor = false; // F - d^{-N} <= 0: indistinguishable from random
};

// Setup II only; throws std::invalid_argument otherwise.
FidelityResult fidelity_f2(const LatticeSpec& spec);

}  // namespace renc
