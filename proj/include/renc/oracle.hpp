#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "renc/lattice.hpp"

// Brute-force Monte Carlo ground truth: sampled Haar circuits evolved as
// statevectors, with channels applied exactly (setup I) or as paired
// independent Kraus unravelings (setup II), plus noiseless frame potentials.

namespace renc {

// Philox4x32-10 counter-based generator; UniformRandomBitGenerator over
// uint64. Identical (key, stream) always reproduces the same sequence.
class Philox {
 public:
  using result_type = std::uint64_t;
  explicit Philox(std::uint64_t key, std::uint64_t stream = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type(0); }
  result_type operator()();

  double uniform();       // (0, 1]
  double gaussian();      // standard normal, Box-Muller

 private:
  void refill();
  std::uint32_t key_[2];
  std::uint32_t ctr_[4];
  std::uint64_t out_[2];
  int avail_ = 0;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Decorrelated stream id for sample `index` under a run seed (splitmix64).
std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t index);

// Haar-distributed d^2 x d^2 unitary: QR of a complex Gaussian matrix with
// the R diagonal phase divided out.
Eigen::MatrixXcd sample_haar_gate(int d, Philox& rng);

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  long n_samples = 0;
};

// Monte Carlo estimate of the lattice target over sampled circuits.
// Setup I evolves a pure state and applies the end channels exactly, so
// circuit randomness is the only stochastic element. Setup II unravels the
// in-circuit channels into two independent Kraus trajectories per sample,
// which is unbiased for the replica pairings at the cost of extra variance.
McEstimate simulate_annealed(const LatticeSpec& spec, Target target,
                             long n_samples, std::uint64_t seed);

struct FrameResult {
  McEstimate estimate;          // F^(alpha), jackknife std error
  double delta_f = 0.0;         // estimate / haar_state_ensemble - 1
  double haar_state_ensemble;   // alpha! (D-1)!/(D+alpha-1)!
  double haar_printed;          // D^{-2 alpha} alpha!
};

// All-pairs U-statistic of |<psi'|psi>|^{2 alpha} over n_states noiseless
// circuits on |0...0>; t = 0 means no gates.
FrameResult frame_potential(int N, int t, int alpha, int n_states,
                            std::uint64_t seed);

// Both moments from one set of states and one overlap matrix.
std::vector<FrameResult> frame_potential_multi(int N, int t,
                                               const std::vector<int>& alphas,
                                               int n_states,
                                               std::uint64_t seed);

}  // namespace renc
