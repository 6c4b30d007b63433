#pragma once

#include <Eigen/Dense>
#include <vector>

// Symmetric-group enumeration and Weingarten calculus for replica sums.
//
// Conventions: permutations act on {0..alpha-1} and are stored in one-line
// notation (images[i] = p(i)). Overlap matrices follow
//   G(q)[pi][sigma] = q^{#cycles(pi^{-1} sigma)},
// i.e. the inner product <<pi|sigma>> of vectorized permutation operators
// on a q-dimensional local space.

namespace renc {

struct Permutation {
  std::vector<int> images;   // one-line notation
  int alpha = 0;
  int cycle_count = 0;
  int fixed_points = 0;      // number of 1-cycles
  bool is_identity = false;
  bool is_canonical_cycle = false;  // the full cycle (2 3 ... alpha 1)
};

// Cached enumeration of S_alpha with a composition table.
// Elements are ordered with the identity first; ordering is deterministic.
class SymmetricGroup {
 public:
  // alpha in [2,6]; throws std::invalid_argument otherwise.
  static const SymmetricGroup& get(int alpha);

  int alpha() const { return alpha_; }
  int size() const { return static_cast<int>(elements_.size()); }
  const std::vector<Permutation>& elements() const { return elements_; }
  const Permutation& element(int i) const { return elements_[i]; }

  // index of p*q (apply q first, then p)
  int compose(int p, int q) const { return compose_(p, q); }
  int inverse(int p) const { return inverse_[p]; }
  int identity_index() const { return 0; }
  int canonical_cycle_index() const { return cycle_index_; }

  // #cycles of elements[p]^{-1} * elements[q]
  int rel_cycles(int p, int q) const {
    return elements_[compose_(inverse_[p], q)].cycle_count;
  }

 private:
  explicit SymmetricGroup(int alpha);
  int alpha_;
  std::vector<Permutation> elements_;
  Eigen::MatrixXi compose_;
  std::vector<int> inverse_;
  int cycle_index_;
};

// (cycle_count, fixed_points) of a one-line-notation permutation.
std::pair<int, int> cycle_stats(const std::vector<int>& images);

// All alpha! elements, identity first; canonical full cycle flagged.
std::vector<Permutation> enumerate_group(int alpha);

// Clean overlap (Gram) matrix G(q) over S_alpha. Entries are exact
// integers represented in double.
Eigen::MatrixXd gram(int q, int alpha);

// Moore-Penrose pseudo-inverse of gram(q, alpha), computed by
// eigendecomposition with a relative cutoff of 1e-12.
// Throws std::runtime_error if every eigenvalue falls below the cutoff.
Eigen::MatrixXd weingarten(int q, int alpha);

// Pseudo-inverse of an arbitrary symmetric PSD overlap matrix (same
// cutoff rule as weingarten()).
Eigen::MatrixXd pseudo_inverse_sym(const Eigen::MatrixXd& m);

}  // namespace renc
