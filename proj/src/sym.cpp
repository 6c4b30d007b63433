#include "renc/sym.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <numeric>
#include <stdexcept>

namespace renc {

std::pair<int, int> cycle_stats(const std::vector<int>& images) {
  const int n = static_cast<int>(images.size());
  std::vector<char> seen(n, 0);
  int cycles = 0, fixed = 0;
  for (int i = 0; i < n; ++i) {
    if (seen[i]) continue;
    int len = 0;
    for (int j = i; !seen[j]; j = images[j]) {
      seen[j] = 1;
      ++len;
    }
    ++cycles;
    if (len == 1) ++fixed;
  }
  return {cycles, fixed};
}

std::vector<Permutation> enumerate_group(int alpha) {
  if (alpha < 2 || alpha > 6)
    throw std::invalid_argument("enumerate_group: alpha must be in [2,6]");
  std::vector<int> base(alpha);
  std::iota(base.begin(), base.end(), 0);

  std::vector<int> cycle(alpha);  // (2 3 ... alpha 1) in one-line notation
  for (int i = 0; i < alpha; ++i) cycle[i] = (i + 1) % alpha;

  std::vector<Permutation> out;
  std::vector<int> p = base;
  do {
    Permutation perm;
    perm.images = p;
    perm.alpha = alpha;
    auto [c, f] = cycle_stats(p);
    perm.cycle_count = c;
    perm.fixed_points = f;
    perm.is_identity = (p == base);
    perm.is_canonical_cycle = (p == cycle);
    out.push_back(std::move(perm));
  } while (std::next_permutation(p.begin(), p.end()));
  // identity is first already: next_permutation enumerates in lexicographic
  // order starting from the identity.
  return out;
}

SymmetricGroup::SymmetricGroup(int alpha) : alpha_(alpha) {
  elements_ = enumerate_group(alpha);
  const int n = size();
  std::map<std::vector<int>, int> index;
  for (int i = 0; i < n; ++i) index[elements_[i].images] = i;

  compose_.resize(n, n);
  inverse_.resize(n);
  cycle_index_ = -1;
  std::vector<int> tmp(alpha);
  for (int i = 0; i < n; ++i) {
    if (elements_[i].is_canonical_cycle) cycle_index_ = i;
    const auto& pi = elements_[i].images;
    for (int j = 0; j < n; ++j) {
      const auto& pj = elements_[j].images;
      for (int s = 0; s < alpha; ++s) tmp[s] = pi[pj[s]];
      compose_(i, j) = index.at(tmp);
    }
    for (int s = 0; s < alpha; ++s) tmp[elements_[i].images[s]] = s;
    inverse_[i] = index.at(tmp);
  }
}

const SymmetricGroup& SymmetricGroup::get(int alpha) {
  if (alpha < 2 || alpha > 6)
    throw std::invalid_argument("SymmetricGroup: alpha must be in [2,6]");
  static std::map<int, std::unique_ptr<SymmetricGroup>> cache;
  auto it = cache.find(alpha);
  if (it == cache.end()) {
    it = cache.emplace(alpha, std::unique_ptr<SymmetricGroup>(
                                  new SymmetricGroup(alpha)))
             .first;
  }
  return *it->second;
}

Eigen::MatrixXd gram(int q, int alpha) {
  if (q < 2) throw std::invalid_argument("gram: q must be >= 2");
  const auto& g = SymmetricGroup::get(alpha);
  const int n = g.size();
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      m(i, j) = std::pow(static_cast<double>(q), g.rel_cycles(i, j));
  return m;
}

Eigen::MatrixXd pseudo_inverse_sym(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  const auto& vals = es.eigenvalues();
  const double cutoff = 1e-12 * vals.cwiseAbs().maxCoeff();
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(vals.size());
  int rank = 0;
  for (int i = 0; i < vals.size(); ++i) {
    if (std::abs(vals[i]) > cutoff) {
      inv[i] = 1.0 / vals[i];
      ++rank;
    }
  }
  if (rank == 0)
    throw std::runtime_error("pseudo_inverse_sym: matrix has numerical rank 0");
  return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

Eigen::MatrixXd weingarten(int q, int alpha) {
  return pseudo_inverse_sym(gram(q, alpha));
}

}  // namespace renc
