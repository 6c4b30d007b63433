#include "renc/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace renc {

namespace {

double ipow(int m, int e) { return std::pow(double(m), e); }

size_t upow(int m, int e) {
  size_t r = 1;
  for (int i = 0; i < e; ++i) r *= m;
  return r;
}

// ---- shared precomputation -------------------------------------------------

struct Boundary {
  std::vector<double> logical;  // bottom value per sigma (logical sites)
  std::vector<double> ancilla;
  int top_perm = 0;   // row of the link overlap used at the top
  unsigned mask = 0;  // replicas the channel acts on
};

struct Ctx {
  LatticeSpec spec;
  const SymmetricGroup* G = nullptr;
  int m = 0, d = 0, N = 0, k = 0;
  Eigen::MatrixXd Wg;
  Eigen::MatrixXd L[3];          // link overlap with n channel insertions
  std::vector<double> top[3];    // top[n][pi] = L[n](top_perm, pi)
  std::map<std::pair<int, int>, GateTensor> gates;  // keyed by (n_left, n_right)
  double mem_limit_bytes = 0;

  Ctx(const LatticeSpec& s, Target target) : spec(s) {
    spec.validate();
    if (target == Target::Fidelity &&
        (spec.setup != Setup::II || spec.alpha != 2))
      throw std::invalid_argument("fidelity target requires setup II, alpha=2");
    d = spec.local_dim;
    N = spec.n_sites;
    k = spec.k_logical;
    G = &SymmetricGroup::get(spec.alpha);
    m = G->size();
    Wg = weingarten(d * d, spec.alpha);
    mem_limit_bytes = spec.mem_limit_gb * 1024.0 * 1024.0 * 1024.0;

    const int alpha = spec.alpha;
    unsigned mask =
        (target == Target::Fidelity) ? 1u : all_replicas(alpha);
    Eigen::MatrixXcd super = superoperator(spec.channel);
    Eigen::MatrixXcd p = Eigen::MatrixXcd::Identity(super.rows(), super.cols());
    for (int n = 0; n < 3; ++n) {
      L[n] = overlap_with_superop(p, d, alpha, mask);
      p = (super * p).eval();
    }

    // bottom boundary values <<sigma|v_site>>
    Boundary bc;
    bc.mask = mask;
    const int e = G->identity_index();
    const int cyc = G->canonical_cycle_index();
    auto perm_overlap = [&](int tau, int sigma) {
      return ipow(d, G->rel_cycles(tau, sigma) - alpha);
    };
    std::vector<double> mixed(m), cycled(m), zeros(m, 1.0);
    for (int s = 0; s < m; ++s) {
      mixed[s] = perm_overlap(e, s);    // d^{-alpha} <<sigma|e>>
      cycled[s] = perm_overlap(cyc, s); // d^{-alpha} <<sigma|cycle>>
    }
    switch (target) {
      case Target::PurityB:
      case Target::Trace:
        bc.logical = mixed;
        bc.ancilla = zeros;
        break;
      case Target::PurityRB:
        bc.logical = cycled;
        bc.ancilla = zeros;
        break;
      case Target::HolevoMixed:
        bc.logical = bc.ancilla = mixed;
        break;
      case Target::HolevoZero:
      case Target::Fidelity:
        bc.logical = bc.ancilla = zeros;
        break;
    }
    bc.top_perm = (target == Target::Trace) ? e : cyc;
    boundary = bc;
    for (int n = 0; n < 3; ++n) {
      top[n].resize(m);
      for (int pi = 0; pi < m; ++pi) top[n][pi] = L[n](bc.top_perm, pi);
    }
  }

  Boundary boundary;

  const std::vector<double>& bottom(int site) const {
    return site < k ? boundary.logical : boundary.ancilla;
  }

  int link_n(int gap) const { return spec.setup == Setup::II ? gap : 0; }

  int top_n(int src_layer, int t_now) const {
    return spec.setup == Setup::II ? t_now - src_layer + 1 : 1;
  }

  const GateTensor& gate(int n_left, int n_right) {
    auto key = std::make_pair(n_left, n_right);
    auto it = gates.find(key);
    if (it != gates.end()) return it->second;
    GateTensor t;
    t.m = m;
    t.w.assign(size_t(m) * m * m, 0.0);
    for (int pi = 0; pi < m; ++pi)
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) {
          double acc = 0.0;
          for (int s = 0; s < m; ++s)
            acc += Wg(pi, s) * L[n_left](s, a) * L[n_right](s, b);
          t.w[(size_t(pi) * m + a) * m + b] = acc;
        }
    return gates.emplace(key, std::move(t)).first->second;
  }

  void check_mem(int slots, int buffers) const {
    double bytes = double(buffers) * ipow(m, slots) * sizeof(double);
    if (bytes > mem_limit_bytes) {
      std::ostringstream os;
      os << "contraction state " << slots << " spins of " << m
         << " states needs " << bytes / (1024.0 * 1024.0 * 1024.0)
         << " GB, limit " << spec.mem_limit_gb << " GB";
      throw std::runtime_error(os.str());
    }
  }
};

// ---- time-direction transfer -----------------------------------------------
//
// State over the up-spins of gates with open legs. Slot 0 is the fastest
// index; new gate spins are inserted at the front.

struct TimeEngine {
  Ctx& c;
  std::vector<double> data{1.0};
  std::vector<double> scratch;
  std::vector<int> ids;           // ids[pos], pos 0 fastest
  std::vector<int> legs_of_id;    // open legs per slot id
  std::vector<int> site_id, site_layer;
  double log_scale = 0.0;
  int next_id = 0;

  explicit TimeEngine(Ctx& ctx) : c(ctx) {
    site_id.assign(c.N, -1);
    site_layer.assign(c.N, 0);
  }

  int pos_of(int id) const {
    for (size_t p = 0; p < ids.size(); ++p)
      if (ids[p] == id) return int(p);
    throw std::logic_error("slot id not found");
  }

  void insert_front(int id) {
    c.check_mem(int(ids.size()) + 1, 2);
    const int m = c.m;
    scratch.resize(data.size() * m);
    for (size_t i = 0; i < data.size(); ++i)
      for (int v = 0; v < m; ++v) scratch[i * m + v] = data[i];
    data.swap(scratch);
    ids.insert(ids.begin(), id);
  }

  void sum_out(int pos) {
    const int m = c.m;
    const size_t stride = upow(m, pos);
    const size_t nhi = data.size() / (stride * m);
    scratch.resize(data.size() / m);
    for (size_t hi = 0; hi < nhi; ++hi)
      for (size_t lo = 0; lo < stride; ++lo) {
        double acc = 0.0;
        for (int v = 0; v < m; ++v)
          acc += data[(hi * m + v) * stride + lo];
        scratch[hi * stride + lo] = acc;
      }
    data.swap(scratch);
    ids.erase(ids.begin() + pos);
  }

  // multiply by f[digit at pos]
  void multiply1(int pos, const double* f) {
    const int m = c.m;
    const size_t stride = upow(m, pos);
    const size_t nhi = data.size() / (stride * m);
    for (size_t hi = 0; hi < nhi; ++hi)
      for (int v = 0; v < m; ++v) {
        double* p = data.data() + (hi * m + v) * stride;
        const double fv = f[v];
        for (size_t lo = 0; lo < stride; ++lo) p[lo] *= fv;
      }
  }

  // multiply by T(c, a, a) with c at pos 0 and a at pos pa > 0
  void multiply2(int pa, const GateTensor& T) {
    const int m = c.m;
    const size_t mid = upow(m, pa - 1);  // slots strictly between 0 and pa
    const size_t nhi = data.size() / (mid * m * m);
    std::vector<double> col(m);
    size_t idx = 0;
    for (size_t hi = 0; hi < nhi; ++hi)
      for (int a = 0; a < m; ++a) {
        for (int v = 0; v < m; ++v) col[v] = T(v, a, a);
        for (size_t lo = 0; lo < mid; ++lo)
          for (int v = 0; v < m; ++v) data[idx++] *= col[v];
      }
  }

  // multiply by T(c, a, b): c at pos 0, a at pa, b at pb, 0 < pa < pb
  void multiply3(int pa, int pb, const GateTensor& T) {
    const int m = c.m;
    const size_t n1 = upow(m, pa - 1);       // between c and a
    const size_t n2 = upow(m, pb - pa - 1);  // between a and b
    const size_t nhi = data.size() / (n1 * n2 * size_t(m) * m * m);
    std::vector<double> col(m);
    size_t idx = 0;
    for (size_t hi = 0; hi < nhi; ++hi)
      for (int b = 0; b < m; ++b)
        for (size_t m2 = 0; m2 < n2; ++m2)
          for (int a = 0; a < m; ++a) {
            for (int v = 0; v < m; ++v) col[v] = T(v, a, b);
            for (size_t m1 = 0; m1 < n1; ++m1)
              for (int v = 0; v < m; ++v) data[idx++] *= col[v];
          }
  }

  void renormalize() {
    double mx = 0.0;
    for (double v : data) mx = std::max(mx, std::abs(v));
    if (mx <= 0.0)
      throw std::runtime_error("transfer state vanished");
    for (double& v : data) v /= mx;
    log_scale += std::log(mx);
  }

  void apply_layer(int layer) {
    const int start = (layer % 2 == 1) ? 0 : 1;
    for (int u = start; u + 1 < c.N; u += 2) {
      const int v = u + 1;
      const int id = next_id++;
      if (layer == 1) {
        insert_front(id);
        // fold the Weingarten sum with both bottom vectors
        std::vector<double> t1(c.m, 0.0);
        const auto& bu = c.bottom(u);
        const auto& bv = c.bottom(v);
        for (int pi = 0; pi < c.m; ++pi)
          for (int s = 0; s < c.m; ++s)
            t1[pi] += c.Wg(pi, s) * bu[s] * bv[s];
        multiply1(0, t1.data());
      } else {
        const int id_a = site_id[u], id_b = site_id[v];
        const int na = c.link_n(layer - site_layer[u]);
        const int nb = c.link_n(layer - site_layer[v]);
        const GateTensor& T = c.gate(na, nb);
        insert_front(id);
        if (id_a == id_b) {
          multiply2(pos_of(id_a), T);
          legs_of_id[id_a] -= 2;
        } else {
          int pa = pos_of(id_a), pb = pos_of(id_b);
          if (pa < pb)
            multiply3(pa, pb, T);
          else {
            // swap the roles of the two legs: T with a<->b swapped links
            const GateTensor& Ts = c.gate(nb, na);
            multiply3(pb, pa, Ts);
          }
          legs_of_id[id_a] -= 1;
          legs_of_id[id_b] -= 1;
        }
        if (legs_of_id[id_a] == 0) sum_out(pos_of(id_a));
        if (id_b != id_a && legs_of_id[id_b] == 0) sum_out(pos_of(id_b));
      }
      legs_of_id.resize(next_id, 0);
      legs_of_id[id] = 2;
      site_id[u] = site_id[v] = id;
      site_layer[u] = site_layer[v] = layer;
    }
    renormalize();
  }

  double close(int t_now) const {
    std::vector<double> closed = data;
    // per-site top vectors; two sites may share a slot, factors multiply
    for (int x = 0; x < c.N; ++x) {
      const int n = c.top_n(site_layer[x], t_now);
      if (n > 2) throw std::logic_error("unexpected top gap");
      const double* w = c.top[n].data();
      const int pos = pos_of(site_id[x]);
      const int m = c.m;
      const size_t stride = upow(m, pos);
      const size_t nhi = closed.size() / (stride * m);
      for (size_t hi = 0; hi < nhi; ++hi)
        for (int v = 0; v < m; ++v) {
          double* p = closed.data() + (hi * m + v) * stride;
          for (size_t lo = 0; lo < stride; ++lo) p[lo] *= w[v];
        }
    }
    double total = 0.0;
    for (double v : closed) total += v;
    if (!(total > 0.0))
      throw std::runtime_error("contraction value is not positive");
    return std::log(total) + log_scale;
  }
};

std::vector<double> run_time(Ctx& c, const std::vector<int>& depths) {
  TimeEngine eng(c);
  std::vector<double> out;
  size_t next = 0;
  for (int layer = 1; layer <= depths.back(); ++layer) {
    eng.apply_layer(layer);
    while (next < depths.size() && depths[next] == layer) {
      out.push_back(eng.close(layer));
      ++next;
    }
  }
  return out;
}

// ---- space-direction transfer -----------------------------------------------
//
// State over the (pi, sigma) pairs of gates straddling a vertical cut,
// ordered by layer with the lowest layer fastest; within a pair pi is
// faster than sigma. Columns are absorbed one site at a time; completed
// gates carry the Weingarten weight when consumed.

struct SpaceEngine {
  Ctx& c;
  std::vector<double> data{1.0};
  std::vector<double> scratch;
  int nslots = 0;
  double log_scale = 0.0;

  explicit SpaceEngine(Ctx& ctx) : c(ctx) {}

  // replace the k_in fastest slots by k_out new ones via kernel
  void contract_front(int k_in, int k_out, const Eigen::MatrixXd& kernel) {
    const size_t rin = upow(c.m, k_in);
    const size_t rout = upow(c.m, k_out);
    const size_t rest = data.size() / rin;
    const double projected =
        (double(rest) * rout + double(data.size())) * sizeof(double);
    if (projected > c.mem_limit_bytes) {
      std::ostringstream os;
      os << "space transfer needs " << projected / (1024.0 * 1024.0 * 1024.0)
         << " GB at " << nslots - k_in + k_out << " spins of " << c.m
         << " states, limit " << c.spec.mem_limit_gb << " GB";
      throw std::runtime_error(os.str());
    }
    scratch.resize(rest * rout);
    Eigen::Map<const Eigen::MatrixXd> in(data.data(), rin, rest);
    Eigen::Map<Eigen::MatrixXd> out(scratch.data(), rout, rest);
    out.noalias() = kernel * in;
    data.swap(scratch);
    nslots += k_out - k_in;
  }

  // [b, pi, sigma, rest] -> [b, rest, pi, sigma]
  void move_pair_back() {
    const int m = c.m;
    const size_t P = size_t(m) * m;
    const size_t rest = data.size() / (m * P);
    scratch.resize(data.size());
    for (size_t pr = 0; pr < P; ++pr)
      for (size_t r = 0; r < rest; ++r)
        for (int b = 0; b < m; ++b)
          scratch[b + m * (r + rest * pr)] = data[b + m * (pr + P * r)];
    data.swap(scratch);
  }

  void renormalize() {
    double mx = 0.0;
    for (double v : data) mx = std::max(mx, std::abs(v));
    if (mx <= 0.0) throw std::runtime_error("transfer state vanished");
    for (double& v : data) v /= mx;
    log_scale += std::log(mx);
  }

  void absorb_column(int x) {
    const int m = c.m;
    const int t = c.spec.depth_t;
    const bool edge = (x == 0 || x == c.N - 1);
    std::vector<int> layers;
    for (int l = 1; l <= t; ++l)
      if (!edge || l % 2 == 1) layers.push_back(l);

    int prev_layer = 0;
    for (size_t i = 0; i < layers.size(); ++i) {
      const int l = layers[i];
      // does the gate covering x at layer l have x as its right site?
      const bool is_in = (l % 2 == 1) ? (x % 2 == 1) : (x % 2 == 0);
      if (i == 0) {
        const auto& v = c.bottom(x);
        if (is_in) {
          Eigen::MatrixXd kern(m, m * m);
          for (int b = 0; b < m; ++b)
            for (int pi = 0; pi < m; ++pi)
              for (int s = 0; s < m; ++s)
                kern(b, pi + m * s) = (b == pi) ? c.Wg(pi, s) * v[s] : 0.0;
          contract_front(2, 1, kern);
        } else {
          Eigen::MatrixXd kern(m * m * m, 1);
          kern.setZero();
          for (int pi = 0; pi < m; ++pi)
            for (int s = 0; s < m; ++s)
              kern(pi + m * (pi + m * s), 0) = v[s];
          contract_front(0, 3, kern);
          move_pair_back();
        }
      } else {
        const int n = c.link_n(l - prev_layer);
        if (is_in) {
          Eigen::MatrixXd kern(m, m * m * m);
          kern.setZero();
          for (int b = 0; b < m; ++b)
            for (int pi = 0; pi < m; ++pi)
              for (int s = 0; s < m; ++s)
                kern(pi, b + m * (pi + m * s)) = c.Wg(pi, s) * c.L[n](s, b);
          contract_front(3, 1, kern);
        } else {
          Eigen::MatrixXd kern(m * m * m, m);
          kern.setZero();
          for (int b = 0; b < m; ++b)
            for (int pi = 0; pi < m; ++pi)
              for (int s = 0; s < m; ++s)
                kern(pi + m * (pi + m * s), b) = c.L[n](s, b);
          contract_front(1, 3, kern);
          move_pair_back();
        }
      }
      prev_layer = l;
    }
    // top closure of this site; the bond carries the last gate's pi
    const int n_top = c.top_n(prev_layer, t);
    if (n_top > 2) throw std::logic_error("unexpected top gap");
    Eigen::MatrixXd kern(1, m);
    for (int b = 0; b < m; ++b) kern(0, b) = c.top[n_top][b];
    contract_front(1, 0, kern);
    renormalize();
  }

  double run() {
    for (int x = 0; x < c.N; ++x) absorb_column(x);
    if (nslots != 0) throw std::logic_error("unconsumed slots after last column");
    if (!(data[0] > 0.0))
      throw std::runtime_error("contraction value is not positive");
    return std::log(data[0]) + log_scale;
  }
};

Direction pick_direction(const Ctx& c) {
  const LatticeSpec& s = c.spec;
  if (s.direction != Direction::Auto) return s.direction;
  const int time_slots = s.n_sites / 2 + 2;
  const int space_slots = 2 * ((s.depth_t + 1) / 2) + 3;
  const double lim = c.mem_limit_bytes / sizeof(double) / 2.0;
  const bool time_ok = ipow(c.m, time_slots) <= lim;
  const bool space_ok = ipow(c.m, space_slots) <= lim;
  if (time_ok && (!space_ok || time_slots <= space_slots)) return Direction::Time;
  if (space_ok) return Direction::Space;
  c.check_mem(std::min(time_slots, space_slots), 2);  // throws with report
  return Direction::Time;
}

}  // namespace

void LatticeSpec::validate() const {
  if (n_sites < 2 || n_sites % 2 != 0)
    throw std::invalid_argument("n_sites must be even and >= 2");
  if (k_logical < 0 || k_logical > n_sites)
    throw std::invalid_argument("k_logical out of range");
  if (depth_t < 1) throw std::invalid_argument("depth_t must be >= 1");
  if (local_dim < 2) throw std::invalid_argument("local_dim must be >= 2");
  if (alpha < 2 || alpha > 3)
    throw std::invalid_argument("alpha must be 2 or 3");
  if (channel.kraus.empty()) throw std::invalid_argument("channel is empty");
  if (channel.dim != local_dim)
    throw std::invalid_argument("channel dimension mismatch");
}

GateTensor gate_tensor(int d, int alpha, const Eigen::MatrixXd& link_overlap) {
  const auto& g = SymmetricGroup::get(alpha);
  const int m = g.size();
  if (link_overlap.rows() != m || link_overlap.cols() != m)
    throw std::invalid_argument("gate_tensor: link overlap has wrong size");
  Eigen::MatrixXd wg = weingarten(d * d, alpha);
  GateTensor t;
  t.m = m;
  t.w.assign(size_t(m) * m * m, 0.0);
  for (int pi = 0; pi < m; ++pi)
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) {
        double acc = 0.0;
        for (int s = 0; s < m; ++s)
          acc += wg(pi, s) * link_overlap(s, a) * link_overlap(s, b);
        t.w[(size_t(pi) * m + a) * m + b] = acc;
      }
  return t;
}

double contract(const LatticeSpec& spec, Target target) {
  Ctx c(spec, target);
  switch (pick_direction(c)) {
    case Direction::Space:
      return SpaceEngine(c).run();
    default:
      return run_time(c, {spec.depth_t}).front();
  }
}

std::vector<double> contract_depths(const LatticeSpec& spec, Target target,
                                    const std::vector<int>& depths) {
  if (depths.empty()) return {};
  for (size_t i = 0; i + 1 < depths.size(); ++i)
    if (depths[i] >= depths[i + 1])
      throw std::invalid_argument("depths must be strictly increasing");
  LatticeSpec s = spec;
  s.depth_t = depths.back();
  Ctx c(s, target);
  if (pick_direction(c) == Direction::Space) {
    std::vector<double> out;
    for (int t : depths) {
      LatticeSpec st = spec;
      st.depth_t = t;
      out.push_back(contract(st, target));
    }
    return out;
  }
  return run_time(c, depths);
}

double coherent_info(const LatticeSpec& spec) {
  const double ld = std::log(double(spec.local_dim));
  double lb = contract(spec, Target::PurityB) / ld;
  double lrb = contract(spec, Target::PurityRB) / ld;
  return (lb - lrb) / (1.0 - spec.alpha);
}

double holevo_info(const LatticeSpec& spec) {
  const double ld = std::log(double(spec.local_dim));
  double lmix = contract(spec, Target::HolevoMixed) / ld;
  double lzero = contract(spec, Target::HolevoZero) / ld;
  return lzero - lmix;
}

FidelityResult fidelity_f2(const LatticeSpec& spec) {
  if (spec.setup != Setup::II)
    throw std::invalid_argument("fidelity_f2: setup II only");
  LatticeSpec s = spec;
  s.alpha = 2;  // the fidelity replica pair is clean vs noisy
  FidelityResult r;
  const double ld = std::log(double(s.local_dim));
  double logF = contract(s, Target::Fidelity);
  r.F = std::exp(logF);
  const double floor = std::pow(double(s.local_dim), -s.n_sites);
  const double ftilde = r.F - floor;
  if (ftilde <= 0.0) {
    r.below_floor = true;
    r.f2 = std::numeric_limits<double>::infinity();
    return r;
  }
  r.f2 = -2.0 / s.n_sites * std::log(ftilde) / ld;
  return r;
}

}  // namespace renc
