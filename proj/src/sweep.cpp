#include "renc/sweep.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <memory>
#include <sstream>
#include <thread>
#include <vector>

#include "renc/oracle.hpp"
#include "renc/rm.hpp"

namespace renc {

namespace {

std::string fmt_num(double x) {
  if (!std::isfinite(x)) throw std::runtime_error("non-finite value in row");
  if (x == 0.0) return "0";
  char buf[48];
  if (std::abs(x) < 1e-3)
    std::snprintf(buf, sizeof buf, "%.12e", x);
  else
    std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

std::string fmt_int(long x) { return std::to_string(x); }

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

const char* regime_name(Regime r) {
  switch (r) {
    case Regime::Protected: return "protected";
    case Regime::Critical: return "critical";
    case Regime::Lost: return "lost";
  }
  return "?";
}

struct Grid {
  std::vector<long> dims;
  long total() const {
    long t = 1;
    for (long d : dims) t *= d;
    return t;
  }
  std::vector<long> decode(long i) const {  // first axis slowest
    std::vector<long> ix(dims.size());
    for (size_t a = dims.size(); a-- > 0;) {
      ix[a] = i % dims[a];
      i /= dims[a];
    }
    return ix;
  }
};

struct ModePlan {
  std::vector<std::string> columns;
  long n_points = 0;
  std::function<std::vector<std::string>(long)> compute;
  std::function<std::string(long)> describe;
};

KrausChannel make_channel(const std::string& text, int d, double gamma) {
  if (text.find('(') != std::string::npos) return parse_channel(text);
  if (text == "depolarizing") return depolarizing(d, gamma);
  if (text == "amplitude_damping") {
    if (d != 2)
      throw ConfigError(0, "channel", "amplitude_damping requires d = 2");
    return amplitude_damping(gamma);
  }
  throw ConfigError(0, "channel", "unknown channel family '" + text + "'");
}

struct CommonAxes {
  std::vector<long> Ns, ts, alphas;
  std::vector<double> gammas, rs;
  std::string channel_text;
  bool full_channel = false;
  int d = 2;
  Setup setup = Setup::I;
  Direction dir = Direction::Auto;
  double mem_gb = 3.0;
  std::uint64_t seed = 1;
};

Direction parse_direction(const std::string& s) {
  if (s == "time") return Direction::Time;
  if (s == "space") return Direction::Space;
  if (s == "auto") return Direction::Auto;
  throw ConfigError(0, "direction", "expected time, space or auto");
}

CommonAxes common_axes(const Config& cfg, bool need_lattice_axes) {
  CommonAxes ax;
  ax.d = int(cfg.get_int("d", 2));
  ax.seed = std::uint64_t(cfg.get_int("seed", 1));
  ax.mem_gb = cfg.get_num("mem_limit_gb", 3.0);
  const std::string setup = cfg.get_str("setup", "I");
  if (setup == "I")
    ax.setup = Setup::I;
  else if (setup == "II")
    ax.setup = Setup::II;
  else
    throw ConfigError(0, "setup", "expected \"I\" or \"II\"");
  ax.dir = parse_direction(cfg.get_str("direction", "auto"));

  ax.channel_text = cfg.get_str("channel", "depolarizing");
  ax.full_channel = ax.channel_text.find('(') != std::string::npos;
  if (ax.full_channel) {
    if (cfg.has("gamma"))
      throw ConfigError(0, "gamma",
                        "gamma axis not allowed with a fully specified channel");
    ax.gammas = {0.0};
  } else {
    ax.gammas = cfg.get_nums("gamma");
  }
  ax.alphas = cfg.has("alpha") ? cfg.get_ints("alpha") : std::vector<long>{2};
  if (need_lattice_axes) {
    ax.Ns = cfg.get_ints("N");
    ax.ts = cfg.get_ints("t");
    ax.rs = cfg.get_nums("r");
    for (long N : ax.Ns)
      for (double r : ax.rs)
        if (std::abs(r * N - std::lround(r * N)) > 1e-9)
          throw ConfigError(0, "r",
                            "r*N must be an integer for every (r, N) pair");
  }
  return ax;
}

KrausChannel axis_channel(const CommonAxes& ax, double gamma) {
  return make_channel(ax.channel_text, ax.d, gamma);
}

LatticeSpec make_spec(const CommonAxes& ax, long N, long r_times_N, long t,
                      long alpha, const KrausChannel& ch) {
  LatticeSpec s;
  s.n_sites = int(N);
  s.k_logical = int(r_times_N);
  s.depth_t = int(t);
  s.local_dim = ax.d;
  s.alpha = int(alpha);
  s.setup = ax.setup;
  s.channel = ch;
  s.direction = ax.dir;
  s.mem_limit_gb = ax.mem_gb;
  return s;
}

// ---- lattice mode ---------------------------------------------------------

ModePlan plan_lattice(const Config& cfg) {
  auto ax = std::make_shared<CommonAxes>(common_axes(cfg, true));
  const bool want_holevo = cfg.get_bool("holevo", false);
  Grid grid{{long(ax->Ns.size()), long(ax->rs.size()), long(ax->ts.size()),
             long(ax->gammas.size()), long(ax->alphas.size())}};
  // every point must satisfy the lattice preconditions up front
  for (long i = 0; i < grid.total(); ++i) {
    auto ix = grid.decode(i);
    const long N = ax->Ns[ix[0]];
    const double r = ax->rs[ix[1]];
    try {
      make_spec(*ax, N, std::lround(r * N), ax->ts[ix[2]], ax->alphas[ix[4]],
                axis_channel(*ax, ax->gammas[ix[3]]))
          .validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(0, "", std::string("invalid sweep point: ") + e.what());
    }
  }

  ModePlan plan;
  plan.columns = {"setup",        "channel",       "gamma",
                  "N",            "k",             "r",
                  "t",            "alpha",         "H2",
                  "tau",          "log_purity_B",  "log_purity_RB",
                  "coherent_info", "holevo",       "F",
                  "f2",           "ic_deep",       "delta_ic",
                  "holevo_deep",  "delta_holevo",  "regime",
                  "seconds"};
  plan.n_points = grid.total();
  plan.describe = [ax, grid](long i) {
    auto ix = grid.decode(i);
    std::ostringstream os;
    os << "N=" << ax->Ns[ix[0]] << " r=" << ax->rs[ix[1]]
       << " t=" << ax->ts[ix[2]] << " gamma=" << ax->gammas[ix[3]]
       << " alpha=" << ax->alphas[ix[4]];
    return os.str();
  };
  plan.compute = [ax, grid, want_holevo](long i) {
    const auto t0 = std::chrono::steady_clock::now();
    auto ix = grid.decode(i);
    const long N = ax->Ns[ix[0]];
    const double r = ax->rs[ix[1]];
    const long t = ax->ts[ix[2]];
    const double gamma = ax->gammas[ix[3]];
    const long alpha = ax->alphas[ix[4]];
    const long k = std::lround(r * N);
    const KrausChannel ch = axis_channel(*ax, gamma);
    const LatticeSpec spec = make_spec(*ax, N, k, t, alpha, ch);
    const double ld = std::log(double(ax->d));

    const double lB = contract(spec, Target::PurityB);
    const double lRB = contract(spec, Target::PurityRB);
    const double ic = (lB - lRB) / ld / (1.0 - alpha);
    const CostExponents g = cost_exponents(ch);
    const double h2 = g.g_ss - g.g_se;

    std::string chi_cell, f_cell, f2_cell, icd_cell, dic_cell;
    std::string chid_cell, dchi_cell, regime_cell;
    if (spec.setup == Setup::II && alpha == 2) {
      const FidelityResult fr = fidelity_f2(spec);
      f_cell = fmt_num(fr.F);
      if (!fr.below_floor) {
        f2_cell = fmt_num(fr.f2);
        regime_cell = regime_name(rm_setup2(r, g, fr.f2, int(N), ax->d).regime);
      }
    }
    if (spec.setup == Setup::I) {
      regime_cell = regime_name(classify_setup1(r, g));
      if (alpha == 2) {
        const double icd = (deep_haar_log(spec, Target::PurityB) -
                            deep_haar_log(spec, Target::PurityRB)) /
                           ld / (1.0 - alpha);
        icd_cell = fmt_num(icd);
        dic_cell = fmt_num(ic - icd);
      }
    }
    if (want_holevo && alpha == 2) {
      const double chi = holevo_info(spec);
      chi_cell = fmt_num(chi);
      if (spec.setup == Setup::I) {
        const double chid = (deep_haar_log(spec, Target::HolevoZero) -
                             deep_haar_log(spec, Target::HolevoMixed)) /
                            ld;
        chid_cell = fmt_num(chid);
        dchi_cell = fmt_num(chi - chid);
      }
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    return std::vector<std::string>{
        ax->setup == Setup::I ? "I" : "II",
        channel_to_string(ch),
        ax->full_channel ? "" : fmt_num(gamma),
        fmt_int(N),
        fmt_int(k),
        fmt_num(r),
        fmt_int(t),
        fmt_int(alpha),
        fmt_num(h2),
        fmt_num(thouless_tau(ax->d)),
        fmt_num(lB),
        fmt_num(lRB),
        fmt_num(ic),
        chi_cell,
        f_cell,
        f2_cell,
        icd_cell,
        dic_cell,
        chid_cell,
        dchi_cell,
        regime_cell,
        fmt_num(secs)};
  };
  return plan;
}

// ---- rm mode ---------------------------------------------------------------

ModePlan plan_rm(const Config& cfg) {
  auto ax = std::make_shared<CommonAxes>(common_axes(cfg, false));
  auto rs = std::make_shared<std::vector<double>>(cfg.get_nums("r"));
  auto Ns = std::make_shared<std::vector<long>>(cfg.get_ints("N"));
  auto f2s = std::make_shared<std::vector<double>>(
      cfg.has("f2") ? cfg.get_nums("f2") : std::vector<double>{});
  const bool setup2 = !f2s->empty();
  for (long N : *Ns)
    for (double r : *rs)
      if (std::abs(r * N - std::lround(r * N)) > 1e-9)
        throw ConfigError(0, "r", "r*N must be an integer for every (r, N) pair");

  Grid grid{{long(Ns->size()), long(rs->size()), long(ax->gammas.size()),
             long(ax->alphas.size()), setup2 ? long(f2s->size()) : 1}};
  ModePlan plan;
  plan.columns = {"channel",      "gamma",         "r",
                  "N",            "alpha",         "f2",
                  "g_se",         "g_ss",          "g_es",
                  "H2",           "critical_f2",   "log_purity_B",
                  "log_purity_RB", "info_per_site", "holevo_per_site",
                  "regime",       "seconds"};
  plan.n_points = grid.total();
  plan.describe = [ax, Ns, rs, f2s, grid, setup2](long i) {
    auto ix = grid.decode(i);
    std::ostringstream os;
    os << "N=" << (*Ns)[ix[0]] << " r=" << (*rs)[ix[1]]
       << " gamma=" << ax->gammas[ix[2]] << " alpha=" << ax->alphas[ix[3]];
    if (setup2) os << " f2=" << (*f2s)[ix[4]];
    return os.str();
  };
  plan.compute = [ax, Ns, rs, f2s, grid, setup2](long i) {
    const auto t0 = std::chrono::steady_clock::now();
    auto ix = grid.decode(i);
    const long N = (*Ns)[ix[0]];
    const double r = (*rs)[ix[1]];
    const double gamma = ax->gammas[ix[2]];
    const long alpha = ax->alphas[ix[3]];
    const KrausChannel ch = axis_channel(*ax, gamma);
    const CostExponents g = cost_exponents(ch);
    const double ld = std::log(double(ax->d));

    std::string f2_cell, crit_cell, regime_cell, hol_cell;
    double lB = 0.0, lRB = 0.0, info = 0.0;
    if (setup2) {
      const double f2 = (*f2s)[ix[4]];
      f2_cell = fmt_num(f2);
      if (alpha == 2) {
        const RMSetup2 p = rm_setup2(r, g, f2, int(N), ax->d);
        lB = p.log_purity_B;
        lRB = p.log_purity_RB;
        info = p.info_per_site;
        crit_cell = fmt_num(p.critical_f2);
        regime_cell = regime_name(p.regime);
      } else {
        // f2 axis doubles as f_alpha for the higher-replica sums
        const double logF = -f2 * (alpha - 1.0) * N * ld / alpha;
        const AlphaMoments am = alpha_moments(r, int(N), int(alpha), logF, ax->d);
        lB = am.log_purity_B;
        lRB = am.log_purity_RB;
        info = am.coherent_info / N;
      }
    } else {
      const RMPrediction p = rm_purities_setup1(r, g, int(N), ax->d);
      lB = p.log_purity_B;
      lRB = p.log_purity_RB;
      info = p.info_per_site;
      crit_cell = fmt_num((1.0 - r) * (1.0 + g.g_se));
      regime_cell = regime_name(p.regime);
      hol_cell = fmt_num(rm_holevo(r, g));
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    return std::vector<std::string>{
        channel_to_string(ch),
        ax->full_channel ? "" : fmt_num(gamma),
        fmt_num(r),
        fmt_int(N),
        fmt_int(alpha),
        f2_cell,
        fmt_num(g.g_se),
        fmt_num(g.g_ss),
        fmt_num(g.g_es),
        fmt_num(g.g_ss - g.g_se),
        crit_cell,
        fmt_num(lB),
        fmt_num(lRB),
        fmt_num(info),
        hol_cell,
        regime_cell,
        fmt_num(secs)};
  };
  return plan;
}

// ---- oracle mode -----------------------------------------------------------

Target parse_target(const std::string& s) {
  if (s == "purity_B") return Target::PurityB;
  if (s == "purity_RB") return Target::PurityRB;
  if (s == "holevo_mixed") return Target::HolevoMixed;
  if (s == "holevo_zero") return Target::HolevoZero;
  if (s == "fidelity") return Target::Fidelity;
  if (s == "trace") return Target::Trace;
  throw ConfigError(0, "targets", "unknown target '" + s + "'");
}

ModePlan plan_oracle(const Config& cfg) {
  auto ax = std::make_shared<CommonAxes>(common_axes(cfg, true));
  auto targets = std::make_shared<std::vector<std::string>>(cfg.get_strs("targets"));
  for (const std::string& t : *targets) parse_target(t);
  const long n_samples = cfg.get_int("n_samples");
  if (n_samples < 100)
    throw ConfigError(0, "n_samples", "need at least 100 samples");

  Grid grid{{long(ax->Ns.size()), long(ax->rs.size()), long(ax->ts.size()),
             long(ax->gammas.size()), long(ax->alphas.size()),
             long(targets->size())}};
  ModePlan plan;
  plan.columns = {"setup",  "channel", "gamma",     "N",       "k",
                  "r",      "t",       "alpha",     "target",  "mean",
                  "std_error", "n_samples", "seconds"};
  plan.n_points = grid.total();
  plan.describe = [ax, targets, grid](long i) {
    auto ix = grid.decode(i);
    std::ostringstream os;
    os << "N=" << ax->Ns[ix[0]] << " r=" << ax->rs[ix[1]]
       << " t=" << ax->ts[ix[2]] << " gamma=" << ax->gammas[ix[3]]
       << " alpha=" << ax->alphas[ix[4]] << " target=" << (*targets)[ix[5]];
    return os.str();
  };
  plan.compute = [ax, targets, grid, n_samples](long i) {
    const auto t0 = std::chrono::steady_clock::now();
    auto ix = grid.decode(i);
    const long N = ax->Ns[ix[0]];
    const double r = ax->rs[ix[1]];
    const long k = std::lround(r * N);
    const KrausChannel ch = axis_channel(*ax, ax->gammas[ix[3]]);
    const LatticeSpec spec =
        make_spec(*ax, N, k, ax->ts[ix[2]], ax->alphas[ix[4]], ch);
    const Target tg = parse_target((*targets)[ix[5]]);
    const McEstimate mc =
        simulate_annealed(spec, tg, n_samples, derive_stream(ax->seed, i));
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    return std::vector<std::string>{
        ax->setup == Setup::I ? "I" : "II",
        channel_to_string(ch),
        ax->full_channel ? "" : fmt_num(ax->gammas[ix[3]]),
        fmt_int(N),
        fmt_int(k),
        fmt_num(r),
        fmt_int(ax->ts[ix[2]]),
        fmt_int(ax->alphas[ix[4]]),
        (*targets)[ix[5]],
        fmt_num(mc.mean),
        fmt_num(mc.std_error),
        fmt_int(mc.n_samples),
        fmt_num(secs)};
  };
  return plan;
}

// ---- frame mode ------------------------------------------------------------

ModePlan plan_frame(const Config& cfg) {
  auto Ns = std::make_shared<std::vector<long>>(cfg.get_ints("N"));
  auto ts = std::make_shared<std::vector<long>>(cfg.get_ints("t"));
  auto alphas = std::make_shared<std::vector<long>>(
      cfg.has("alpha") ? cfg.get_ints("alpha") : std::vector<long>{2});
  const long n_states = cfg.get_int("n_states");
  const std::uint64_t seed = std::uint64_t(cfg.get_int("seed", 1));

  Grid grid{{long(Ns->size()), long(ts->size()), long(alphas->size())}};
  ModePlan plan;
  plan.columns = {"N",    "t",        "alpha",   "n_states", "n_pairs", "F",
                  "std_error", "haar", "haar_printed", "delta_F", "seconds"};
  plan.n_points = grid.total();
  plan.describe = [Ns, ts, alphas, grid](long i) {
    auto ix = grid.decode(i);
    std::ostringstream os;
    os << "N=" << (*Ns)[ix[0]] << " t=" << (*ts)[ix[1]]
       << " alpha=" << (*alphas)[ix[2]];
    return os.str();
  };
  plan.compute = [Ns, ts, alphas, grid, n_states, seed](long i) {
    const auto t0 = std::chrono::steady_clock::now();
    auto ix = grid.decode(i);
    // states depend on (N, t, seed) only, so every alpha sees the same set
    const FrameResult fr = frame_potential(
        int((*Ns)[ix[0]]), int((*ts)[ix[1]]), int((*alphas)[ix[2]]),
        int(n_states),
        derive_stream(seed, std::uint64_t(ix[0]) * 1000 + std::uint64_t(ix[1])));
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    return std::vector<std::string>{fmt_int((*Ns)[ix[0]]),
                                    fmt_int((*ts)[ix[1]]),
                                    fmt_int((*alphas)[ix[2]]),
                                    fmt_int(n_states),
                                    fmt_int(fr.estimate.n_samples),
                                    fmt_num(fr.estimate.mean),
                                    fmt_num(fr.estimate.std_error),
                                    fmt_num(fr.haar_state_ensemble),
                                    fmt_num(fr.haar_printed),
                                    fmt_num(fr.delta_f),
                                    fmt_num(secs)};
  };
  return plan;
}

// ---- fit mode --------------------------------------------------------------

FitModel parse_model(const std::string& s) {
  if (s == "nexp2t") return FitModel::NExp2T;
  if (s == "expt") return FitModel::ExpT;
  if (s == "novert") return FitModel::NOverT;
  if (s == "nexpt") return FitModel::NExpT;
  throw ConfigError(0, "model", "expected nexp2t, expt, novert or nexpt");
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  cells.push_back(cur);
  return cells;
}

ModePlan plan_fit(const Config& cfg) {
  const std::string input = cfg.get_str("input");
  const std::string y_col = cfg.get_str("y");
  const std::string n_col = cfg.get_str("n_column", "N");
  const std::string t_col = cfg.get_str("t_column", "t");
  const FitModel model = parse_model(cfg.get_str("model"));
  const std::string model_str = cfg.get_str("model");
  auto window = cfg.get_nums("window");
  if (window.size() != 2 || window[0] > window[1])
    throw ConfigError(0, "window", "expected [t_min, t_max]");

  auto points = std::make_shared<std::vector<CorrectionPoint>>();
  {
    std::ifstream f(input);
    if (!f) throw ConfigError(0, "input", "cannot open '" + input + "'");
    std::string line;
    std::vector<std::string> header;
    long iN = -1, it = -1, iy = -1;
    while (std::getline(f, line)) {
      if (line.empty() || line[0] == '#') continue;
      auto cells = split_csv_line(line);
      if (header.empty()) {
        header = cells;
        for (size_t c = 0; c < header.size(); ++c) {
          if (header[c] == n_col) iN = long(c);
          if (header[c] == t_col) it = long(c);
          if (header[c] == y_col) iy = long(c);
        }
        if (iN < 0 || it < 0 || iy < 0)
          throw ConfigError(0, "y", "input is missing column '" +
                                        (iy < 0 ? y_col : (it < 0 ? t_col : n_col)) + "'");
        continue;
      }
      if (cells[size_t(iy)].empty()) continue;  // not applicable for that row
      CorrectionPoint p;
      p.N = int(std::strtol(cells[size_t(iN)].c_str(), nullptr, 10));
      p.t = std::strtod(cells[size_t(it)].c_str(), nullptr);
      p.delta = std::abs(std::strtod(cells[size_t(iy)].c_str(), nullptr));
      points->push_back(p);
    }
  }

  ModePlan plan;
  plan.columns = {"model", "input",  "y",         "window_lo", "window_hi",
                  "n_points", "rate", "prefactor", "residual",  "seconds"};
  plan.n_points = 1;
  plan.describe = [input](long) { return "fit of " + input; };
  plan.compute = [points, model, model_str, input, y_col, window](long) {
    const auto t0 = std::chrono::steady_clock::now();
    const CorrectionFit fit =
        fit_corrections(*points, model, window[0], window[1]);
    long used = 0;
    for (const auto& p : *points)
      if (p.t >= window[0] && p.t <= window[1]) ++used;
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    return std::vector<std::string>{model_str,
                                    input,
                                    y_col,
                                    fmt_num(window[0]),
                                    fmt_num(window[1]),
                                    fmt_int(used),
                                    fmt_num(fit.rate),
                                    fmt_num(fit.prefactor),
                                    fmt_num(fit.residual),
                                    fmt_num(secs)};
  };
  return plan;
}

}  // namespace

SweepOutcome run_experiment(const Config& raw, const RunOverrides& ov) {
  Config cfg = raw;  // fold the CLI overrides into the embedded config
  if (!ov.out.empty()) {
    ConfigValue v;
    v.kind = ConfigValue::Kind::Str;
    v.str = ov.out;
    cfg.set("out", v);
  }
  if (ov.seed) {
    ConfigValue v;
    v.kind = ConfigValue::Kind::Num;
    v.num = double(*ov.seed);
    cfg.set("seed", v);
  }
  if (ov.direction) {
    ConfigValue v;
    v.kind = ConfigValue::Kind::Str;
    v.str = *ov.direction == Direction::Time
                ? "time"
                : (*ov.direction == Direction::Space ? "space" : "auto");
    cfg.set("direction", v);
  }

  const std::string mode = cfg.get_str("mode");
  ModePlan plan;
  if (mode == "lattice")
    plan = plan_lattice(cfg);
  else if (mode == "rm")
    plan = plan_rm(cfg);
  else if (mode == "oracle")
    plan = plan_oracle(cfg);
  else if (mode == "frame")
    plan = plan_frame(cfg);
  else if (mode == "fit")
    plan = plan_fit(cfg);
  else
    throw ConfigError(0, "mode",
                      "expected lattice, rm, oracle, frame or fit, got '" +
                          mode + "'");

  // warm the shared permutation caches before any workers start
  for (int a = 2; a <= 6; ++a) SymmetricGroup::get(a);

  const long n = plan.n_points;
  std::vector<std::vector<std::string>> rows(n);
  std::vector<std::string> errors(n);
  std::vector<char> failed(n, 0), ceiling(n, 0);
  std::atomic<long> next{0};
  auto work = [&] {
    for (;;) {
      const long i = next.fetch_add(1);
      if (i >= n) return;
      try {
        rows[i] = plan.compute(i);
      } catch (const std::runtime_error& e) {
        failed[i] = 1;
        errors[i] = e.what();
        if (std::strstr(e.what(), "limit") || std::strstr(e.what(), "ceiling"))
          ceiling[i] = 1;
      } catch (const std::exception& e) {
        failed[i] = 1;
        errors[i] = e.what();
      }
    }
  };
  const int n_threads = std::max(1, ov.threads);
  if (n_threads == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < n_threads; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }

  const std::string out = cfg.get_str("out", mode + ".csv");
  std::ofstream f(out);
  if (!f) throw ConfigError(0, "out", "cannot write '" + out + "'");
  f << "# renc sweep schema=" << kCsvSchema << "\n";
  {
    std::istringstream is(cfg.to_string());
    std::string line;
    while (std::getline(is, line)) f << "# cfg: " << line << "\n";
  }
  for (size_t c = 0; c < plan.columns.size(); ++c)
    f << (c ? "," : "") << plan.columns[c];
  f << "\n";

  SweepOutcome oc;
  oc.n_points = n;
  oc.csv_path = out;
  for (long i = 0; i < n; ++i) {
    if (failed[i]) {
      ++oc.n_failed;
      if (ceiling[i]) ++oc.n_ceiling;
      continue;
    }
    ++oc.n_done;
    for (size_t c = 0; c < rows[i].size(); ++c)
      f << (c ? "," : "") << csv_cell(rows[i][c]);
    f << "\n";
  }
  f.close();

  const std::string flog = out + ".failures.log";
  if (oc.n_failed > 0) {
    std::ofstream lf(flog);
    for (long i = 0; i < n; ++i)
      if (failed[i])
        lf << "point " << i << " (" << plan.describe(i) << "): " << errors[i]
           << "\n";
    oc.failure_log = flog;
  } else {
    std::remove(flog.c_str());
  }
  return oc;
}

int outcome_exit_code(const SweepOutcome& oc) {
  if (oc.n_ceiling > 0) return 3;
  if (oc.n_failed > 0) return 2;
  return 0;
}

Config embedded_config(const std::string& csv_path) {
  std::ifstream f(csv_path);
  if (!f) throw ConfigError(0, "", "cannot open '" + csv_path + "'");
  std::string line, text;
  const std::string tag = "# cfg: ";
  while (std::getline(f, line)) {
    if (line.rfind(tag, 0) == 0) text += line.substr(tag.size()) + "\n";
    if (!line.empty() && line[0] != '#') break;
  }
  return Config::from_string(text);
}

}  // namespace renc
