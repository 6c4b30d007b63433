#include <CLI11.hpp>
#include <cstdio>
#include <set>
#include <string>
#include <vector>

#include "renc/config.hpp"
#include "renc/sweep.hpp"

namespace {

renc::RunOverrides g_over;
std::string g_direction = "";

void apply_direction() {
  if (g_direction.empty()) return;
  if (g_direction == "time")
    g_over.direction = renc::Direction::Time;
  else if (g_direction == "space")
    g_over.direction = renc::Direction::Space;
  else
    g_over.direction = renc::Direction::Auto;
}

int run_config(const renc::Config& cfg) {
  apply_direction();
  const renc::SweepOutcome oc = renc::run_experiment(cfg, g_over);
  std::printf("%s: %ld/%ld points", oc.csv_path.c_str(), oc.n_done,
              oc.n_points);
  if (oc.n_failed > 0)
    std::printf(", %ld failed (%s)", oc.n_failed, oc.failure_log.c_str());
  std::printf("\n");
  return renc::outcome_exit_code(oc);
}

std::vector<double> parse_gamma_grid(const std::string& text) {
  // "start:stop:count" linspace, or a comma-separated list
  std::vector<double> out;
  const size_t c1 = text.find(':');
  if (c1 != std::string::npos) {
    const size_t c2 = text.find(':', c1 + 1);
    if (c2 == std::string::npos)
      throw renc::ConfigError(0, "gamma-grid", "expected start:stop:count");
    const double a = std::stod(text.substr(0, c1));
    const double b = std::stod(text.substr(c1 + 1, c2 - c1 - 1));
    const int n = std::stoi(text.substr(c2 + 1));
    if (n < 1) throw renc::ConfigError(0, "gamma-grid", "count must be >= 1");
    for (int i = 0; i < n; ++i)
      out.push_back(n == 1 ? a : a + (b - a) * i / (n - 1.0));
    return out;
  }
  std::string cur;
  for (char ch : text + ",") {
    if (ch == ',') {
      if (!cur.empty()) out.push_back(std::stod(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (out.empty()) throw renc::ConfigError(0, "gamma-grid", "empty grid");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"renc: finite-depth noisy-circuit information sweeps"};
  app.require_subcommand(1);
  app.fallthrough();  // global options may follow the subcommand
  app.add_option("--threads", g_over.threads, "worker threads")
      ->check(CLI::PositiveNumber);
  app.add_option("--out", g_over.out, "output CSV path override");
  std::uint64_t seed_opt = 0;
  auto* seed_flag = app.add_option("--seed", seed_opt, "RNG seed override");
  app.add_option("--direction", g_direction, "contraction direction override")
      ->check(CLI::IsMember({"time", "space", "auto"}));

  std::string config_path;
  auto* run = app.add_subcommand("run", "run an experiment config");
  run->add_option("config", config_path, "config file (TOML subset)")
      ->required();

  std::string figure, configs_dir = "configs";
  auto* rep = app.add_subcommand("reproduce", "run a registered figure config");
  rep->add_option("figure", figure, "figure id")
      ->required()
      ->check(CLI::IsMember(
          {"fig2a", "fig2b", "fig2c", "fig2d", "fig3", "fig4", "fig5"}));
  rep->add_option("--configs", configs_dir, "directory of registered configs");

  std::string rm_channel = "depolarizing", rm_grid = "0:0.4:21";
  double rm_r = 0.25;
  long rm_N = 64;
  auto* rmc = app.add_subcommand("rm", "infinite-depth predictions on a grid");
  rmc->add_option("--channel", rm_channel, "channel family or full spec");
  rmc->add_option("--r", rm_r, "code rate k/N");
  rmc->add_option("--gamma-grid", rm_grid, "start:stop:count or list");
  rmc->add_option("--N", rm_N, "system size for the finite-N sums");

  for (CLI::App* sub : {run, rep, rmc}) sub->fallthrough();
  CLI11_PARSE(app, argc, argv);
  if (*seed_flag) g_over.seed = seed_opt;

  try {
    if (*run) return run_config(renc::Config::from_file(config_path));
    if (*rep)
      return run_config(
          renc::Config::from_file(configs_dir + "/" + figure + ".toml"));
    if (*rmc) {
      renc::Config cfg;
      renc::ConfigValue v;
      v.kind = renc::ConfigValue::Kind::Str;
      v.str = "rm";
      cfg.set("mode", v);
      v.str = rm_channel;
      cfg.set("channel", v);
      if (rm_channel.find('(') == std::string::npos) {
        renc::ConfigValue g;
        g.kind = renc::ConfigValue::Kind::NumList;
        g.nums = parse_gamma_grid(rm_grid);
        cfg.set("gamma", g);
      }
      renc::ConfigValue num;
      num.kind = renc::ConfigValue::Kind::Num;
      num.num = rm_r;
      cfg.set("r", num);
      num.num = double(rm_N);
      cfg.set("N", num);
      if (g_over.out.empty()) g_over.out = "rm.csv";
      return run_config(cfg);
    }
  } catch (const renc::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
