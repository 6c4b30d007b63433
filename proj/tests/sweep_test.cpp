#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "renc/rm.hpp"
#include "renc/sweep.hpp"

using namespace renc;

namespace {

struct Csv {
  std::vector<std::string> comments;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool q = false;
  for (char c : line) {
    if (c == '"') q = !q;
    else if (c == ',' && !q) {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') cur += c;
  }
  out.push_back(cur);
  return out;
}

Csv read_csv(const std::string& path) {
  Csv csv;
  std::ifstream f(path);
  REQUIRE(bool(f));
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      csv.comments.push_back(line);
    } else if (csv.header.empty()) {
      csv.header = split(line);
    } else {
      csv.rows.push_back(split(line));
    }
  }
  return csv;
}

int col(const Csv& csv, const std::string& name) {
  for (size_t i = 0; i < csv.header.size(); ++i)
    if (csv.header[i] == name) return int(i);
  FAIL("missing column " << name);
  return -1;
}

}  // namespace

TEST_CASE("rm mode sweeps a gamma grid deterministically") {
  Config cfg = Config::from_string(
      "mode = \"rm\"\n"
      "channel = \"depolarizing\"\n"
      "gamma = [0.0, 0.05, 0.1, 0.15]\n"
      "r = 0.25\n"
      "N = 16\n"
      "out = \"sw_rm_a.csv\"\n");
  SweepOutcome oc = run_experiment(cfg);
  CHECK(oc.n_points == 4);
  CHECK(oc.n_done == 4);
  CHECK(oc.n_failed == 0);
  CHECK(outcome_exit_code(oc) == 0);
  Csv a = read_csv("sw_rm_a.csv");
  CHECK(a.rows.size() == 4);

  // zero noise: info r, protected regime, critical f2 = 0.75
  const int ic = col(a, "info_per_site");
  CHECK(std::stod(a.rows[0][size_t(ic)]) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(a.rows[0][size_t(col(a, "regime"))] == "protected");
  CHECK(std::stod(a.rows[0][size_t(col(a, "critical_f2"))]) ==
        doctest::Approx(0.75).epsilon(1e-12));

  // byte-identical rerun apart from the timing column
  RunOverrides ov;
  ov.out = "sw_rm_b.csv";
  run_experiment(cfg, ov);
  Csv b = read_csv("sw_rm_b.csv");
  REQUIRE(a.rows.size() == b.rows.size());
  for (size_t i = 0; i < a.rows.size(); ++i)
    for (size_t c = 0; c + 1 < a.rows[i].size(); ++c)
      CHECK(a.rows[i][c] == b.rows[i][c]);

  // the header-embedded config reparses to an equivalent experiment
  Config emb = embedded_config("sw_rm_b.csv");
  CHECK(emb.get_str("mode") == "rm");
  CHECK(emb.get_nums("gamma") == cfg.get_nums("gamma"));
  CHECK(emb.get_str("out") == "sw_rm_b.csv");  // override folded in
}

TEST_CASE("lattice mode emits exact small-size rows") {
  Config cfg = Config::from_string(
      "mode = \"lattice\"\n"
      "setup = \"I\"\n"
      "channel = \"depolarizing\"\n"
      "gamma = [0.0, 0.2]\n"
      "N = 4\n"
      "r = 0.25\n"
      "t = [1, 2]\n"
      "holevo = true\n"
      "out = \"sw_lat.csv\"\n");
  SweepOutcome oc = run_experiment(cfg);
  CHECK(oc.n_done == 4);
  Csv csv = read_csv("sw_lat.csv");
  REQUIRE(csv.rows.size() == 4);
  const int ic = col(csv, "coherent_info");
  const int hc = col(csv, "holevo");
  const int gc = col(csv, "gamma");
  for (const auto& row : csv.rows) {
    if (std::stod(row[size_t(gc)]) == 0.0) {
      CHECK(std::stod(row[size_t(ic)]) == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(std::stod(row[size_t(hc)]) == doctest::Approx(4.0).epsilon(1e-9));
    } else {
      CHECK(std::stod(row[size_t(ic)]) < 1.0);
    }
    CHECK(!row[size_t(col(csv, "ic_deep"))].empty());
    CHECK(!row[size_t(col(csv, "delta_ic"))].empty());
  }
}

TEST_CASE("setup II lattice rows carry fidelity and f2") {
  Config cfg = Config::from_string(
      "mode = \"lattice\"\n"
      "setup = \"II\"\n"
      "channel = \"depolarizing\"\n"
      "gamma = [0.1]\n"
      "N = 4\n"
      "r = 0.25\n"
      "t = [2]\n"
      "out = \"sw_lat2.csv\"\n");
  run_experiment(cfg);
  Csv csv = read_csv("sw_lat2.csv");
  REQUIRE(csv.rows.size() == 1);
  const double F = std::stod(csv.rows[0][size_t(col(csv, "F"))]);
  CHECK(F > 0.0);
  CHECK(F < 1.0);
  CHECK(!csv.rows[0][size_t(col(csv, "f2"))].empty());
  CHECK(csv.rows[0][size_t(col(csv, "ic_deep"))].empty());
}

TEST_CASE("oracle and frame modes run end to end") {
  Config cfg = Config::from_string(
      "mode = \"oracle\"\n"
      "setup = \"II\"\n"
      "channel = \"depolarizing\"\n"
      "gamma = [0.2]\n"
      "N = 4\n"
      "r = 0.25\n"
      "t = [1]\n"
      "targets = [\"trace\", \"purity_B\"]\n"
      "n_samples = 100\n"
      "out = \"sw_or.csv\"\n");
  SweepOutcome oc = run_experiment(cfg);
  CHECK(oc.n_done == 2);
  Csv csv = read_csv("sw_or.csv");
  CHECK(std::stod(csv.rows[0][size_t(col(csv, "mean"))]) == 1.0);

  Config fcfg = Config::from_string(
      "mode = \"frame\"\n"
      "N = 4\n"
      "t = [0]\n"
      "n_states = 32\n"
      "out = \"sw_fr.csv\"\n");
  SweepOutcome foc = run_experiment(fcfg);
  CHECK(foc.n_done == 1);
  Csv fcsv = read_csv("sw_fr.csv");
  CHECK(std::stod(fcsv.rows[0][size_t(col(fcsv, "F"))]) ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("fit mode recovers a planted decay from a CSV") {
  {
    std::ofstream f("sw_fit_in.csv");
    f << "# synthetic\nN,t,delta\n";
    const double tau = thouless_tau(2);
    for (int N : {32, 64})
      for (int t = 2; t <= 10; ++t)
        f << N << "," << t << "," << N * std::exp(-2.0 * t / tau) << "\n";
  }
  Config cfg = Config::from_string(
      "mode = \"fit\"\n"
      "input = \"sw_fit_in.csv\"\n"
      "y = \"delta\"\n"
      "model = \"nexp2t\"\n"
      "window = [2, 10]\n"
      "out = \"sw_fit.csv\"\n");
  SweepOutcome oc = run_experiment(cfg);
  CHECK(oc.n_done == 1);
  Csv csv = read_csv("sw_fit.csv");
  CHECK(std::stod(csv.rows[0][size_t(col(csv, "rate"))]) ==
        doctest::Approx(2.0 / thouless_tau(2)).epsilon(1e-6));
  CHECK(std::stod(csv.rows[0][size_t(col(csv, "prefactor"))]) ==
        doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("config errors and per-point failures map to exit codes") {
  CHECK_THROWS_AS(run_experiment(Config::from_string("mode = \"bogus\"\n")),
                  ConfigError);
  CHECK_THROWS_AS(
      run_experiment(Config::from_string(
          "mode = \"lattice\"\ngamma = [0.1]\nN = 5\nr = 0.2\nt = [1]\n")),
      ConfigError);  // odd N fails the lattice precondition
  CHECK_THROWS_AS(
      run_experiment(Config::from_string(
          "mode = \"rm\"\ngamma = [0.1]\nN = 10\nr = 0.15\n")),
      ConfigError);  // r*N not integral
  CHECK_THROWS_AS(
      run_experiment(Config::from_string("mode = \"lattice\"\ngamma = []\n")),
      ConfigError);  // empty axis rejected at parse time

  // a memory ceiling is a per-point failure with exit code 3
  Config cfg = Config::from_string(
      "mode = \"lattice\"\n"
      "channel = \"depolarizing\"\n"
      "gamma = [0.1]\n"
      "N = 8\n"
      "r = 0.25\n"
      "t = [2]\n"
      "mem_limit_gb = 1e-7\n"
      "out = \"sw_fail.csv\"\n");
  SweepOutcome oc = run_experiment(cfg);
  CHECK(oc.n_failed == 1);
  CHECK(oc.n_ceiling == 1);
  CHECK(outcome_exit_code(oc) == 3);
  std::ifstream log(oc.failure_log);
  CHECK(bool(log));
  Csv csv = read_csv("sw_fail.csv");
  CHECK(csv.rows.empty());  // header only, failed row skipped

  // non-ceiling per-point failure: fit with too few points in the window
  {
    std::ofstream f("sw_fit_short.csv");
    f << "N,t,delta\n8,2,0.5\n8,3,0.25\n";
  }
  Config fcfg = Config::from_string(
      "mode = \"fit\"\ninput = \"sw_fit_short.csv\"\ny = \"delta\"\n"
      "model = \"expt\"\nwindow = [2, 3]\nout = \"sw_fit2.csv\"\n");
  SweepOutcome foc = run_experiment(fcfg);
  CHECK(foc.n_failed == 1);
  CHECK(foc.n_ceiling == 0);
  CHECK(outcome_exit_code(foc) == 2);
}

TEST_CASE("threaded sweeps match serial ones") {
  Config cfg = Config::from_string(
      "mode = \"lattice\"\n"
      "channel = \"amplitude_damping\"\n"
      "gamma = [0.1, 0.2, 0.3]\n"
      "N = [4, 6]\n"
      "r = 0.5\n"
      "t = [1, 2]\n"
      "out = \"sw_ser.csv\"\n");
  run_experiment(cfg);
  RunOverrides ov;
  ov.out = "sw_par.csv";
  ov.threads = 3;
  run_experiment(cfg, ov);
  Csv a = read_csv("sw_ser.csv");
  Csv b = read_csv("sw_par.csv");
  REQUIRE(a.rows.size() == 12);
  REQUIRE(b.rows.size() == 12);
  for (size_t i = 0; i < a.rows.size(); ++i)
    for (size_t c = 0; c + 1 < a.rows[i].size(); ++c)
      CHECK(a.rows[i][c] == b.rows[i][c]);
}
