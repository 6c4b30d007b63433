#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "renc/config.hpp"
#include "renc/lattice.hpp"

// Configuration-driven sweeps: one CSV per run with the full config
// embedded in '#' header comments, per-point failures logged and skipped.

namespace renc {

struct RunOverrides {
  std::string out;  // empty: use the config's "out" key
  std::optional<std::uint64_t> seed;
  std::optional<Direction> direction;
  int threads = 1;
};

struct SweepOutcome {
  long n_points = 0;
  long n_done = 0;
  long n_failed = 0;   // skipped points, see failure_log
  long n_ceiling = 0;  // of which hit a memory/size ceiling
  std::string csv_path;
  std::string failure_log;  // empty when no point failed
};

// Runs a config with mode in {lattice, rm, oracle, frame, fit}.
// Throws ConfigError for malformed configs; per-point errors are recorded
// in <out>.failures.log and the run continues.
SweepOutcome run_experiment(const Config& cfg, const RunOverrides& ov = {});

// 0 clean, 2 per-point failures occurred, 3 a resource ceiling was hit
int outcome_exit_code(const SweepOutcome& oc);

// Re-parses the "# cfg:" header lines of a CSV written by run_experiment.
Config embedded_config(const std::string& csv_path);

inline constexpr const char* kCsvSchema = "1";

}  // namespace renc
