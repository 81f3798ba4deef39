#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "aacher/config.hpp"
#include "aacher/metrics_io.hpp"

namespace aacher {

struct SweepResult {
  struct RunOutcome {
    std::size_t index = 0;
    std::uint64_t seed = 0;
    std::filesystem::path csv_path;
    std::filesystem::path checkpoint_path;
    std::optional<std::string> error;  // set when the run failed
  };
  std::vector<RunOutcome> runs;
  std::filesystem::path aggregate_path;

  bool all_ok() const {
    for (const auto& r : runs) {
      if (r.error) return false;
    }
    return true;
  }
};

std::filesystem::path run_csv_path(const RunConfig& config, std::size_t run_index);
std::filesystem::path run_checkpoint_path(const RunConfig& config, std::size_t run_index);

// Executes n_runs independent trainings (run i seeded with base_seed + i),
// writing one metrics CSV and final checkpoint per run plus one aggregate CSV
// over the runs that finished. A failed run is recorded and the sweep
// continues. Runs execute on up to `jobs` threads, additionally capped by the
// AACHER_THREADS environment variable.
SweepResult run_sweep(const RunConfig& config, bool verbose = false);

}  // namespace aacher
