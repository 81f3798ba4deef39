#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "aacher/networks.hpp"
#include "aacher/trainer.hpp"

namespace aacher {

// Parses the "A{D}C{P}" naming convention, case-insensitively.
AdcpSpec parse_adcp(std::string_view text);

// One experiment sweep: n_runs independent trainings, run i seeded with
// base_seed + i, one metrics CSV and checkpoint per run plus an aggregate CSV.
struct RunConfig {
  TrainConfig train;
  std::string run_name;  // defaults to "<env>_<adcp>" when empty
  std::filesystem::path out_dir = "results";
  std::size_t n_runs = 20;
  std::uint64_t base_seed = 0;
  std::size_t jobs = 1;
  bool checkpoint_every_epoch = false;

  std::string effective_run_name() const {
    return run_name.empty() ? train.env_name + "_" + train.adcp.to_string() : run_name;
  }
  std::filesystem::path run_dir() const { return out_dir / effective_run_name(); }
};

using KeyValues = std::map<std::string, std::string, std::less<>>;

// Flat key=value file; '#' starts a comment, blank lines ignored.
KeyValues parse_config_file(const std::filesystem::path& path);

// Builds a RunConfig from file keys overlaid with flag keys (flags win).
// Unknown keys are an error. Keys mirror the TrainConfig/RunConfig field
// names, e.g. env, adcp, epochs, gamma, her_k, hidden_sizes, runs, out.
RunConfig make_run_config(const KeyValues& from_file, const KeyValues& from_flags);

}  // namespace aacher
