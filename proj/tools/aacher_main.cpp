#include <CLI11.hpp>

#include <iostream>
#include <string>

#include "aacher/checkpoint.hpp"
#include "aacher/config.hpp"
#include "aacher/envs.hpp"
#include "aacher/metrics_io.hpp"
#include "aacher/sweep.hpp"
#include "aacher/trainer.hpp"

namespace {

int cmd_train(const aacher::KeyValues& flags, const std::string& config_path) {
  aacher::KeyValues file_kvs;
  if (!config_path.empty()) file_kvs = aacher::parse_config_file(config_path);
  const aacher::RunConfig config = aacher::make_run_config(file_kvs, flags);

  std::cerr << "sweep " << config.effective_run_name() << ": " << config.n_runs
            << " run(s), base seed " << config.base_seed << ", writing to "
            << config.run_dir().string() << "\n";
  const aacher::SweepResult result = aacher::run_sweep(config, /*verbose=*/true);
  if (!result.all_ok()) {
    std::size_t failed = 0;
    for (const auto& r : result.runs) failed += r.error.has_value() ? 1 : 0;
    std::cerr << "error: " << failed << " of " << result.runs.size() << " runs failed\n";
    return 1;
  }
  std::cout << "wrote " << result.runs.size() << " run CSVs and "
            << result.aggregate_path.string() << "\n";
  return 0;
}

int cmd_eval(const std::string& ckpt_path, std::size_t episodes, std::uint64_t seed) {
  const aacher::Checkpoint ckpt = aacher::load_checkpoint(ckpt_path);
  auto env = aacher::make_env(ckpt.env_name);
  const aacher::EpochMetrics m = aacher::evaluate(ckpt.ensemble, ckpt.normalizer, *env, episodes,
                                                  aacher::Rng(seed).stream("eval"));
  std::cout << "env=" << ckpt.env_name << " adcp=" << ckpt.ensemble.adcp.to_string()
            << " episodes=" << episodes << " success_rate=" << aacher::format_double(m.success_rate)
            << " mean_reward=" << aacher::format_double(m.mean_reward)
            << " mean_q=" << aacher::format_double(m.mean_q) << "\n";
  return 0;
}

int cmd_aggregate(const std::string& dir) {
  std::vector<std::filesystem::path> csvs;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("run_", 0) == 0 && entry.path().extension() == ".csv") {
      csvs.push_back(entry.path());
    }
  }
  if (csvs.empty()) {
    std::cerr << "error: no run_*.csv files in " << dir << "\n";
    return 1;
  }
  std::sort(csvs.begin(), csvs.end());
  std::vector<std::vector<aacher::EpochMetrics>> runs;
  runs.reserve(csvs.size());
  for (const auto& p : csvs) runs.push_back(aacher::read_metrics_csv(p));
  const auto out = std::filesystem::path(dir) / "aggregate.csv";
  aacher::write_aggregate_csv(aacher::aggregate_runs(runs), out);
  std::cout << "aggregated " << runs.size() << " runs into " << out.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Goal-conditioned DDPG+HER benchmark with averaged actor/critic ensembles"};
  app.require_subcommand(1);

  // train
  auto* train = app.add_subcommand("train", "Run a multi-seed training sweep");
  std::string config_path;
  aacher::KeyValues flags;
  auto add_flag_option = [&](const std::string& flag, const std::string& key,
                             const std::string& help) {
    train->add_option_function<std::string>(
        flag, [&flags, key](const std::string& v) { flags[key] = v; }, help);
  };
  add_flag_option("--env", "env", "Environment: aubo_reach, point_reach, point_push, point_slide");
  add_flag_option("--adcp", "adcp", "Ensemble shape, e.g. A1C1 or A10C10");
  add_flag_option("--seed", "seed", "Base seed; run i uses seed+i");
  add_flag_option("--runs", "runs", "Number of independent runs");
  add_flag_option("--epochs", "epochs", "Training epochs per run");
  add_flag_option("--out", "out", "Output directory root");
  add_flag_option("--jobs", "jobs", "Parallel runs (also capped by AACHER_THREADS)");
  add_flag_option("--hidden", "hidden_sizes", "Hidden layer widths, e.g. 256,256,256");
  train->add_option("--config", config_path, "Flat key=value config file; flags override it");

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluate a saved checkpoint");
  std::string ckpt_path;
  std::size_t episodes = 100;
  std::uint64_t eval_seed = 0;
  eval->add_option("--checkpoint", ckpt_path, "Checkpoint file")->required();
  eval->add_option("--episodes", episodes, "Evaluation episodes");
  eval->add_option("--seed", eval_seed, "Evaluation seed");

  // aggregate
  auto* aggregate = app.add_subcommand("aggregate", "Aggregate run_*.csv files in a directory");
  std::string dir;
  aggregate->add_option("--dir", dir, "Directory containing run CSVs")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) return cmd_train(flags, config_path);
    if (eval->parsed()) return cmd_eval(ckpt_path, episodes, eval_seed);
    if (aggregate->parsed()) return cmd_aggregate(dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
