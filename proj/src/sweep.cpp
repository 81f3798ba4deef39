#include "aacher/sweep.hpp"

#include <atomic>
#include <charconv>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "aacher/checkpoint.hpp"
#include "aacher/trainer.hpp"

namespace aacher {

namespace {

std::string padded_index(std::size_t i) {
  std::ostringstream os;
  os.width(3);
  os.fill('0');
  os << i;
  return os.str();
}

std::size_t thread_cap() {
  const char* env = std::getenv("AACHER_THREADS");
  if (env == nullptr) return static_cast<std::size_t>(-1);
  std::size_t v = 0;
  const auto res = std::from_chars(env, env + std::string_view(env).size(), v);
  if (res.ec != std::errc() || v == 0) return static_cast<std::size_t>(-1);
  return v;
}

}  // namespace

std::filesystem::path run_csv_path(const RunConfig& config, std::size_t run_index) {
  return config.run_dir() / ("run_" + padded_index(run_index) + ".csv");
}

std::filesystem::path run_checkpoint_path(const RunConfig& config, std::size_t run_index) {
  return config.run_dir() / ("run_" + padded_index(run_index) + ".ckpt");
}

SweepResult run_sweep(const RunConfig& config, bool verbose) {
  std::filesystem::create_directories(config.run_dir());

  SweepResult result;
  result.runs.resize(config.n_runs);
  std::vector<std::vector<EpochMetrics>> all_metrics(config.n_runs);

  std::mutex io_mutex;
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= config.n_runs) return;
      SweepResult::RunOutcome& outcome = result.runs[i];
      outcome.index = i;
      outcome.seed = config.base_seed + i;
      outcome.csv_path = run_csv_path(config, i);
      outcome.checkpoint_path = run_checkpoint_path(config, i);
      try {
        TrainConfig tc = config.train;
        tc.seed = outcome.seed;
        Trainer trainer(tc);
        Trainer::EpochCallback on_epoch;
        if (config.checkpoint_every_epoch) {
          on_epoch = [&](const EpochMetrics& m) {
            Checkpoint ckpt{tc.env_name, trainer.ensemble(), trainer.normalizer()};
            save_checkpoint(ckpt, config.run_dir() / ("run_" + padded_index(i) + "_epoch" +
                                                      padded_index(m.epoch) + ".ckpt"));
          };
        }
        std::vector<EpochMetrics> metrics = trainer.train(on_epoch);
        write_metrics_csv(metrics, outcome.csv_path);
        Checkpoint ckpt{tc.env_name, trainer.ensemble(), trainer.normalizer()};
        save_checkpoint(ckpt, outcome.checkpoint_path);
        {
          std::lock_guard<std::mutex> lock(io_mutex);
          all_metrics[i] = std::move(metrics);
          if (verbose) {
            std::cerr << "run " << i << " (seed " << outcome.seed << ") done, final success rate "
                      << all_metrics[i].back().success_rate << "\n";
          }
        }
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(io_mutex);
        outcome.error = e.what();
        std::cerr << "run " << i << " (seed " << outcome.seed << ") failed: " << e.what() << "\n";
      }
    }
  };

  std::size_t jobs = config.jobs == 0 ? 1 : config.jobs;
  jobs = std::min({jobs, thread_cap(), config.n_runs});
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  std::vector<std::vector<EpochMetrics>> ok_metrics;
  for (auto& m : all_metrics) {
    if (!m.empty()) ok_metrics.push_back(std::move(m));
  }
  if (!ok_metrics.empty()) {
    result.aggregate_path = config.run_dir() / "aggregate.csv";
    write_aggregate_csv(aggregate_runs(ok_metrics), result.aggregate_path);
  }
  return result;
}

}  // namespace aacher
