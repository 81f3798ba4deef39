#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "aacher/trainer.hpp"

namespace aacher {

inline constexpr const char* kMetricsHeader = "epoch,success_rate,mean_reward,mean_q";
inline constexpr const char* kAggregateHeader =
    "epoch,sr_mean,sr_min,sr_max,rw_mean,rw_min,rw_max,q_mean,q_min,q_max";

// Per-epoch mean/min/max over the runs of a sweep.
struct AggregateRow {
  std::size_t epoch = 0;
  double sr_mean = 0.0, sr_min = 0.0, sr_max = 0.0;
  double rw_mean = 0.0, rw_min = 0.0, rw_max = 0.0;
  double q_mean = 0.0, q_min = 0.0, q_max = 0.0;
};

// Reals are rendered with shortest round-trip precision; the file is
// newline-terminated.
void write_metrics_csv(const std::vector<EpochMetrics>& rows, const std::filesystem::path& path);
std::vector<EpochMetrics> read_metrics_csv(const std::filesystem::path& path);

std::vector<AggregateRow> aggregate_runs(const std::vector<std::vector<EpochMetrics>>& runs);
void write_aggregate_csv(const std::vector<AggregateRow>& rows, const std::filesystem::path& path);

// Shortest decimal string that parses back to exactly the same double.
std::string format_double(double v);

}  // namespace aacher
