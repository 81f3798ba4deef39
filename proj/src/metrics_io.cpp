#include "aacher/metrics_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "aacher/errors.hpp"

namespace aacher {

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

double parse_double(const std::string& field, const std::filesystem::path& path) {
  double v = 0.0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
    throw ParseError(path.string() + ": bad numeric field '" + field + "'");
  }
  return v;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  return out;
}

}  // namespace

void write_metrics_csv(const std::vector<EpochMetrics>& rows, const std::filesystem::path& path) {
  if (rows.empty()) throw ContractViolation("write_metrics_csv: no rows");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << kMetricsHeader << "\n";
  for (const EpochMetrics& m : rows) {
    out << m.epoch << ',' << format_double(m.success_rate) << ',' << format_double(m.mean_reward)
        << ',' << format_double(m.mean_q) << "\n";
  }
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

std::vector<EpochMetrics> read_metrics_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line) || line != kMetricsHeader) {
    throw ParseError(path.string() + ": missing metrics header");
  }
  std::vector<EpochMetrics> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != 4) throw ParseError(path.string() + ": expected 4 fields");
    EpochMetrics m;
    m.epoch = static_cast<std::size_t>(parse_double(fields[0], path));
    m.success_rate = parse_double(fields[1], path);
    m.mean_reward = parse_double(fields[2], path);
    m.mean_q = parse_double(fields[3], path);
    rows.push_back(m);
  }
  return rows;
}

std::vector<AggregateRow> aggregate_runs(const std::vector<std::vector<EpochMetrics>>& runs) {
  if (runs.empty()) throw ContractViolation("aggregate_runs: no runs");
  const std::size_t epochs = runs.front().size();
  for (const auto& r : runs) {
    if (r.size() != epochs) throw ContractViolation("aggregate_runs: ragged run lengths");
  }
  std::vector<AggregateRow> rows;
  rows.reserve(epochs);
  const double n = static_cast<double>(runs.size());
  for (std::size_t e = 0; e < epochs; ++e) {
    AggregateRow row;
    row.epoch = runs.front()[e].epoch;
    auto fold = [&](auto get, double& mean, double& mn, double& mx) {
      double sum = 0.0;
      mn = get(runs.front()[e]);
      mx = mn;
      for (const auto& r : runs) {
        const double v = get(r[e]);
        sum += v;
        mn = std::min(mn, v);
        mx = std::max(mx, v);
      }
      mean = sum / n;
    };
    fold([](const EpochMetrics& m) { return m.success_rate; }, row.sr_mean, row.sr_min, row.sr_max);
    fold([](const EpochMetrics& m) { return m.mean_reward; }, row.rw_mean, row.rw_min, row.rw_max);
    fold([](const EpochMetrics& m) { return m.mean_q; }, row.q_mean, row.q_min, row.q_max);
    rows.push_back(row);
  }
  return rows;
}

void write_aggregate_csv(const std::vector<AggregateRow>& rows,
                         const std::filesystem::path& path) {
  if (rows.empty()) throw ContractViolation("write_aggregate_csv: no rows");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << kAggregateHeader << "\n";
  for (const AggregateRow& r : rows) {
    out << r.epoch << ',' << format_double(r.sr_mean) << ',' << format_double(r.sr_min) << ','
        << format_double(r.sr_max) << ',' << format_double(r.rw_mean) << ','
        << format_double(r.rw_min) << ',' << format_double(r.rw_max) << ','
        << format_double(r.q_mean) << ',' << format_double(r.q_min) << ','
        << format_double(r.q_max) << "\n";
  }
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

}  // namespace aacher
