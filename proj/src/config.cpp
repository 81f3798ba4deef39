#include "aacher/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>

#include "aacher/errors.hpp"

namespace aacher {

AdcpSpec parse_adcp(std::string_view text) {
  const auto fail = [text]() -> ParseError {
    return ParseError("ADCP spec must match A<actors>C<critics> with positive counts, "
                      "e.g. A2C3; got '" + std::string(text) + "'");
  };
  std::size_t i = 0;
  auto expect_letter = [&](char upper) {
    if (i >= text.size() || std::toupper(static_cast<unsigned char>(text[i])) != upper) {
      throw fail();
    }
    ++i;
  };
  auto read_count = [&]() -> std::size_t {
    const std::size_t start = i;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t value = 0;
    const auto res = std::from_chars(text.data() + start, text.data() + i, value);
    if (start == i || res.ec != std::errc() || value == 0) throw fail();
    return value;
  };
  expect_letter('A');
  const std::size_t d = read_count();
  expect_letter('C');
  const std::size_t p = read_count();
  if (i != text.size()) throw fail();
  return AdcpSpec{d, p};
}

KeyValues parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file '" + path.string() + "'");
  KeyValues kv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    const std::string trimmed = line.substr(first, last - first + 1);
    const auto eq = trimmed.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": expected key=value, got '" + trimmed + "'");
    }
    auto strip = [](std::string s) {
      const auto a = s.find_first_not_of(" \t");
      if (a == std::string::npos) return std::string();
      const auto b = s.find_last_not_of(" \t");
      return s.substr(a, b - a + 1);
    };
    kv[strip(trimmed.substr(0, eq))] = strip(trimmed.substr(eq + 1));
  }
  return kv;
}

namespace {

double to_real(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ParseError("config key '" + key + "': expected a number, got '" + value + "'");
  }
}

std::uint64_t to_count(const std::string& key, const std::string& value) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(value.data(), value.data() + value.size(), v);
  if (res.ec != std::errc() || res.ptr != value.data() + value.size()) {
    throw ParseError("config key '" + key + "': expected a non-negative integer, got '" +
                     value + "'");
  }
  return v;
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ParseError("config key '" + key + "': expected true/false, got '" + value + "'");
}

std::vector<std::size_t> to_size_list(const std::string& key, const std::string& value) {
  std::vector<std::size_t> out;
  std::size_t pos = 0;
  while (pos <= value.size()) {
    const auto comma = value.find(',', pos);
    const std::string item =
        value.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    out.push_back(static_cast<std::size_t>(to_count(key, item)));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (out.empty()) throw ParseError("config key '" + key + "': empty list");
  return out;
}

void apply_key(RunConfig& rc, const std::string& key, const std::string& value) {
  TrainConfig& tc = rc.train;
  if (key == "env") {
    tc.env_name = value;
  } else if (key == "adcp") {
    tc.adcp = parse_adcp(value);
  } else if (key == "epochs") {
    tc.epochs = to_count(key, value);
  } else if (key == "cycles_per_epoch") {
    tc.cycles_per_epoch = to_count(key, value);
  } else if (key == "rollout_steps") {
    tc.rollout_steps = to_count(key, value);
  } else if (key == "opt_steps_per_cycle") {
    tc.opt_steps_per_cycle = to_count(key, value);
  } else if (key == "batch_size") {
    tc.batch_size = to_count(key, value);
  } else if (key == "gamma") {
    tc.gamma = to_real(key, value);
  } else if (key == "tau") {
    tc.tau = to_real(key, value);
  } else if (key == "actor_lr") {
    tc.actor_lr = to_real(key, value);
  } else if (key == "critic_lr") {
    tc.critic_lr = to_real(key, value);
  } else if (key == "noise_var") {
    tc.noise_var = to_real(key, value);
  } else if (key == "her_k") {
    tc.her_k = to_count(key, value);
  } else if (key == "buffer_capacity") {
    tc.buffer_capacity = to_count(key, value);
  } else if (key == "l2_coeff") {
    tc.l2_coeff = to_real(key, value);
  } else if (key == "eval_episodes") {
    tc.eval_episodes = to_count(key, value);
  } else if (key == "seed") {
    rc.base_seed = to_count(key, value);
  } else if (key == "hidden_sizes") {
    tc.hidden_sizes = to_size_list(key, value);
  } else if (key == "clip_range") {
    tc.clip_range = to_real(key, value);
  } else if (key == "horizon") {
    tc.env_options.horizon = to_count(key, value);
  } else if (key == "success_threshold") {
    tc.env_options.success_threshold = to_real(key, value);
  } else if (key == "randomize_goal") {
    tc.env_options.randomize_goal = to_bool(key, value);
  } else if (key == "workspace_half") {
    tc.env_options.workspace_half = to_real(key, value);
  } else if (key == "run_name") {
    rc.run_name = value;
  } else if (key == "out") {
    rc.out_dir = value;
  } else if (key == "runs") {
    rc.n_runs = to_count(key, value);
  } else if (key == "jobs") {
    rc.jobs = to_count(key, value);
  } else if (key == "checkpoint_every_epoch") {
    rc.checkpoint_every_epoch = to_bool(key, value);
  } else {
    throw ParseError("unknown config key '" + key + "'");
  }
}

}  // namespace

RunConfig make_run_config(const KeyValues& from_file, const KeyValues& from_flags) {
  RunConfig rc;
  for (const auto& [key, value] : from_file) apply_key(rc, key, value);
  for (const auto& [key, value] : from_flags) apply_key(rc, key, value);
  rc.train.seed = rc.base_seed;
  if (rc.n_runs < 1) throw ParseError("runs must be at least 1");
  return rc;
}

}  // namespace aacher
