#include "aacher/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <vector>

#include "aacher/errors.hpp"

namespace aacher {

namespace {

constexpr char kMagic[8] = {'A', 'A', 'C', 'H', 'C', 'K', 'P', 'T'};

class Writer {
 public:
  explicit Writer(const std::filesystem::path& path) : out_(path, std::ios::binary) {
    if (!out_) throw CheckpointError(CheckpointError::Kind::Io,
                                     "cannot write '" + path.string() + "'");
  }

  void bytes(const void* p, std::size_t n) { out_.write(static_cast<const char*>(p), n); }
  void u32(std::uint32_t v) { bytes(&v, sizeof v); }
  void f64(double v) { bytes(&v, sizeof v); }
  void vec(const Vec& v) {
    u32(static_cast<std::uint32_t>(v.size()));
    bytes(v.data(), v.size() * sizeof(double));
  }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
  void sizes(const std::vector<std::size_t>& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    for (std::size_t v : s) u32(static_cast<std::uint32_t>(v));
  }
  bool good() const { return static_cast<bool>(out_); }

 private:
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError(CheckpointError::Kind::Io,
                                   "cannot read '" + path.string() + "'");
    data_.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }

  void bytes(void* p, std::size_t n) {
    if (pos_ + n > data_.size()) {
      throw CheckpointError(CheckpointError::Kind::Truncated, "checkpoint truncated");
    }
    std::memcpy(p, data_.data() + pos_, n);
    pos_ += n;
  }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    bytes(&v, sizeof v);
    return v;
  }
  double f64() {
    double v = 0.0;
    bytes(&v, sizeof v);
    return v;
  }
  Vec vec() {
    const std::uint32_t n = u32();
    Vec v(n);
    bytes(v.data(), n * sizeof(double));
    return v;
  }
  std::string str() {
    const std::uint32_t n = u32();
    std::string s(n, '\0');
    bytes(s.data(), n);
    return s;
  }
  std::vector<std::size_t> sizes() {
    const std::uint32_t n = u32();
    std::vector<std::size_t> s(n);
    for (auto& v : s) v = u32();
    return s;
  }
  bool exhausted() const { return pos_ == data_.size(); }

 private:
  std::vector<char> data_;
  std::size_t pos_ = 0;
};

void write_params(Writer& w, const MlpParams& p) {
  for (const Mat& m : p.weights) w.bytes(m.data.data(), m.data.size() * sizeof(double));
  for (const Vec& b : p.biases) w.bytes(b.data(), b.size() * sizeof(double));
  for (const Vec& g : p.ln_gain) w.bytes(g.data(), g.size() * sizeof(double));
  for (const Vec& b : p.ln_bias) w.bytes(b.data(), b.size() * sizeof(double));
}

MlpParams read_params(Reader& r, const std::vector<std::size_t>& layer_sizes,
                      OutputActivation activation, double output_scale) {
  MlpParams p;
  p.layer_sizes = layer_sizes;
  p.output_activation = activation;
  p.output_scale = output_scale;
  const std::size_t n_affine = layer_sizes.size() - 1;
  for (std::size_t i = 0; i < n_affine; ++i) {
    Mat m(layer_sizes[i + 1], layer_sizes[i]);
    p.weights.push_back(std::move(m));
    p.biases.emplace_back(layer_sizes[i + 1], 0.0);
    if (i + 1 < n_affine) {
      p.ln_gain.emplace_back(layer_sizes[i + 1], 0.0);
      p.ln_bias.emplace_back(layer_sizes[i + 1], 0.0);
    }
  }
  for (Mat& m : p.weights) r.bytes(m.data.data(), m.data.size() * sizeof(double));
  for (Vec& b : p.biases) r.bytes(b.data(), b.size() * sizeof(double));
  for (Vec& g : p.ln_gain) r.bytes(g.data(), g.size() * sizeof(double));
  for (Vec& b : p.ln_bias) r.bytes(b.data(), b.size() * sizeof(double));
  return p;
}

void validate_layer_sizes(const std::vector<std::size_t>& s, const char* what) {
  if (s.size() < 2) {
    throw CheckpointError(CheckpointError::Kind::ShapeMismatch,
                          std::string(what) + ": fewer than two layers");
  }
  for (std::size_t v : s) {
    if (v == 0 || v > (1u << 24)) {
      throw CheckpointError(CheckpointError::Kind::ShapeMismatch,
                            std::string(what) + ": implausible layer width");
    }
  }
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  const Ensemble& ens = ckpt.ensemble;
  Writer w(path);
  w.bytes(kMagic, sizeof kMagic);
  w.u32(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(ens.adcp.d));
  w.u32(static_cast<std::uint32_t>(ens.adcp.p));
  w.str(ckpt.env_name);
  w.f64(ens.max_action());
  w.sizes(ens.actors.front().params.layer_sizes);
  w.sizes(ens.critics.front().params.layer_sizes);
  w.f64(ckpt.normalizer.clip_range);
  for (const RunningStat* stat : {&ckpt.normalizer.state, &ckpt.normalizer.goal}) {
    w.f64(stat->count());
    w.vec(stat->sum());
    w.vec(stat->sumsq());
  }
  for (const ActorNet& a : ens.actors) write_params(w, a.params);
  for (const ActorNet& a : ens.target_actors) write_params(w, a.params);
  for (const CriticNet& c : ens.critics) write_params(w, c.params);
  for (const CriticNet& c : ens.target_critics) write_params(w, c.params);
  if (!w.good()) {
    throw CheckpointError(CheckpointError::Kind::Io, "write failed for '" + path.string() + "'");
  }
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  Reader r(path);
  char magic[8];
  r.bytes(magic, sizeof magic);
  if (std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw CheckpointError(CheckpointError::Kind::VersionMismatch,
                          "'" + path.string() + "' is not a checkpoint file");
  }
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw CheckpointError(CheckpointError::Kind::VersionMismatch,
                          "checkpoint version " + std::to_string(version) + ", expected " +
                              std::to_string(kCheckpointVersion));
  }
  Checkpoint ckpt;
  Ensemble& ens = ckpt.ensemble;
  ens.adcp.d = r.u32();
  ens.adcp.p = r.u32();
  if (ens.adcp.d == 0 || ens.adcp.p == 0 || ens.adcp.d > 4096 || ens.adcp.p > 4096) {
    throw CheckpointError(CheckpointError::Kind::ShapeMismatch, "implausible ensemble counts");
  }
  ckpt.env_name = r.str();
  const double max_action = r.f64();
  if (!(max_action > 0.0)) {
    throw CheckpointError(CheckpointError::Kind::ShapeMismatch, "non-positive max_action");
  }
  const auto actor_sizes = r.sizes();
  const auto critic_sizes = r.sizes();
  validate_layer_sizes(actor_sizes, "actor layer_sizes");
  validate_layer_sizes(critic_sizes, "critic layer_sizes");
  if (critic_sizes.back() != 1) {
    throw CheckpointError(CheckpointError::Kind::ShapeMismatch, "critic output must be scalar");
  }
  if (critic_sizes.front() != actor_sizes.front() + actor_sizes.back()) {
    throw CheckpointError(CheckpointError::Kind::ShapeMismatch,
                          "critic input does not match actor state/action widths");
  }

  ckpt.normalizer.clip_range = r.f64();
  for (RunningStat* stat : {&ckpt.normalizer.state, &ckpt.normalizer.goal}) {
    const double count = r.f64();
    Vec sum = r.vec();
    Vec sumsq = r.vec();
    if (sum.size() != sumsq.size()) {
      throw CheckpointError(CheckpointError::Kind::ShapeMismatch, "normalizer shape mismatch");
    }
    stat->restore(count, std::move(sum), std::move(sumsq));
  }
  if (ckpt.normalizer.state.dim() + ckpt.normalizer.goal.dim() != actor_sizes.front()) {
    throw CheckpointError(CheckpointError::Kind::ShapeMismatch,
                          "normalizer dims do not match actor input");
  }

  for (std::size_t i = 0; i < ens.adcp.d; ++i) {
    ActorNet a;
    a.params = read_params(r, actor_sizes, OutputActivation::TanhScaled, max_action);
    a.max_action = max_action;
    ens.actor_adam.push_back(adam_like(a.params));
    ens.actors.push_back(std::move(a));
  }
  for (std::size_t i = 0; i < ens.adcp.d; ++i) {
    ActorNet a;
    a.params = read_params(r, actor_sizes, OutputActivation::TanhScaled, max_action);
    a.max_action = max_action;
    ens.target_actors.push_back(std::move(a));
  }
  for (std::size_t i = 0; i < ens.adcp.p; ++i) {
    CriticNet c;
    c.params = read_params(r, critic_sizes, OutputActivation::Linear, 1.0);
    ens.critic_adam.push_back(adam_like(c.params));
    ens.critics.push_back(std::move(c));
  }
  for (std::size_t i = 0; i < ens.adcp.p; ++i) {
    CriticNet c;
    c.params = read_params(r, critic_sizes, OutputActivation::Linear, 1.0);
    ens.target_critics.push_back(std::move(c));
  }
  if (!r.exhausted()) {
    throw CheckpointError(CheckpointError::Kind::ShapeMismatch,
                          "trailing bytes after checkpoint payload");
  }
  return ckpt;
}

}  // namespace aacher
