#include "aacher/normalizer.hpp"

#include <cmath>

#include "aacher/errors.hpp"

namespace aacher {

namespace {
constexpr double kVarianceFloor = 1e-4;
}

void RunningStat::update(const Vec& x) {
  if (x.size() != sum_.size()) throw ContractViolation("RunningStat: dim mismatch");
  count_ += 1.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sum_[i] += x[i];
    sumsq_[i] += x[i] * x[i];
  }
}

double RunningStat::stddev(std::size_t i) const {
  if (count_ <= 0.0) return 1.0;
  const double m = sum_[i] / count_;
  const double var = sumsq_[i] / count_ - m * m;
  return std::sqrt(var > kVarianceFloor ? var : kVarianceFloor);
}

void RunningStat::normalize(const Vec& x, double clip, Vec& out) const {
  if (x.size() != sum_.size()) throw ContractViolation("RunningStat: dim mismatch");
  out.resize(x.size());
  if (count_ <= 0.0) {
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = clamp(x[i], -clip, clip);
    return;
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = clamp((x[i] - mean(i)) / stddev(i), -clip, clip);
  }
}

void RunningStat::restore(double count, Vec sum, Vec sumsq) {
  if (sum.size() != sumsq.size()) throw ContractViolation("RunningStat: dim mismatch");
  count_ = count;
  sum_ = std::move(sum);
  sumsq_ = std::move(sumsq);
}

Vec ObsNormalizer::normalized_sg(const Vec& s, const Vec& g) const {
  Vec ns, ng;
  state.normalize(s, clip_range, ns);
  goal.normalize(g, clip_range, ng);
  ns.insert(ns.end(), ng.begin(), ng.end());
  return ns;
}

}  // namespace aacher
