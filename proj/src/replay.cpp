#include "aacher/replay.hpp"

#include "aacher/errors.hpp"

namespace aacher {

std::vector<Transition> her_expand(const Episode& episode, std::size_t k,
                                   const RewardFn& reward_fn, Rng& rng) {
  if (episode.empty()) throw ContractViolation("her_expand: empty episode");
  const std::size_t horizon = episode.size();
  std::vector<Transition> out;
  out.reserve(horizon * (k + 1));
  for (std::size_t t = 0; t < horizon; ++t) {
    out.push_back(episode[t]);
    for (std::size_t j = 0; j < k; ++j) {
      const std::size_t u = t + rng.index(horizon - t);  // future index in {t, ..., T-1}
      Transition relabeled = episode[t];
      relabeled.goal = episode[u].achieved_next;
      relabeled.reward = reward_fn(relabeled.achieved_next, relabeled.goal);
      relabeled.success = relabeled.reward == 0.0;
      out.push_back(std::move(relabeled));
    }
  }
  return out;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ContractViolation("ReplayBuffer: capacity must be positive");
}

void ReplayBuffer::store(const Transition& t) {
  if (storage_.size() < capacity_) {
    storage_.push_back(t);
  } else {
    storage_[cursor_] = t;
  }
  cursor_ = (cursor_ + 1) % capacity_;
}

void ReplayBuffer::store(std::span<const Transition> transitions) {
  for (const Transition& t : transitions) store(t);
}

std::vector<Transition> ReplayBuffer::sample(std::size_t batch_size, Rng& rng) const {
  if (storage_.empty()) throw NotReadyError("ReplayBuffer: sample from empty buffer");
  std::vector<Transition> batch;
  batch.reserve(batch_size);
  for (std::size_t i = 0; i < batch_size; ++i) {
    batch.push_back(storage_[rng.index(storage_.size())]);
  }
  return batch;
}

}  // namespace aacher
