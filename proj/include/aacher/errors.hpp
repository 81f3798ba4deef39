#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace aacher {

// Violated precondition or shape contract on a public operation.
struct ContractViolation : std::logic_error {
  using std::logic_error::logic_error;
};

// Operation requires state that does not exist yet (e.g. empty replay buffer).
struct NotReadyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-finite value surfaced during optimization. `layer_index` identifies the
// affine layer whose gradient went bad, or npos when no layer applies.
struct TrainingDivergence : std::runtime_error {
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  explicit TrainingDivergence(const std::string& what, std::size_t layer = npos)
      : std::runtime_error(what), layer_index(layer) {}

  std::size_t layer_index;
};

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class CheckpointError : public std::runtime_error {
 public:
  enum class Kind { VersionMismatch, Truncated, ShapeMismatch, Io };

  CheckpointError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

}  // namespace aacher
