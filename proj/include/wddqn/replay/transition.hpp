#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "wddqn/core/error.hpp"

namespace wddqn {

/// One experience tuple. The keys identify the discrete environment state and
/// drive temperature and reward-statistics lookups.
struct Transition {
  std::vector<float> state;
  int action = 0;
  double reward = 0.0;
  std::vector<float> next_state;
  bool terminal = false;
  std::uint64_t state_key = 0;
  std::uint64_t next_state_key = 0;
};

/// Transitions of the in-progress episode, in order.
class EpisodicMemory {
 public:
  void push(Transition t) {
    if (!std::isfinite(t.reward)) throw ContractViolation("transition reward is not finite");
    if (!items_.empty()) {
      const Transition& last = items_.back();
      if (last.terminal) throw ContractViolation("episode already ended with a terminal transition");
      if (last.next_state_key != t.state_key || last.next_state.size() != t.state.size())
        throw ContractViolation("transition does not continue the episode");
    }
    items_.push_back(std::move(t));
  }

  const std::vector<Transition>& items() const { return items_; }
  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  void clear() { items_.clear(); }

 private:
  std::vector<Transition> items_;
};

}  // namespace wddqn
