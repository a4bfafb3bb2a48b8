#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "wddqn/core/error.hpp"
#include "wddqn/core/random.hpp"
#include "wddqn/env/grid.hpp"
#include "wddqn/env/layout.hpp"
#include "wddqn/env/reward_spec.hpp"

// Two-predator cooperative pursuit: both agents must step onto the same goal
// cell in the same joint step. Both receive the identical team reward.
namespace wddqn::predator {

struct Config {
  Layout layout = load_map(kDefaultPredatorMap);
  RewardSpec reward_s{10.0};
  RewardSpec reward_g{80.0};
  double miscoordination_penalty = -1.0;
  double nongoal_reward = 0.0;
  int max_steps = 200;

  static Config deterministic() { return Config{}; }

  /// S pays +10 w.p. 0.6 and +100 w.p. 0.4 (mean 46); G stays at +80.
  static Config stochastic() {
    Config c;
    c.reward_s = RewardSpec{{10.0, 0.6}, {100.0, 0.4}};
    return c;
  }

  void validate() const {
    if (max_steps < 1) throw ConfigError("predator max_steps must be >= 1");
    if (layout.cells() == 0) throw ConfigError("predator layout is empty");
  }
};

struct State {
  std::array<GridPos, 2> agents;
  int steps_taken = 0;
  bool done = false;

  friend bool operator==(const State&, const State&) = default;
};

using Result = StepResult<State>;
using JointAction = std::array<Action, 2>;

inline State reset(const Config& config) {
  config.validate();
  State s;
  s.agents = {config.layout.start1(), config.layout.start2()};
  return s;
}

inline Result step(const State& state, JointAction joint, const Config& config, Rng& rng) {
  if (state.done) throw ContractViolation("predator::step called on a terminal state");
  const Layout& layout = config.layout;
  Result r;
  r.next_state = state;
  State& next = r.next_state;
  next.steps_taken = state.steps_taken + 1;

  std::array<GridPos, 2> moved{};
  for (std::size_t i = 0; i < 2; ++i) {
    const GridPos target = neighbour(state.agents[i], joint[i]);
    moved[i] = layout.passable(target) ? target : state.agents[i];
  }

  if (moved[0] == moved[1] && layout.is_goal(moved[0])) {
    next.agents = moved;
    r.reward = (layout.at(moved[0]) == Cell::GoalG ? config.reward_g : config.reward_s).sample(rng);
    r.terminal = true;
    r.info = Outcome::Goal;
    next.done = true;
    return r;
  }

  // A lone goal entrant is sent back to where it came from.
  bool miscoordinated = false;
  for (std::size_t i = 0; i < 2; ++i) {
    if (layout.is_goal(moved[i]) && !(moved[i] == state.agents[i])) {
      moved[i] = state.agents[i];
      miscoordinated = true;
    }
  }
  // Converging on, or swapping through, a shared non-goal cell bounces both.
  const bool collide = moved[0] == moved[1];
  const bool swap = moved[0] == state.agents[1] && moved[1] == state.agents[0] &&
                    !(state.agents[0] == state.agents[1]);
  if (collide || swap) moved = state.agents;

  next.agents = moved;
  if (miscoordinated) {
    r.reward = config.miscoordination_penalty;
    r.info = Outcome::Miscoordination;
  } else {
    r.reward = config.nongoal_reward;
    r.info = Outcome::Step;
  }
  if (next.steps_taken >= config.max_steps) {
    r.terminal = true;
    r.info = Outcome::Timeout;
  }
  next.done = r.terminal;
  return r;
}

/// One-hot cell of agent 1 followed by one-hot cell of agent 2.
inline std::vector<float> encode_observation(const State& s, const Config& config) {
  const int cells = config.layout.cells();
  std::vector<float> v(static_cast<std::size_t>(2 * cells), 0.0f);
  v[static_cast<std::size_t>(config.layout.index(s.agents[0]))] = 1.0f;
  v[static_cast<std::size_t>(cells + config.layout.index(s.agents[1]))] = 1.0f;
  return v;
}

inline std::size_t observation_size(const Config& config) {
  return static_cast<std::size_t>(2 * config.layout.cells());
}

inline std::uint64_t state_key(const State& s, const Config& config) {
  const auto cells = static_cast<std::uint64_t>(config.layout.cells());
  return static_cast<std::uint64_t>(config.layout.index(s.agents[0])) * cells +
         static_cast<std::uint64_t>(config.layout.index(s.agents[1]));
}

/// Fewest joint steps to a goal both agents can reach: the slower agent's BFS
/// distance, minimised over shared goals.
inline int min_steps(const State& s, const Config& config) {
  const Layout& layout = config.layout;
  const auto d1 = layout.distances_from(s.agents[0]);
  const auto d2 = layout.distances_from(s.agents[1]);
  int best = Layout::kUnreachable;
  for (GridPos goal : {layout.goal_s(), layout.goal_g()}) {
    const auto i = static_cast<std::size_t>(layout.index(goal));
    if (d1[i] == Layout::kUnreachable || d2[i] == Layout::kUnreachable) continue;
    best = std::min(best, std::max(d1[i], d2[i]));
  }
  if (best == Layout::kUnreachable)
    throw Error("no goal is reachable by both predators from this state");
  return best;
}

}  // namespace wddqn::predator
