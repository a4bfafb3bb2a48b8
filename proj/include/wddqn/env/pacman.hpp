#pragma once

#include <cstdint>
#include <vector>

#include "wddqn/core/error.hpp"
#include "wddqn/core/random.hpp"
#include "wddqn/env/grid.hpp"
#include "wddqn/env/reward_spec.hpp"

// Single-agent n x n gridworld with a noisy reward on every move. The agent
// starts in the top-left cell; bumping into the edge leaves it in place.
namespace wddqn::pacman {

enum class GoalMode { RandomPerEpisode, FixedBottomRight };

struct Config {
  int size = 5;
  GoalMode goal_mode = GoalMode::RandomPerEpisode;
  int max_steps = 100;
  RewardSpec goal_reward{{-30.0, 0.5}, {40.0, 0.5}};
  RewardSpec north_west_reward{{-10.0, 0.5}, {6.0, 0.5}};
  RewardSpec south_east_reward{{-8.0, 0.5}, {6.0, 0.5}};

  /// Default step cap is 4 n^2.
  static Config with_size(int n, GoalMode mode = GoalMode::RandomPerEpisode) {
    Config c;
    c.size = n;
    c.goal_mode = mode;
    c.max_steps = 4 * n * n;
    return c;
  }

  void validate() const {
    if (size < 2) throw ConfigError("pacman size must be >= 2");
    if (max_steps < 1) throw ConfigError("pacman max_steps must be >= 1");
  }

  int cells() const { return size * size; }
};

struct State {
  GridPos agent;
  GridPos goal;
  int steps_taken = 0;
  bool done = false;

  friend bool operator==(const State&, const State&) = default;
};

using Result = StepResult<State>;

inline int cell_index(GridPos p, int n) { return p.row * n + p.col; }
inline GridPos cell_at(int index, int n) { return {index / n, index % n}; }

inline State reset(const Config& config, Rng& rng) {
  config.validate();
  const int n = config.size;
  State s;
  s.agent = {0, 0};
  if (config.goal_mode == GoalMode::FixedBottomRight) {
    s.goal = {n - 1, n - 1};
  } else {
    // Uniform over every cell except the start.
    const auto k = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(n * n - 1)));
    s.goal = cell_at(k + 1, n);
  }
  return s;
}

inline Result step(const State& state, Action a, const Config& config, Rng& rng) {
  if (state.done) throw ContractViolation("pacman::step called on a terminal state");
  Result r;
  r.next_state = state;
  State& next = r.next_state;
  const GridPos target = neighbour(state.agent, a);
  if (in_bounds(target, config.size, config.size)) next.agent = target;
  next.steps_taken = state.steps_taken + 1;

  if (next.agent == next.goal) {
    r.reward = config.goal_reward.sample(rng);
    r.terminal = true;
    r.info = Outcome::Goal;
  } else {
    const bool north_west = a == Action::North || a == Action::West;
    r.reward = (north_west ? config.north_west_reward : config.south_east_reward).sample(rng);
    if (next.steps_taken >= config.max_steps) {
      r.terminal = true;
      r.info = Outcome::Timeout;
    }
  }
  next.done = r.terminal;
  return r;
}

/// One-hot agent cell followed by one-hot goal cell (2 n^2 entries).
inline std::vector<float> encode_observation(const State& s, const Config& config) {
  const int cells = config.cells();
  std::vector<float> v(static_cast<std::size_t>(2 * cells), 0.0f);
  v[static_cast<std::size_t>(cell_index(s.agent, config.size))] = 1.0f;
  v[static_cast<std::size_t>(cells + cell_index(s.goal, config.size))] = 1.0f;
  return v;
}

inline std::size_t observation_size(const Config& config) {
  return static_cast<std::size_t>(2 * config.cells());
}

/// Discrete key identifying (agent, goal); dense in [0, n^4).
inline std::uint64_t state_key(const State& s, const Config& config) {
  return static_cast<std::uint64_t>(cell_index(s.agent, config.size)) *
             static_cast<std::uint64_t>(config.cells()) +
         static_cast<std::uint64_t>(cell_index(s.goal, config.size));
}

inline int min_steps(const State& s, const Config&) { return manhattan(s.agent, s.goal); }

}  // namespace wddqn::pacman
