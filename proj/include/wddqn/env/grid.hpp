#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace wddqn {

enum class Action : int { North = 0, South = 1, East = 2, West = 3 };

inline constexpr int kNumActions = 4;
inline constexpr std::array<Action, kNumActions> kAllActions{
    Action::North, Action::South, Action::East, Action::West};

inline constexpr Action action_from_index(int i) { return static_cast<Action>(i); }
inline constexpr int index_of(Action a) { return static_cast<int>(a); }

inline constexpr std::string_view to_string(Action a) {
  switch (a) {
    case Action::North: return "north";
    case Action::South: return "south";
    case Action::East: return "east";
    case Action::West: return "west";
  }
  return "?";
}

struct GridPos {
  int row = 0;
  int col = 0;

  friend constexpr bool operator==(GridPos, GridPos) = default;
};

/// Neighbour cell in direction `a`; row 0 is the top of the grid.
inline constexpr GridPos neighbour(GridPos p, Action a) {
  switch (a) {
    case Action::North: return {p.row - 1, p.col};
    case Action::South: return {p.row + 1, p.col};
    case Action::East: return {p.row, p.col + 1};
    case Action::West: return {p.row, p.col - 1};
  }
  return p;
}

inline constexpr bool in_bounds(GridPos p, int height, int width) {
  return p.row >= 0 && p.col >= 0 && p.row < height && p.col < width;
}

inline constexpr int manhattan(GridPos a, GridPos b) {
  return (a.row > b.row ? a.row - b.row : b.row - a.row) +
         (a.col > b.col ? a.col - b.col : b.col - a.col);
}

enum class Outcome { Goal, Miscoordination, Step, Timeout };

inline constexpr std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::Goal: return "goal";
    case Outcome::Miscoordination: return "miscoordination";
    case Outcome::Step: return "step";
    case Outcome::Timeout: return "timeout";
  }
  return "?";
}

/// Result of one environment transition. `reward` is the team reward.
template <typename State>
struct StepResult {
  State next_state;
  double reward = 0.0;
  bool terminal = false;
  Outcome info = Outcome::Step;
};

}  // namespace wddqn
