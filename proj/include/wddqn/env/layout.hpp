#pragma once

#include <array>
#include <deque>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "wddqn/core/error.hpp"
#include "wddqn/env/grid.hpp"

namespace wddqn {

enum class Cell { Floor, Wall, GoalS, GoalG, Start1, Start2 };

enum class MapErrorKind {
  Empty,
  Shape,
  BadGlyph,
  MissingGoal,
  DuplicateGoal,
  MissingStart,
  DuplicateStart,
  Unreachable,
};

inline constexpr std::string_view to_string(MapErrorKind k) {
  switch (k) {
    case MapErrorKind::Empty: return "Empty";
    case MapErrorKind::Shape: return "ShapeError";
    case MapErrorKind::BadGlyph: return "BadGlyph";
    case MapErrorKind::MissingGoal: return "MissingGoal";
    case MapErrorKind::DuplicateGoal: return "DuplicateGoal";
    case MapErrorKind::MissingStart: return "MissingStart";
    case MapErrorKind::DuplicateStart: return "DuplicateStart";
    case MapErrorKind::Unreachable: return "Unreachable";
  }
  return "?";
}

class MapError : public Error {
 public:
  MapError(MapErrorKind kind, const std::string& what)
      : Error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
  MapErrorKind kind() const { return kind_; }

 private:
  MapErrorKind kind_;
};

/// Parsed predator map. Goal cells are entered only jointly; walls block.
class Layout {
 public:
  Layout() = default;
  Layout(int height, int width, std::vector<Cell> cells)
      : height_(height), width_(width), cells_(std::move(cells)) {}

  int height() const { return height_; }
  int width() const { return width_; }
  int cells() const { return height_ * width_; }

  Cell at(GridPos p) const { return cells_[static_cast<std::size_t>(index(p))]; }
  int index(GridPos p) const { return p.row * width_ + p.col; }
  GridPos pos(int index) const { return {index / width_, index % width_}; }

  bool contains(GridPos p) const { return in_bounds(p, height_, width_); }
  bool passable(GridPos p) const { return contains(p) && at(p) != Cell::Wall; }
  bool is_goal(GridPos p) const {
    return contains(p) && (at(p) == Cell::GoalS || at(p) == Cell::GoalG);
  }

  GridPos find(Cell c) const {
    for (int i = 0; i < cells(); ++i)
      if (cells_[static_cast<std::size_t>(i)] == c) return pos(i);
    throw ContractViolation("layout has no such marker");
  }

  GridPos start1() const { return find(Cell::Start1); }
  GridPos start2() const { return find(Cell::Start2); }
  GridPos goal_s() const { return find(Cell::GoalS); }
  GridPos goal_g() const { return find(Cell::GoalG); }

  static constexpr int kUnreachable = std::numeric_limits<int>::max();

  /// BFS distance from `from` to every cell. Goal cells are reached but never
  /// expanded, since an agent cannot pass through a goal.
  std::vector<int> distances_from(GridPos from) const {
    std::vector<int> dist(static_cast<std::size_t>(cells()), kUnreachable);
    std::deque<GridPos> frontier{from};
    dist[static_cast<std::size_t>(index(from))] = 0;
    while (!frontier.empty()) {
      const GridPos p = frontier.front();
      frontier.pop_front();
      if (is_goal(p) && !(p == from)) continue;
      for (Action a : kAllActions) {
        const GridPos q = neighbour(p, a);
        if (!passable(q)) continue;
        auto& d = dist[static_cast<std::size_t>(index(q))];
        if (d != kUnreachable) continue;
        d = dist[static_cast<std::size_t>(index(p))] + 1;
        frontier.push_back(q);
      }
    }
    return dist;
  }

  std::string to_text() const {
    std::string out;
    for (int r = 0; r < height_; ++r) {
      for (int c = 0; c < width_; ++c) out += glyph(at({r, c}));
      out += '\n';
    }
    return out;
  }

  static char glyph(Cell c) {
    switch (c) {
      case Cell::Floor: return '.';
      case Cell::Wall: return '#';
      case Cell::GoalS: return 'S';
      case Cell::GoalG: return 'G';
      case Cell::Start1: return '1';
      case Cell::Start2: return '2';
    }
    return '?';
  }

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<Cell> cells_;
};

/// Parse an ASCII map: '#' wall, '.' floor, 'S'/'G' goals, '1'/'2' starts.
/// Blank trailing lines and '\r' are ignored.
inline Layout load_map(std::string_view text) {
  std::vector<std::string> rows;
  std::istringstream in{std::string(text)};
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    rows.push_back(line);
  }
  while (!rows.empty() && rows.back().empty()) rows.pop_back();
  if (rows.empty()) throw MapError(MapErrorKind::Empty, "map has no rows");

  const std::size_t width = rows.front().size();
  if (width == 0) throw MapError(MapErrorKind::Shape, "first row is empty");
  std::vector<Cell> cells;
  cells.reserve(rows.size() * width);
  std::array<int, 6> counts{};
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != width)
      throw MapError(MapErrorKind::Shape, "row " + std::to_string(r) + " has width " +
                                              std::to_string(rows[r].size()) + ", expected " +
                                              std::to_string(width));
    for (char ch : rows[r]) {
      Cell c;
      switch (ch) {
        case '.': c = Cell::Floor; break;
        case '#': c = Cell::Wall; break;
        case 'S': c = Cell::GoalS; break;
        case 'G': c = Cell::GoalG; break;
        case '1': c = Cell::Start1; break;
        case '2': c = Cell::Start2; break;
        default:
          throw MapError(MapErrorKind::BadGlyph,
                         std::string("unexpected glyph '") + ch + "' in row " + std::to_string(r));
      }
      ++counts[static_cast<std::size_t>(c)];
      cells.push_back(c);
    }
  }
  const auto count = [&](Cell c) { return counts[static_cast<std::size_t>(c)]; };
  if (count(Cell::GoalS) == 0 || count(Cell::GoalG) == 0)
    throw MapError(MapErrorKind::MissingGoal, "map needs exactly one 'S' and one 'G'");
  if (count(Cell::GoalS) > 1 || count(Cell::GoalG) > 1)
    throw MapError(MapErrorKind::DuplicateGoal, "map needs exactly one 'S' and one 'G'");
  if (count(Cell::Start1) == 0 || count(Cell::Start2) == 0)
    throw MapError(MapErrorKind::MissingStart, "map needs one '1' and one '2'");
  if (count(Cell::Start1) > 1 || count(Cell::Start2) > 1)
    throw MapError(MapErrorKind::DuplicateStart, "map needs one '1' and one '2'");

  Layout layout(static_cast<int>(rows.size()), static_cast<int>(width), std::move(cells));
  for (GridPos start : {layout.start1(), layout.start2()}) {
    const auto dist = layout.distances_from(start);
    const bool reaches_goal =
        dist[static_cast<std::size_t>(layout.index(layout.goal_s()))] != Layout::kUnreachable ||
        dist[static_cast<std::size_t>(layout.index(layout.goal_g()))] != Layout::kUnreachable;
    if (!reaches_goal)
      throw MapError(MapErrorKind::Unreachable,
                     "start (" + std::to_string(start.row) + "," + std::to_string(start.col) +
                         ") cannot reach any goal");
  }
  return layout;
}

/// Default two-zone map: 7 wide, 5 high, centre wall open only at S and G.
inline constexpr std::string_view kDefaultPredatorMap =
    "...G...\n"
    "...#...\n"
    "...#...\n"
    "...#...\n"
    "1..S..2\n";

}  // namespace wddqn
