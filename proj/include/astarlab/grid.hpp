#pragma once

#include "astarlab/graph.hpp"

#include <compare>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace astarlab {

/// Grid coordinates: x grows to the left, y grows upward. Generators put the
/// origin at the lower-right cell of the upper-left square block.
struct Cell
{
  int x = 0;
  int y = 0;

  auto operator<=>(const Cell&) const = default;
};

using CellPair = std::pair<Cell, Cell>;

/// Node-weighted grid over an arbitrary set of cells (the generators use an
/// L-shaped domain). Cells are 4-connected unless the pair is blocked.
class GridSpec
{
public:
  /// Throws std::invalid_argument if a weight is non-positive or a blocked
  /// pair is not two present, grid-adjacent cells.
  GridSpec(std::map<Cell, Weight> cell_weight, std::set<CellPair> blocked);

  const std::map<Cell, Weight>& cells() const { return _weights; }
  const std::set<CellPair>& blocked() const { return _blocked; }

  bool contains(Cell c) const { return _weights.count(c) != 0; }
  const Weight& weight(Cell c) const { return _weights.at(c); }
  bool is_blocked(Cell a, Cell b) const;

  int x_min() const { return _x_min; }
  int x_max() const { return _x_max; }
  int y_min() const { return _y_min; }
  int y_max() const { return _y_max; }
  int width() const { return _x_max - _x_min + 1; }
  int height() const { return _y_max - _y_min + 1; }

  /// Canonical vertex order: rows top to bottom (y descending), each row
  /// left to right (x descending).
  std::vector<Cell> ordered_cells() const;

private:
  std::map<Cell, Weight> _weights;
  std::set<CellPair> _blocked;
  int _x_min = 0, _x_max = 0, _y_min = 0, _y_max = 0;
};

/// Normalized (smaller first) pair so set lookups are order-insensitive.
CellPair cell_pair(Cell a, Cell b);

bool grid_adjacent(Cell a, Cell b);

struct GridGraph
{
  Graph graph;
  std::vector<Cell> cell_of;
  std::map<Cell, Vertex> vertex_of;

  Vertex at(int x, int y) const { return vertex_of.at(Cell{x, y}); }
};

/// One vertex per cell; each unblocked adjacent pair (a, b) becomes an edge
/// of weight (w(a) + w(b)) / 2. A path's length therefore equals the sum of
/// its cell weights minus half of each endpoint's weight.
GridGraph grid_to_graph(const GridSpec& spec, std::vector<std::string> labels = {});

// JSON document:
//   { "format": "astarlab-grid/1", "x_min":…, "x_max":…, "y_min":…, "y_max":…,
//     "weights": [row-major, top row first, each row left to right;
//                 "p/q" or null for an absent cell],
//     "blocked": [[[x1,y1],[x2,y2]], …] }
std::string serialize_grid(const GridSpec& spec);
GridSpec parse_grid(const std::string& text);

}  // namespace astarlab
