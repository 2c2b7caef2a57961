#include "astarlab/grid.hpp"

#include <json.hpp>

#include <algorithm>
#include <climits>
#include <stdexcept>

namespace astarlab {

CellPair cell_pair(Cell a, Cell b)
{
  return a < b ? CellPair{a, b} : CellPair{b, a};
}

bool grid_adjacent(Cell a, Cell b)
{
  return std::abs(a.x - b.x) + std::abs(a.y - b.y) == 1;
}

GridSpec::GridSpec(std::map<Cell, Weight> cell_weight, std::set<CellPair> blocked)
: _weights(std::move(cell_weight))
{
  if (_weights.empty())
    throw std::invalid_argument("grid has no cells");
  _x_min = _y_min = INT_MAX;
  _x_max = _y_max = INT_MIN;
  for (auto& [c, w] : _weights)
  {
    w.canonicalize();
    if (sgn(w) <= 0)
      throw std::invalid_argument("cell (" + std::to_string(c.x) + "," + std::to_string(c.y)
        + ") has non-positive weight " + format_weight(w));
    _x_min = std::min(_x_min, c.x);
    _x_max = std::max(_x_max, c.x);
    _y_min = std::min(_y_min, c.y);
    _y_max = std::max(_y_max, c.y);
  }
  for (const auto& [a, b] : blocked)
  {
    if (!grid_adjacent(a, b) || !contains(a) || !contains(b))
      throw std::invalid_argument("blocked pair (" + std::to_string(a.x) + "," + std::to_string(a.y)
        + ")-(" + std::to_string(b.x) + "," + std::to_string(b.y) + ") is not two adjacent cells");
    _blocked.insert(cell_pair(a, b));
  }
}

bool GridSpec::is_blocked(Cell a, Cell b) const
{
  return _blocked.count(cell_pair(a, b)) != 0;
}

std::vector<Cell> GridSpec::ordered_cells() const
{
  std::vector<Cell> out;
  out.reserve(_weights.size());
  for (int y = _y_max; y >= _y_min; --y)
    for (int x = _x_max; x >= _x_min; --x)
      if (contains({x, y}))
        out.push_back({x, y});
  return out;
}

GridGraph grid_to_graph(const GridSpec& spec, std::vector<std::string> labels)
{
  GridGraph out{Graph::build(1, {}), spec.ordered_cells(), {}};
  for (Vertex v = 0; v < out.cell_of.size(); ++v)
    out.vertex_of.emplace(out.cell_of[v], v);

  std::vector<Edge> edges;
  for (Vertex v = 0; v < out.cell_of.size(); ++v)
  {
    const Cell c = out.cell_of[v];
    // Each pair once: look right (x-1) and down (y-1).
    for (const Cell nb : {Cell{c.x - 1, c.y}, Cell{c.x, c.y - 1}})
    {
      if (!spec.contains(nb) || spec.is_blocked(c, nb))
        continue;
      Weight w = (spec.weight(c) + spec.weight(nb)) / 2;
      edges.push_back({v, out.vertex_of.at(nb), std::move(w)});
    }
  }
  out.graph = Graph::build(out.cell_of.size(), std::move(edges));
  if (!labels.empty())
    out.graph = out.graph.with_labels(std::move(labels));
  return out;
}

std::string serialize_grid(const GridSpec& spec)
{
  nlohmann::ordered_json doc;
  doc["format"] = "astarlab-grid/1";
  doc["x_min"] = spec.x_min();
  doc["x_max"] = spec.x_max();
  doc["y_min"] = spec.y_min();
  doc["y_max"] = spec.y_max();
  auto weights = nlohmann::ordered_json::array();
  for (int y = spec.y_max(); y >= spec.y_min(); --y)
    for (int x = spec.x_max(); x >= spec.x_min(); --x)
      if (spec.contains({x, y}))
        weights.push_back(format_weight(spec.weight({x, y})));
      else
        weights.push_back(nullptr);
  doc["weights"] = std::move(weights);
  auto blocked = nlohmann::ordered_json::array();
  for (const auto& [a, b] : spec.blocked())
    blocked.push_back({{a.x, a.y}, {b.x, b.y}});
  doc["blocked"] = std::move(blocked);
  return doc.dump(1) + "\n";
}

GridSpec parse_grid(const std::string& text)
{
  nlohmann::json doc;
  try
  {
    doc = nlohmann::json::parse(text);
  }
  catch (const nlohmann::json::exception& e)
  {
    throw std::invalid_argument(std::string("grid file is not valid JSON: ") + e.what());
  }
  try
  {
    if (doc.value("format", "") != "astarlab-grid/1")
      throw std::invalid_argument("grid file: unknown or missing format tag");
    const int x_min = doc.at("x_min"), x_max = doc.at("x_max");
    const int y_min = doc.at("y_min"), y_max = doc.at("y_max");
    if (x_max < x_min || y_max < y_min)
      throw std::invalid_argument("grid file: empty bounding box");
    const auto& weights = doc.at("weights");
    const std::size_t expected = static_cast<std::size_t>(x_max - x_min + 1) * (y_max - y_min + 1);
    if (!weights.is_array() || weights.size() != expected)
      throw std::invalid_argument("grid file: weights must list width*height entries");

    std::map<Cell, Weight> cells;
    std::size_t idx = 0;
    for (int y = y_max; y >= y_min; --y)
      for (int x = x_max; x >= x_min; --x, ++idx)
        if (!weights[idx].is_null())
          cells.emplace(Cell{x, y}, parse_weight(weights[idx].get<std::string>()));

    std::set<CellPair> blocked;
    for (const auto& pair : doc.at("blocked"))
      blocked.insert(cell_pair({pair.at(0).at(0), pair.at(0).at(1)},
                               {pair.at(1).at(0), pair.at(1).at(1)}));
    return GridSpec(std::move(cells), std::move(blocked));
  }
  catch (const nlohmann::json::exception& e)
  {
    throw std::invalid_argument(std::string("grid file: ") + e.what());
  }
}

}  // namespace astarlab
