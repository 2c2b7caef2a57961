#pragma once

#include "astarlab/graph.hpp"

#include <string>
#include <string_view>

namespace astarlab {

// Edge-list text format:
//
//   # comment (anywhere, to end of line)
//   n m
//   u v p/q        (m lines)
//
// Invariant violations surface as GraphError with the matching Kind; syntax
// problems as Kind::Malformed or Kind::BadRational.

Graph parse_graph(std::string_view text);
std::string serialize_graph(const Graph& g);

Graph load_graph_file(const std::string& path);
void save_graph_file(const Graph& g, const std::string& path);

}  // namespace astarlab
