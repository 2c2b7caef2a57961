#pragma once

#include "astarlab/weight.hpp"

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace astarlab {

using Vertex = std::uint32_t;

struct Edge
{
  Vertex u;
  Vertex v;
  Weight w;
};

struct Arc
{
  Vertex to;
  Weight w;
};

class GraphError : public std::runtime_error
{
public:
  enum class Kind
  {
    BadVertex,
    SelfLoop,
    DuplicateEdge,
    NonPositiveWeight,
    Disconnected,
    Malformed,
    BadRational,
  };

  GraphError(Kind kind, const std::string& what)
  : std::runtime_error(what), _kind(kind)
  {
  }

  Kind kind() const { return _kind; }

private:
  Kind _kind;
};

/// Immutable, simple, undirected, connected graph with exact weights.
/// Adjacency lists are sorted by neighbor index, which every deterministic
/// tie rule in the library relies on.
class Graph
{
public:
  /// Validates and builds. Throws GraphError with a distinct Kind for each
  /// violated precondition.
  static Graph build(std::size_t n, std::vector<Edge> edges);

  std::size_t size() const { return _adj.size(); }
  std::size_t edge_count() const { return _edge_count; }

  std::span<const Arc> neighbors(Vertex v) const { return _adj[v]; }

  /// nullptr when u and v are not adjacent.
  const Weight* weight(Vertex u, Vertex v) const;

  /// Each undirected edge once, u < v, sorted lexicographically.
  std::vector<Edge> edges() const;

  Weight total_weight() const;

  /// Optional per-vertex role tags ("clique", "leaf", ...). Empty string
  /// means untagged.
  const std::vector<std::string>& labels() const { return _labels; }
  Graph with_labels(std::vector<std::string> labels) const;

private:
  Graph() = default;

  std::vector<std::vector<Arc>> _adj;
  std::vector<std::string> _labels;
  std::size_t _edge_count = 0;
};

/// Structural equality on the undirected edge multiset (labels ignored).
bool same_edges(const Graph& a, const Graph& b);

}  // namespace astarlab
