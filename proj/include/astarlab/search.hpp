#pragma once

#include "astarlab/graph.hpp"
#include "astarlab/magnitude.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace astarlab {

/// Positions (1-based) of a vertex's two occurrences in a depth-first Euler
/// tour. open < close; positions over all vertices are distinct in [1, 2n].
struct EulerSpan
{
  std::uint32_t open = 0;
  std::uint32_t close = 0;

  bool operator==(const EulerSpan&) const = default;
};

/// True iff a is a proper ancestor of b (a's span strictly contains b's).
inline bool is_ancestor(EulerSpan a, EulerSpan b)
{
  return a.open < b.open && b.close < a.close;
}

struct ShortestPathTree
{
  Vertex root = 0;
  std::vector<Vertex> parent;  ///< parent[root] == root
  std::vector<Weight> dist;
  std::vector<EulerSpan> euler;
};

/// Exact single-source distances. Among equal-length parent candidates the
/// smallest vertex index wins, so trees (and their tours) are canonical.
ShortestPathTree dijkstra(const Graph& g, Vertex source);

/// Depth-first tour visiting children in increasing index order.
std::vector<EulerSpan> euler_tour(const std::vector<Vertex>& parent, Vertex root);
std::vector<EulerSpan> euler_tour(const ShortestPathTree& spt);

/// Throws std::invalid_argument unless spans form a valid tour labeling:
/// 2n distinct positions in [1, 2n], open < close, properly nested.
void validate_euler_spans(const std::vector<EulerSpan>& spans);

/// Dense all-pairs exact distance matrix.
class DistanceTable
{
public:
  explicit DistanceTable(const Graph& g);

  std::size_t size() const { return _n; }
  const Weight& operator()(Vertex s, Vertex t) const { return _dist[std::size_t(s) * _n + t]; }
  const std::vector<Weight>& flat() const { return _dist; }

private:
  std::size_t _n;
  std::vector<Weight> _dist;
};

struct PathResult
{
  Weight length;
  std::vector<Vertex> vertices;  ///< s first, t last
  std::size_t hops = 0;
};

/// Shortest-path tree maximizing hop count among shortest paths, from a
/// label-setting search on (length, -hops). Ties among maximal-hop
/// predecessors go to the smallest index.
struct MaxHopTree
{
  Vertex root = 0;
  std::vector<Vertex> parent;
  std::vector<Weight> dist;
  std::vector<std::size_t> hops;
};

MaxHopTree max_hop_tree(const Graph& g, Vertex source);
PathResult max_hop_shortest_path(const Graph& g, Vertex s, Vertex t);
PathResult tree_path(const MaxHopTree& tree, Vertex t);

/// Length of the best simple s-t path other than one fixed shortest path
/// (so equals dist(s,t) when shortest paths are not unique). std::nullopt
/// when the shortest path is the only simple path. Deviation search: the
/// shortest path is fixed and each deviation edge is branched on.
std::optional<Weight> second_shortest_simple_path(const Graph& g, Vertex s, Vertex t);

enum class TieBreak
{
  Fifo,     ///< earliest (re)labelled first
  Lifo,     ///< latest (re)labelled first
  MinH,     ///< smaller h first, then smaller index
  MaxDist,  ///< larger d first, then the target, then smaller index
};

const char* to_string(TieBreak tie);
TieBreak parse_tie_break(const std::string& name);

/// h(., t) for the fixed target of one query.
using TargetHeuristic = std::function<Magnitude(Vertex)>;

struct SearchTrace
{
  std::vector<Vertex> scanned;       ///< pop order; s first, t last
  std::vector<Magnitude> keys;       ///< d(u) + h(u,t) at pop time
  std::vector<Weight> settled_dist;  ///< d(u) at pop time
  Weight dist;                       ///< d(t)
  std::size_t pops = 0;

  std::string to_text() const;
};

/// A* as a best-first loop over d(u) + h(u,t): pops the minimum unsettled
/// key, relaxes its neighbours, stops once t is popped. Settled vertices are
/// never reopened.
SearchTrace astar(const Graph& g, Vertex s, Vertex t, const TargetHeuristic& h, TieBreak tie);

struct ScanSets
{
  std::vector<Vertex> must;     ///< dist(s,u) + h(u,t) <  dist(s,t)
  std::vector<Vertex> may;      ///< dist(s,u) + h(u,t) <= dist(s,t)
  std::vector<Vertex> optimal;  ///< must plus the max-hop shortest path
};

ScanSets scan_sets(const Graph& g, Vertex s, Vertex t, const TargetHeuristic& h);

}  // namespace astarlab
