#include "astarlab/search.hpp"

#include <algorithm>
#include <queue>
#include <sstream>
#include <stdexcept>

namespace astarlab {

namespace {

constexpr Vertex kNone = static_cast<Vertex>(-1);

struct DistEntry
{
  Weight dist;
  Vertex v;
};

struct DistEntryGreater
{
  bool operator()(const DistEntry& a, const DistEntry& b) const
  {
    const int c = cmp(a.dist, b.dist);
    if (c != 0)
      return c > 0;
    return a.v > b.v;
  }
};

/// Distances from source with some vertices removed and at most one edge
/// banned. Unreached vertices keep reached[v] == 0.
void restricted_dijkstra(
  const Graph& g, Vertex source, const std::vector<char>& removed,
  Vertex ban_u, Vertex ban_v,
  std::vector<Weight>& dist, std::vector<char>& reached)
{
  const auto n = g.size();
  dist.assign(n, Weight(0));
  reached.assign(n, 0);
  std::vector<char> done(n, 0);
  std::priority_queue<DistEntry, std::vector<DistEntry>, DistEntryGreater> heap;
  reached[source] = 1;
  heap.push({Weight(0), source});
  while (!heap.empty())
  {
    DistEntry top = heap.top();
    heap.pop();
    if (done[top.v] || top.dist != dist[top.v])
      continue;
    done[top.v] = 1;
    for (const auto& a : g.neighbors(top.v))
    {
      if (removed[a.to] || done[a.to])
        continue;
      if ((top.v == ban_u && a.to == ban_v) || (top.v == ban_v && a.to == ban_u))
        continue;
      Weight cand = top.dist + a.w;
      if (!reached[a.to] || cand < dist[a.to])
      {
        reached[a.to] = 1;
        dist[a.to] = cand;
        heap.push({std::move(cand), a.to});
      }
    }
  }
}

void check_vertex(const Graph& g, Vertex v)
{
  if (v >= g.size())
    throw std::out_of_range("vertex " + std::to_string(v) + " out of range");
}

}  // namespace

ShortestPathTree dijkstra(const Graph& g, Vertex source)
{
  check_vertex(g, source);
  const auto n = g.size();
  ShortestPathTree spt;
  spt.root = source;
  spt.parent.assign(n, kNone);
  spt.dist.assign(n, Weight(0));
  std::vector<char> done(n, 0);

  std::priority_queue<DistEntry, std::vector<DistEntry>, DistEntryGreater> heap;
  spt.parent[source] = source;
  heap.push({Weight(0), source});
  while (!heap.empty())
  {
    DistEntry top = heap.top();
    heap.pop();
    if (done[top.v] || top.dist != spt.dist[top.v])
      continue;
    done[top.v] = 1;
    for (const auto& a : g.neighbors(top.v))
    {
      if (done[a.to])
        continue;
      Weight cand = top.dist + a.w;
      auto& p = spt.parent[a.to];
      if (p == kNone)
      {
        p = top.v;
        spt.dist[a.to] = cand;
        heap.push({std::move(cand), a.to});
        continue;
      }
      const int c = cmp(cand, spt.dist[a.to]);
      if (c < 0)
      {
        p = top.v;
        spt.dist[a.to] = cand;
        heap.push({std::move(cand), a.to});
      }
      else if (c == 0 && top.v < p)
        p = top.v;
    }
  }
  spt.euler = euler_tour(spt);
  return spt;
}

std::vector<EulerSpan> euler_tour(const std::vector<Vertex>& parent, Vertex root)
{
  const auto n = parent.size();
  std::vector<std::vector<Vertex>> children(n);
  for (Vertex v = 0; v < n; ++v)
    if (v != root)
    {
      if (parent[v] >= n)
        throw std::invalid_argument("euler_tour: vertex " + std::to_string(v) + " has no parent");
      children[parent[v]].push_back(v);
    }
  // Indices ascend already because v ascends, but keep the contract explicit.
  for (auto& c : children)
    std::sort(c.begin(), c.end());

  std::vector<EulerSpan> spans(n);
  std::uint32_t counter = 0;
  std::vector<std::pair<Vertex, std::size_t>> stack;
  stack.emplace_back(root, 0);
  spans[root].open = ++counter;
  while (!stack.empty())
  {
    auto& [v, next] = stack.back();
    if (next < children[v].size())
    {
      const Vertex c = children[v][next++];
      spans[c].open = ++counter;
      stack.emplace_back(c, 0);
    }
    else
    {
      spans[v].close = ++counter;
      stack.pop_back();
    }
  }
  if (counter != 2 * n)
    throw std::invalid_argument("euler_tour: parent array is not a tree rooted at "
      + std::to_string(root));
  return spans;
}

std::vector<EulerSpan> euler_tour(const ShortestPathTree& spt)
{
  return euler_tour(spt.parent, spt.root);
}

void validate_euler_spans(const std::vector<EulerSpan>& spans)
{
  const auto n = spans.size();
  std::vector<Vertex> at(2 * n + 1, kNone);
  std::vector<char> is_open(2 * n + 1, 0);
  for (Vertex v = 0; v < n; ++v)
  {
    const auto [o, c] = spans[v];
    if (o < 1 || c > 2 * n || o >= c)
      throw std::invalid_argument("euler spans: vertex " + std::to_string(v) + " has a bad span");
    if (at[o] != kNone || at[c] != kNone)
      throw std::invalid_argument("euler spans: repeated position");
    at[o] = at[c] = v;
    is_open[o] = 1;
  }
  // Nesting: scanning positions left to right must behave like balanced
  // parentheses with matching labels.
  std::vector<Vertex> stack;
  for (std::size_t pos = 1; pos <= 2 * n; ++pos)
  {
    if (is_open[pos])
      stack.push_back(at[pos]);
    else
    {
      if (stack.empty() || stack.back() != at[pos])
        throw std::invalid_argument("euler spans: intervals cross");
      stack.pop_back();
    }
  }
  if (n > 0 && (spans[at[1]].close != 2 * n))
    throw std::invalid_argument("euler spans: more than one root");
}

DistanceTable::DistanceTable(const Graph& g)
: _n(g.size())
{
  _dist.reserve(_n * _n);
  for (Vertex s = 0; s < _n; ++s)
  {
    auto spt = dijkstra(g, s);
    for (auto& d : spt.dist)
      _dist.push_back(std::move(d));
  }
}

MaxHopTree max_hop_tree(const Graph& g, Vertex source)
{
  check_vertex(g, source);
  const auto n = g.size();
  MaxHopTree tree;
  tree.root = source;
  tree.parent.assign(n, kNone);
  tree.dist.assign(n, Weight(0));
  tree.hops.assign(n, 0);
  std::vector<char> done(n, 0);

  struct Entry
  {
    Weight dist;
    std::size_t hops;
    Vertex v;
  };
  // Min on (dist, -hops, v).
  auto greater = [](const Entry& a, const Entry& b) {
    const int c = cmp(a.dist, b.dist);
    if (c != 0)
      return c > 0;
    if (a.hops != b.hops)
      return a.hops < b.hops;
    return a.v > b.v;
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(greater)> heap(greater);

  tree.parent[source] = source;
  heap.push({Weight(0), 0, source});
  while (!heap.empty())
  {
    Entry top = heap.top();
    heap.pop();
    if (done[top.v] || top.dist != tree.dist[top.v] || top.hops != tree.hops[top.v])
      continue;
    done[top.v] = 1;
    for (const auto& a : g.neighbors(top.v))
    {
      if (done[a.to])
        continue;
      Weight cand = top.dist + a.w;
      const std::size_t cand_hops = top.hops + 1;
      auto& p = tree.parent[a.to];
      bool better = p == kNone;
      bool same = false;
      if (!better)
      {
        const int c = cmp(cand, tree.dist[a.to]);
        better = c < 0 || (c == 0 && cand_hops > tree.hops[a.to]);
        same = c == 0 && cand_hops == tree.hops[a.to];
      }
      if (better)
      {
        p = top.v;
        tree.dist[a.to] = cand;
        tree.hops[a.to] = cand_hops;
        heap.push({std::move(cand), cand_hops, a.to});
      }
      else if (same && top.v < p)
        p = top.v;
    }
  }
  return tree;
}

PathResult tree_path(const MaxHopTree& tree, Vertex t)
{
  PathResult out;
  out.length = tree.dist.at(t);
  out.hops = tree.hops[t];
  for (Vertex v = t;; v = tree.parent[v])
  {
    out.vertices.push_back(v);
    if (v == tree.root)
      break;
  }
  std::reverse(out.vertices.begin(), out.vertices.end());
  return out;
}

PathResult max_hop_shortest_path(const Graph& g, Vertex s, Vertex t)
{
  check_vertex(g, t);
  return tree_path(max_hop_tree(g, s), t);
}

std::optional<Weight> second_shortest_simple_path(const Graph& g, Vertex s, Vertex t)
{
  check_vertex(g, s);
  check_vertex(g, t);
  if (s == t)
    throw std::invalid_argument("second_shortest_simple_path requires s != t");

  const auto spt = dijkstra(g, s);
  std::vector<Vertex> path;
  for (Vertex v = t;; v = spt.parent[v])
  {
    path.push_back(v);
    if (v == s)
      break;
  }
  std::reverse(path.begin(), path.end());

  std::optional<Weight> best;
  std::vector<char> removed(g.size(), 0);
  std::vector<Weight> dist;
  std::vector<char> reached;
  for (std::size_t i = 0; i + 1 < path.size(); ++i)
  {
    const Vertex spur = path[i];
    restricted_dijkstra(g, spur, removed, spur, path[i + 1], dist, reached);
    if (reached[t])
    {
      Weight cand = spt.dist[spur] + dist[t];
      if (!best || cand < *best)
        best = std::move(cand);
    }
    removed[spur] = 1;
  }
  return best;
}

const char* to_string(TieBreak tie)
{
  switch (tie)
  {
    case TieBreak::Fifo: return "fifo";
    case TieBreak::Lifo: return "lifo";
    case TieBreak::MinH: return "min-h";
    case TieBreak::MaxDist: return "max-dist";
  }
  return "?";
}

TieBreak parse_tie_break(const std::string& name)
{
  for (auto t : {TieBreak::Fifo, TieBreak::Lifo, TieBreak::MinH, TieBreak::MaxDist})
    if (name == to_string(t))
      return t;
  throw std::invalid_argument("unknown tie policy '" + name + "' (fifo, lifo, min-h, max-dist)");
}

std::string SearchTrace::to_text() const
{
  std::ostringstream out;
  out << "# pop vertex key settled_dist\n";
  for (std::size_t i = 0; i < scanned.size(); ++i)
    out << i << ' ' << scanned[i] << ' ' << keys[i].to_string() << ' '
        << format_weight(settled_dist[i]) << '\n';
  out << "dist " << format_weight(dist) << "\npops " << pops << '\n';
  return out.str();
}

SearchTrace astar(const Graph& g, Vertex s, Vertex t, const TargetHeuristic& h, TieBreak tie)
{
  check_vertex(g, s);
  check_vertex(g, t);
  const auto n = g.size();

  std::vector<Weight> d(n);
  std::vector<char> labelled(n, 0), settled(n, 0);
  std::vector<std::optional<Magnitude>> hval(n);
  std::vector<std::uint64_t> stamp(n, 0);
  std::uint64_t clock = 0;

  struct Entry
  {
    Magnitude key;
    Vertex v;
    std::uint64_t stamp;
  };
  auto heuristic = [&](Vertex v) -> const Magnitude& {
    if (!hval[v])
      hval[v] = h(v);
    return *hval[v];
  };
  // Returns true when a should pop before b.
  auto before = [&](const Entry& a, const Entry& b) {
    const auto c = a.key <=> b.key;
    if (c != 0)
      return c < 0;
    switch (tie)
    {
      case TieBreak::Fifo:
        return a.stamp < b.stamp;
      case TieBreak::Lifo:
        return a.stamp > b.stamp;
      case TieBreak::MinH:
      {
        const auto ch = *hval[a.v] <=> *hval[b.v];
        if (ch != 0)
          return ch < 0;
        return a.v < b.v;
      }
      case TieBreak::MaxDist:
      {
        const int cd = cmp(d[a.v], d[b.v]);
        if (cd != 0)
          return cd > 0;
        if ((a.v == t) != (b.v == t))
          return a.v == t;
        return a.v < b.v;
      }
    }
    return a.v < b.v;
  };
  auto heap_cmp = [&](const Entry& a, const Entry& b) { return before(b, a); };
  std::priority_queue<Entry, std::vector<Entry>, decltype(heap_cmp)> heap(heap_cmp);

  auto label = [&](Vertex v, Weight dist) {
    d[v] = std::move(dist);
    labelled[v] = 1;
    stamp[v] = ++clock;
    heap.push({Magnitude(d[v]) + heuristic(v), v, stamp[v]});
  };

  SearchTrace trace;
  label(s, Weight(0));
  while (!heap.empty())
  {
    Entry top = heap.top();
    heap.pop();
    if (settled[top.v] || top.stamp != stamp[top.v])
      continue;
    settled[top.v] = 1;
    trace.scanned.push_back(top.v);
    trace.keys.push_back(top.key);
    trace.settled_dist.push_back(d[top.v]);
    if (top.v == t)
      break;
    for (const auto& a : g.neighbors(top.v))
    {
      if (settled[a.to])
        continue;
      Weight cand = d[top.v] + a.w;
      if (!labelled[a.to] || cand < d[a.to])
        label(a.to, std::move(cand));
    }
  }
  trace.dist = d[t];
  trace.pops = trace.scanned.size();
  return trace;
}

ScanSets scan_sets(const Graph& g, Vertex s, Vertex t, const TargetHeuristic& h)
{
  check_vertex(g, t);
  const auto tree = max_hop_tree(g, s);
  const Magnitude target(tree.dist[t]);
  ScanSets out;
  std::vector<char> in_optimal(g.size(), 0);
  for (Vertex u = 0; u < g.size(); ++u)
  {
    const auto c = (Magnitude(tree.dist[u]) + h(u)) <=> target;
    if (c < 0)
    {
      out.must.push_back(u);
      in_optimal[u] = 1;
    }
    if (c <= 0)
      out.may.push_back(u);
  }
  for (Vertex v : tree_path(tree, t).vertices)
    in_optimal[v] = 1;
  for (Vertex u = 0; u < g.size(); ++u)
    if (in_optimal[u])
      out.optimal.push_back(u);
  return out;
}

}  // namespace astarlab
