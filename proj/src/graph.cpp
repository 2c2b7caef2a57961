#include "astarlab/graph.hpp"

#include <algorithm>

namespace astarlab {

Graph Graph::build(std::size_t n, std::vector<Edge> edges)
{
  using K = GraphError::Kind;
  if (n == 0)
    throw GraphError(K::Disconnected, "graph has no vertices");

  Graph g;
  g._adj.resize(n);
  g._labels.resize(n);
  for (auto& e : edges)
  {
    e.w.canonicalize();
    if (e.u >= n || e.v >= n)
      throw GraphError(K::BadVertex,
        "edge (" + std::to_string(e.u) + "," + std::to_string(e.v)
        + ") out of range for n=" + std::to_string(n));
    if (e.u == e.v)
      throw GraphError(K::SelfLoop, "self-loop at " + std::to_string(e.u));
    if (sgn(e.w) <= 0)
      throw GraphError(K::NonPositiveWeight,
        "non-positive weight " + format_weight(e.w) + " on edge ("
        + std::to_string(e.u) + "," + std::to_string(e.v) + ")");
    g._adj[e.u].push_back({e.v, e.w});
    g._adj[e.v].push_back({e.u, e.w});
  }

  for (Vertex v = 0; v < n; ++v)
  {
    auto& list = g._adj[v];
    std::sort(list.begin(), list.end(),
      [](const Arc& a, const Arc& b) { return a.to < b.to; });
    for (std::size_t i = 1; i < list.size(); ++i)
      if (list[i].to == list[i - 1].to)
        throw GraphError(K::DuplicateEdge,
          "duplicate edge (" + std::to_string(std::min<Vertex>(v, list[i].to))
          + "," + std::to_string(std::max<Vertex>(v, list[i].to)) + ")");
  }
  g._edge_count = edges.size();

  std::vector<char> seen(n, 0);
  std::vector<Vertex> stack{0};
  seen[0] = 1;
  std::size_t reached = 1;
  while (!stack.empty())
  {
    const Vertex u = stack.back();
    stack.pop_back();
    for (const auto& a : g._adj[u])
      if (!seen[a.to])
      {
        seen[a.to] = 1;
        ++reached;
        stack.push_back(a.to);
      }
  }
  if (reached != n)
    throw GraphError(K::Disconnected,
      "graph is disconnected: " + std::to_string(n - reached)
      + " vertices unreachable from 0");
  return g;
}

const Weight* Graph::weight(Vertex u, Vertex v) const
{
  const auto& list = _adj[u];
  auto it = std::lower_bound(list.begin(), list.end(), v,
    [](const Arc& a, Vertex x) { return a.to < x; });
  if (it == list.end() || it->to != v)
    return nullptr;
  return &it->w;
}

std::vector<Edge> Graph::edges() const
{
  std::vector<Edge> out;
  out.reserve(_edge_count);
  for (Vertex u = 0; u < _adj.size(); ++u)
    for (const auto& a : _adj[u])
      if (u < a.to)
        out.push_back({u, a.to, a.w});
  return out;
}

Weight Graph::total_weight() const
{
  Weight sum = 0;
  for (Vertex u = 0; u < _adj.size(); ++u)
    for (const auto& a : _adj[u])
      if (u < a.to)
        sum += a.w;
  return sum;
}

Graph Graph::with_labels(std::vector<std::string> labels) const
{
  if (labels.size() != size())
    throw GraphError(GraphError::Kind::Malformed, "label count does not match vertex count");
  Graph out = *this;
  out._labels = std::move(labels);
  return out;
}

bool same_edges(const Graph& a, const Graph& b)
{
  if (a.size() != b.size() || a.edge_count() != b.edge_count())
    return false;
  const auto ea = a.edges();
  const auto eb = b.edges();
  for (std::size_t i = 0; i < ea.size(); ++i)
    if (ea[i].u != eb[i].u || ea[i].v != eb[i].v || ea[i].w != eb[i].w)
      return false;
  return true;
}

}  // namespace astarlab
