#include "oracles.hpp"

#include "astarlab/graph_io.hpp"
#include "astarlab/grid.hpp"
#include "astarlab/instances.hpp"
#include "astarlab/search.hpp"

#include <doctest.h>

using namespace astarlab;

namespace {

GraphError::Kind build_error(std::size_t n, std::vector<Edge> edges)
{
  try
  {
    Graph::build(n, std::move(edges));
  }
  catch (const GraphError& e)
  {
    return e.kind();
  }
  FAIL("expected a GraphError");
  return GraphError::Kind::Malformed;
}

GraphError::Kind parse_error(const std::string& text)
{
  try
  {
    parse_graph(text);
  }
  catch (const GraphError& e)
  {
    return e.kind();
  }
  FAIL("expected a GraphError");
  return GraphError::Kind::Malformed;
}

}  // namespace

TEST_CASE("weights parse to lowest terms and reject junk")
{
  CHECK(parse_weight("6/4") == Weight(3, 2));
  CHECK(format_weight(parse_weight("6/4")) == "3/2");
  CHECK(format_weight(parse_weight("7")) == "7/1");
  CHECK(parse_weight("-1/2") == Weight(-1, 2));
  for (const char* bad : {"", "1/0", "1/-2", "1 /2", "1/2x", "x", "1//2", "+"})
    CHECK_THROWS_AS(parse_weight(bad), std::invalid_argument);
}

TEST_CASE("build_graph accepts K2 and the triangle")
{
  const Graph k2 = Graph::build(2, {{0, 1, Weight(1)}});
  CHECK(k2.size() == 2);
  CHECK(k2.edge_count() == 1);
  REQUIRE(k2.weight(1, 0) != nullptr);
  CHECK(*k2.weight(1, 0) == 1);

  const Graph tri = Graph::build(3, {{0, 1, Weight(1)}, {1, 2, Weight(2)}, {0, 2, Weight(7)}});
  CHECK(oracle::all_pairs(tri)[0][2] == 3);
  CHECK(dijkstra(tri, 0).dist[2] == 3);
}

TEST_CASE("build_graph reports each invariant violation with its own kind")
{
  CHECK(build_error(3, {{0, 1, Weight(1)}}) == GraphError::Kind::Disconnected);
  CHECK(build_error(2, {{0, 1, Weight(1)}, {1, 0, Weight(2)}}) == GraphError::Kind::DuplicateEdge);
  CHECK(build_error(2, {{0, 1, Weight(0)}}) == GraphError::Kind::NonPositiveWeight);
  CHECK(build_error(2, {{0, 1, Weight(-1, 2)}}) == GraphError::Kind::NonPositiveWeight);
  CHECK(build_error(2, {{0, 0, Weight(1)}, {0, 1, Weight(1)}}) == GraphError::Kind::SelfLoop);
  CHECK(build_error(2, {{0, 2, Weight(1)}}) == GraphError::Kind::BadVertex);
}

TEST_CASE("adjacency is symmetric and sorted by neighbour")
{
  std::mt19937_64 rng(11);
  for (int round = 0; round < 20; ++round)
  {
    const Graph g = oracle::random_connected(12, 0.3, 9, 1, rng);
    std::size_t arcs = 0;
    for (Vertex u = 0; u < g.size(); ++u)
    {
      const auto nb = g.neighbors(u);
      arcs += nb.size();
      for (std::size_t i = 0; i < nb.size(); ++i)
      {
        CHECK(nb[i].to != u);
        if (i > 0)
          CHECK(nb[i - 1].to < nb[i].to);
        const Weight* back = g.weight(nb[i].to, u);
        REQUIRE(back != nullptr);
        CHECK(*back == nb[i].w);
      }
    }
    CHECK(arcs == 2 * g.edge_count());
  }
}

TEST_CASE("parse_graph reads the edge-list format")
{
  const Graph k2 = parse_graph("2 1\n0 1 1/1");
  CHECK(k2.size() == 2);
  CHECK(*k2.weight(0, 1) == 1);

  const Graph commented = parse_graph("# header\n3 2 # counts\n0 1 1/2\n\n1 2 3 # bare integer\n");
  CHECK(*commented.weight(0, 1) == Weight(1, 2));
  CHECK(*commented.weight(1, 2) == 3);

  CHECK(parse_error("2 1\n0 1 -1/2") == GraphError::Kind::NonPositiveWeight);
  CHECK(parse_error("2 1\n0 1 a/2") == GraphError::Kind::BadRational);
  CHECK(parse_error("2 1\n0 1") == GraphError::Kind::Malformed);
  CHECK(parse_error("2 2\n0 1 1") == GraphError::Kind::Malformed);
  CHECK(parse_error("3 1\n0 1 1") == GraphError::Kind::Disconnected);
}

TEST_CASE("serialize then parse is the identity on edges")
{
  const auto bundle = gen_labeling_clique(2, 1, 2, {{0, 0}, {0, 0}}, true);
  const Graph back = parse_graph(serialize_graph(bundle.graph));
  CHECK(same_edges(back, bundle.graph));
  CHECK(back.edges().size() == 3);

  std::mt19937_64 rng(5);
  for (int round = 0; round < 30; ++round)
  {
    const Graph g = oracle::random_connected(2 + round % 9, 0.4, 50, 7, rng);
    CHECK(same_edges(parse_graph(serialize_graph(g)), g));
  }
}

TEST_CASE("grid_to_graph uses half sums")
{
  SUBCASE("1x2 grid")
  {
    const GridSpec spec({{{0, 0}, Weight(3)}, {{1, 0}, Weight(5)}}, {});
    const GridGraph gg = grid_to_graph(spec);
    REQUIRE(gg.graph.edge_count() == 1);
    CHECK(gg.graph.edges()[0].w == 4);
  }
  SUBCASE("2x2 uniform grid with one blocked pair")
  {
    std::map<Cell, Weight> w;
    for (int x = 0; x < 2; ++x)
      for (int y = 0; y < 2; ++y)
        w[{x, y}] = 1;
    const GridSpec spec(w, {cell_pair({0, 0}, {1, 0})});
    const GridGraph gg = grid_to_graph(spec);
    CHECK(gg.graph.size() == 4);
    CHECK(gg.graph.edge_count() == 3);
    for (const Edge& e : gg.graph.edges())
      CHECK(e.w == 1);
    CHECK(gg.graph.weight(gg.at(0, 0), gg.at(1, 0)) == nullptr);
  }
  SUBCASE("2x2 grid with weights 1..4")
  {
    // Row-major: (0,0)=1 (1,0)=2 (0,1)=3 (1,1)=4.
    const std::map<Cell, Weight> w{{{0, 0}, 1}, {{1, 0}, 2}, {{0, 1}, 3}, {{1, 1}, 4}};
    const GridGraph gg = grid_to_graph(GridSpec(w, {}));
    std::vector<Weight> ws;
    for (const Edge& e : gg.graph.edges())
      ws.push_back(e.w);
    std::sort(ws.begin(), ws.end());
    CHECK(ws == std::vector<Weight>{Weight(3, 2), Weight(2), Weight(3), Weight(7, 2)});
    // Cell sums of the two 2-hop routes minus half the endpoints.
    const Weight via_right = Weight(1 + 2 + 4) - Weight(1 + 4, 2);
    const Weight via_up = Weight(1 + 3 + 4) - Weight(1 + 4, 2);
    CHECK(dijkstra(gg.graph, gg.at(0, 0)).dist[gg.at(1, 1)] == std::min(via_right, via_up));
  }
}

TEST_CASE("GridSpec rejects bad weights and bad obstacles")
{
  CHECK_THROWS_AS(GridSpec({{{0, 0}, Weight(0)}}, {}), std::invalid_argument);
  CHECK_THROWS_AS(GridSpec({{{0, 0}, Weight(1)}, {{2, 0}, Weight(1)}}, {cell_pair({0, 0}, {2, 0})}),
                  std::invalid_argument);
  CHECK_THROWS_AS(GridSpec({{{0, 0}, Weight(1)}}, {cell_pair({0, 0}, {1, 0})}), std::invalid_argument);
}

TEST_CASE("grid documents round-trip")
{
  const auto bundle = gen_linf_grid(2, 1, WeightMode::Deterministic);
  const GridSpec back = parse_grid(serialize_grid(*bundle.grid));
  CHECK(back.cells() == bundle.grid->cells());
  CHECK(back.blocked() == bundle.grid->blocked());
  CHECK_THROWS(parse_grid("{\"format\": \"other\"}"));
}

TEST_CASE("property: grid path length equals cell sum minus half the endpoints")
{
  std::mt19937_64 rng(2024);
  int checked = 0;
  for (int round = 0; round < 60; ++round)
  {
    const int width = 1 + int(rng() % 3), height = 1 + int(rng() % 3);
    std::map<Cell, Weight> w;
    for (int x = 0; x < width; ++x)
      for (int y = 0; y < height; ++y)
        w[{x, y}] = Weight(long(1 + rng() % 9), long(1 + rng() % 3));
    std::set<CellPair> blocked;
    for (const auto& [c, _] : w)
      for (const Cell nb : {Cell{c.x + 1, c.y}, Cell{c.x, c.y + 1}})
        if (w.count(nb) && rng() % 4 == 0)
          blocked.insert(cell_pair(c, nb));
    const GridSpec spec(w, blocked);
    std::optional<GridGraph> gg;
    try
    {
      gg = grid_to_graph(spec);
    }
    catch (const GraphError& e)
    {
      REQUIRE(e.kind() == GraphError::Kind::Disconnected);
      continue;
    }
    for (Vertex s = 0; s < gg->graph.size(); ++s)
      for (Vertex t = 0; t < gg->graph.size(); ++t)
      {
        if (s == t)
          continue;
        for (const auto& path : oracle::simple_paths(gg->graph, s, t))
        {
          Weight cells = 0;
          for (Vertex v : path.vertices)
            cells += spec.weight(gg->cell_of[v]);
          CHECK(path.length == cells - (spec.weight(gg->cell_of[s]) + spec.weight(gg->cell_of[t])) / 2);
          ++checked;
        }
      }
  }
  CHECK(checked > 1000);
}
