#include "oracles.hpp"

#include "astarlab/analysis.hpp"
#include "astarlab/graph_io.hpp"
#include "astarlab/instances.hpp"
#include "astarlab/search.hpp"

#include <doctest.h>

#include <filesystem>
#include <set>

using namespace astarlab;

namespace {

bool adjacent(const Graph& g, Vertex u, Vertex v) { return g.weight(u, v) != nullptr; }

std::filesystem::path scratch_dir(const std::string& name)
{
  auto dir = std::filesystem::temp_directory_path() / ("astarlab_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

/// Cells visited by the up-then-right route (i,0) -> (i,j) -> (0,j).
std::vector<Vertex> up_then_right(const GridGraph& gg, int i, int j)
{
  std::vector<Vertex> out;
  for (int y = 0; y <= j; ++y)
    out.push_back(gg.at(i, y));
  for (int x = i - 1; x >= 0; --x)
    out.push_back(gg.at(x, j));
  std::sort(out.begin(), out.end());
  return out;
}

/// Vertices reachable from s in g with `removed` deleted.
std::vector<bool> reach_without(const Graph& g, Vertex s, Vertex removed)
{
  const auto adj = oracle::adjacency(g);
  std::vector<bool> seen(g.size(), false);
  std::vector<Vertex> stack{s};
  seen[s] = true;
  seen[removed] = true;
  while (!stack.empty())
  {
    const Vertex u = stack.back();
    stack.pop_back();
    for (const auto& [v, w] : adj[u])
      if (!seen[v])
      {
        seen[v] = true;
        stack.push_back(v);
      }
  }
  seen[removed] = false;
  return seen;
}

void check_unique_shortest(const Graph& g, const std::vector<std::vector<Weight>>& d, Vertex s, Vertex t)
{
  CHECK(oracle::count_shortest_paths(g, d, s, t) == 1);
}

}  // namespace

TEST_CASE("lp-lb construction")
{
  const auto bundle = gen_lp_lb(4);
  const Graph& g = bundle.graph;
  const LpLayout L{4, 2};
  CHECK(g.size() == 35);
  CHECK(bundle.params.at("vertices") == 35);
  for (const Edge& e : g.edges())
    CHECK(e.w == 1);
  const auto d = oracle::all_pairs(g);
  for (std::size_t p = 1; p <= 2; ++p)
    CHECK(d[L.a(p)][L.abar(p)] == 4);
  for (std::size_t j = 1; j <= 4; ++j)
  {
    CHECK(adjacent(g, L.c(0), L.c(j)));
    for (std::size_t i = 1; i <= 2; ++i)
    {
      CHECK(adjacent(g, L.c(j), L.a(i)) != adjacent(g, L.c(j), L.abar(i)));
      CHECK(adjacent(g, L.c(j), L.a(i)) == LpLayout::bit(j, i));
    }
  }
  for (std::size_t i = 1; i <= 2; ++i)
    for (std::size_t j = 1; j <= 4; ++j)
    {
      CHECK(adjacent(g, L.connector(i, j), L.hub(i)));
      CHECK(adjacent(g, L.connector(i, j), L.a(i)));
      CHECK(adjacent(g, L.a_leaf(i, j), L.hub(i)));
      CHECK(adjacent(g, L.abar_leaf(i, j), L.abar(i)));
    }

  std::set<Vertex> covered;
  for (const auto& [name, vs] : bundle.families)
    covered.insert(vs.begin(), vs.end());
  CHECK(covered.size() == 35);

  const auto& q = bundle.query_family("a-leaf-to-abar-leaf");
  CHECK(q.count == 2 * 4 * 4);
  CHECK(q.at(0) == VertexPair{L.a_leaf(1, 1), L.abar_leaf(1, 1)});

  for (std::size_t bad : {0, 3, 6, 12})
    CHECK_THROWS_AS(gen_lp_lb(bad), std::invalid_argument);
}

TEST_CASE("lp-lb query endpoints are a constant number of hops apart")
{
  for (std::size_t n : {2, 4, 8, 16})
  {
    const auto bundle = gen_lp_lb(n);
    std::size_t worst = 0;
    for (const auto& [s, t] : bundle.query_family("a-leaf-to-abar-leaf").materialize())
      worst = std::max(worst, oracle::bfs(bundle.graph, s)[t]);
    // a-leaf, hub, connector, a, star leaf, center, star leaf, abar, abar-leaf.
    CHECK(worst == 8);
  }
}

TEST_CASE("linf clique construction")
{
  const auto bundle = gen_linf_clique(3, 2, WeightMode::Deterministic);
  const Graph& g = bundle.graph;
  const CliqueLayout L{3, 2};
  CHECK(g.size() == 3 + 3 * 2);

  const std::vector<Weight> u = base9_offsets(3);
  CHECK(u == std::vector<Weight>{Weight(1, 729), Weight(1, 81), Weight(1, 9)});
  CHECK(base9_eps(3) == Weight(1, 729));
  CHECK(bundle.params.at("eps") == "1/729");
  const Weight w0 = Weight(1, 729) / Weight(16 * 9);
  CHECK(parse_weight(bundle.params.at("w0").get<std::string>()) == w0);

  CHECK(*g.weight(L.a(1), L.a(2)) == 10 + u[L.pair_index(1, 2) - 1]);
  CHECK(*g.weight(L.a(2), L.a(3)) == 10 + u[L.pair_index(2, 3) - 1]);
  for (std::size_t i = 1; i <= 3; ++i)
    for (std::size_t p = 1; p <= 2; ++p)
      CHECK(*g.weight(L.a(i), L.leaf(i, p)) == w0);

  // No c in {-4..4}^3 \ {0} brings sum c_i u_i within eps of zero.
  for (int c1 = -4; c1 <= 4; ++c1)
    for (int c2 = -4; c2 <= 4; ++c2)
      for (int c3 = -4; c3 <= 4; ++c3)
      {
        if (c1 == 0 && c2 == 0 && c3 == 0)
          continue;
        Weight s = c1 * u[0] + c2 * u[1] + c3 * u[2];
        CHECK(abs(s) >= Weight(1, 729));
      }

  CHECK(bundle.query_family("leaf-cross").count == 3 * 2 * 2 * 2);
  CHECK(bundle.query_family("clique-pairs").count == 3);
  CHECK_THROWS_AS(gen_linf_clique(1, 2, WeightMode::Deterministic), std::invalid_argument);
  CHECK_THROWS_AS(gen_linf_clique(3, 0, WeightMode::Deterministic), std::invalid_argument);
}

TEST_CASE("clique instances: the direct edge is the unique shortest clique path")
{
  std::vector<InstanceBundle> bundles;
  bundles.push_back(gen_linf_clique(5, 2, WeightMode::Deterministic));
  bundles.push_back(gen_linf_clique(4, 1, WeightMode::SeededRandom, 7, Weight(1, 1000000)));
  bundles.push_back(gen_labeling_clique(5, 2, 2, random_delta(5, 2, 3), true));
  bundles.push_back(gen_labeling_clique(4, 1, 3, random_delta(4, 3, 4), true));
  for (const auto& bundle : bundles)
  {
    const auto d = oracle::all_pairs(bundle.graph);
    const auto& clique = bundle.families.at("clique");
    for (Vertex a : clique)
      for (Vertex b : clique)
        if (a != b)
        {
          CHECK(d[a][b] == *bundle.graph.weight(a, b));
          check_unique_shortest(bundle.graph, d, a, b);
        }
  }
}

TEST_CASE("labeling clique weights")
{
  DeltaMatrix delta(2, std::vector<long>(2, 0));
  delta[0][1] = delta[1][0] = 3;
  const auto bundle = gen_labeling_clique(2, 1, 2, delta, true);
  const CliqueLayout L{2, 1};
  CHECK(*bundle.graph.weight(L.a(1), L.a(2)) == 40);
  CHECK(dijkstra(bundle.graph, L.leaf(1, 1)).dist[L.leaf(2, 1)] == 42);
  CHECK(oracle::all_pairs(bundle.graph)[L.leaf(1, 1)][L.leaf(2, 1)] == 42);

  const auto zero = gen_labeling_clique(4, 2, 3, DeltaMatrix(4, std::vector<long>(4, 0)), true);
  for (Vertex a : zero.families.at("clique"))
    for (Vertex b : zero.families.at("clique"))
      if (a < b)
        CHECK(*zero.graph.weight(a, b) == 6 * 8 - 2);

  CHECK_THROWS_AS(gen_labeling_clique(3, 3, 2, random_delta(3, 2, 1)), std::invalid_argument);
  DeltaMatrix out_of_range(2, std::vector<long>(2, 0));
  out_of_range[0][1] = out_of_range[1][0] = 4;
  CHECK_THROWS_AS(gen_labeling_clique(2, 1, 2, out_of_range, true), std::invalid_argument);

  std::size_t tuples = 0;
  std::set<std::vector<Vertex>> seen;
  for_each_leaf_tuple(CliqueLayout{3, 2}, [&](std::span<const Vertex> t) {
    ++tuples;
    seen.insert(std::vector<Vertex>(t.begin(), t.end()));
    CHECK(t.size() == 3);
  });
  CHECK(tuples == 8);
  CHECK(seen.size() == 8);
}

TEST_CASE("linf grid construction")
{
  const auto bundle = gen_linf_grid(3, 2, WeightMode::Deterministic);
  const GridGraph& gg = *bundle.grid_graph;
  const GridSpec& spec = *bundle.grid;
  CHECK(bundle.graph.size() == 9 + 2 * 3 * 2);
  CHECK(bundle.families.at("R").size() == 9);
  CHECK(bundle.families.at("right-flank").size() == 6);
  CHECK(bundle.families.at("lower-flank").size() == 6);

  const Weight eps_w = parse_weight(bundle.params.at("eps_w").get<std::string>());
  CHECK(eps_w == base9_eps(9) / Weight(8 * 3 * 2));
  for (Vertex v : bundle.families.at("right-flank"))
    CHECK(spec.weight(gg.cell_of[v]) == eps_w);
  for (Vertex v : bundle.families.at("lower-flank"))
    CHECK(spec.weight(gg.cell_of[v]) == eps_w);
  const long n = 21;
  for (Vertex v : bundle.families.at("R"))
  {
    const Cell c = gg.cell_of[v];
    const Weight integral = Weight((n - c.x) * n * n * n);
    CHECK(spec.weight(c) > integral);
    CHECK(spec.weight(c) < integral + 1);
  }

  const auto d = oracle::all_pairs(bundle.graph);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
    {
      const Vertex s = gg.at(i, 0), t = gg.at(0, j);
      CHECK(oracle::shortest_path_vertices(d, s, t) == up_then_right(gg, i, j));
    }
  CHECK(bundle.query_family("gateway-pairs").at(1 * 3 + 2) == VertexPair{gg.at(1, 0), gg.at(0, 2)});
  CHECK(bundle.query_family("flank-cross").count == 3 * 3 * 2 * 2);
}

TEST_CASE("delta_from_x")
{
  CHECK(delta_from_x(std::vector<long>(9, 0), 3) == DeltaMatrix(3, std::vector<long>(3, 0)));

  const std::vector<long> x{1, 2, 3, 4};
  const DeltaMatrix d = delta_from_x(x, 2);
  // The four up-then-right routes summed by hand from the delta table.
  CHECK(d[0][0] == 1);
  CHECK(d[0][0] + d[0][1] == 2);
  CHECK(d[1][0] + d[0][0] == 3);
  CHECK(d[1][0] + d[1][1] + d[0][1] == 4);

  for (std::uint64_t seed = 0; seed < 20; ++seed)
  {
    const std::vector<long> rx = random_x(3, 2, seed);
    const DeltaMatrix rd = delta_from_x(rx, 3);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j)
      {
        long sum = 0;
        for (std::size_t y = 0; y <= j; ++y)
          sum += rd[i][y];
        for (std::size_t xx = 0; xx < i; ++xx)
          sum += rd[xx][j];
        CHECK(sum == rx[i * 3 + j]);
        CHECK(path_delta(rd, i, j) == sum);
      }
  }
  CHECK_THROWS_AS(delta_from_x({1, 2, 3}, 2), std::invalid_argument);
  CHECK_THROWS_AS(delta_from_x({1, 2, -3, 4}, 2), std::invalid_argument);
}

TEST_CASE("labeling grid construction and path-sum recovery")
{
  const auto zero = gen_labeling_grid(2, 1, 2, std::vector<long>(4, 0));
  const long n = 8;
  for (Vertex v : zero.families.at("R"))
  {
    const Cell c = zero.grid_graph->cell_of[v];
    CHECK(zero.grid->weight(c) == Weight((n - c.x) * n * n * n * n - 2));
  }
  for (Vertex v : zero.families.at("right-flank"))
    CHECK(zero.grid->weight(zero.grid_graph->cell_of[v]) == 1);

  for (std::uint64_t seed = 0; seed < 5; ++seed)
  {
    const auto x = random_x(3, 2, seed);
    const auto bundle = gen_labeling_grid(3, 2, 2, x);
    const auto& gg = *bundle.grid_graph;
    const auto d = oracle::all_pairs(bundle.graph);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
      {
        CHECK(oracle::shortest_path_vertices(d, gg.at(i, 0), gg.at(0, j)) == up_then_right(gg, i, j));
        CHECK(recover_path_delta(bundle, i, j) == x[i * 3 + j]);
      }
  }
  for (std::uint64_t seed = 0; seed < 5; ++seed)
  {
    const auto x = random_x(2, 3, seed);
    const auto bundle = gen_labeling_grid(2, 1, 3, x);
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 2; ++j)
        CHECK(recover_path_delta(bundle, i, j) == x[i * 2 + j]);
  }
  CHECK_THROWS_AS(gen_labeling_grid(2, 1, 2, {0, 1, 2, 4}), std::invalid_argument);
  CHECK_THROWS_AS(recover_path_delta(gen_linf_grid(2, 1, WeightMode::Deterministic), 0, 0), std::invalid_argument);

  std::size_t tuples = 0;
  for_each_flank_tuple(*zero.grid_graph, GridLayout{2, 1}, [&](std::span<const Vertex> t) {
    ++tuples;
    CHECK(t.size() == 4);
  });
  CHECK(tuples == 1);
}

TEST_CASE("grid flanks reach R only through their gateway cells")
{
  for (const auto& bundle : {gen_linf_grid(3, 2, WeightMode::Deterministic),
                             gen_labeling_grid(3, 3, 2, random_x(3, 2, 1))})
  {
    const auto& gg = *bundle.grid_graph;
    const int m = 3, k = int(bundle.params.at("k").get<long>());
    std::set<Vertex> R(bundle.families.at("R").begin(), bundle.families.at("R").end());
    for (int i = 0; i < m; ++i)
    {
      // Lower-flank column under (i,0), and right-flank row beside (0,i).
      for (int p = 1; p <= k; ++p)
      {
        const auto lower = reach_without(bundle.graph, gg.at(i, -p), gg.at(i, 0));
        const auto right = reach_without(bundle.graph, gg.at(-p, i), gg.at(0, i));
        for (Vertex r : R)
        {
          CHECK_FALSE(lower[r]);
          CHECK_FALSE(right[r]);
        }
        // Each flank strip stays connected to its gateway.
        CHECK(oracle::bfs(bundle.graph, gg.at(i, -p))[gg.at(i, 0)] == std::size_t(p));
        CHECK(oracle::bfs(bundle.graph, gg.at(-p, i))[gg.at(0, i)] == std::size_t(p));
      }
    }
  }
}

TEST_CASE("random unique-path graphs")
{
  UspOptions o;
  o.n = 10;
  o.edge_probability = Weight(1, 2);
  o.seed = 1;
  const auto dense = gen_random_usp(o);
  CHECK(verify_usp_margin(dense.graph, 3).pass);
  const auto d = oracle::all_pairs(dense.graph);
  for (Vertex s = 0; s < 10; ++s)
    for (Vertex t = 0; t < 10; ++t)
      check_unique_shortest(dense.graph, d, s, t);
  // Margin checked against simple-path enumeration.
  for (Vertex s = 0; s < 10; ++s)
    for (Vertex t = s + 1; t < 10; ++t)
    {
      auto paths = oracle::simple_paths(dense.graph, s, t);
      std::sort(paths.begin(), paths.end(), [](const auto& a, const auto& b) { return a.length < b.length; });
      if (paths.size() > 1)
        CHECK(paths[1].length - paths[0].length > 3);
    }

  for (const Edge& e : dense.graph.edges())
    CHECK(e.w >= 1);

  o.n = 2;
  o.edge_probability = Weight(1);
  const auto pair = gen_random_usp(o);
  CHECK(pair.graph.edge_count() == 1);
  CHECK(verify_usp_margin(pair.graph, 3).pass);

  o.n = 20;
  o.edge_probability = default_edge_probability(20);
  CHECK(gen_random_usp(o).graph.size() == 20);
  CHECK(default_edge_probability(20) == Weight(1, 2));
  CHECK(default_edge_probability(2) == 1);
  o.margin = 0;
  CHECK_THROWS_AS(gen_random_usp(o), std::invalid_argument);
}

TEST_CASE("weights drawn from a grid of step 1/D with D >= n^5 give unique shortest paths")
{
  // Independent re-implementation of the sampling step, checked by path counting.
  const std::size_t n = 20;
  const std::uint64_t D = std::uint64_t(1) << 22;  // 2^22 > 20^5
  std::mt19937_64 rng(77);
  std::bernoulli_distribution coin(0.5);
  std::uniform_int_distribution<std::uint64_t> pick(1, D * n);
  int connected = 0, unique = 0;
  while (connected < 100)
  {
    std::vector<Edge> edges;
    for (Vertex u = 0; u < n; ++u)
      for (Vertex v = u + 1; v < n; ++v)
        if (coin(rng))
        {
          Weight w(mpz_class(static_cast<unsigned long>(pick(rng))), mpz_class(static_cast<unsigned long>(D)));
          w.canonicalize();
          edges.push_back({u, v, w});
        }
    std::optional<Graph> g;
    try
    {
      g = Graph::build(n, edges);
    }
    catch (const GraphError&)
    {
      continue;
    }
    ++connected;
    const auto d = oracle::all_pairs(*g);
    bool ok = true;
    for (Vertex s = 0; s < n && ok; ++s)
      for (Vertex t = 0; t < n && ok; ++t)
        ok = oracle::count_shortest_paths(*g, d, s, t) == 1;
    unique += ok;
    CHECK(ok == sgn(*verify_usp_margin(*g, 0).min_margin) > 0);
  }
  CHECK(unique >= 99);
}

TEST_CASE("generators are deterministic given their parameters")
{
  CHECK(same_edges(gen_lp_lb(8).graph, gen_lp_lb(8).graph));
  CHECK(same_edges(gen_linf_clique(4, 2, WeightMode::SeededRandom, 3, Weight(1, 1000000)).graph,
                   gen_linf_clique(4, 2, WeightMode::SeededRandom, 3, Weight(1, 1000000)).graph));
  CHECK(random_delta(5, 3, 9) == random_delta(5, 3, 9));
  CHECK(random_x(3, 4, 9) == random_x(3, 4, 9));
  CHECK(random_x(3, 4, 9) != random_x(3, 4, 10));
  UspOptions o;
  o.n = 16;
  o.edge_probability = default_edge_probability(16);
  o.seed = 5;
  const auto a = gen_random_usp(o), b = gen_random_usp(o);
  CHECK(same_edges(a.graph, b.graph));
  CHECK(a.params == b.params);
  o.seed = 6;
  CHECK_FALSE(same_edges(a.graph, gen_random_usp(o).graph));
}

TEST_CASE("bundles round-trip through their directory form")
{
  std::vector<InstanceBundle> bundles;
  bundles.push_back(gen_lp_lb(4));
  bundles.push_back(gen_linf_clique(3, 2, WeightMode::Deterministic));
  bundles.push_back(gen_labeling_grid(2, 1, 2, {0, 1, 2, 3}));
  for (const auto& bundle : bundles)
  {
    const auto dir = scratch_dir(bundle.family);
    write_bundle(bundle, dir);
    const auto back = read_bundle(dir);
    CHECK(back.family == bundle.family);
    CHECK(same_edges(back.graph, bundle.graph));
    CHECK(back.families == bundle.families);
    CHECK(back.params == bundle.params);
    REQUIRE(back.queries.size() == bundle.queries.size());
    for (std::size_t i = 0; i < back.queries.size(); ++i)
    {
      CHECK(back.queries[i].name == bundle.queries[i].name);
      CHECK(back.queries[i].materialize() == bundle.queries[i].materialize());
    }
    CHECK(back.grid.has_value() == bundle.grid.has_value());
    std::filesystem::remove_all(dir);
  }
  CHECK_THROWS(read_bundle(scratch_dir("missing")));
}
