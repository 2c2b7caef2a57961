#include "oracles.hpp"

#include "astarlab/analysis.hpp"
#include "astarlab/graph_io.hpp"
#include "astarlab/search.hpp"

#include <doctest.h>

#include <cmath>

using namespace astarlab;

namespace {

Graph triangle()
{
  return Graph::build(3, {{0, 1, Weight(1)}, {1, 2, Weight(2)}, {0, 2, Weight(7)}});
}

Graph unit_cycle(std::size_t n)
{
  std::vector<Edge> edges;
  for (Vertex v = 0; v < n; ++v)
    edges.push_back({v, Vertex((v + 1) % n), Weight(1)});
  return Graph::build(n, edges);
}

Graph star3()
{
  return Graph::build(4, {{0, 1, Weight(1)}, {0, 2, Weight(1)}, {0, 3, Weight(1)}});
}

std::vector<Vertex> iota_vertices(std::size_t n)
{
  std::vector<Vertex> out(n);
  for (Vertex v = 0; v < n; ++v)
    out[v] = v;
  return out;
}

/// |{u : d(s,u) + h(u,t) < d(s,t)} \ P| for a graph with unique shortest paths.
long overhead_oracle(const std::vector<std::vector<Weight>>& d, const HeuristicSpec& h, Vertex s, Vertex t)
{
  const auto path = oracle::shortest_path_vertices(d, s, t);
  long count = 0;
  for (Vertex u = 0; u < d.size(); ++u)
    if (d[s][u] + evaluate_exact(h, u, t) < d[s][t] && !std::binary_search(path.begin(), path.end(), u))
      ++count;
  return count;
}

UspOptions usp(std::size_t n, std::uint64_t seed)
{
  UspOptions o;
  o.n = n;
  o.edge_probability = default_edge_probability(n);
  o.seed = seed;
  return o;
}

}  // namespace

TEST_CASE("consistency checks")
{
  std::mt19937_64 rng(3);
  for (int round = 0; round < 5; ++round)
  {
    const Graph g = oracle::random_connected(12, 0.3, 9, 2, rng);
    CHECK(check_consistency(g, make_exact(g)).empty());
  }

  DeltaMatrix delta(2, std::vector<long>(2, 0));
  delta[0][1] = delta[1][0] = 2;
  const auto clique = gen_labeling_clique(2, 1, 2, delta, true);
  CHECK(check_consistency(clique.graph, make_beacon(clique.graph, {0})).empty());
  CHECK(check_consistency(clique.graph, make_beacon(clique.graph, iota_vertices(4))).empty());

  // Path 0-1-2 with unit weights; coordinate of 2 inflated from 2 to 5.
  const Graph path = Graph::build(3, {{0, 1, Weight(1)}, {1, 2, Weight(1)}});
  auto bad = std::make_shared<const Embedding>(3, 1, std::vector<Weight>{0, 1, 5});
  const auto violations = check_consistency(path, heuristic::Beacon{bad}, {1});
  // Toward t=1: edge (2,1) gives 1 + h(1,1) - h(2,1) = 1 - 4 = -3.
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].u == 2);
  CHECK(violations[0].v == 1);
  CHECK(violations[0].t == 1);
  CHECK(violations[0].slack == Magnitude(Weight(-3)));

  // A label table with h(t,t) != 0 is flagged at the diagonal.
  LabelTable table{1, Weight(10), {0, 1, 2}, [](std::span<const Weight>, std::span<const Weight>) { return Weight(1); },
                   "constant"};
  const auto diag = check_consistency(path, heuristic::Labeling{std::make_shared<const LabelTable>(table)}, {0});
  REQUIRE_FALSE(diag.empty());
  CHECK(diag[0].u == 0);
  CHECK(diag[0].v == 0);
  CHECK(diag[0].slack == Magnitude(Weight(-1)));
}

TEST_CASE("admissibility checks")
{
  const Graph tri = triangle();
  CHECK(check_admissibility(tri, HeuristicSpec{heuristic::Zero{}}).empty());
  std::mt19937_64 rng(9);
  for (int round = 0; round < 5; ++round)
  {
    const Graph g = oracle::random_connected(20, 0.15, 9, 2, rng);
    CHECK(check_admissibility(g, make_beacon(g, sample_beacons(20, 3, round))).empty());
  }

  // Unit 4-cycle: vertex 2 hangs under 1 in the tree at 0, so 3 and 2 are
  // unrelated and the position penalty lifts h(3,2) to 1 + 2 > dist = 1.
  const Graph square = unit_cycle(4);
  const auto violations = check_admissibility(square, make_tiebreak(square, {0}));
  bool found = false;
  for (const auto& v : violations)
    if (v.s == 3 && v.t == 2)
    {
      found = true;
      CHECK(v.excess == Magnitude(Weight(2)));
    }
  CHECK(found);

  const auto listed = check_admissibility(square, make_tiebreak(square, {0}), {{0, 2}, {3, 2}});
  CHECK(listed.size() == 1);
}

TEST_CASE("sub-additivity checks")
{
  std::mt19937_64 rng(5);
  const Graph g = oracle::random_connected(15, 0.2, 9, 1, rng);
  auto emb = std::make_shared<const Embedding>(build_beacon_embedding(g, sample_beacons(15, 3, 8)));
  for (unsigned p : {0u, 1u, 2u, 3u})
    CHECK(check_subadditivity(heuristic::Norm{p, emb}, 15).empty());
  CHECK(check_subadditivity(heuristic::Beacon{emb}, 15).empty());

  // Squared differences of 1-D labels: h(0,2) = 4 > h(0,1) + h(1,2) = 2.
  LabelTable table{1, Weight(10), {0, 1, 2},
                   [](std::span<const Weight> a, std::span<const Weight> b) {
                     const Weight diff = a[0] - b[0];
                     return Weight(diff * diff);
                   },
                   "squared"};
  const HeuristicSpec squared = heuristic::Labeling{std::make_shared<const LabelTable>(table)};
  const auto violations = check_subadditivity(squared, 3);
  REQUIRE_FALSE(violations.empty());
  bool found = false;
  for (const auto& v : violations)
    if (v.u == 0 && v.v == 1 && v.w == 2)
    {
      found = true;
      CHECK(v.deficit == Magnitude(Weight(2)));
    }
  CHECK(found);
  CHECK(check_subadditivity(squared, {{0, 2, 1}}).empty());
}

TEST_CASE("overhead examples")
{
  const Graph path = Graph::build(4, {{0, 1, Weight(1)}, {1, 2, Weight(1)}, {2, 3, Weight(1)}});
  const auto zero_path = measure_overhead(path, HeuristicSpec{heuristic::Zero{}}, PairSource::all(), OverheadMode::best());
  // Only (1,3) and (2,0) pay: the far endpoint behind s is closer than t.
  CHECK(zero_path.total == 2);
  CHECK(zero_path.mean == Weight(1, 6));
  CHECK(zero_path.pairs() == 12);
  const auto dp = oracle::all_pairs(path);
  for (const auto& r : zero_path.records)
    CHECK(r.overhead == overhead_oracle(dp, HeuristicSpec{heuristic::Zero{}}, r.s, r.t));

  const Graph star = star3();
  const HeuristicSpec zero = heuristic::Zero{};
  const auto best = measure_overhead(star, zero, PairSource::all(), OverheadMode::best());
  CHECK(best.mean == 0);
  const auto fifo = measure_overhead(star, zero, PairSource::all(), OverheadMode::with_policy(TieBreak::Fifo));
  CHECK(fifo.mean > 0);
  // FIFO scans s, the centre, then leaves in index order up to t.
  long expected_total = 0;
  for (Vertex t = 1; t <= 3; ++t)
    expected_total += t - 1;
  for (Vertex s = 1; s <= 3; ++s)
    for (Vertex t = 1; t <= 3; ++t)
      if (s != t)
      {
        long before_t = 0;
        for (Vertex l = 1; l < t; ++l)
          before_t += l != s;
        expected_total += before_t;
      }
  CHECK(fifo.total == expected_total);
  CHECK(fifo.mean == Weight(expected_total) / 12);

  std::mt19937_64 rng(1);
  const Graph g = oracle::random_connected(14, 0.3, 9, 2, rng);
  const auto exact = measure_overhead(g, make_exact(g), PairSource::all(), OverheadMode::best());
  CHECK(exact.total == 0);
  CHECK(exact.mean_with_diagonal == Weight(0));
}

TEST_CASE("optimal overhead matches the scan-condition oracle on unique-path graphs")
{
  for (std::uint64_t seed = 0; seed < 4; ++seed)
  {
    const auto bundle = gen_random_usp(usp(18, seed));
    const Graph& g = bundle.graph;
    const auto d = oracle::all_pairs(g);
    for (const HeuristicSpec& h :
         {HeuristicSpec{heuristic::Zero{}}, make_beacon(g, sample_beacons(18, 2, seed)), make_tiebreak(g, {0, 5})})
    {
      const auto report = measure_overhead(g, h, PairSource::all(), OverheadMode::best());
      Weight total = 0;
      for (const auto& r : report.records)
      {
        CHECK(r.overhead >= 0);
        CHECK(r.path_vertices == oracle::shortest_path_vertices(d, r.s, r.t).size());
        CHECK(r.overhead == overhead_oracle(d, h, r.s, r.t));
        total += r.overhead;
      }
      CHECK(report.total == total);
      CHECK(report.mean == total / Weight(18 * 17));
      CHECK(*report.mean_with_diagonal == total / Weight(18 * 18));
    }
  }
}

TEST_CASE("overhead reports are reproducible and worker-independent")
{
  const auto bundle = gen_random_usp(usp(30, 4));
  const HeuristicSpec h = make_beacon(bundle.graph, {1, 2});
  const auto a = measure_overhead(bundle.graph, h, PairSource::all(), OverheadMode::best());
  const auto b = measure_overhead(bundle.graph, h, PairSource::all(), OverheadMode::best(), {4, false});
  CHECK(overhead_csv(a) == overhead_csv(b));
  CHECK(overhead_summary(a) == overhead_summary(b));
  const auto c = measure_overhead(bundle.graph, h, PairSource::all(), OverheadMode::with_policy(TieBreak::Lifo), {3, false});
  const auto e = measure_overhead(bundle.graph, h, PairSource::all(), OverheadMode::with_policy(TieBreak::Lifo));
  CHECK(overhead_csv(c) == overhead_csv(e));
}

TEST_CASE("sampled overhead carries a Hoeffding half-width")
{
  const auto bundle = gen_random_usp(usp(25, 8));
  const HeuristicSpec h = make_beacon(bundle.graph, {3});
  const auto report = measure_overhead(bundle.graph, h, PairSource::sampled(11, 400), OverheadMode::best());
  CHECK(report.pairs() == 400);
  REQUIRE(report.half_width.has_value());
  CHECK(*report.half_width == doctest::Approx(25 * std::sqrt(std::log(2 / 0.05) / (2 * 400.0))));
  CHECK_FALSE(report.mean_with_diagonal.has_value());
  for (const auto& r : report.records)
    CHECK(r.s != r.t);
  const auto again = measure_overhead(bundle.graph, h, PairSource::sampled(11, 400), OverheadMode::best());
  CHECK(overhead_csv(again) == overhead_csv(report));

  const auto listed = measure_overhead(bundle.graph, h, PairSource::listed({{0, 1}, {2, 2}}), OverheadMode::best());
  CHECK(listed.pairs() >= 1);
}

TEST_CASE("optimal mode rejects inconsistent heuristics")
{
  const Graph path = Graph::build(3, {{0, 1, Weight(1)}, {1, 2, Weight(1)}});
  auto bad = std::make_shared<const Embedding>(3, 1, std::vector<Weight>{0, 1, 5});
  CHECK_THROWS_AS(measure_overhead(path, heuristic::Beacon{bad}, PairSource::all(), OverheadMode::best()),
                  AnalysisError);
  CHECK_NOTHROW(
    measure_overhead(path, heuristic::Beacon{bad}, PairSource::all(), OverheadMode::with_policy(TieBreak::Fifo)));
}

TEST_CASE("approximated tie detection")
{
  const auto cert = detect_approximated_tie({1, 2}, Weight(1, 2));
  REQUIRE(cert.has_value());
  CHECK(cert->value == 0);
  CHECK(cert->coefficients[0] == -2 * cert->coefficients[1]);
  CHECK(verify_tie_certificate({1, 2}, Weight(1, 2), *cert));

  CHECK_FALSE(detect_approximated_tie({1, 10}, Weight(1, 2)).has_value());
  auto clique_weights = [](std::size_t N) {
    auto w = base9_offsets(N);
    for (auto& x : w)
      x += 10;
    return w;
  };
  CHECK_FALSE(detect_approximated_tie(clique_weights(3), base9_eps(3)).has_value());
  // The bare offsets reach eps itself with c = e_1, which counts as a tie.
  CHECK(detect_approximated_tie(base9_offsets(3), base9_eps(3)).has_value());

  // Brute force over {-4..4}^N for the clique weights 10 + u, N <= 5.
  for (std::size_t N = 1; N <= 5; ++N)
  {
    const auto u = clique_weights(N);
    Weight smallest = -1;
    std::vector<int> c(N, -4);
    while (true)
    {
      Weight sum = 0;
      bool nonzero = false;
      for (std::size_t i = 0; i < N; ++i)
      {
        sum += c[i] * u[i];
        nonzero |= c[i] != 0;
      }
      if (nonzero && (smallest < 0 || abs(sum) < smallest))
        smallest = abs(sum);
      std::size_t i = 0;
      while (i < N && c[i] == 4)
        c[i++] = -4;
      if (i == N)
        break;
      ++c[i];
    }
    CHECK(smallest >= base9_eps(N));
    CHECK_FALSE(detect_approximated_tie(u, base9_eps(N)).has_value());
  }

  // A planted tie among random weights is found and independently verified.
  std::mt19937_64 rng(2);
  for (int round = 0; round < 20; ++round)
  {
    std::vector<Weight> w;
    for (int i = 0; i < 6; ++i)
      w.push_back(Weight(long(1 + rng() % 1000000), 1000003));
    for (auto& x : w)
      x.canonicalize();
    w[4] = 2 * w[0] - 3 * w[2] + Weight(1, 10000000);
    w[4] = abs(w[4]);
    const auto found = detect_approximated_tie(w, Weight(1, 1000000));
    REQUIRE(found.has_value());
    CHECK(verify_tie_certificate(w, Weight(1, 1000000), *found));
    Weight recomputed = 0;
    for (std::size_t i = 0; i < w.size(); ++i)
      recomputed += found->coefficients[i] * w[i];
    CHECK(abs(recomputed) == found->value);
    CHECK(found->value <= Weight(1, 1000000));
  }

  TieCertificate forged{{1, 0}, Weight(0), {0}};
  CHECK_FALSE(verify_tie_certificate({1, 2}, Weight(1, 2), forged));

  std::vector<Weight> many(13);
  for (std::size_t i = 0; i < 13; ++i)
    many[i] = Weight(long(i * i + 7), 1009);
  CHECK_THROWS_AS(detect_approximated_tie(many, Weight(1, 1000000)), std::invalid_argument);
  CHECK_FALSE(detect_approximated_tie(clique_weights(20), base9_eps(20)).has_value());
}

TEST_CASE("crucial-coordinate audit")
{
  const auto bundle = gen_linf_clique(4, 1, WeightMode::Deterministic);
  const Graph& g = bundle.graph;
  const auto d = oracle::all_pairs(g);
  const auto pairs = bundle.query_family("clique-pairs").materialize();
  const Weight slack = parse_weight(bundle.params.at("slack_threshold").get<std::string>());

  SUBCASE("exact beacon embedding on the clique has no distorted pairs")
  {
    const auto emb = build_beacon_embedding(g, {0, 1, 2, 3});
    const auto report = audit_crucial_coordinates(g, emb, pairs, slack);
    CHECK(report.distorted.empty());
    CHECK(report.pairs == 6);
  }
  SUBCASE("one coordinate measured from a_1")
  {
    std::vector<Weight> coords;
    for (Vertex v = 0; v < g.size(); ++v)
      coords.push_back(d[0][v]);
    const Embedding emb(g.size(), 1, coords);
    const auto report = audit_crucial_coordinates(g, emb, pairs, slack);
    REQUIRE(report.crucial.size() == 1);
    CHECK(report.crucial[0] == std::vector<VertexPair>{{0, 1}, {0, 2}, {0, 3}});
    CHECK(report.distorted.size() == 3);
    CHECK_FALSE(report.cycle.has_value());
  }
  SUBCASE("engineered 4-cycle of crucial pairs")
  {
    const Weight w12 = *g.weight(0, 1), w23 = *g.weight(1, 2), w34 = *g.weight(2, 3);
    std::vector<Weight> coords(g.size(), Weight(0));
    coords[1] = w12;
    coords[2] = w12 - w23;
    coords[3] = w12 - w23 + w34;
    const Embedding emb(g.size(), 1, coords);
    const auto report = audit_crucial_coordinates(g, emb, pairs, Weight(1));
    REQUIRE(report.cycle.has_value());
    const auto& cycle = *report.cycle;
    CHECK(cycle.cycle.size() >= 3);
    CHECK(verify_cycle_certificate(g, emb, cycle));
    CHECK(abs(cycle.signed_sum) <= Weight(long(cycle.cycle.size())) * 1);
    // Recompute the signed sum from the oracle distances.
    Weight sum = 0;
    for (std::size_t j = 0; j < cycle.cycle.size(); ++j)
    {
      const Vertex a = cycle.cycle[j], b = cycle.cycle[(j + 1) % cycle.cycle.size()];
      sum += cycle.signs[j] * d[a][b];
      CHECK(abs(emb.coord(a, 0) - emb.coord(b, 0)) >= d[a][b] - 1);
    }
    CHECK(sum == cycle.signed_sum);

    CycleCertificate forged = cycle;
    forged.signed_sum += 1;
    CHECK_FALSE(verify_cycle_certificate(g, emb, forged));
    CHECK(audit_csv(report).find("coordinate") != std::string::npos);
    CHECK(audit_summary(report).find("cycle") != std::string::npos);
  }
}

TEST_CASE("bad pair counting")
{
  std::mt19937_64 rng(4);
  const Graph g = oracle::random_connected(10, 0.3, 9, 1, rng);
  std::vector<VertexPair> all;
  for (Vertex u = 0; u < 10; ++u)
    for (Vertex v = 0; v < 10; ++v)
      all.emplace_back(u, v);
  CHECK(count_bad_pairs(g, make_exact(g), all, Weight(1, 100)).count() == 0);

  DeltaMatrix delta(2, std::vector<long>(2, 0));
  delta[0][1] = delta[1][0] = 3;
  const auto bundle = gen_labeling_clique(2, 1, 2, delta, true);
  const auto cross = bundle.query_family("leaf-cross").materialize();
  const auto zero = count_bad_pairs(bundle.graph, HeuristicSpec{heuristic::Zero{}}, cross, Weight(3));
  CHECK(zero.count() == cross.size());
  CHECK(zero.pairs == cross.size());

  const auto clique = gen_labeling_clique(3, 2, 2, random_delta(3, 2, 7), true);
  const auto d = oracle::all_pairs(clique.graph);
  const HeuristicSpec h = make_beacon(clique.graph, {0});
  const auto leaves = clique.families.at("leaves");
  std::vector<VertexPair> pairs;
  for (Vertex a : leaves)
    for (Vertex b : leaves)
      if (a != b)
        pairs.emplace_back(a, b);
  const auto report = count_bad_pairs(clique.graph, h, pairs, Weight(3));
  std::size_t expected = 0;
  for (const auto& [a, b] : pairs)
  {
    const Weight beacon = abs(d[a][0] - d[b][0]);
    const bool bad = beacon < d[a][b] - 3;
    expected += bad;
    // Leaves of a_1 are one hop from the beacon, so their pairs stay within 2.
    if (clique.graph.weight(a, 0) || clique.graph.weight(b, 0))
      CHECK_FALSE(bad);
  }
  CHECK(report.count() == expected);
  CHECK(expected > 0);
}

TEST_CASE("unique shortest path margin verifier")
{
  const auto tri = verify_usp_margin(triangle(), 3);
  CHECK(tri.pass);
  REQUIRE(tri.min_margin.has_value());
  CHECK(*tri.min_margin == 4);
  CHECK(((tri.witness == VertexPair{0, 2}) || (tri.witness == VertexPair{2, 0})));

  const auto square = verify_usp_margin(unit_cycle(4), 0);
  CHECK_FALSE(square.pass);
  CHECK(*square.min_margin == 0);

  const Graph tree = Graph::build(3, {{0, 1, Weight(1)}, {1, 2, Weight(1)}});
  const auto vacuous = verify_usp_margin(tree, 100);
  CHECK(vacuous.pass);
  CHECK_FALSE(vacuous.min_margin.has_value());

  const auto bundle = gen_random_usp(usp(20, 3));
  CHECK(verify_usp_margin(bundle.graph, parse_weight(bundle.params.at("margin").get<std::string>())).pass);
}

TEST_CASE("property: margin verifier agrees with simple-path enumeration")
{
  std::mt19937_64 rng(31);
  for (int round = 0; round < 40; ++round)
  {
    const std::size_t n = 2 + rng() % 6;
    const Graph g = oracle::random_connected(n, 0.4, 6, 1, rng);
    std::optional<Weight> best;
    for (Vertex s = 0; s < n; ++s)
      for (Vertex t = 0; t < n; ++t)
      {
        if (s == t)
          continue;
        auto paths = oracle::simple_paths(g, s, t);
        if (paths.size() < 2)
          continue;
        std::sort(paths.begin(), paths.end(), [](const auto& a, const auto& b) { return a.length < b.length; });
        const Weight margin = paths[1].length - paths[0].length;
        if (!best || margin < *best)
          best = margin;
      }
    const auto report = verify_usp_margin(g, 1);
    CHECK(report.min_margin == best);
    CHECK(report.pass == (!best || *best > 1));
  }
}
