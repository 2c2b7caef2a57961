#include "astarlab/instances.hpp"

#include "astarlab/analysis.hpp"
#include "astarlab/graph_io.hpp"
#include "astarlab/random.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace astarlab {

namespace {

using Json = nlohmann::ordered_json;

std::string str(const Weight& w)
{
  return format_weight(w);
}

Json weights_json(const std::vector<Weight>& ws)
{
  Json out = Json::array();
  for (const auto& w : ws)
    out.push_back(str(w));
  return out;
}

Json matrix_json(const DeltaMatrix& m)
{
  Json out = Json::array();
  for (const auto& row : m)
    out.push_back(row);
  return out;
}

QueryFamily listed_family(std::string name, std::vector<VertexPair> pairs)
{
  auto shared = std::make_shared<const std::vector<VertexPair>>(std::move(pairs));
  return {std::move(name), shared->size(), [shared](std::size_t i) { return shared->at(i); }};
}

void require(bool ok, const std::string& message)
{
  if (!ok)
    throw std::invalid_argument(message);
}

Weight pow9(std::size_t e)
{
  mpz_class z;
  mpz_ui_pow_ui(z.get_mpz_t(), 9, e);
  return Weight(z);
}

Weight power(std::size_t base, unsigned e)
{
  mpz_class z;
  mpz_ui_pow_ui(z.get_mpz_t(), base, e);
  return Weight(z);
}

/// Offsets r / 2^30 with r uniform in [0, 2^30).
std::vector<Weight> random_offsets(std::size_t count, Rng& rng)
{
  std::vector<Weight> out;
  const Weight den = power(2, 30);
  for (std::size_t i = 0; i < count; ++i)
    out.push_back(Weight(static_cast<unsigned long>(rng.below(1ul << 30))) / den);
  return out;
}

/// Fails when the weights carry an approximated tie at eps.
void require_tie_free(const std::vector<Weight>& weights, const Weight& eps)
{
  const auto cert = detect_approximated_tie(weights, eps);
  if (cert)
  {
    std::string coeffs;
    for (int c : cert->coefficients)
      coeffs += (coeffs.empty() ? "" : ",") + std::to_string(c);
    throw AnalysisError("weights have an approximated tie at eps " + str(eps) + ": coefficients ("
      + coeffs + ") give " + str(cert->value) + "; retry with another seed");
  }
}

std::vector<Vertex> range_vertices(Vertex lo, Vertex hi)
{
  std::vector<Vertex> out;
  for (Vertex v = lo; v < hi; ++v)
    out.push_back(v);
  return out;
}

void add_clique_families(InstanceBundle& bundle, const CliqueLayout& layout)
{
  const auto m = layout.m, k = layout.k;
  bundle.families["clique"] = range_vertices(0, Vertex(m));
  bundle.families["leaves"] = range_vertices(Vertex(m), Vertex(layout.vertex_count()));
  bundle.queries.push_back({"leaf-cross", m * (m - 1) * k * k, [layout](std::size_t idx) {
    const auto m = layout.m, k = layout.k;
    const std::size_t q = idx % k;
    const std::size_t p = (idx / k) % k;
    const std::size_t pair = idx / (k * k);
    const std::size_t i = pair / (m - 1);
    std::size_t j = pair % (m - 1);
    if (j >= i)
      ++j;
    return VertexPair{layout.leaf(i + 1, p + 1), layout.leaf(j + 1, q + 1)};
  }});
  bundle.queries.push_back({"clique-pairs", layout.pair_count(), [layout](std::size_t idx) {
    std::size_t i = 1, left = idx;
    while (left >= layout.m - i)
    {
      left -= layout.m - i;
      ++i;
    }
    return VertexPair{layout.a(i), layout.a(i + 1 + left)};
  }});
}

std::vector<std::string> clique_labels(const CliqueLayout& layout)
{
  std::vector<std::string> labels(layout.vertex_count());
  for (std::size_t i = 1; i <= layout.m; ++i)
  {
    labels[layout.a(i)] = "a" + std::to_string(i);
    for (std::size_t p = 1; p <= layout.k; ++p)
      labels[layout.leaf(i, p)] = "b" + std::to_string(i) + "^" + std::to_string(p);
  }
  return labels;
}

/// Cells of R and both flanks.
std::vector<Cell> grid_cells(const GridLayout& layout)
{
  const int m = int(layout.m), k = int(layout.k);
  std::vector<Cell> out;
  for (int x = 0; x < m; ++x)
    for (int y = 0; y < m; ++y)
      out.push_back({x, y});
  for (int x = -k; x < 0; ++x)
    for (int y = 0; y < m; ++y)
      out.push_back({x, y});
  for (int x = 0; x < m; ++x)
    for (int y = -k; y < 0; ++y)
      out.push_back({x, y});
  return out;
}

InstanceBundle grid_bundle(std::string family, const GridLayout& layout, GridSpec spec)
{
  std::vector<std::string> labels;
  for (const Cell c : spec.ordered_cells())
    labels.push_back("v(" + std::to_string(c.x) + "," + std::to_string(c.y) + ")");
  GridGraph gg = grid_to_graph(spec, std::move(labels));

  InstanceBundle bundle{std::move(family), gg.graph, std::move(spec), gg, {}, {}, Json::object()};
  const int m = int(layout.m), k = int(layout.k);
  auto& R = bundle.families["R"];
  auto& right = bundle.families["right-flank"];
  auto& lower = bundle.families["lower-flank"];
  for (Vertex v = 0; v < gg.cell_of.size(); ++v)
  {
    const Cell c = gg.cell_of[v];
    (c.x < 0 ? right : c.y < 0 ? lower : R).push_back(v);
  }
  auto& rows = bundle.families["row-gateways"];
  auto& cols = bundle.families["column-gateways"];
  for (int i = 0; i < m; ++i)
  {
    rows.push_back(gg.at(i, 0));
    cols.push_back(gg.at(0, i));
  }
  auto shared = std::make_shared<const GridGraph>(gg);
  bundle.queries.push_back({"gateway-pairs", layout.m * layout.m, [shared, m](std::size_t idx) {
    const int i = int(idx) / m, j = int(idx) % m;
    return VertexPair{shared->at(i, 0), shared->at(0, j)};
  }});
  bundle.queries.push_back({"flank-cross", layout.m * layout.m * layout.k * layout.k,
    [shared, m, k](std::size_t idx) {
      const int q = int(idx % k) + 1;
      const int p = int((idx / k) % k) + 1;
      const int j = int((idx / (k * k)) % m);
      const int i = int(idx / (std::size_t(k) * k * m));
      return VertexPair{shared->at(i, -p), shared->at(-q, j)};
    }});
  return bundle;
}

}  // namespace

std::vector<VertexPair> QueryFamily::materialize() const
{
  std::vector<VertexPair> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i)
    out.push_back(at(i));
  return out;
}

const QueryFamily& InstanceBundle::query_family(const std::string& name) const
{
  for (const auto& q : queries)
    if (q.name == name)
      return q;
  std::string known;
  for (const auto& q : queries)
    known += (known.empty() ? "" : ", ") + q.name;
  throw std::invalid_argument("no query family '" + name + "' (available: " + known + ")");
}

const char* to_string(WeightMode mode)
{
  return mode == WeightMode::Deterministic ? "deterministic" : "random";
}

WeightMode parse_weight_mode(const std::string& name)
{
  if (name == "deterministic")
    return WeightMode::Deterministic;
  if (name == "random")
    return WeightMode::SeededRandom;
  throw std::invalid_argument("unknown weight mode '" + name + "' (deterministic, random)");
}

// ---------------------------------------------------------------------------

InstanceBundle gen_lp_lb(std::size_t n)
{
  require(n >= 2 && (n & (n - 1)) == 0, "lp-lb: n must be a power of two >= 2, got " + std::to_string(n));
  LpLayout L{n, 0};
  while ((std::size_t(1) << L.bits) < n)
    ++L.bits;

  std::vector<Edge> edges;
  auto edge = [&](Vertex u, Vertex v) { edges.push_back({u, v, Weight(1)}); };
  for (std::size_t j = 1; j <= n; ++j)
  {
    edge(L.c(0), L.c(j));
    for (std::size_t i = 1; i <= L.bits; ++i)
      edge(L.c(j), LpLayout::bit(j, i) ? L.a(i) : L.abar(i));
  }
  for (std::size_t i = 1; i <= L.bits; ++i)
    for (std::size_t j = 1; j <= n; ++j)
    {
      edge(L.hub(i), L.a_leaf(i, j));
      edge(L.connector(i, j), L.hub(i));
      edge(L.connector(i, j), L.a(i));
      edge(L.abar(i), L.abar_leaf(i, j));
    }

  std::vector<std::string> labels(L.vertex_count());
  for (std::size_t j = 0; j <= n; ++j)
    labels[L.c(j)] = "c" + std::to_string(j);
  for (std::size_t i = 1; i <= L.bits; ++i)
  {
    const auto is = std::to_string(i);
    labels[L.a(i)] = "a" + is;
    labels[L.abar(i)] = "abar" + is;
    labels[L.hub(i)] = "a" + is + ",0";
    for (std::size_t j = 1; j <= n; ++j)
    {
      const auto js = std::to_string(j);
      labels[L.a_leaf(i, j)] = "a" + is + "," + js;
      labels[L.connector(i, j)] = "b" + is + "," + js;
      labels[L.abar_leaf(i, j)] = "abar" + is + "," + js;
    }
  }

  InstanceBundle bundle{"lp-lb", Graph::build(L.vertex_count(), std::move(edges)).with_labels(labels),
                        {}, {}, {}, {}, Json::object()};
  auto& f = bundle.families;
  f["star-center"] = {L.c(0)};
  f["star-leaves"] = range_vertices(1, Vertex(n + 1));
  for (std::size_t i = 1; i <= L.bits; ++i)
  {
    f["a"].push_back(L.a(i));
    f["abar"].push_back(L.abar(i));
    f["hubs"].push_back(L.hub(i));
    for (std::size_t j = 1; j <= n; ++j)
    {
      f["a-leaves"].push_back(L.a_leaf(i, j));
      f["connectors"].push_back(L.connector(i, j));
      f["abar-leaves"].push_back(L.abar_leaf(i, j));
    }
  }
  bundle.queries.push_back({"a-leaf-to-abar-leaf", L.bits * n * n, [L](std::size_t idx) {
    const std::size_t p = idx / (L.n * L.n) + 1;
    const std::size_t j1 = (idx / L.n) % L.n + 1;
    const std::size_t j2 = idx % L.n + 1;
    return VertexPair{L.a_leaf(p, j1), L.abar_leaf(p, j2)};
  }});
  bundle.params["n"] = n;
  bundle.params["bits"] = L.bits;
  bundle.params["vertices"] = L.vertex_count();
  return bundle;
}

// ---------------------------------------------------------------------------

std::size_t CliqueLayout::pair_index(std::size_t i, std::size_t j) const
{
  if (i > j)
    std::swap(i, j);
  return (i - 1) * (2 * m - i) / 2 + (j - i);
}

std::vector<Weight> base9_offsets(std::size_t count)
{
  const Weight top = pow9(count);
  std::vector<Weight> out;
  for (std::size_t idx = 1; idx <= count; ++idx)
    out.push_back(pow9(idx - 1) / top);
  return out;
}

Weight base9_eps(std::size_t count)
{
  return Weight(1) / pow9(count);
}

InstanceBundle gen_linf_clique(std::size_t m, std::size_t k, WeightMode mode,
                               std::uint64_t seed, std::optional<Weight> eps)
{
  require(m >= 2, "linf-clique: m must be >= 2");
  require(k >= 1, "linf-clique: k must be >= 1");
  const CliqueLayout layout{m, k};
  const std::size_t N = layout.pair_count();

  std::vector<Weight> u;
  if (mode == WeightMode::Deterministic)
  {
    require(!eps || *eps == base9_eps(N), "linf-clique: deterministic mode fixes eps = 9^-N");
    u = base9_offsets(N);
    eps = base9_eps(N);
  }
  else
  {
    require(eps.has_value() && sgn(*eps) > 0, "linf-clique: random mode needs a positive eps");
    Rng rng(seed);
    u = random_offsets(N, rng);
  }
  std::vector<Weight> clique_w;
  for (const auto& x : u)
    clique_w.push_back(Weight(10) + x);
  require_tie_free(clique_w, *eps);

  const Weight w0 = *eps / Weight(16 * static_cast<long>(layout.vertex_count()));
  std::vector<Edge> edges;
  for (std::size_t i = 1; i <= m; ++i)
    for (std::size_t j = i + 1; j <= m; ++j)
      edges.push_back({layout.a(i), layout.a(j), clique_w[layout.pair_index(i, j) - 1]});
  for (std::size_t i = 1; i <= m; ++i)
    for (std::size_t p = 1; p <= k; ++p)
      edges.push_back({layout.a(i), layout.leaf(i, p), w0});

  InstanceBundle bundle{"linf-clique",
                        Graph::build(layout.vertex_count(), std::move(edges)).with_labels(clique_labels(layout)),
                        {}, {}, {}, {}, Json::object()};
  add_clique_families(bundle, layout);
  auto& p = bundle.params;
  p["m"] = m;
  p["k"] = k;
  p["mode"] = to_string(mode);
  p["seed"] = seed;
  p["pairs"] = N;
  p["vertices"] = layout.vertex_count();
  p["eps"] = str(*eps);
  p["w0"] = str(w0);
  p["u"] = weights_json(u);
  p["slack_threshold"] = str(*eps / Weight(2 * static_cast<long>(layout.vertex_count())));
  return bundle;
}

InstanceBundle gen_labeling_clique(std::size_t m, std::size_t k, unsigned b,
                                   const DeltaMatrix& delta, bool small_scale)
{
  require(m >= 2 && k >= 1, "labeling-clique: need m >= 2 and k >= 1");
  require(small_scale || (m >= 10 && k >= 10),
          "labeling-clique: m and k must be >= 10 (pass the small-scale override for desk tests)");
  require(b >= 1 && b <= 30, "labeling-clique: b must be in [1, 30]");
  require(delta.size() == m, "labeling-clique: delta must be m x m");
  const long top = (1l << b) - 1;
  for (std::size_t i = 0; i < m; ++i)
  {
    require(delta[i].size() == m, "labeling-clique: delta must be m x m");
    for (std::size_t j = 0; j < m; ++j)
      if (i != j)
      {
        require(delta[i][j] >= 0 && delta[i][j] <= top, "labeling-clique: delta[" + std::to_string(i + 1)
          + "][" + std::to_string(j + 1) + "] = " + std::to_string(delta[i][j]) + " is outside [0, 2^b - 1]");
        require(delta[i][j] == delta[j][i], "labeling-clique: delta must be symmetric");
      }
  }

  const CliqueLayout layout{m, k};
  std::vector<Edge> edges;
  for (std::size_t i = 1; i <= m; ++i)
    for (std::size_t j = i + 1; j <= m; ++j)
      edges.push_back({layout.a(i), layout.a(j), Weight(6 * ((1l << b) + delta[i - 1][j - 1]) - 2)});
  for (std::size_t i = 1; i <= m; ++i)
    for (std::size_t p = 1; p <= k; ++p)
      edges.push_back({layout.a(i), layout.leaf(i, p), Weight(1)});

  InstanceBundle bundle{"labeling-clique",
                        Graph::build(layout.vertex_count(), std::move(edges)).with_labels(clique_labels(layout)),
                        {}, {}, {}, {}, Json::object()};
  add_clique_families(bundle, layout);
  auto& p = bundle.params;
  p["m"] = m;
  p["k"] = k;
  p["b"] = b;
  p["small_scale"] = small_scale;
  p["vertices"] = layout.vertex_count();
  p["delta"] = matrix_json(delta);
  p["bad_pair_threshold"] = "3/1";
  return bundle;
}

DeltaMatrix random_delta(std::size_t m, unsigned b, std::uint64_t seed)
{
  Rng rng(seed);
  DeltaMatrix out(m, std::vector<long>(m, 0));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j)
      out[i][j] = out[j][i] = static_cast<long>(rng.below(1ul << b));
  return out;
}

void for_each_leaf_tuple(const CliqueLayout& layout, const std::function<void(std::span<const Vertex>)>& fn)
{
  std::vector<std::size_t> digit(layout.m, 1);
  std::vector<Vertex> tuple(layout.m);
  for (;;)
  {
    for (std::size_t i = 0; i < layout.m; ++i)
      tuple[i] = layout.leaf(i + 1, digit[i]);
    fn(tuple);
    std::size_t pos = layout.m;
    while (pos > 0 && digit[pos - 1] == layout.k)
      digit[--pos] = 1;
    if (pos == 0)
      return;
    ++digit[pos - 1];
  }
}

// ---------------------------------------------------------------------------

std::set<CellPair> grid_obstacles(const GridLayout& layout)
{
  const int m = int(layout.m), k = int(layout.k);
  std::set<CellPair> out;
  for (int x = -k; x < 0; ++x)
    for (int y = 0; y + 1 < m; ++y)
      out.insert(cell_pair({x, y}, {x, y + 1}));
  for (int y = -k; y < 0; ++y)
    for (int x = 0; x + 1 < m; ++x)
      out.insert(cell_pair({x, y}, {x + 1, y}));
  return out;
}

InstanceBundle gen_linf_grid(std::size_t m, std::size_t k, WeightMode mode,
                             std::uint64_t seed, std::optional<Weight> eps)
{
  require(m >= 2, "linf-grid: m must be >= 2");
  require(k >= 1, "linf-grid: k must be >= 1");
  const GridLayout layout{m, k};
  const std::size_t N = m * m;
  const long n = static_cast<long>(layout.vertex_count());

  std::vector<Weight> u;
  if (mode == WeightMode::Deterministic)
  {
    require(!eps || *eps == base9_eps(N), "linf-grid: deterministic mode fixes eps = 9^-N");
    u = base9_offsets(N);
    eps = base9_eps(N);
  }
  else
  {
    require(eps.has_value() && sgn(*eps) > 0, "linf-grid: random mode needs a positive eps");
    Rng rng(seed);
    u = random_offsets(N, rng);
  }

  const Weight n3 = power(std::size_t(n), 3);
  const Weight eps_w = *eps / Weight(8 * static_cast<long>(m * k));
  std::map<Cell, Weight> weights;
  std::vector<Weight> r_weights;
  for (const Cell c : grid_cells(layout))
  {
    if (c.x >= 0 && c.y >= 0)
    {
      Weight w = Weight(n - c.x) * n3 + u[std::size_t(c.x) * m + std::size_t(c.y)];
      r_weights.push_back(w);
      weights.emplace(c, std::move(w));
    }
    else
      weights.emplace(c, eps_w);
  }
  require_tie_free(r_weights, *eps);

  InstanceBundle bundle = grid_bundle("linf-grid", layout, GridSpec(std::move(weights), grid_obstacles(layout)));
  auto& p = bundle.params;
  p["m"] = m;
  p["k"] = k;
  p["mode"] = to_string(mode);
  p["seed"] = seed;
  p["vertices"] = layout.vertex_count();
  p["eps"] = str(*eps);
  p["eps_w"] = str(eps_w);
  p["u"] = weights_json(u);
  p["slack_threshold"] = str(*eps / Weight(2 * static_cast<long>(m)));
  return bundle;
}

DeltaMatrix delta_from_x(const std::vector<long>& x, std::size_t m)
{
  require(m >= 1 && x.size() == m * m, "delta_from_x: x must have m^2 entries");
  for (long v : x)
    require(v >= 0, "delta_from_x: x entries must be non-negative");
  auto X = [&](std::size_t i, std::size_t j) { return x[i * m + j]; };
  DeltaMatrix d(m, std::vector<long>(m, 0));
  d[0][0] = X(0, 0);
  for (std::size_t i = 1; i < m; ++i)
    d[i][0] = X(i, 0) - X(i - 1, 0);
  for (std::size_t j = 1; j < m; ++j)
    d[0][j] = X(0, j) - X(0, j - 1);
  for (std::size_t i = 1; i < m; ++i)
    for (std::size_t j = 1; j < m; ++j)
      d[i][j] = d[i - 1][j - 1] + (X(i, j) + X(i - 1, j - 1)) - (X(i, j - 1) + X(i - 1, j));
  return d;
}

long path_delta(const DeltaMatrix& delta, std::size_t i, std::size_t j)
{
  long sum = 0;
  for (std::size_t y = 0; y <= j; ++y)
    sum += delta[i][y];
  for (std::size_t x = 0; x < i; ++x)
    sum += delta[x][j];
  return sum;
}

std::vector<long> random_x(std::size_t m, unsigned b, std::uint64_t seed)
{
  Rng rng(seed);
  std::vector<long> out(m * m);
  for (auto& v : out)
    v = static_cast<long>(rng.below(1ul << b));
  return out;
}

InstanceBundle gen_labeling_grid(std::size_t m, std::size_t k, unsigned b, const std::vector<long>& x)
{
  require(m >= 2, "labeling-grid: m must be >= 2");
  require(k >= 1, "labeling-grid: k must be >= 1");
  require(b >= 1 && b <= 30, "labeling-grid: b must be in [1, 30]");
  require(x.size() == m * m, "labeling-grid: x must have m^2 entries");
  for (long v : x)
    require(v >= 0 && v < (1l << b), "labeling-grid: x entries must lie in [0, 2^b - 1]");
  const GridLayout layout{m, k};
  const long n = static_cast<long>(layout.vertex_count());
  const DeltaMatrix delta = delta_from_x(x, m);
  for (const auto& row : delta)
    for (long d : row)
      require(std::abs(d) <= n * n, "labeling-grid: |delta| exceeds n^2; lower b or raise m, k");

  const Weight n4 = power(std::size_t(n), 4);
  std::map<Cell, Weight> weights;
  for (const Cell c : grid_cells(layout))
  {
    if (c.x >= 0 && c.y >= 0)
      weights.emplace(c, Weight(n - c.x) * n4 + Weight(delta[c.x][c.y] * n) - Weight(2 * static_cast<long>(k)));
    else
      weights.emplace(c, Weight(1));
  }

  InstanceBundle bundle = grid_bundle("labeling-grid", layout, GridSpec(std::move(weights), grid_obstacles(layout)));
  auto& p = bundle.params;
  p["m"] = m;
  p["k"] = k;
  p["b"] = b;
  p["vertices"] = layout.vertex_count();
  p["x"] = x;
  p["delta"] = matrix_json(delta);
  p["bad_pair_threshold"] = str(Weight(2 * static_cast<long>(k)));
  return bundle;
}

long recover_path_delta(const InstanceBundle& bundle, std::size_t i, std::size_t j)
{
  require(bundle.family == "labeling-grid" && bundle.grid && bundle.grid_graph,
          "recover_path_delta needs a labeling-grid bundle");
  const auto& gg = *bundle.grid_graph;
  const long k = bundle.params.at("k").get<long>();
  const long n = static_cast<long>(bundle.graph.size());
  const Vertex s = gg.at(int(i), 0), t = gg.at(0, int(j));
  // Path length is the cell sum minus half of each endpoint's weight.
  const Weight cells = dijkstra(bundle.graph, s).dist[t]
    + (bundle.grid->weight({int(i), 0}) + bundle.grid->weight({0, int(j)})) / 2;
  require(cells.get_den() == 1, "recover_path_delta: non-integral cell sum");
  mpz_class shifted = cells.get_num() + 2 * k * long(i + j + 1);
  mpz_class n4;
  mpz_ui_pow_ui(n4.get_mpz_t(), static_cast<unsigned long>(n), 4);
  mpz_class rem;
  mpz_fdiv_r(rem.get_mpz_t(), shifted.get_mpz_t(), n4.get_mpz_t());
  require(rem % n == 0, "recover_path_delta: residue is not a multiple of n");
  return mpz_class(rem / n).get_si();
}

void for_each_flank_tuple(const GridGraph& gg, const GridLayout& layout,
                          const std::function<void(std::span<const Vertex>)>& fn)
{
  const std::size_t m = layout.m, k = layout.k;
  std::vector<std::size_t> digit(2 * m, 1);
  std::vector<Vertex> tuple(2 * m);
  for (;;)
  {
    for (std::size_t i = 0; i < m; ++i)
    {
      tuple[i] = gg.at(int(i), -int(digit[i]));
      tuple[m + i] = gg.at(-int(digit[m + i]), int(i));
    }
    fn(tuple);
    std::size_t pos = 2 * m;
    while (pos > 0 && digit[pos - 1] == k)
      digit[--pos] = 1;
    if (pos == 0)
      return;
    ++digit[pos - 1];
  }
}

// ---------------------------------------------------------------------------

Weight default_edge_probability(std::size_t n)
{
  if (n <= 2)
    return Weight(1);
  std::size_t log2 = 0;
  while ((std::size_t(1) << log2) < n)
    ++log2;
  Weight p(static_cast<long>(2 * log2), static_cast<long>(n));
  p.canonicalize();
  return p > 1 ? Weight(1) : p;
}

InstanceBundle gen_random_usp(const UspOptions& o)
{
  require(o.n >= 2, "usp: n must be >= 2");
  require(sgn(o.edge_probability) > 0 && o.edge_probability <= 1, "usp: edge probability must lie in (0, 1]");
  require(o.edge_probability.get_den().fits_slong_p(), "usp: edge probability denominator too large");
  require(sgn(o.margin) > 0, "usp: margin must be positive");
  require(o.max_attempts >= 1, "usp: need at least one attempt");
  require(sgn(o.min_weight) >= 0, "usp: minimum edge weight must be non-negative");

  // D = 2^bits >= n^5 keeps each point mass of the weight distribution below n^-5.
  const mpz_class n5 = mpz_class(static_cast<unsigned long>(o.n)) * o.n * o.n * o.n * o.n;
  unsigned bits = o.denominator_bits;
  if (bits == 0)
    while (mpz_class(1) << bits < n5)
      ++bits;
  require((mpz_class(1) << bits) >= n5, "usp: 2^denominator_bits must be at least n^5");
  require(bits + 64 - __builtin_clzll(o.n) < 63, "usp: D * n must fit in 63 bits");

  const std::uint64_t D = std::uint64_t(1) << bits;
  const std::uint64_t p_num = o.edge_probability.get_num().get_ui();
  const std::uint64_t p_den = o.edge_probability.get_den().get_ui();
  Rng rng(o.seed);
  for (std::size_t attempt = 1; attempt <= o.max_attempts; ++attempt)
  {
    std::vector<Edge> edges;
    std::vector<std::uint64_t> ks;
    for (Vertex u = 0; u < o.n; ++u)
      for (Vertex v = u + 1; v < o.n; ++v)
        if (rng.chance(p_num, p_den))
        {
          const std::uint64_t k = rng.between(1, D * o.n);
          edges.push_back({u, v, Weight(mpz_class(static_cast<unsigned long>(k)), mpz_class(static_cast<unsigned long>(D)))});
          edges.back().w.canonicalize();
        }
    std::optional<Graph> g;
    try
    {
      g = Graph::build(o.n, edges);
    }
    catch (const GraphError& e)
    {
      if (e.kind() == GraphError::Kind::Disconnected)
        continue;
      throw;
    }
    auto report = verify_usp_margin(*g, o.margin);
    if (report.min_margin && sgn(*report.min_margin) == 0)
      continue;

    Weight factor = 1;
    if (!report.pass)
      factor = (o.margin + 1) / *report.min_margin;
    Weight lightest = edges.front().w;
    for (const auto& e : edges)
      lightest = std::min(lightest, e.w);
    if (lightest * factor < o.min_weight)
      factor = o.min_weight / lightest;
    if (factor != 1)
    {
      for (auto& e : edges)
        e.w *= factor;
      g = Graph::build(o.n, std::move(edges));
      report = verify_usp_margin(*g, o.margin);
      if (!report.pass)
        throw std::logic_error("usp: rescaled graph failed margin verification");
    }

    InstanceBundle bundle{"usp", std::move(*g), {}, {}, {}, {}, Json::object()};
    bundle.families["all"] = range_vertices(0, Vertex(o.n));
    auto& p = bundle.params;
    p["n"] = o.n;
    p["edge_probability"] = str(o.edge_probability);
    p["denominator_bits"] = bits;
    p["margin"] = str(o.margin);
    p["min_weight"] = str(o.min_weight);
    p["seed"] = o.seed;
    p["attempts"] = attempt;
    p["scale_factor"] = str(factor);
    p["verified_margin"] = report.min_margin ? Json(str(*report.min_margin)) : Json(nullptr);
    p["margin_witness"] = {report.witness.first, report.witness.second};
    p["edges"] = bundle.graph.edge_count();
    return bundle;
  }
  throw AnalysisError("usp: no connected graph with unique shortest paths after "
    + std::to_string(o.max_attempts) + " attempts; raise the edge probability or the attempt limit");
}

// ---------------------------------------------------------------------------

namespace {

std::string read_text(const std::filesystem::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::ios_base::failure("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const std::filesystem::path& path, const std::string& text)
{
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw std::ios_base::failure("cannot write " + path.string());
  out << text;
  if (!out)
    throw std::ios_base::failure("write failed for " + path.string());
}

}  // namespace

void write_bundle(const InstanceBundle& bundle, const std::filesystem::path& dir)
{
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec)
    throw std::ios_base::failure("cannot create " + dir.string() + ": " + ec.message());

  write_text(dir / "graph.txt", serialize_graph(bundle.graph));
  if (bundle.grid)
    write_text(dir / "grid.json", serialize_grid(*bundle.grid));

  std::ostringstream fam;
  for (const auto& [name, vs] : bundle.families)
  {
    fam << name;
    for (Vertex v : vs)
      fam << ' ' << v;
    fam << '\n';
  }
  write_text(dir / "families.txt", fam.str());

  std::ostringstream q;
  q << "# family s t\n";
  for (const auto& family : bundle.queries)
    for (std::size_t i = 0; i < family.count; ++i)
    {
      const auto [s, t] = family.at(i);
      q << family.name << ' ' << s << ' ' << t << '\n';
    }
  write_text(dir / "queries.txt", q.str());

  Json manifest;
  manifest["format"] = "astarlab-instance/1";
  manifest["family"] = bundle.family;
  manifest["vertices"] = bundle.graph.size();
  manifest["edges"] = bundle.graph.edge_count();
  manifest["params"] = bundle.params;
  Json fams = Json::object();
  for (const auto& [name, vs] : bundle.families)
    fams[name] = vs.size();
  manifest["families"] = fams;
  Json qs = Json::object();
  for (const auto& family : bundle.queries)
    qs[family.name] = family.count;
  manifest["queries"] = qs;
  if (!bundle.graph.labels().empty())
    manifest["labels"] = bundle.graph.labels();
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

InstanceBundle read_bundle(const std::filesystem::path& dir)
{
  Json manifest;
  try
  {
    manifest = Json::parse(read_text(dir / "manifest.json"));
  }
  catch (const Json::exception& e)
  {
    throw std::invalid_argument("manifest.json: " + std::string(e.what()));
  }
  require(manifest.value("format", "") == "astarlab-instance/1", "manifest.json: unknown format tag");

  Graph g = parse_graph(read_text(dir / "graph.txt"));
  if (manifest.contains("labels"))
    g = g.with_labels(manifest["labels"].get<std::vector<std::string>>());
  InstanceBundle bundle{manifest.at("family").get<std::string>(), std::move(g), {}, {}, {}, {},
                        manifest.value("params", Json::object())};
  if (std::filesystem::exists(dir / "grid.json"))
  {
    bundle.grid = parse_grid(read_text(dir / "grid.json"));
    bundle.grid_graph = grid_to_graph(*bundle.grid, bundle.graph.labels());
    require(same_edges(bundle.grid_graph->graph, bundle.graph), "grid.json does not match graph.txt");
  }

  std::istringstream fam(read_text(dir / "families.txt"));
  std::string line;
  while (std::getline(fam, line))
  {
    std::istringstream row(line);
    std::string name;
    if (!(row >> name))
      continue;
    auto& vs = bundle.families[name];
    Vertex v;
    while (row >> v)
    {
      require(v < bundle.graph.size(), "families.txt: vertex out of range in '" + name + "'");
      vs.push_back(v);
    }
  }

  std::map<std::string, std::vector<VertexPair>> lists;
  std::vector<std::string> order;
  std::istringstream q(read_text(dir / "queries.txt"));
  while (std::getline(q, line))
  {
    if (line.empty() || line[0] == '#')
      continue;
    std::istringstream row(line);
    std::string name;
    Vertex s, t;
    require(static_cast<bool>(row >> name >> s >> t), "queries.txt: malformed line '" + line + "'");
    require(s < bundle.graph.size() && t < bundle.graph.size(), "queries.txt: vertex out of range");
    if (!lists.count(name))
      order.push_back(name);
    lists[name].emplace_back(s, t);
  }
  for (const auto& name : order)
    bundle.queries.push_back(listed_family(name, std::move(lists[name])));
  return bundle;
}

}  // namespace astarlab
