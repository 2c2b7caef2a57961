#include "astarlab/analysis.hpp"
#include "astarlab/graph_io.hpp"
#include "astarlab/heuristics.hpp"
#include "astarlab/instances.hpp"
#include "astarlab/random.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

using namespace astarlab;
using Json = nlohmann::ordered_json;

namespace {

enum Exit : int
{
  kOk = 0,
  kValidationFailure = 1,
  kParameterError = 2,
  kIoError = 3,
};

struct ParameterError : std::runtime_error
{
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error
{
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& text)
{
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw IoError("cannot write " + path.string());
  out << text;
  if (!out)
    throw IoError("write failed for " + path.string());
}

void ensure_dir(const std::string& dir)
{
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec)
    throw IoError("cannot create " + dir + ": " + ec.message());
}

Weight rational_arg(const std::string& text, const std::string& flag)
{
  try
  {
    return parse_weight(text);
  }
  catch (const std::invalid_argument&)
  {
    throw ParameterError(flag + ": expected a rational 'p/q' or integer, got '" + text + "'");
  }
}

std::vector<Vertex> vertex_list(const std::string& text, std::size_t n, const std::string& flag)
{
  std::vector<Vertex> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ','))
  {
    std::size_t used = 0;
    unsigned long v = 0;
    try
    {
      v = std::stoul(item, &used);
    }
    catch (const std::exception&)
    {
      used = 0;
    }
    if (used != item.size() || item.empty())
      throw ParameterError(flag + ": bad vertex '" + item + "'");
    if (v >= n)
      throw ParameterError(flag + ": vertex " + item + " out of range (n = " + std::to_string(n) + ")");
    out.push_back(Vertex(v));
  }
  return out;
}

/// Canonical argv of the invocation, for replaying from config.json.
Json argv_json(int argc, char** argv)
{
  Json out = Json::array();
  for (int i = 1; i < argc; ++i)
    out.push_back(argv[i]);
  return out;
}

// ---------------------------------------------------------------------------
// Inputs shared by validate, overhead and audit.

struct GraphInput
{
  std::string graph_file;
  std::string instance_dir;

  void add(CLI::App* cmd)
  {
    auto* g = cmd->add_option("--graph", graph_file, "Edge-list graph file");
    auto* i = cmd->add_option("--instance", instance_dir, "Instance directory written by gen");
    g->excludes(i);
  }

  /// Loads either source; the bundle is present only for --instance.
  std::pair<Graph, std::optional<InstanceBundle>> load() const
  {
    if (!instance_dir.empty())
    {
      if (!std::filesystem::is_directory(instance_dir))
        throw IoError("no instance directory " + instance_dir);
      auto bundle = read_bundle(instance_dir);
      Graph g = bundle.graph;
      return {std::move(g), std::move(bundle)};
    }
    if (graph_file.empty())
      throw ParameterError("one of --graph or --instance is required");
    return {parse_graph(read_file(graph_file)), std::nullopt};
  }

  Json describe() const
  {
    Json out;
    if (!instance_dir.empty())
      out["instance"] = instance_dir;
    else
      out["graph"] = graph_file;
    return out;
  }
};

struct HeuristicInput
{
  std::string family = "beacon";
  std::optional<std::size_t> beacons;
  std::optional<double> alpha;
  std::uint64_t beacon_seed = 0;
  std::string beacon_list;
  std::string embedding_file;
  std::string p = "inf";
  std::string tie_gap = "0";

  void add(CLI::App* cmd)
  {
    cmd->add_option("--heuristic", family, "zero | exact | beacon | tiebreak | norm")
      ->check(CLI::IsMember({"zero", "exact", "beacon", "tiebreak", "norm"}))
      ->capture_default_str();
    auto* b = cmd->add_option("--beacons", beacons, "Number of sampled beacons");
    auto* a = cmd->add_option("--alpha", alpha, "Beacon count round(n^alpha), at least 1");
    b->excludes(a);
    cmd->add_option("--beacon-seed", beacon_seed, "Seed for beacon sampling")->capture_default_str();
    cmd->add_option("--beacon-list", beacon_list, "Explicit comma-separated beacon vertices");
    cmd->add_option("--embedding", embedding_file, "Embedding file (coordinates, optional Euler pairs)");
    cmd->add_option("--p", p, "Norm exponent: a positive integer or inf")->capture_default_str();
    cmd->add_option("--tie-gap", tie_gap, "Declared minimum key gap for finite p >= 2")->capture_default_str();
  }

  /// Resolves to a heuristic; `record` receives the realized parameters.
  HeuristicSpec build(const Graph& g, Json& record) const
  {
    const std::size_t n = g.size();
    record["family"] = family;
    if (family == "zero")
      return heuristic::Zero{};
    if (family == "exact")
      return make_exact(g);

    std::shared_ptr<const Embedding> emb;
    if (!embedding_file.empty())
    {
      if (beacons || alpha || !beacon_list.empty())
        throw ParameterError("--embedding cannot be combined with beacon selection flags");
      emb = std::make_shared<const Embedding>(parse_embedding(read_file(embedding_file)));
      record["embedding"] = embedding_file;
      record["dimension"] = emb->dim();
    }
    else
    {
      std::vector<Vertex> chosen;
      if (!beacon_list.empty())
      {
        if (beacons || alpha)
          throw ParameterError("--beacon-list cannot be combined with --beacons or --alpha");
        chosen = vertex_list(beacon_list, n, "--beacon-list");
      }
      else
      {
        std::size_t count = 0;
        if (beacons)
          count = *beacons;
        else if (alpha)
        {
          if (*alpha < 0 || *alpha > 1)
            throw ParameterError("--alpha must lie in [0, 1]");
          count = std::max<std::size_t>(1, std::size_t(std::llround(std::pow(double(n), *alpha))));
          record["alpha"] = *alpha;
        }
        else
          throw ParameterError("heuristic '" + family + "' needs --beacons, --alpha, --beacon-list or --embedding");
        if (count < 1 || count > n)
          throw ParameterError("beacon count must lie in [1, " + std::to_string(n) + "]");
        chosen = sample_beacons(n, count, beacon_seed);
        record["beacon_seed"] = beacon_seed;
      }
      emb = std::make_shared<const Embedding>(family == "tiebreak" ? build_tiebreak_embedding(g, chosen)
                                                                   : build_beacon_embedding(g, chosen));
      record["beacon_count"] = chosen.size();
      record["beacons"] = chosen;
    }

    HeuristicSpec h;
    if (family == "beacon")
      h = heuristic::Beacon{emb};
    else if (family == "tiebreak")
    {
      if (!emb->has_positions())
        throw ParameterError("tiebreak heuristic needs an embedding with Euler position pairs");
      h = heuristic::TieBreak{emb};
    }
    else
    {
      unsigned exponent = 0;
      if (p != "inf")
      {
        try
        {
          std::size_t used = 0;
          const unsigned long v = std::stoul(p, &used);
          if (used != p.size() || v == 0 || v > 64)
            throw std::invalid_argument(p);
          exponent = unsigned(v);
        }
        catch (const std::exception&)
        {
          throw ParameterError("--p must be an integer in [1, 64] or inf, got '" + p + "'");
        }
      }
      h = heuristic::Norm{exponent, emb, rational_arg(tie_gap, "--tie-gap")};
      record["p"] = p;
      if (exponent >= 2)
        record["tie_gap"] = tie_gap;
    }
    try
    {
      check_dimensions(h, n);
    }
    catch (const std::invalid_argument& e)
    {
      throw ParameterError(e.what());
    }
    return h;
  }
};

struct PairInput
{
  std::string kind = "all";
  std::size_t samples = 1000;
  std::uint64_t pair_seed = 0;
  std::string query_family;

  void add(CLI::App* cmd)
  {
    cmd->add_option("--pairs", kind, "all | sampled | family")
      ->check(CLI::IsMember({"all", "sampled", "family"}))
      ->capture_default_str();
    cmd->add_option("--samples", samples, "Sampled pair count")->capture_default_str();
    cmd->add_option("--pair-seed", pair_seed, "Seed for pair sampling")->capture_default_str();
    cmd->add_option("--query-family", query_family, "Query family of the instance (with --pairs family)");
  }

  PairSource build(const std::optional<InstanceBundle>& bundle) const
  {
    if (kind == "all")
      return PairSource::all();
    if (kind == "sampled")
    {
      if (samples == 0)
        throw ParameterError("--samples must be positive");
      return PairSource::sampled(pair_seed, samples);
    }
    if (!bundle)
      throw ParameterError("--pairs family needs --instance");
    if (query_family.empty())
      throw ParameterError("--pairs family needs --query-family");
    try
    {
      return PairSource::listed(bundle->query_family(query_family).materialize());
    }
    catch (const std::invalid_argument& e)
    {
      throw ParameterError(e.what());
    }
  }
};

void write_config(const std::string& dir, const std::string& command, Json body, int argc, char** argv)
{
  Json config;
  config["tool"] = "astarlab";
  config["command"] = command;
  for (auto it = body.begin(); it != body.end(); ++it)
    config[it.key()] = it.value();
  config["args"] = argv_json(argc, argv);
  write_file(std::filesystem::path(dir) / "config.json", config.dump(2) + "\n");
}

// ---------------------------------------------------------------------------

struct GenArgs
{
  std::string family;
  std::string out;
  std::size_t n = 0, m = 0, k = 0;
  unsigned b = 2;
  std::string mode = "deterministic";
  std::uint64_t seed = 0;
  std::string eps;
  std::string margin = "3";
  std::string min_weight = "1";
  std::string edge_probability;
  unsigned denominator_bits = 0;
  std::size_t max_attempts = 32;
  bool small_scale = false;
};

InstanceBundle generate(const GenArgs& a)
{
  auto need = [](std::size_t v, const char* flag) {
    if (v == 0)
      throw ParameterError(std::string(flag) + " is required and must be positive");
  };
  const WeightMode mode = a.mode == "random" ? WeightMode::SeededRandom : WeightMode::Deterministic;
  std::optional<Weight> eps;
  if (!a.eps.empty())
    eps = rational_arg(a.eps, "--eps");

  if (a.family == "lp-lb")
  {
    need(a.n, "--n");
    return gen_lp_lb(a.n);
  }
  if (a.family == "linf-clique")
  {
    need(a.m, "--m");
    need(a.k, "--k");
    return gen_linf_clique(a.m, a.k, mode, a.seed, eps);
  }
  if (a.family == "labeling-clique")
  {
    need(a.m, "--m");
    need(a.k, "--k");
    if (a.b == 0 || a.b > 30)
      throw ParameterError("--b must lie in [1, 30]");
    return gen_labeling_clique(a.m, a.k, a.b, random_delta(a.m, a.b, a.seed), a.small_scale);
  }
  if (a.family == "linf-grid")
  {
    need(a.m, "--m");
    need(a.k, "--k");
    return gen_linf_grid(a.m, a.k, mode, a.seed, eps);
  }
  if (a.family == "labeling-grid")
  {
    need(a.m, "--m");
    need(a.k, "--k");
    if (a.b == 0 || a.b > 30)
      throw ParameterError("--b must lie in [1, 30]");
    return gen_labeling_grid(a.m, a.k, a.b, random_x(a.m, a.b, a.seed));
  }
  need(a.n, "--n");
  UspOptions o;
  o.n = a.n;
  o.edge_probability = a.edge_probability.empty() ? default_edge_probability(a.n)
                                                  : rational_arg(a.edge_probability, "--edge-probability");
  o.denominator_bits = a.denominator_bits;
  o.margin = rational_arg(a.margin, "--margin");
  o.min_weight = rational_arg(a.min_weight, "--min-weight");
  o.seed = a.seed;
  o.max_attempts = a.max_attempts;
  return gen_random_usp(o);
}

int cmd_gen(const GenArgs& a, int argc, char** argv)
{
  const InstanceBundle bundle = [&] {
    try
    {
      return generate(a);
    }
    catch (const std::invalid_argument& e)
    {
      throw ParameterError(e.what());
    }
  }();
  write_bundle(bundle, a.out);
  Json body;
  body["family"] = a.family;
  body["params"] = bundle.params;
  body["out"] = a.out;
  write_config(a.out, "gen", std::move(body), argc, argv);
  std::cout << "wrote " << a.family << " instance: " << bundle.graph.size() << " vertices, "
            << bundle.graph.edge_count() << " edges -> " << a.out << '\n';
  return kOk;
}

// ---------------------------------------------------------------------------

struct ValidateArgs
{
  GraphInput graph;
  HeuristicInput heuristic;
  std::size_t triples = 20000;
  std::uint64_t triple_seed = 0;
  std::size_t show = 10;
  std::string out;
};

int cmd_validate(const ValidateArgs& a, int argc, char** argv)
{
  auto [g, bundle] = a.graph.load();
  Json hrec;
  const HeuristicSpec h = a.heuristic.build(g, hrec);
  const std::size_t n = g.size();

  const auto consistency = check_consistency(g, h);
  const auto admissibility = check_admissibility(g, h);
  std::vector<SubadditivityViolation> subadditivity;
  std::string triple_source;
  if (n <= 30)
  {
    subadditivity = check_subadditivity(h, n);
    triple_source = "all ordered triples";
  }
  else
  {
    Rng rng(a.triple_seed);
    std::vector<VertexTriple> triples;
    for (std::size_t i = 0; i < a.triples; ++i)
      triples.emplace_back(Vertex(rng.below(n)), Vertex(rng.below(n)), Vertex(rng.below(n)));
    subadditivity = check_subadditivity(h, triples);
    triple_source = std::to_string(a.triples) + " sampled triples (seed " + std::to_string(a.triple_seed) + ")";
  }

  std::ostringstream report;
  report << "heuristic: " << describe(h) << '\n';
  report << "vertices: " << n << '\n';
  report << "consistency_violations: " << consistency.size() << '\n';
  for (std::size_t i = 0; i < std::min(a.show, consistency.size()); ++i)
  {
    const auto& v = consistency[i];
    report << "  edge (" << v.u << "," << v.v << ") target " << v.t << " slack " << v.slack.to_string() << '\n';
  }
  report << "admissibility_violations: " << admissibility.size() << '\n';
  for (std::size_t i = 0; i < std::min(a.show, admissibility.size()); ++i)
  {
    const auto& v = admissibility[i];
    report << "  pair (" << v.s << "," << v.t << ") excess " << v.excess.to_string() << '\n';
  }
  report << "subadditivity_violations: " << subadditivity.size() << " over " << triple_source << '\n';
  for (std::size_t i = 0; i < std::min(a.show, subadditivity.size()); ++i)
  {
    const auto& v = subadditivity[i];
    report << "  triple (" << v.u << "," << v.v << "," << v.w << ") deficit " << v.deficit.to_string() << '\n';
  }
  const bool ok = consistency.empty() && admissibility.empty() && subadditivity.empty();
  report << "result: " << (ok ? "pass" : "fail") << '\n';
  std::cout << report.str();

  if (!a.out.empty())
  {
    ensure_dir(a.out);
    write_file(std::filesystem::path(a.out) / "validate.txt", report.str());
    Json body = a.graph.describe();
    body["heuristic"] = hrec;
    body["triples"] = triple_source;
    write_config(a.out, "validate", std::move(body), argc, argv);
  }
  return ok ? kOk : kValidationFailure;
}

// ---------------------------------------------------------------------------

struct OverheadArgs
{
  GraphInput graph;
  HeuristicInput heuristic;
  PairInput pairs;
  std::string mode = "optimal";
  std::string tie = "fifo";
  unsigned workers = 1;
  std::string out;
};

int cmd_overhead(const OverheadArgs& a, int argc, char** argv)
{
  auto [g, bundle] = a.graph.load();
  Json hrec;
  const HeuristicSpec h = a.heuristic.build(g, hrec);
  const PairSource source = a.pairs.build(bundle);
  const OverheadMode mode = a.mode == "optimal" ? OverheadMode::best()
                                                : OverheadMode::with_policy(parse_tie_break(a.tie));
  OverheadOptions options;
  options.workers = std::max(1u, a.workers);
  const OverheadReport report = measure_overhead(g, h, source, mode, options);

  const std::string summary = "heuristic: " + describe(h) + "\n" + overhead_summary(report);
  std::cout << summary;
  if (!a.out.empty())
  {
    ensure_dir(a.out);
    write_file(std::filesystem::path(a.out) / "overhead.csv", overhead_csv(report));
    write_file(std::filesystem::path(a.out) / "summary.txt", summary);
    Json body = a.graph.describe();
    body["heuristic"] = hrec;
    body["pairs"] = report.pair_source;
    if (a.pairs.kind == "family")
      body["query_family"] = a.pairs.query_family;
    body["mode"] = mode.describe();
    body["workers"] = options.workers;
    write_config(a.out, "overhead", std::move(body), argc, argv);
  }
  return kOk;
}

// ---------------------------------------------------------------------------

struct AuditArgs
{
  GraphInput graph;
  std::string embedding_file;
  std::string family;
  std::string slack;
  std::string slack_param;
  std::string bad_threshold;
  std::string bad_threshold_param;
  std::string out;
};

Weight param_rational(const std::optional<InstanceBundle>& bundle, const std::string& name, const std::string& flag)
{
  if (!bundle)
    throw ParameterError(flag + " needs --instance");
  if (!bundle->params.contains(name) || !bundle->params[name].is_string())
    throw ParameterError(flag + ": instance has no rational parameter '" + name + "'");
  return rational_arg(bundle->params[name].get<std::string>(), flag);
}

int cmd_audit(const AuditArgs& a, int argc, char** argv)
{
  auto [g, bundle] = a.graph.load();
  const auto emb = std::make_shared<const Embedding>(parse_embedding(read_file(a.embedding_file)));
  if (emb->size() != g.size())
    throw ParameterError("embedding covers " + std::to_string(emb->size()) + " vertices, graph has "
                         + std::to_string(g.size()));

  std::vector<VertexPair> pairs;
  if (a.family.empty() || a.family == "all")
  {
    for (Vertex u = 0; u < g.size(); ++u)
      for (Vertex v = u + 1; v < g.size(); ++v)
        pairs.emplace_back(u, v);
  }
  else
  {
    if (!bundle)
      throw ParameterError("--family needs --instance");
    try
    {
      pairs = bundle->query_family(a.family).materialize();
    }
    catch (const std::invalid_argument& e)
    {
      throw ParameterError(e.what());
    }
  }

  if (!a.slack.empty() && !a.slack_param.empty())
    throw ParameterError("give either --slack or --slack-param");
  const Weight slack = !a.slack_param.empty() ? param_rational(bundle, a.slack_param, "--slack-param")
                     : !a.slack.empty()       ? rational_arg(a.slack, "--slack")
                                              : Weight(0);
  const AuditReport audit = audit_crucial_coordinates(g, *emb, pairs, slack);

  std::optional<Weight> threshold;
  if (!a.bad_threshold.empty())
    threshold = rational_arg(a.bad_threshold, "--bad-threshold");
  else if (!a.bad_threshold_param.empty())
    threshold = param_rational(bundle, a.bad_threshold_param, "--bad-threshold-param");
  std::optional<BadPairReport> bad;
  if (threshold)
    bad = count_bad_pairs(g, heuristic::Beacon{emb}, pairs, *threshold);

  std::string summary = audit_summary(audit);
  if (bad)
    summary += "bad_pairs: " + std::to_string(bad->count()) + " of " + std::to_string(bad->pairs)
               + " at threshold " + format_weight(bad->threshold) + "\n";
  std::cout << summary;
  if (!a.out.empty())
  {
    ensure_dir(a.out);
    write_file(std::filesystem::path(a.out) / "audit.csv", audit_csv(audit));
    write_file(std::filesystem::path(a.out) / "audit.txt", summary);
    std::ostringstream distorted;
    distorted << "# astarlab distorted pairs v1\nu,v\n";
    for (const auto& [u, v] : audit.distorted)
      distorted << u << ',' << v << '\n';
    write_file(std::filesystem::path(a.out) / "distorted.csv", distorted.str());
    Json body = a.graph.describe();
    body["embedding"] = a.embedding_file;
    body["family"] = a.family.empty() ? "all" : a.family;
    body["slack"] = format_weight(slack);
    if (threshold)
      body["bad_threshold"] = format_weight(*threshold);
    write_config(a.out, "audit", std::move(body), argc, argv);
  }
  return kOk;
}

// ---------------------------------------------------------------------------

struct ConvertArgs
{
  std::string grid_in;
  std::string graph_out;
  std::string cells_out;
  std::string graph_in;
  std::string cells_in;
  std::string anchor = "1";
  std::string grid_out;
};

/// Node weights from half-sum edge weights. The grid graph is bipartite, so
/// one weight per component is free; the first cell of each component gets
/// `anchor`.
GridSpec grid_from_graph(const Graph& g, const std::vector<Cell>& cells, const Weight& anchor)
{
  const std::size_t n = g.size();
  std::map<Cell, Vertex> index;
  for (Vertex v = 0; v < n; ++v)
    if (!index.emplace(cells[v], v).second)
      throw ParameterError("two vertices share a cell");
  std::vector<std::optional<Weight>> w(n);
  for (Vertex root = 0; root < n; ++root)
  {
    if (w[root])
      continue;
    w[root] = anchor;
    std::vector<Vertex> stack{root};
    while (!stack.empty())
    {
      const Vertex u = stack.back();
      stack.pop_back();
      for (const Arc& arc : g.neighbors(u))
      {
        if (!grid_adjacent(cells[u], cells[arc.to]))
          throw ParameterError("edge between non-adjacent cells");
        const Weight other = 2 * arc.w - *w[u];
        if (!w[arc.to])
        {
          w[arc.to] = other;
          stack.push_back(arc.to);
        }
        else if (*w[arc.to] != other)
          throw ParameterError("edge weights are not half-sums of any cell weighting");
      }
    }
  }
  std::map<Cell, Weight> weights;
  for (Vertex v = 0; v < n; ++v)
  {
    if (sgn(*w[v]) <= 0)
      throw ParameterError("anchor yields a non-positive cell weight; choose another --anchor");
    weights.emplace(cells[v], *w[v]);
  }
  std::set<CellPair> blocked;
  for (Vertex v = 0; v < n; ++v)
    for (const Cell d : {Cell{1, 0}, Cell{0, 1}})
    {
      const Cell c{cells[v].x + d.x, cells[v].y + d.y};
      const auto it = index.find(c);
      if (it != index.end() && !g.weight(v, it->second))
        blocked.insert(cell_pair(cells[v], c));
    }
  return GridSpec(std::move(weights), std::move(blocked));
}

int cmd_convert(const ConvertArgs& a, int argc, char** argv)
{
  (void)argc;
  (void)argv;
  if (!a.grid_in.empty())
  {
    if (a.graph_out.empty())
      throw ParameterError("--grid needs --graph-out");
    const GridSpec spec = [&] {
      try
      {
        return parse_grid(read_file(a.grid_in));
      }
      catch (const std::invalid_argument& e)
      {
        throw ParameterError(std::string("grid file: ") + e.what());
      }
    }();
    const GridGraph gg = grid_to_graph(spec);
    write_file(a.graph_out, serialize_graph(gg.graph));
    if (!a.cells_out.empty())
    {
      std::ostringstream cells;
      cells << "# vertex x y\n";
      for (Vertex v = 0; v < gg.cell_of.size(); ++v)
        cells << v << ' ' << gg.cell_of[v].x << ' ' << gg.cell_of[v].y << '\n';
      write_file(a.cells_out, cells.str());
    }
    std::cout << "wrote graph with " << gg.graph.size() << " vertices, " << gg.graph.edge_count() << " edges\n";
    return kOk;
  }
  if (a.graph_in.empty() || a.cells_in.empty() || a.grid_out.empty())
    throw ParameterError("convert needs --grid with --graph-out, or --graph-in with --cells and --grid-out");
  const Graph g = parse_graph(read_file(a.graph_in));
  std::vector<std::optional<Cell>> cells(g.size());
  std::istringstream in(read_file(a.cells_in));
  std::string line;
  while (std::getline(in, line))
  {
    if (line.empty() || line[0] == '#')
      continue;
    std::istringstream row(line);
    std::size_t v;
    int x, y;
    if (!(row >> v >> x >> y) || v >= g.size())
      throw ParameterError("cells file: bad line '" + line + "'");
    cells[v] = Cell{x, y};
  }
  std::vector<Cell> resolved;
  for (std::size_t v = 0; v < g.size(); ++v)
  {
    if (!cells[v])
      throw ParameterError("cells file: vertex " + std::to_string(v) + " has no cell");
    resolved.push_back(*cells[v]);
  }
  write_file(a.grid_out, serialize_grid(grid_from_graph(g, resolved, rational_arg(a.anchor, "--anchor"))));
  std::cout << "wrote grid with " << g.size() << " cells\n";
  return kOk;
}

}  // namespace

static int run(int argc, char** argv)
{
  CLI::App app{"Exact A* scan-overhead laboratory: instance generation, heuristic validation, "
               "overhead measurement and embedding audits."};
  app.require_subcommand(1);
  app.footer("Replay a recorded run with: astarlab rerun --config DIR/config.json");

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate an instance directory");
  gen_cmd->add_option("family", gen.family, "lp-lb | linf-clique | labeling-clique | linf-grid | labeling-grid | usp")
    ->required()
    ->check(CLI::IsMember({"lp-lb", "linf-clique", "labeling-clique", "linf-grid", "labeling-grid", "usp"}));
  gen_cmd->add_option("--out", gen.out, "Output directory")->required();
  gen_cmd->add_option("--n", gen.n, "Star leaves (lp-lb) or vertex count (usp)");
  gen_cmd->add_option("--m", gen.m, "Clique size or grid side");
  gen_cmd->add_option("--k", gen.k, "Leaves per clique vertex or flank depth");
  gen_cmd->add_option("--b", gen.b, "Bit length for labeling instances")->capture_default_str();
  gen_cmd->add_option("--mode", gen.mode, "deterministic | random")
    ->check(CLI::IsMember({"deterministic", "random"}))
    ->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed, "Seed for every random choice")->capture_default_str();
  gen_cmd->add_option("--eps", gen.eps, "Tie tolerance for random weight mode");
  gen_cmd->add_option("--margin", gen.margin, "usp: required shortest-path margin")->capture_default_str();
  gen_cmd->add_option("--edge-probability", gen.edge_probability, "usp: edge probability (default 2 ceil(log2 n)/n)");
  gen_cmd->add_option("--denominator-bits", gen.denominator_bits, "usp: weight denominator 2^bits (0 = auto)");
  gen_cmd->add_option("--min-weight", gen.min_weight, "usp: smallest edge weight after rescaling (0 disables)")
    ->capture_default_str();
  gen_cmd->add_option("--max-attempts", gen.max_attempts, "usp: resampling limit")->capture_default_str();
  gen_cmd->add_flag("--small-scale", gen.small_scale, "labeling-clique: allow m, k < 10");

  ValidateArgs validate;
  auto* val_cmd = app.add_subcommand("validate", "Check consistency, admissibility and sub-additivity");
  validate.graph.add(val_cmd);
  validate.heuristic.add(val_cmd);
  val_cmd->add_option("--triples", validate.triples, "Sampled triples when n > 30")->capture_default_str();
  val_cmd->add_option("--triple-seed", validate.triple_seed, "Seed for sampled triples")->capture_default_str();
  val_cmd->add_option("--show", validate.show, "Violations listed per check")->capture_default_str();
  val_cmd->add_option("--out", validate.out, "Output directory");

  OverheadArgs overhead;
  auto* ovh_cmd = app.add_subcommand("overhead", "Measure the additive scan overhead");
  overhead.graph.add(ovh_cmd);
  overhead.heuristic.add(ovh_cmd);
  overhead.pairs.add(ovh_cmd);
  ovh_cmd->add_option("--mode", overhead.mode, "optimal | policy")
    ->check(CLI::IsMember({"optimal", "policy"}))
    ->capture_default_str();
  ovh_cmd->add_option("--tie", overhead.tie, "fifo | lifo | min-h | max-dist (policy mode)")
    ->check(CLI::IsMember({"fifo", "lifo", "min-h", "max-dist"}))
    ->capture_default_str();
  ovh_cmd->add_option("--workers", overhead.workers, "Worker threads")->capture_default_str();
  ovh_cmd->add_option("--out", overhead.out, "Output directory");

  AuditArgs audit;
  auto* aud_cmd = app.add_subcommand("audit", "Crucial-coordinate audit of an l-infinity embedding");
  audit.graph.add(aud_cmd);
  aud_cmd->add_option("--embedding", audit.embedding_file, "Embedding file")->required();
  aud_cmd->add_option("--family", audit.family, "Query family of the instance (default: all pairs u < v)");
  aud_cmd->add_option("--slack", audit.slack, "Crucial-coordinate slack");
  aud_cmd->add_option("--slack-param", audit.slack_param, "Take the slack from this instance parameter");
  aud_cmd->add_option("--bad-threshold", audit.bad_threshold, "Also count bad pairs at this threshold");
  aud_cmd->add_option("--bad-threshold-param", audit.bad_threshold_param, "Bad-pair threshold from an instance parameter");
  aud_cmd->add_option("--out", audit.out, "Output directory");

  ConvertArgs convert;
  auto* cnv_cmd = app.add_subcommand("convert", "Convert between grid documents and edge-list graphs");
  cnv_cmd->add_option("--grid", convert.grid_in, "Grid document to convert to a graph");
  cnv_cmd->add_option("--graph-out", convert.graph_out, "Graph file to write");
  cnv_cmd->add_option("--cells-out", convert.cells_out, "Vertex-to-cell map to write");
  cnv_cmd->add_option("--graph-in", convert.graph_in, "Graph file to convert to a grid");
  cnv_cmd->add_option("--cells", convert.cells_in, "Vertex-to-cell map (vertex x y per line)");
  cnv_cmd->add_option("--anchor", convert.anchor, "Weight of the first cell in each component")->capture_default_str();
  cnv_cmd->add_option("--grid-out", convert.grid_out, "Grid document to write");

  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::ParseError& e)
  {
    const int code = app.exit(e);
    return code == 0 ? kOk : kParameterError;
  }

  try
  {
    if (*gen_cmd)
      return cmd_gen(gen, argc, argv);
    if (*val_cmd)
      return cmd_validate(validate, argc, argv);
    if (*ovh_cmd)
      return cmd_overhead(overhead, argc, argv);
    if (*aud_cmd)
      return cmd_audit(audit, argc, argv);
    return cmd_convert(convert, argc, argv);
  }
  catch (const ParameterError& e)
  {
    std::cerr << "error: " << e.what() << '\n';
    return kParameterError;
  }
  catch (const IoError& e)
  {
    std::cerr << "error: " << e.what() << '\n';
    return kIoError;
  }
  catch (const std::ios_base::failure& e)
  {
    std::cerr << "error: " << e.what() << '\n';
    return kIoError;
  }
  catch (const GraphError& e)
  {
    std::cerr << "error: invalid graph: " << e.what() << '\n';
    return kValidationFailure;
  }
  catch (const AnalysisError& e)
  {
    std::cerr << "error: " << e.what() << '\n';
    return kValidationFailure;
  }
  catch (const std::invalid_argument& e)
  {
    std::cerr << "error: " << e.what() << '\n';
    return kParameterError;
  }
  catch (const std::exception& e)
  {
    std::cerr << "error: " << e.what() << '\n';
    return kValidationFailure;
  }
}

namespace {

/// `rerun --config DIR/config.json` replays the recorded arguments, which
/// are resolved against the current directory.
int rerun(int argc, char** argv)
{
  CLI::App app{"Replay a recorded run"};
  std::string config_path;
  app.add_option("--config", config_path, "config.json written by an earlier run")->required();
  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::ParseError& e)
  {
    const int code = app.exit(e);
    return code == 0 ? kOk : kParameterError;
  }
  std::vector<std::string> args{argv[0]};
  try
  {
    const Json config = Json::parse(read_file(config_path));
    for (const auto& a : config.at("args"))
      args.push_back(a.get<std::string>());
  }
  catch (const IoError& e)
  {
    std::cerr << "error: " << e.what() << '\n';
    return kIoError;
  }
  catch (const Json::exception& e)
  {
    std::cerr << "error: " << config_path << ": " << e.what() << '\n';
    return kParameterError;
  }
  if (args.size() < 2 || args[1] == "rerun")
  {
    std::cerr << "error: " << config_path << " records no replayable command\n";
    return kParameterError;
  }
  std::vector<char*> replay;
  for (auto& a : args)
    replay.push_back(a.data());
  return run(int(replay.size()), replay.data());
}

}  // namespace

int main(int argc, char** argv)
{
  if (argc >= 2 && std::string_view(argv[1]) == "rerun")
    return rerun(argc - 1, argv + 1);
  return run(argc, argv);
}
