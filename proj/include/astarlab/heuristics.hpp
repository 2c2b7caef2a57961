#pragma once

#include "astarlab/graph.hpp"
#include "astarlab/magnitude.hpp"
#include "astarlab/search.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace astarlab {

/// Per-vertex coordinates pi0 (d rationals) and optional Euler position
/// pairs pi1 (d spans). Row-major: coordinate i of vertex v is at v*d + i.
class Embedding
{
public:
  Embedding(std::size_t n, std::size_t dim, std::vector<Weight> pi0,
            std::optional<std::vector<EulerSpan>> pi1 = std::nullopt,
            std::vector<Vertex> beacon_ids = {});

  std::size_t size() const { return _n; }
  std::size_t dim() const { return _dim; }

  const Weight& coord(Vertex v, std::size_t i) const { return _pi0[std::size_t(v) * _dim + i]; }
  std::span<const Weight> row(Vertex v) const { return {_pi0.data() + std::size_t(v) * _dim, _dim}; }

  bool has_positions() const { return _pi1.has_value(); }
  /// Throws std::logic_error when pi1 is absent.
  EulerSpan position(Vertex v, std::size_t i) const;

  /// Empty when the coordinates are not beacon distances.
  const std::vector<Vertex>& beacon_ids() const { return _beacons; }

  const std::vector<Weight>& pi0() const { return _pi0; }
  const std::optional<std::vector<EulerSpan>>& pi1() const { return _pi1; }

private:
  std::size_t _n;
  std::size_t _dim;
  std::vector<Weight> _pi0;
  std::optional<std::vector<EulerSpan>> _pi1;
  std::vector<Vertex> _beacons;
};

/// pi0[v][i] = dist(v, B[i]); one Dijkstra run per beacon.
Embedding build_beacon_embedding(const Graph& g, const std::vector<Vertex>& beacons);

/// As build_beacon_embedding, plus pi1[v][i] = Euler span of v in the
/// shortest-path tree rooted at B[i].
Embedding build_tiebreak_embedding(const Graph& g, const std::vector<Vertex>& beacons);

/// Seeded uniform sample without replacement. Throws when size > n.
std::vector<Vertex> sample_beacons(std::size_t n, std::size_t size, std::uint64_t seed);

/// max_i ( |pi0_i(s) - pi0_i(t)| + |sign(open_s - open_t) + sign(close_s - close_t)| ).
/// The position term is 0 when s and t are ancestor-related in tree i, else 2.
Weight evaluate_tiebreak(const Embedding& emb, Vertex s, Vertex t);

/// Materialized labeling heuristic: per-vertex label vectors with entries in
/// [0, cap], combined pairwise by `combine`.
struct LabelTable
{
  using Combiner = std::function<Weight(std::span<const Weight>, std::span<const Weight>)>;

  std::size_t length = 0;         ///< L
  Weight cap;                     ///< C
  std::vector<Weight> labels;     ///< n * L, row-major
  Combiner combine;
  std::string combiner_name;

  std::size_t size() const { return length == 0 ? 0 : labels.size() / length; }
  std::span<const Weight> label(Vertex v) const { return {labels.data() + std::size_t(v) * length, length}; }

  /// Throws std::out_of_range naming the first entry outside [0, cap].
  void validate() const;
};

/// max_i |x_i - y_i|.
LabelTable::Combiner linf_combiner();
/// Labels laid out as d values, then d (open, close) pairs; computes the
/// tie-break formula.
LabelTable::Combiner tiebreak_combiner(std::size_t dim);
/// Explicit lookup by the pair of labels; missing pairs throw.
LabelTable::Combiner pair_table_combiner(
  std::map<std::pair<std::vector<Weight>, std::vector<Weight>>, Weight> table);

/// Default value cap for a graph: 2 * (n^4 + ceil(total weight)).
Weight default_label_cap(const Graph& g);

namespace heuristic {

struct Zero
{
};

struct Exact
{
  std::shared_ptr<const DistanceTable> dist;
};

/// ||pi(u) - pi(t)||_p; p == 0 encodes p = infinity.
struct Norm
{
  unsigned p = 0;
  std::shared_ptr<const Embedding> emb;
  Weight tie_gap = 0;  ///< declared minimum gap between distinct keys (finite p >= 2)
};

struct Beacon
{
  std::shared_ptr<const Embedding> emb;
};

struct TieBreak
{
  std::shared_ptr<const Embedding> emb;
};

struct Labeling
{
  std::shared_ptr<const LabelTable> table;
};

}  // namespace heuristic

using HeuristicSpec = std::variant<heuristic::Zero, heuristic::Exact, heuristic::Norm,
                                   heuristic::Beacon, heuristic::TieBreak, heuristic::Labeling>;

HeuristicSpec make_exact(const Graph& g);
HeuristicSpec make_beacon(const Graph& g, const std::vector<Vertex>& beacons);
HeuristicSpec make_tiebreak(const Graph& g, const std::vector<Vertex>& beacons);

std::string describe(const HeuristicSpec& h);

/// Throws std::invalid_argument when h's embedding or table does not cover
/// exactly n vertices.
void check_dimensions(const HeuristicSpec& h, std::size_t n);

/// h(u, t). Exact for every family except Norm with finite p >= 2.
Magnitude evaluate(const HeuristicSpec& h, Vertex u, Vertex t);

/// h(u, t) as a rational; throws std::logic_error when the value is an
/// irrational root.
Weight evaluate_exact(const HeuristicSpec& h, Vertex u, Vertex t);

/// True when every value of h is rational.
bool is_rational(const HeuristicSpec& h);

/// Fixes the target.
TargetHeuristic bind_target(const HeuristicSpec& h, Vertex t);

SearchTrace astar(const Graph& g, Vertex s, Vertex t, const HeuristicSpec& h, TieBreak tie);
ScanSets scan_sets(const Graph& g, Vertex s, Vertex t, const HeuristicSpec& h);

/// Labeling view of a Beacon (L = d) or TieBreak (L = 3d) heuristic.
/// Throws std::invalid_argument for other families and std::out_of_range
/// when an entry exceeds cap.
LabelTable as_label_table(const HeuristicSpec& h, const Weight& cap);
LabelTable as_label_table(const HeuristicSpec& h, const Graph& g);

/// Text format: header "n d" or "n d pi1"; optional "beacons b_1 ... b_d"
/// line; then one line per vertex with d rationals, followed by d
/// "open close" pairs when pi1 is present. '#' starts a comment.
std::string serialize_embedding(const Embedding& emb);
Embedding parse_embedding(const std::string& text);

}  // namespace astarlab
