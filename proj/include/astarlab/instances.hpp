#pragma once

#include "astarlab/graph.hpp"
#include "astarlab/grid.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace astarlab {

using VertexPair = std::pair<Vertex, Vertex>;

/// A lazily enumerated list of (s, t) queries.
struct QueryFamily
{
  std::string name;
  std::size_t count = 0;
  std::function<VertexPair(std::size_t)> at;

  std::vector<VertexPair> materialize() const;
};

/// Generated graph plus the named vertex sets and query lists that the
/// construction's arguments refer to.
struct InstanceBundle
{
  std::string family;
  Graph graph;
  std::optional<GridSpec> grid;
  std::optional<GridGraph> grid_graph;
  std::map<std::string, std::vector<Vertex>> families;
  std::vector<QueryFamily> queries;
  /// Everything needed to regenerate; rationals are "p/q" strings.
  nlohmann::ordered_json params;

  const QueryFamily& query_family(const std::string& name) const;
};

enum class WeightMode
{
  Deterministic,  ///< u_idx = 9^(idx-1) / 9^N, eps = 9^-N
  SeededRandom,   ///< u uniform with 30-bit denominators, tie-checked against eps
};

const char* to_string(WeightMode mode);
WeightMode parse_weight_mode(const std::string& name);

// ---------------------------------------------------------------------------
// Star-with-bit-pairs instance (unweighted, constant diameter).

/// Vertex numbering: c_0..c_n, then (a_i, abar_i) for i = 1..bits, then per
/// i the block a_{i,0}, a_{i,1..n}, b_{i,1..n}, abar_{i,1..n}.
struct LpLayout
{
  std::size_t n = 0;     ///< star leaves, a power of two
  std::size_t bits = 0;  ///< log2 n

  std::size_t vertex_count() const { return n + 1 + 2 * bits + bits * (3 * n + 1); }
  Vertex c(std::size_t j) const { return Vertex(j); }
  Vertex a(std::size_t i) const { return Vertex(n + 1 + 2 * (i - 1)); }
  Vertex abar(std::size_t i) const { return Vertex(n + 2 + 2 * (i - 1)); }
  Vertex hub(std::size_t i) const { return Vertex(block(i)); }
  Vertex a_leaf(std::size_t i, std::size_t j) const { return Vertex(block(i) + j); }
  Vertex connector(std::size_t i, std::size_t j) const { return Vertex(block(i) + n + j); }
  Vertex abar_leaf(std::size_t i, std::size_t j) const { return Vertex(block(i) + 2 * n + j); }

  /// Bit i (1-based, least significant first) of j - 1.
  static bool bit(std::size_t j, std::size_t i) { return ((j - 1) >> (i - 1)) & 1u; }

private:
  std::size_t block(std::size_t i) const { return n + 1 + 2 * bits + (i - 1) * (3 * n + 1); }
};

InstanceBundle gen_lp_lb(std::size_t n);

// ---------------------------------------------------------------------------
// Clique-with-leaves instances.

/// a_i is vertex i-1 (i = 1..m); leaf b_i^p is m + (i-1)k + (p-1).
struct CliqueLayout
{
  std::size_t m = 0;
  std::size_t k = 0;

  std::size_t vertex_count() const { return m + m * k; }
  Vertex a(std::size_t i) const { return Vertex(i - 1); }
  Vertex leaf(std::size_t i, std::size_t p) const { return Vertex(m + (i - 1) * k + (p - 1)); }
  /// Index (1-based) of the clique pair i < j in row-major order.
  std::size_t pair_index(std::size_t i, std::size_t j) const;
  std::size_t pair_count() const { return m * (m - 1) / 2; }
};

/// w_ij = 10 + u_ij on the clique, leaves at w_0 = eps / (16 |V|).
/// Random mode requires eps and rejects weights with an approximated tie.
InstanceBundle gen_linf_clique(std::size_t m, std::size_t k, WeightMode mode,
                               std::uint64_t seed = 0, std::optional<Weight> eps = std::nullopt);

/// The N clique offsets u_1..u_N of the deterministic scheme and its eps.
std::vector<Weight> base9_offsets(std::size_t count);
Weight base9_eps(std::size_t count);

using DeltaMatrix = std::vector<std::vector<long>>;

/// w_ij = 6 (2^b + delta_ij) - 2 on the clique, unit leaf edges. delta is a
/// symmetric m x m matrix (diagonal ignored) with entries in [0, 2^b - 1].
/// m, k >= 10 unless small_scale is set.
InstanceBundle gen_labeling_clique(std::size_t m, std::size_t k, unsigned b,
                                   const DeltaMatrix& delta, bool small_scale = false);

DeltaMatrix random_delta(std::size_t m, unsigned b, std::uint64_t seed);

/// Calls fn once per m-tuple (b_1^{p_1}, ..., b_m^{p_m}); k^m calls.
void for_each_leaf_tuple(const CliqueLayout& layout, const std::function<void(std::span<const Vertex>)>& fn);

// ---------------------------------------------------------------------------
// Grid instances: R = [0,m-1]^2, right flank x in [-k,-1], lower flank
// y in [-k,-1]. x grows leftward, y upward.

struct GridLayout
{
  std::size_t m = 0;
  std::size_t k = 0;

  std::size_t vertex_count() const { return m * m + 2 * m * k; }
};

/// Flank rows (right) and flank columns (lower) are cut from each other so
/// each reaches R only through its gateway cell.
std::set<CellPair> grid_obstacles(const GridLayout& layout);

InstanceBundle gen_linf_grid(std::size_t m, std::size_t k, WeightMode mode,
                             std::uint64_t seed = 0, std::optional<Weight> eps = std::nullopt);

/// delta on [0,m-1]^2 whose sums along each up-then-right path from
/// (i,0) to (0,j) equal x[i*m + j]. delta[x][y].
DeltaMatrix delta_from_x(const std::vector<long>& x, std::size_t m);

/// Sum of delta over the up-then-right cell path (i,0) -> (i,j) -> (0,j).
long path_delta(const DeltaMatrix& delta, std::size_t i, std::size_t j);

std::vector<long> random_x(std::size_t m, unsigned b, std::uint64_t seed);

/// Cell weights (n - x) n^4 + delta n - 2k on R, 1 on the flanks.
InstanceBundle gen_labeling_grid(std::size_t m, std::size_t k, unsigned b, const std::vector<long>& x);

/// Reads Delta(i,j) back from dist(v_{i,0}, v_{0,j}) of a labeling grid.
long recover_path_delta(const InstanceBundle& bundle, std::size_t i, std::size_t j);

/// Calls fn once per 2m-tuple (a_0..a_{m-1}, b_0..b_{m-1}) with
/// a_i in {v_{i,-p}} and b_j in {v_{-q,j}}; k^(2m) calls.
void for_each_flank_tuple(const GridGraph& gg, const GridLayout& layout,
                          const std::function<void(std::span<const Vertex>)>& fn);

// ---------------------------------------------------------------------------
// Random graphs with unique shortest paths.

struct UspOptions
{
  std::size_t n = 0;
  Weight edge_probability;       ///< numerator and denominator must fit 63 bits
  unsigned denominator_bits = 0; ///< 0 picks the smallest D = 2^bits >= n^5
  Weight margin = 3;
  /// Lower bound on every edge weight after rescaling; 0 disables it.
  Weight min_weight = 1;
  std::uint64_t seed = 0;
  std::size_t max_attempts = 32;
};

/// Default edge probability min(1, 2 ceil(log2 n) / n).
Weight default_edge_probability(std::size_t n);

/// Erdos-Renyi graph with weights k/D, k uniform in [1, D n]; resampled when
/// disconnected or when some pair has two shortest paths; then every weight
/// is multiplied by one factor: (margin + 1) / realized_margin if the margin
/// falls short, raised further if some edge is lighter than min_weight.
InstanceBundle gen_random_usp(const UspOptions& options);

// ---------------------------------------------------------------------------
// Bundle directory: graph.txt, manifest.json, families.txt, queries.txt and
// grid.json for grid instances.

void write_bundle(const InstanceBundle& bundle, const std::filesystem::path& dir);
InstanceBundle read_bundle(const std::filesystem::path& dir);

}  // namespace astarlab
