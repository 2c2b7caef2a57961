#pragma once

#include "astarlab/heuristics.hpp"
#include "astarlab/instances.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace astarlab {

class AnalysisError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Heuristic validators. Violations are data; each carries its exact slack.

/// Edge (u,v) toward target t with w(u,v) + h(v,t) - h(u,t) < 0, or
/// u == v == t with h(t,t) != 0 (slack = -h(t,t)).
struct ConsistencyViolation
{
  Vertex u, v, t;
  Magnitude slack;
};

std::vector<ConsistencyViolation> check_consistency(
  const Graph& g, const HeuristicSpec& h, const std::vector<Vertex>& targets);
/// All targets.
std::vector<ConsistencyViolation> check_consistency(const Graph& g, const HeuristicSpec& h);

/// h(s,t) > dist(s,t); excess = h - dist > 0.
struct AdmissibilityViolation
{
  Vertex s, t;
  Magnitude excess;
};

std::vector<AdmissibilityViolation> check_admissibility(
  const Graph& g, const HeuristicSpec& h, const std::vector<VertexPair>& pairs);
/// All ordered pairs.
std::vector<AdmissibilityViolation> check_admissibility(const Graph& g, const HeuristicSpec& h);

/// h(u,v) + h(v,w) < h(u,w); deficit = h(u,w) - h(u,v) - h(v,w) > 0.
struct SubadditivityViolation
{
  Vertex u, v, w;
  Magnitude deficit;
};

using VertexTriple = std::tuple<Vertex, Vertex, Vertex>;

std::vector<SubadditivityViolation> check_subadditivity(
  const HeuristicSpec& h, const std::vector<VertexTriple>& triples);
/// All ordered triples over n vertices.
std::vector<SubadditivityViolation> check_subadditivity(const HeuristicSpec& h, std::size_t n);

// ---------------------------------------------------------------------------
// Additive scan overhead.

struct PairSource
{
  enum class Kind
  {
    AllPairs,  ///< ordered pairs s != t
    Sampled,   ///< `count` pairs s != t drawn with replacement from `seed`
    Listed,
  };

  Kind kind = Kind::AllPairs;
  std::uint64_t seed = 0;
  std::size_t count = 0;
  std::vector<VertexPair> pairs;

  static PairSource all() { return {}; }
  static PairSource sampled(std::uint64_t seed, std::size_t count) { return {Kind::Sampled, seed, count, {}}; }
  static PairSource listed(std::vector<VertexPair> pairs) { return {Kind::Listed, 0, 0, std::move(pairs)}; }

  std::string describe() const;
  std::vector<VertexPair> resolve(std::size_t n) const;
};

/// Optimal: |must ∪ P(s,t)| - p(s,t), the scan count of the best tie
/// breaking. Policy: |scanned by astar under `policy`| - p(s,t).
struct OverheadMode
{
  bool optimal = true;
  TieBreak policy = TieBreak::Fifo;

  static OverheadMode best() { return {}; }
  static OverheadMode with_policy(TieBreak tie) { return {false, tie}; }

  std::string describe() const;
};

struct PairRecord
{
  Vertex s = 0;
  Vertex t = 0;
  std::size_t scanned = 0;
  std::size_t path_vertices = 0;  ///< p(s,t)
  long overhead = 0;
};

struct OverheadReport
{
  OverheadMode mode;
  std::string pair_source;
  std::vector<PairRecord> records;  ///< sorted by (s, t)
  Weight total = 0;
  Weight mean = 0;                  ///< total / records, s == t excluded
  std::optional<Weight> mean_with_diagonal;  ///< total / n^2, all-pairs only
  std::optional<double> half_width;          ///< sampled only, 95% Hoeffding
  std::size_t n = 0;

  std::size_t pairs() const { return records.size(); }
};

struct OverheadOptions
{
  unsigned workers = 1;
  /// Skip the consistency precheck of the optimal mode.
  bool assume_consistent = false;
};

/// Throws AnalysisError when the optimal mode is asked for an inconsistent
/// heuristic (checked on every target of the pair set).
OverheadReport measure_overhead(const Graph& g, const HeuristicSpec& h, const PairSource& source,
                                OverheadMode mode, const OverheadOptions& options = {});

/// Per-pair rows, with a versioned header comment.
std::string overhead_csv(const OverheadReport& report);
std::string overhead_summary(const OverheadReport& report);

// ---------------------------------------------------------------------------
// Approximated ties: small integer combinations of weights close to zero.

struct TieCertificate
{
  std::vector<int> coefficients;
  Weight value;  ///< |sum c_i w_i|
  std::vector<std::size_t> indices;  ///< positions with c_i != 0
};

struct TieSearchOptions
{
  int bound = 4;
  std::size_t exhaustive_limit = 12;
};

/// A certificate iff some c in {-bound..bound}^N, c != 0, has
/// |sum c_i w_i| <= eps. Meet-in-the-middle up to exhaustive_limit weights;
/// beyond that only weights of the form z_i + 9^e_i / 9^N (distinct e_i) are
/// accepted, decided analytically. Otherwise throws std::invalid_argument.
std::optional<TieCertificate> detect_approximated_tie(
  const std::vector<Weight>& weights, const Weight& eps, const TieSearchOptions& options = {});

/// Recomputes |sum c_i w_i| and checks the certificate's claims.
bool verify_tie_certificate(const std::vector<Weight>& weights, const Weight& eps,
                            const TieCertificate& cert, int bound = 4);

// ---------------------------------------------------------------------------
// Crucial coordinates of an l-infinity embedding.

/// A cycle u_0 .. u_{l-1} in one coordinate's crucial-pair graph. With
/// sigma_j = sign(pi(u_{j+1}) - pi(u_j)) (0 counts as +1), the signed sum
/// sum sigma_j dist(u_j, u_{j+1}) telescopes against the embedding, so it is
/// at most l * slack in absolute value whenever pi is admissible.
struct CycleCertificate
{
  std::size_t coordinate = 0;
  std::vector<Vertex> cycle;
  std::vector<int> signs;
  Weight signed_sum;
  Weight bound;
};

struct AuditReport
{
  Weight slack;
  std::vector<std::vector<VertexPair>> crucial;  ///< per coordinate
  std::vector<VertexPair> distorted;             ///< no crucial coordinate
  std::optional<CycleCertificate> cycle;
  std::size_t pairs = 0;
};

/// Coordinate i is crucial for (u,v) when |pi_i(u) - pi_i(v)| >= dist(u,v) - slack.
AuditReport audit_crucial_coordinates(const Graph& g, const Embedding& emb,
                                      const std::vector<VertexPair>& pairs, const Weight& slack);

/// Exact recomputation of a cycle certificate against g and emb.
bool verify_cycle_certificate(const Graph& g, const Embedding& emb, const CycleCertificate& cert);

std::string audit_csv(const AuditReport& report);
std::string audit_summary(const AuditReport& report);

// ---------------------------------------------------------------------------
// Bad pairs: h(u,v) < dist(u,v) - threshold.

struct BadPairReport
{
  Weight threshold;
  std::vector<VertexPair> bad;
  std::size_t pairs = 0;

  std::size_t count() const { return bad.size(); }
};

BadPairReport count_bad_pairs(const Graph& g, const HeuristicSpec& h,
                              const std::vector<VertexPair>& pairs, const Weight& threshold);

// ---------------------------------------------------------------------------
// Unique shortest paths with margin.

struct MarginReport
{
  bool pass = true;
  Weight required;
  /// Smallest second_shortest_simple_path - dist over pairs that have a
  /// second simple path; nullopt when no pair has one (e.g. trees).
  std::optional<Weight> min_margin;
  VertexPair witness{0, 0};
};

/// Passes iff every pair's margin exceeds c. Uses an edge-deviation lower
/// bound to skip pairs, then exact deviation search on the rest, so the
/// reported minimum is exact.
MarginReport verify_usp_margin(const Graph& g, const Weight& c);

}  // namespace astarlab
