#include "astarlab/analysis.hpp"

#include "astarlab/random.hpp"
#include "lattice.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace astarlab {

using detail::parallel_for;

namespace {

bool ancestor_or_self(const std::vector<EulerSpan>& euler, Vertex a, Vertex b)
{
  return a == b || is_ancestor(euler[a], euler[b]);
}

/// h(., t) for all vertices, rational families only.
std::vector<Weight> rational_column(const HeuristicSpec& h, Vertex t, std::size_t n)
{
  std::vector<Weight> col(n);
  for (Vertex u = 0; u < n; ++u)
    col[u] = evaluate_exact(h, u, t);
  return col;
}

std::vector<Magnitude> magnitude_column(const HeuristicSpec& h, Vertex t, std::size_t n)
{
  std::vector<Magnitude> col;
  col.reserve(n);
  for (Vertex u = 0; u < n; ++u)
    col.push_back(evaluate(h, u, t));
  return col;
}

std::vector<Vertex> all_vertices(std::size_t n)
{
  std::vector<Vertex> out(n);
  std::iota(out.begin(), out.end(), Vertex(0));
  return out;
}

/// Exact distances for the requested sources, computed once each.
class DistanceCache
{
public:
  explicit DistanceCache(const Graph& g) : _g(g) {}

  const Weight& operator()(Vertex s, Vertex t)
  {
    auto it = _rows.find(s);
    if (it == _rows.end())
      it = _rows.emplace(s, dijkstra(_g, s).dist).first;
    return it->second[t];
  }

private:
  const Graph& _g;
  std::map<Vertex, std::vector<Weight>> _rows;
};

}  // namespace

// ---------------------------------------------------------------------------
// Validators

std::vector<ConsistencyViolation> check_consistency(
  const Graph& g, const HeuristicSpec& h, const std::vector<Vertex>& targets)
{
  check_dimensions(h, g.size());
  std::vector<ConsistencyViolation> out;
  const auto n = g.size();
  for (Vertex t : targets)
  {
    if (t >= n)
      throw std::out_of_range("target " + std::to_string(t) + " out of range");
    if (is_rational(h))
    {
      const auto col = rational_column(h, t, n);
      if (sgn(col[t]) != 0)
        out.push_back({t, t, t, Magnitude(Weight(-col[t]))});
      Weight slack;
      for (Vertex u = 0; u < n; ++u)
        for (const auto& a : g.neighbors(u))
        {
          slack = a.w + col[a.to] - col[u];
          if (sgn(slack) < 0)
            out.push_back({u, a.to, t, Magnitude(slack)});
        }
    }
    else
    {
      const auto col = magnitude_column(h, t, n);
      if (col[t].sign() != 0)
        out.push_back({t, t, t, -col[t]});
      for (Vertex u = 0; u < n; ++u)
        for (const auto& a : g.neighbors(u))
        {
          Magnitude slack = Magnitude(a.w) + col[a.to] - col[u];
          if (slack.sign() < 0)
            out.push_back({u, a.to, t, std::move(slack)});
        }
    }
  }
  return out;
}

std::vector<ConsistencyViolation> check_consistency(const Graph& g, const HeuristicSpec& h)
{
  return check_consistency(g, h, all_vertices(g.size()));
}

std::vector<AdmissibilityViolation> check_admissibility(
  const Graph& g, const HeuristicSpec& h, const std::vector<VertexPair>& pairs)
{
  check_dimensions(h, g.size());
  DistanceCache dist(g);
  std::vector<AdmissibilityViolation> out;
  for (const auto& [s, t] : pairs)
  {
    Magnitude excess = evaluate(h, s, t) - Magnitude(dist(s, t));
    if (excess.sign() > 0)
      out.push_back({s, t, std::move(excess)});
  }
  return out;
}

std::vector<AdmissibilityViolation> check_admissibility(const Graph& g, const HeuristicSpec& h)
{
  std::vector<VertexPair> pairs;
  for (Vertex s = 0; s < g.size(); ++s)
    for (Vertex t = 0; t < g.size(); ++t)
      pairs.emplace_back(s, t);
  return check_admissibility(g, h, pairs);
}

std::vector<SubadditivityViolation> check_subadditivity(
  const HeuristicSpec& h, const std::vector<VertexTriple>& triples)
{
  std::vector<SubadditivityViolation> out;
  for (const auto& [u, v, w] : triples)
  {
    Magnitude deficit = evaluate(h, u, w) - evaluate(h, u, v) - evaluate(h, v, w);
    if (deficit.sign() > 0)
      out.push_back({u, v, w, std::move(deficit)});
  }
  return out;
}

std::vector<SubadditivityViolation> check_subadditivity(const HeuristicSpec& h, std::size_t n)
{
  check_dimensions(h, n);
  std::vector<SubadditivityViolation> out;
  if (is_rational(h))
  {
    // Tabulate once; n^3 lookups instead of n^3 evaluations.
    std::vector<Weight> table(n * n);
    for (Vertex u = 0; u < n; ++u)
      for (Vertex v = 0; v < n; ++v)
        table[u * n + v] = evaluate_exact(h, u, v);
    Weight deficit;
    for (Vertex u = 0; u < n; ++u)
      for (Vertex v = 0; v < n; ++v)
        for (Vertex w = 0; w < n; ++w)
        {
          deficit = table[u * n + w] - table[u * n + v] - table[v * n + w];
          if (sgn(deficit) > 0)
            out.push_back({u, v, w, Magnitude(deficit)});
        }
    return out;
  }
  std::vector<VertexTriple> triples;
  for (Vertex u = 0; u < n; ++u)
    for (Vertex v = 0; v < n; ++v)
      for (Vertex w = 0; w < n; ++w)
        triples.emplace_back(u, v, w);
  return check_subadditivity(h, triples);
}

// ---------------------------------------------------------------------------
// Overhead

std::string PairSource::describe() const
{
  switch (kind)
  {
    case Kind::AllPairs: return "all-pairs";
    case Kind::Sampled: return "sampled(seed=" + std::to_string(seed) + ",count=" + std::to_string(count) + ")";
    case Kind::Listed: return "listed(count=" + std::to_string(pairs.size()) + ")";
  }
  return "?";
}

std::vector<VertexPair> PairSource::resolve(std::size_t n) const
{
  std::vector<VertexPair> out;
  switch (kind)
  {
    case Kind::AllPairs:
      for (Vertex s = 0; s < n; ++s)
        for (Vertex t = 0; t < n; ++t)
          if (s != t)
            out.emplace_back(s, t);
      break;
    case Kind::Sampled:
    {
      if (n < 2)
        throw std::invalid_argument("sampling pairs needs at least two vertices");
      Rng rng(seed);
      while (out.size() < count)
      {
        const auto s = static_cast<Vertex>(rng.below(n));
        const auto t = static_cast<Vertex>(rng.below(n));
        if (s != t)
          out.emplace_back(s, t);
      }
      break;
    }
    case Kind::Listed:
      for (const auto& [s, t] : pairs)
      {
        if (s >= n || t >= n)
          throw std::out_of_range("pair (" + std::to_string(s) + "," + std::to_string(t) + ") out of range");
        if (s != t)
          out.emplace_back(s, t);
      }
      break;
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string OverheadMode::describe() const
{
  return optimal ? "optimal" : std::string("policy:") + to_string(policy);
}

namespace {

/// Counts u with d_s[u] + h_t[u] < d_s[t] outside P(s,t).
template <typename T>
std::size_t extra_must(const T* ds, const T* ht, std::size_t n, Vertex t,
                       const std::vector<EulerSpan>& euler)
{
  std::size_t count = 0;
  const T& target = ds[t];
  if constexpr (std::is_same_v<T, std::int64_t>)
  {
    for (Vertex u = 0; u < n; ++u)
      if (ds[u] + ht[u] < target && !ancestor_or_self(euler, u, t))
        ++count;
  }
  else
  {
    T key;
    for (Vertex u = 0; u < n; ++u)
    {
      key = ds[u] + ht[u];
      if (key < target && !ancestor_or_self(euler, u, t))
        ++count;
    }
  }
  return count;
}

template <typename T>
bool consistent_column(const Graph& g, const T* ht, Vertex t, const std::vector<T>& arc_w)
{
  if (ht[t] != 0)
    return false;
  std::size_t arc = 0;
  for (Vertex u = 0; u < g.size(); ++u)
    for (const auto& a : g.neighbors(u))
      if (arc_w[arc++] + ht[a.to] < ht[u])
        return false;
  return true;
}

struct SourceTree
{
  MaxHopTree tree;
  std::vector<EulerSpan> euler;
};

}  // namespace

OverheadReport measure_overhead(const Graph& g, const HeuristicSpec& h, const PairSource& source,
                                OverheadMode mode, const OverheadOptions& options)
{
  check_dimensions(h, g.size());
  const auto n = g.size();
  OverheadReport report;
  report.mode = mode;
  report.pair_source = source.describe();
  report.n = n;
  const auto pairs = source.resolve(n);
  report.records.resize(pairs.size());

  std::vector<Vertex> sources, targets;
  for (const auto& [s, t] : pairs)
  {
    sources.push_back(s);
    targets.push_back(t);
  }
  for (auto* v : {&sources, &targets})
  {
    std::sort(v->begin(), v->end());
    v->erase(std::unique(v->begin(), v->end()), v->end());
  }
  std::vector<std::size_t> source_slot(n, 0), target_slot(n, 0);
  for (std::size_t i = 0; i < sources.size(); ++i)
    source_slot[sources[i]] = i;
  for (std::size_t i = 0; i < targets.size(); ++i)
    target_slot[targets[i]] = i;

  std::vector<SourceTree> trees(sources.size());
  parallel_for(sources.size(), options.workers, [&](std::size_t i) {
    trees[i].tree = max_hop_tree(g, sources[i]);
    trees[i].euler = euler_tour(trees[i].tree.parent, sources[i]);
  });

  auto fill = [&](std::size_t idx, std::size_t scanned_or_extra, bool extra) {
    const auto [s, t] = pairs[idx];
    const auto& tree = trees[source_slot[s]].tree;
    PairRecord& rec = report.records[idx];
    rec.s = s;
    rec.t = t;
    rec.path_vertices = tree.hops[t] + 1;
    if (extra)
    {
      rec.overhead = static_cast<long>(scanned_or_extra);
      rec.scanned = rec.path_vertices + scanned_or_extra;
    }
    else
    {
      rec.scanned = scanned_or_extra;
      rec.overhead = static_cast<long>(rec.scanned) - static_cast<long>(rec.path_vertices);
    }
  };

  if (mode.optimal && is_rational(h))
  {
    std::vector<std::vector<Weight>> cols(targets.size());
    parallel_for(targets.size(), options.workers, [&](std::size_t i) {
      cols[i] = rational_column(h, targets[i], n);
    });
    std::vector<Weight> arc_weights;
    for (Vertex u = 0; u < n; ++u)
      for (const auto& a : g.neighbors(u))
        arc_weights.push_back(a.w);

    mpz_class scale = 1;
    for (const auto& st : trees)
      for (const auto& d : st.tree.dist)
        detail::include_denominator(scale, d);
    for (const auto& col : cols)
      for (const auto& x : col)
        detail::include_denominator(scale, x);
    for (const auto& w : arc_weights)
      detail::include_denominator(scale, w);

    std::vector<std::int64_t> dist_lat, col_lat, arc_lat;
    bool fits = detail::to_lattice(arc_weights, scale, arc_lat);
    for (std::size_t i = 0; fits && i < trees.size(); ++i)
      fits = detail::to_lattice(trees[i].tree.dist, scale, dist_lat);
    for (std::size_t i = 0; fits && i < cols.size(); ++i)
      fits = detail::to_lattice(cols[i], scale, col_lat);

    if (!options.assume_consistent)
    {
      for (std::size_t i = 0; i < targets.size(); ++i)
      {
        const bool ok = fits ? consistent_column(g, col_lat.data() + i * n, targets[i], arc_lat)
                             : consistent_column(g, cols[i].data(), targets[i], arc_weights);
        if (!ok)
          throw AnalysisError("heuristic " + describe(h) + " is not consistent toward target "
            + std::to_string(targets[i]) + "; the optimal scan count needs a consistent heuristic");
      }
    }

    parallel_for(pairs.size(), options.workers, [&](std::size_t idx) {
      const auto [s, t] = pairs[idx];
      const auto si = source_slot[s];
      const auto ti = target_slot[t];
      const std::size_t extra = fits
        ? extra_must(dist_lat.data() + si * n, col_lat.data() + ti * n, n, t, trees[si].euler)
        : extra_must(trees[si].tree.dist.data(), cols[ti].data(), n, t, trees[si].euler);
      fill(idx, extra, true);
    });
  }
  else if (mode.optimal)
  {
    if (!options.assume_consistent && !check_consistency(g, h, targets).empty())
      throw AnalysisError("heuristic " + describe(h)
        + " is not consistent; the optimal scan count needs a consistent heuristic");
    parallel_for(pairs.size(), options.workers, [&](std::size_t idx) {
      const auto [s, t] = pairs[idx];
      const auto& st = trees[source_slot[s]];
      const Magnitude target(st.tree.dist[t]);
      std::size_t extra = 0;
      for (Vertex u = 0; u < n; ++u)
        if ((Magnitude(st.tree.dist[u]) + evaluate(h, u, t)) < target && !ancestor_or_self(st.euler, u, t))
          ++extra;
      fill(idx, extra, true);
    });
  }
  else
  {
    parallel_for(pairs.size(), options.workers, [&](std::size_t idx) {
      const auto [s, t] = pairs[idx];
      fill(idx, astar(g, s, t, h, mode.policy).pops, false);
    });
  }

  long total = 0;
  for (const auto& r : report.records)
    total += r.overhead;
  report.total = total;
  if (!report.records.empty())
    report.mean = report.total / Weight(static_cast<long>(report.records.size()));
  if (source.kind == PairSource::Kind::AllPairs && n > 0)
    report.mean_with_diagonal = report.total / Weight(static_cast<long>(n * n));
  if (source.kind == PairSource::Kind::Sampled && !report.records.empty())
    report.half_width = static_cast<double>(n)
      * std::sqrt(std::log(2.0 / 0.05) / (2.0 * static_cast<double>(report.records.size())));
  return report;
}

std::string overhead_csv(const OverheadReport& report)
{
  std::ostringstream out;
  out << "# astarlab overhead csv v1; mode=" << report.mode.describe()
      << "; pairs=" << report.pair_source << "\n";
  out << "s,t,scanned,path_vertices,overhead\n";
  for (const auto& r : report.records)
    out << r.s << ',' << r.t << ',' << r.scanned << ',' << r.path_vertices << ',' << r.overhead << '\n';
  return out.str();
}

std::string overhead_summary(const OverheadReport& report)
{
  std::ostringstream out;
  out << "mode: " << report.mode.describe() << '\n';
  out << "pair_source: " << report.pair_source << '\n';
  out << "vertices: " << report.n << '\n';
  out << "pairs: " << report.records.size() << '\n';
  out << "total_overhead: " << format_weight(report.total) << '\n';
  out << "mean_overhead_excluding_diagonal: " << format_weight(report.mean)
      << " (~" << approx_weight(report.mean) << ")\n";
  if (report.mean_with_diagonal)
    out << "mean_overhead_including_diagonal: " << format_weight(*report.mean_with_diagonal)
        << " (~" << approx_weight(*report.mean_with_diagonal) << ")\n";
  if (report.half_width)
    out << "hoeffding_half_width_95: " << *report.half_width << '\n';
  return out.str();
}

// ---------------------------------------------------------------------------
// Approximated ties

namespace {

struct HalfEntry
{
  std::uint64_t combo;  ///< base-(2B+1) digits, digit value + bound
  std::uint32_t l1;
};

/// Every combination of one half, as parallel arrays (sum, entry).
template <typename T>
void enumerate_half(const std::vector<T>& w, std::size_t lo, std::size_t hi, int bound,
                    std::vector<T>& sums, std::vector<HalfEntry>& entries)
{
  const std::uint64_t radix = 2 * bound + 1;
  sums.assign(1, T(0));
  entries.assign(1, HalfEntry{0, 0});
  std::uint64_t place = 1;
  for (std::size_t i = lo; i < hi; ++i, place *= radix)
  {
    const auto prev = sums.size();
    std::vector<T> next_sums;
    std::vector<HalfEntry> next_entries;
    next_sums.reserve(prev * radix);
    next_entries.reserve(prev * radix);
    for (int c = -bound; c <= bound; ++c)
      for (std::size_t j = 0; j < prev; ++j)
      {
        next_sums.push_back(sums[j] + T(c) * w[i]);
        next_entries.push_back({entries[j].combo + std::uint64_t(c + bound) * place,
                                entries[j].l1 + std::uint32_t(std::abs(c))});
      }
    sums = std::move(next_sums);
    entries = std::move(next_entries);
  }
}

template <typename T>
T abs_value(const T& x)
{
  return x < T(0) ? T(-x) : x;
}

struct BestCombo
{
  bool found = false;
  std::uint64_t combo_a = 0, combo_b = 0;
  std::uint32_t l1 = 0;
};

/// Minimizes (|sum|, L1) over nonzero combinations by meet in the middle.
template <typename T>
BestCombo minimum_combination(const std::vector<T>& w, int bound, T& best_value)
{
  const std::size_t half = w.size() / 2;
  std::vector<T> sa, sb;
  std::vector<HalfEntry> ea, eb;
  enumerate_half(w, 0, half, bound, sa, ea);
  enumerate_half(w, half, w.size(), bound, sb, eb);

  std::vector<std::size_t> order(sb.size());
  std::iota(order.begin(), order.end(), std::size_t(0));
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    if (sb[x] != sb[y])
      return sb[x] < sb[y];
    return eb[x].l1 < eb[y].l1;
  });
  std::vector<T> sorted(sb.size());
  for (std::size_t i = 0; i < order.size(); ++i)
    sorted[i] = sb[order[i]];

  // Zero combo of a half is the one with all digits at `bound`.
  std::uint64_t zero_a = 0, zero_b = 0;
  {
    const std::uint64_t radix = 2 * bound + 1;
    std::uint64_t place = 1;
    for (std::size_t i = 0; i < half; ++i, place *= radix)
      zero_a += std::uint64_t(bound) * place;
    place = 1;
    for (std::size_t i = half; i < w.size(); ++i, place *= radix)
      zero_b += std::uint64_t(bound) * place;
  }

  BestCombo best;
  T value;
  auto consider = [&](std::size_t ia, std::size_t pos) {
    const auto ib = order[pos];
    if (ea[ia].combo == zero_a && eb[ib].combo == zero_b)
      return false;
    value = abs_value(T(sa[ia] + sorted[pos]));
    const std::uint32_t l1 = ea[ia].l1 + eb[ib].l1;
    if (!best.found || value < best_value || (value == best_value && l1 < best.l1))
    {
      best = {true, ea[ia].combo, eb[ib].combo, l1};
      best_value = value;
    }
    return true;
  };

  for (std::size_t ia = 0; ia < sa.size(); ++ia)
  {
    const T goal = -sa[ia];
    const auto pos = static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), goal) - sorted.begin());
    // Nearest from above (skipping the all-zero pair), then nearest below.
    std::size_t up = pos;
    while (up < sorted.size() && !consider(ia, up))
      ++up;
    // Equal sums sort by L1, so the first of a run at the same value is best;
    // walk back to the start of the run just below goal.
    if (pos > 0)
    {
      std::size_t down = pos - 1;
      while (down > 0 && sorted[down - 1] == sorted[down])
        --down;
      std::size_t k = down;
      while (k < pos && !consider(ia, k))
        ++k;
    }
  }
  return best;
}

std::vector<int> decode(std::uint64_t combo, std::size_t digits, int bound)
{
  const std::uint64_t radix = 2 * bound + 1;
  std::vector<int> out(digits);
  for (std::size_t i = 0; i < digits; ++i, combo /= radix)
    out[i] = int(combo % radix) - bound;
  return out;
}

/// Recognizes w_i = z_i + 9^e_i / 9^N (integer z_i, distinct e_i in [0,N))
/// and returns a certified lower bound on |sum c_i w_i| over nonzero c in
/// {-4..4}^N.
std::optional<Weight> base9_gap(const std::vector<Weight>& weights)
{
  const std::size_t count = weights.size();
  mpz_class top;
  mpz_ui_pow_ui(top.get_mpz_t(), 9, count);
  std::set<unsigned long> exps;
  std::optional<mpz_class> common_z;
  bool equal_z = true;
  bool unit_digit_integral = false;  // the weight with e = 0 has z != 0
  for (const auto& w : weights)
  {
    mpz_class z;
    mpz_fdiv_q(z.get_mpz_t(), w.get_num_mpz_t(), w.get_den_mpz_t());
    const Weight frac_scaled = (w - Weight(z)) * Weight(top);
    if (frac_scaled.get_den() != 1)
      return std::nullopt;
    mpz_class digit = frac_scaled.get_num();
    unsigned long e = 0;
    while (digit > 1 && digit % 9 == 0)
    {
      digit /= 9;
      ++e;
    }
    if (digit != 1 || e >= count || !exps.insert(e).second)
      return std::nullopt;
    if (e == 0)
      unit_digit_integral = z != 0;
    if (!common_z)
      common_z = z;
    else if (*common_z != z)
      equal_z = false;
  }
  // sum |c_i| u_i <= 4 (9^N - 1) / (8 9^N) < 1/2, so a nonzero integer part
  // keeps |sum| > 1/2. With zero integer part the fractional sum is a
  // nonzero balanced base-9 numeral times 9^-N; when all z_i are equal and
  // nonzero the coefficients also sum to zero, so that numeral is a nonzero
  // multiple of 8 (9 = 1 mod 8). Otherwise the numeral is +-1 only for the
  // single coefficient +-1 on the e = 0 weight, whose integer part is then
  // +-z, so a nonzero z there lifts the bound to 2 units.
  const Weight unit = Weight(1) / Weight(top);
  Weight gap = (equal_z && common_z && *common_z != 0) ? Weight(8) * unit
             : unit_digit_integral                     ? Weight(2) * unit
                                                       : unit;
  return std::min(gap, Weight(1, 2));
}

}  // namespace

std::optional<TieCertificate> detect_approximated_tie(
  const std::vector<Weight>& weights, const Weight& eps, const TieSearchOptions& options)
{
  if (weights.empty())
    return std::nullopt;
  if (options.bound < 1)
    throw std::invalid_argument("coefficient bound must be positive");
  if (weights.size() > options.exhaustive_limit)
  {
    const auto gap = options.bound <= 4 ? base9_gap(weights) : std::nullopt;
    if (gap && eps < *gap)
      return std::nullopt;
    throw std::invalid_argument("approximated-tie search over " + std::to_string(weights.size())
      + " weights exceeds the exhaustive limit of " + std::to_string(options.exhaustive_limit)
      + " and no base-9 certificate applies at this eps");
  }

  mpz_class scale = 1;
  for (const auto& w : weights)
    detail::include_denominator(scale, w);
  detail::include_denominator(scale, eps);
  // Sums of up to N terms of size bound*|w|: keep the per-term magnitude
  // small enough that no partial sum overflows.
  std::vector<std::int64_t> lat;
  bool fits = detail::to_lattice(weights, scale, lat);
  if (fits)
    for (auto x : lat)
      if (std::abs(x) > detail::kLatticeLimit / (options.bound * std::int64_t(weights.size()) + 1))
        fits = false;

  BestCombo best;
  Weight best_value;
  if (fits)
  {
    std::int64_t v = 0;
    best = minimum_combination(lat, options.bound, v);
    best_value = Weight(v) / Weight(scale);
  }
  else
    best = minimum_combination(weights, options.bound, best_value);

  if (!best.found || best_value > eps)
    return std::nullopt;
  const std::size_t half = weights.size() / 2;
  auto a = decode(best.combo_a, half, options.bound);
  auto b = decode(best.combo_b, weights.size() - half, options.bound);
  TieCertificate cert;
  cert.coefficients = std::move(a);
  cert.coefficients.insert(cert.coefficients.end(), b.begin(), b.end());
  // Canonical sign: first nonzero coefficient positive.
  for (int c : cert.coefficients)
    if (c != 0)
    {
      if (c < 0)
        for (int& x : cert.coefficients)
          x = -x;
      break;
    }
  for (std::size_t i = 0; i < cert.coefficients.size(); ++i)
    if (cert.coefficients[i] != 0)
      cert.indices.push_back(i);
  cert.value = best_value;
  if (!verify_tie_certificate(weights, eps, cert, options.bound))
    throw std::logic_error("approximated-tie certificate failed re-verification");
  return cert;
}

bool verify_tie_certificate(const std::vector<Weight>& weights, const Weight& eps,
                            const TieCertificate& cert, int bound)
{
  if (cert.coefficients.size() != weights.size())
    return false;
  bool nonzero = false;
  Weight sum = 0;
  for (std::size_t i = 0; i < weights.size(); ++i)
  {
    const int c = cert.coefficients[i];
    if (c < -bound || c > bound)
      return false;
    nonzero |= c != 0;
    sum += Weight(c) * weights[i];
  }
  if (sgn(sum) < 0)
    sum = -sum;
  return nonzero && sum == cert.value && sum <= eps;
}

// ---------------------------------------------------------------------------
// Crucial-coordinate audit

namespace {

class UnionFind
{
public:
  Vertex find(Vertex v)
  {
    auto it = _parent.find(v);
    if (it == _parent.end())
    {
      _parent.emplace(v, v);
      return v;
    }
    if (it->second == v)
      return v;
    const Vertex root = find(it->second);
    _parent[v] = root;
    return root;
  }

  bool unite(Vertex a, Vertex b)
  {
    a = find(a);
    b = find(b);
    if (a == b)
      return false;
    _parent[a] = b;
    return true;
  }

private:
  std::map<Vertex, Vertex> _parent;
};

/// Vertex path from a to b in a forest given as adjacency map.
std::vector<Vertex> forest_path(const std::map<Vertex, std::vector<Vertex>>& adj, Vertex a, Vertex b)
{
  std::map<Vertex, Vertex> prev;
  std::vector<Vertex> frontier{a};
  prev[a] = a;
  for (std::size_t i = 0; i < frontier.size(); ++i)
  {
    const Vertex v = frontier[i];
    if (v == b)
      break;
    const auto it = adj.find(v);
    if (it == adj.end())
      continue;
    for (Vertex w : it->second)
      if (!prev.count(w))
      {
        prev[w] = v;
        frontier.push_back(w);
      }
  }
  std::vector<Vertex> path;
  for (Vertex v = b;; v = prev.at(v))
  {
    path.push_back(v);
    if (v == a)
      break;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

Weight abs_diff(const Weight& a, const Weight& b)
{
  Weight d = a - b;
  if (sgn(d) < 0)
    d = -d;
  return d;
}

CycleCertificate make_certificate(const Graph& g, const Embedding& emb, std::size_t coord,
                                  std::vector<Vertex> cycle, const Weight& slack)
{
  CycleCertificate cert;
  cert.coordinate = coord;
  cert.cycle = std::move(cycle);
  DistanceCache dist(g);
  const auto l = cert.cycle.size();
  cert.signed_sum = 0;
  for (std::size_t j = 0; j < l; ++j)
  {
    const Vertex u = cert.cycle[j], v = cert.cycle[(j + 1) % l];
    const int s = cmp(emb.coord(v, coord), emb.coord(u, coord)) < 0 ? -1 : 1;
    cert.signs.push_back(s);
    cert.signed_sum += Weight(s) * dist(u, v);
  }
  cert.bound = Weight(static_cast<long>(l)) * slack;
  return cert;
}

}  // namespace

bool verify_cycle_certificate(const Graph& g, const Embedding& emb, const CycleCertificate& cert)
{
  const auto l = cert.cycle.size();
  if (l < 3 || cert.signs.size() != l || cert.coordinate >= emb.dim())
    return false;
  std::set<Vertex> seen(cert.cycle.begin(), cert.cycle.end());
  if (seen.size() != l)
    return false;
  DistanceCache dist(g);
  Weight sum = 0;
  for (std::size_t j = 0; j < l; ++j)
  {
    const Vertex u = cert.cycle[j], v = cert.cycle[(j + 1) % l];
    const int s = cmp(emb.coord(v, cert.coordinate), emb.coord(u, cert.coordinate)) < 0 ? -1 : 1;
    if (s != cert.signs[j])
      return false;
    sum += Weight(s) * dist(u, v);
  }
  if (sum != cert.signed_sum)
    return false;
  return abs(sum) <= cert.bound;
}

AuditReport audit_crucial_coordinates(const Graph& g, const Embedding& emb,
                                      const std::vector<VertexPair>& pairs, const Weight& slack)
{
  if (emb.size() != g.size())
    throw std::invalid_argument("embedding covers " + std::to_string(emb.size())
      + " vertices but the graph has " + std::to_string(g.size()));
  AuditReport report;
  report.slack = slack;
  report.crucial.resize(emb.dim());
  report.pairs = pairs.size();
  DistanceCache dist(g);

  std::vector<UnionFind> forests(emb.dim());
  std::vector<std::map<Vertex, std::vector<Vertex>>> forest_adj(emb.dim());
  std::vector<std::set<VertexPair>> edges(emb.dim());
  std::vector<std::vector<Vertex>> first_cycle(emb.dim());

  for (const auto& [u, v] : pairs)
  {
    const Weight need = dist(u, v) - slack;
    bool any = false;
    for (std::size_t i = 0; i < emb.dim(); ++i)
    {
      if (abs_diff(emb.coord(u, i), emb.coord(v, i)) < need)
        continue;
      any = true;
      report.crucial[i].emplace_back(u, v);
      const VertexPair key = std::minmax(u, v);
      if (u == v || !edges[i].insert(key).second)
        continue;
      if (forests[i].unite(u, v))
      {
        forest_adj[i][u].push_back(v);
        forest_adj[i][v].push_back(u);
      }
      else if (first_cycle[i].empty())
        first_cycle[i] = forest_path(forest_adj[i], u, v);
    }
    if (!any)
      report.distorted.emplace_back(u, v);
  }

  for (std::size_t i = 0; i < emb.dim() && !report.cycle; ++i)
  {
    if (first_cycle[i].size() < 3)
      continue;
    auto cert = make_certificate(g, emb, i, first_cycle[i], slack);
    if (verify_cycle_certificate(g, emb, cert))
      report.cycle = std::move(cert);
  }
  return report;
}

std::string audit_csv(const AuditReport& report)
{
  std::ostringstream out;
  out << "# astarlab audit csv v1; slack=" << format_weight(report.slack) << "\n";
  out << "coordinate,crucial_pairs\n";
  for (std::size_t i = 0; i < report.crucial.size(); ++i)
    out << i << ',' << report.crucial[i].size() << '\n';
  return out.str();
}

std::string audit_summary(const AuditReport& report)
{
  std::ostringstream out;
  out << "slack: " << format_weight(report.slack) << '\n';
  out << "pairs: " << report.pairs << '\n';
  out << "coordinates: " << report.crucial.size() << '\n';
  std::size_t max_load = 0;
  for (const auto& c : report.crucial)
    max_load = std::max(max_load, c.size());
  out << "max_crucial_pairs_per_coordinate: " << max_load << '\n';
  out << "distorted_pairs: " << report.distorted.size() << '\n';
  if (report.cycle)
  {
    const auto& c = *report.cycle;
    out << "cycle_certificate: coordinate " << c.coordinate << ", vertices";
    for (Vertex v : c.cycle)
      out << ' ' << v;
    out << ", signed_sum " << format_weight(c.signed_sum) << ", bound " << format_weight(c.bound) << '\n';
  }
  else
    out << "cycle_certificate: none\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// Bad pairs

BadPairReport count_bad_pairs(const Graph& g, const HeuristicSpec& h,
                              const std::vector<VertexPair>& pairs, const Weight& threshold)
{
  check_dimensions(h, g.size());
  BadPairReport report;
  report.threshold = threshold;
  report.pairs = pairs.size();
  DistanceCache dist(g);
  for (const auto& [u, v] : pairs)
    if (evaluate(h, u, v) < Magnitude(Weight(dist(u, v) - threshold)))
      report.bad.emplace_back(u, v);
  return report;
}

// ---------------------------------------------------------------------------
// Unique shortest path margin

namespace {

/// Lower bound on the second simple path for every pair s < t:
/// min over arcs u->v not on P(s,t) of d(s,u) + w + d(v,t), minus d(s,t).
/// Entries without any such arc stay unset.
template <typename T>
void deviation_bounds(const Graph& g, const std::vector<ShortestPathTree>& trees,
                      const std::vector<T>& dist, const std::vector<T>& arc_w,
                      std::vector<std::pair<T, VertexPair>>& out)
{
  const auto n = g.size();
  std::vector<Vertex> arc_from, arc_to;
  for (Vertex u = 0; u < n; ++u)
    for (const auto& a : g.neighbors(u))
    {
      arc_from.push_back(u);
      arc_to.push_back(a.to);
    }
  T cand, best;
  for (Vertex s = 0; s < n; ++s)
  {
    const auto& tree = trees[s];
    const T* ds = dist.data() + std::size_t(s) * n;
    for (Vertex t = s + 1; t < n; ++t)
    {
      const T* dt = dist.data() + std::size_t(t) * n;
      bool have = false;
      for (std::size_t a = 0; a < arc_from.size(); ++a)
      {
        const Vertex u = arc_from[a], v = arc_to[a];
        // Tree edge parent->child lies on P(s,t) iff the child is an
        // ancestor-or-self of t.
        if (tree.parent[v] == u && v != s && ancestor_or_self(tree.euler, v, t))
          continue;
        if (tree.parent[u] == v && u != s && ancestor_or_self(tree.euler, u, t))
          continue;
        cand = ds[u] + arc_w[a];
        cand += dt[v];
        if (!have || cand < best)
        {
          best = cand;
          have = true;
        }
      }
      if (have)
      {
        best -= ds[t];
        out.emplace_back(best, VertexPair{s, t});
      }
    }
  }
}

}  // namespace

MarginReport verify_usp_margin(const Graph& g, const Weight& c)
{
  const auto n = g.size();
  MarginReport report;
  report.required = c;

  std::vector<ShortestPathTree> trees;
  trees.reserve(n);
  for (Vertex s = 0; s < n; ++s)
    trees.push_back(dijkstra(g, s));

  std::vector<Weight> dist, arc_w;
  dist.reserve(n * n);
  for (const auto& t : trees)
    dist.insert(dist.end(), t.dist.begin(), t.dist.end());
  mpz_class scale = 1;
  for (Vertex u = 0; u < n; ++u)
    for (const auto& a : g.neighbors(u))
    {
      arc_w.push_back(a.w);
      detail::include_denominator(scale, a.w);
    }

  // Candidate pairs ordered by their lower bound, as exact rationals.
  std::vector<std::pair<Weight, VertexPair>> order;
  std::vector<std::int64_t> dist_lat, arc_lat;
  if (detail::to_lattice(dist, scale, dist_lat) && detail::to_lattice(arc_w, scale, arc_lat))
  {
    std::vector<std::pair<std::int64_t, VertexPair>> lat;
    deviation_bounds(g, trees, dist_lat, arc_lat, lat);
    order.reserve(lat.size());
    for (const auto& [b, p] : lat)
      order.emplace_back(Weight(b) / Weight(scale), p);
  }
  else
    deviation_bounds(g, trees, dist, arc_w, order);
  std::stable_sort(order.begin(), order.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });

  for (const auto& [bound, pair] : order)
  {
    if (report.min_margin && bound >= *report.min_margin)
      break;
    const auto second = second_shortest_simple_path(g, pair.first, pair.second);
    if (!second)
      continue;
    Weight margin = *second - trees[pair.first].dist[pair.second];
    if (!report.min_margin || margin < *report.min_margin)
    {
      report.min_margin = std::move(margin);
      report.witness = pair;
    }
  }
  report.pass = !report.min_margin || *report.min_margin > c;
  return report;
}

}  // namespace astarlab
