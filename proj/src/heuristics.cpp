#include "astarlab/heuristics.hpp"

#include "astarlab/random.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>

namespace astarlab {

namespace {

int sign_of(std::int64_t x)
{
  return (x > 0) - (x < 0);
}

int position_penalty(EulerSpan s, EulerSpan t)
{
  const int a = sign_of(std::int64_t(s.open) - std::int64_t(t.open));
  const int b = sign_of(std::int64_t(s.close) - std::int64_t(t.close));
  return std::abs(a + b);
}

Weight linf_distance(std::span<const Weight> a, std::span<const Weight> b)
{
  Weight best = 0;
  Weight diff;
  for (std::size_t i = 0; i < a.size(); ++i)
  {
    diff = a[i] - b[i];
    if (sgn(diff) < 0)
      diff = -diff;
    if (diff > best)
      best = diff;
  }
  return best;
}

Magnitude norm_value(const heuristic::Norm& h, Vertex u, Vertex t)
{
  const auto a = h.emb->row(u);
  const auto b = h.emb->row(t);
  if (h.p == 0)
    return Magnitude(linf_distance(a, b));
  Weight sum = 0;
  Weight diff;
  for (std::size_t i = 0; i < a.size(); ++i)
  {
    diff = a[i] - b[i];
    if (sgn(diff) < 0)
      diff = -diff;
    sum += weight_pow(diff, h.p);
  }
  return Magnitude::root(sum, h.p, h.tie_gap);
}

std::vector<Vertex> check_beacons(const Graph& g, const std::vector<Vertex>& beacons)
{
  if (beacons.empty())
    throw std::invalid_argument("beacon set is empty");
  std::set<Vertex> seen;
  for (Vertex b : beacons)
  {
    if (b >= g.size())
      throw std::invalid_argument("beacon " + std::to_string(b) + " out of range");
    if (!seen.insert(b).second)
      throw std::invalid_argument("beacon " + std::to_string(b) + " listed twice");
  }
  return beacons;
}

Embedding build_embedding(const Graph& g, const std::vector<Vertex>& beacons, bool positions)
{
  check_beacons(g, beacons);
  const auto n = g.size();
  const auto d = beacons.size();
  std::vector<Weight> pi0(n * d);
  std::vector<EulerSpan> pi1;
  if (positions)
    pi1.resize(n * d);
  for (std::size_t i = 0; i < d; ++i)
  {
    auto spt = dijkstra(g, beacons[i]);
    for (Vertex v = 0; v < n; ++v)
    {
      pi0[std::size_t(v) * d + i] = std::move(spt.dist[v]);
      if (positions)
        pi1[std::size_t(v) * d + i] = spt.euler[v];
    }
  }
  if (positions)
    return Embedding(n, d, std::move(pi0), std::move(pi1), beacons);
  return Embedding(n, d, std::move(pi0), std::nullopt, beacons);
}

const Embedding& embedding_of(const HeuristicSpec& h)
{
  if (const auto* b = std::get_if<heuristic::Beacon>(&h))
    return *b->emb;
  if (const auto* t = std::get_if<heuristic::TieBreak>(&h))
    return *t->emb;
  throw std::invalid_argument("label view needs a beacon or tie-break heuristic, got " + describe(h));
}

}  // namespace

Embedding::Embedding(std::size_t n, std::size_t dim, std::vector<Weight> pi0,
                     std::optional<std::vector<EulerSpan>> pi1, std::vector<Vertex> beacon_ids)
: _n(n), _dim(dim), _pi0(std::move(pi0)), _pi1(std::move(pi1)), _beacons(std::move(beacon_ids))
{
  if (_pi0.size() != _n * _dim)
    throw std::invalid_argument("embedding: expected " + std::to_string(_n * _dim)
      + " coordinates, got " + std::to_string(_pi0.size()));
  for (auto& w : _pi0)
    w.canonicalize();
  if (!_beacons.empty() && _beacons.size() != _dim)
    throw std::invalid_argument("embedding: beacon list length differs from dimension");
  if (_pi1)
  {
    if (_pi1->size() != _n * _dim)
      throw std::invalid_argument("embedding: position table has wrong size");
    std::vector<EulerSpan> column(_n);
    for (std::size_t i = 0; i < _dim; ++i)
    {
      for (Vertex v = 0; v < _n; ++v)
        column[v] = (*_pi1)[std::size_t(v) * _dim + i];
      try
      {
        validate_euler_spans(column);
      }
      catch (const std::invalid_argument& e)
      {
        throw std::invalid_argument("embedding coordinate " + std::to_string(i) + ": " + e.what());
      }
    }
  }
}

EulerSpan Embedding::position(Vertex v, std::size_t i) const
{
  if (!_pi1)
    throw std::logic_error("embedding has no Euler positions");
  return (*_pi1)[std::size_t(v) * _dim + i];
}

Embedding build_beacon_embedding(const Graph& g, const std::vector<Vertex>& beacons)
{
  return build_embedding(g, beacons, false);
}

Embedding build_tiebreak_embedding(const Graph& g, const std::vector<Vertex>& beacons)
{
  return build_embedding(g, beacons, true);
}

std::vector<Vertex> sample_beacons(std::size_t n, std::size_t size, std::uint64_t seed)
{
  Rng rng(seed);
  return sample_without_replacement(static_cast<std::uint32_t>(n), static_cast<std::uint32_t>(size), rng);
}

Weight evaluate_tiebreak(const Embedding& emb, Vertex s, Vertex t)
{
  if (!emb.has_positions())
    throw std::invalid_argument("tie-break evaluation needs Euler positions");
  Weight best = 0;
  Weight term;
  for (std::size_t i = 0; i < emb.dim(); ++i)
  {
    term = emb.coord(s, i) - emb.coord(t, i);
    if (sgn(term) < 0)
      term = -term;
    term += position_penalty(emb.position(s, i), emb.position(t, i));
    if (term > best)
      best = term;
  }
  return best;
}

void LabelTable::validate() const
{
  if (length == 0)
    throw std::invalid_argument("label table has zero label length");
  if (labels.size() % length != 0)
    throw std::invalid_argument("label table size is not a multiple of the label length");
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (sgn(labels[i]) < 0 || labels[i] > cap)
      throw std::out_of_range("label entry " + std::to_string(i % length) + " of vertex "
        + std::to_string(i / length) + " is " + format_weight(labels[i])
        + ", outside [0, " + format_weight(cap) + "]");
}

LabelTable::Combiner linf_combiner()
{
  return [](std::span<const Weight> a, std::span<const Weight> b) { return linf_distance(a, b); };
}

LabelTable::Combiner tiebreak_combiner(std::size_t dim)
{
  return [dim](std::span<const Weight> a, std::span<const Weight> b) {
    if (a.size() != 3 * dim || b.size() != 3 * dim)
      throw std::invalid_argument("tie-break label has wrong length");
    Weight best = 0;
    Weight term;
    for (std::size_t i = 0; i < dim; ++i)
    {
      term = a[i] - b[i];
      if (sgn(term) < 0)
        term = -term;
      const int so = cmp(a[dim + 2 * i], b[dim + 2 * i]);
      const int sc = cmp(a[dim + 2 * i + 1], b[dim + 2 * i + 1]);
      term += std::abs((so > 0) - (so < 0) + (sc > 0) - (sc < 0));
      if (term > best)
        best = term;
    }
    return best;
  };
}

LabelTable::Combiner pair_table_combiner(
  std::map<std::pair<std::vector<Weight>, std::vector<Weight>>, Weight> table)
{
  auto shared = std::make_shared<const decltype(table)>(std::move(table));
  return [shared](std::span<const Weight> a, std::span<const Weight> b) {
    const auto key = std::make_pair(std::vector<Weight>(a.begin(), a.end()),
                                    std::vector<Weight>(b.begin(), b.end()));
    const auto it = shared->find(key);
    if (it == shared->end())
      throw std::out_of_range("pair table has no entry for this label pair");
    return it->second;
  };
}

Weight default_label_cap(const Graph& g)
{
  const mpz_class n = static_cast<unsigned long>(g.size());
  const Weight total = g.total_weight();
  mpz_class ceil_total;
  mpz_cdiv_q(ceil_total.get_mpz_t(), total.get_num_mpz_t(), total.get_den_mpz_t());
  return Weight(2 * (n * n * n * n + ceil_total));
}

HeuristicSpec make_exact(const Graph& g)
{
  return heuristic::Exact{std::make_shared<const DistanceTable>(g)};
}

HeuristicSpec make_beacon(const Graph& g, const std::vector<Vertex>& beacons)
{
  return heuristic::Beacon{std::make_shared<const Embedding>(build_beacon_embedding(g, beacons))};
}

HeuristicSpec make_tiebreak(const Graph& g, const std::vector<Vertex>& beacons)
{
  return heuristic::TieBreak{std::make_shared<const Embedding>(build_tiebreak_embedding(g, beacons))};
}

std::string describe(const HeuristicSpec& h)
{
  struct Visitor
  {
    std::string operator()(const heuristic::Zero&) const { return "zero"; }
    std::string operator()(const heuristic::Exact&) const { return "exact"; }
    std::string operator()(const heuristic::Norm& x) const
    {
      return "norm(p=" + (x.p == 0 ? std::string("inf") : std::to_string(x.p))
        + ", d=" + std::to_string(x.emb->dim()) + ")";
    }
    std::string operator()(const heuristic::Beacon& x) const
    {
      return "beacon(d=" + std::to_string(x.emb->dim()) + ")";
    }
    std::string operator()(const heuristic::TieBreak& x) const
    {
      return "tiebreak(d=" + std::to_string(x.emb->dim()) + ")";
    }
    std::string operator()(const heuristic::Labeling& x) const
    {
      return "labeling(L=" + std::to_string(x.table->length) + ", g=" + x.table->combiner_name + ")";
    }
  };
  return std::visit(Visitor{}, h);
}

void check_dimensions(const HeuristicSpec& h, std::size_t n)
{
  std::size_t covered = n;
  if (const auto* e = std::get_if<heuristic::Exact>(&h))
    covered = e->dist->size();
  else if (const auto* x = std::get_if<heuristic::Norm>(&h))
    covered = x->emb->size();
  else if (const auto* b = std::get_if<heuristic::Beacon>(&h))
    covered = b->emb->size();
  else if (const auto* t = std::get_if<heuristic::TieBreak>(&h))
  {
    covered = t->emb->size();
    if (!t->emb->has_positions())
      throw std::invalid_argument("tie-break heuristic needs Euler positions");
  }
  else if (const auto* l = std::get_if<heuristic::Labeling>(&h))
    covered = l->table->size();
  if (covered != n)
    throw std::invalid_argument("heuristic covers " + std::to_string(covered)
      + " vertices but the graph has " + std::to_string(n));
}

Magnitude evaluate(const HeuristicSpec& h, Vertex u, Vertex t)
{
  struct Visitor
  {
    Vertex u, t;
    Magnitude operator()(const heuristic::Zero&) const { return Magnitude(0L); }
    Magnitude operator()(const heuristic::Exact& x) const { return Magnitude((*x.dist)(u, t)); }
    Magnitude operator()(const heuristic::Norm& x) const { return norm_value(x, u, t); }
    Magnitude operator()(const heuristic::Beacon& x) const
    {
      return Magnitude(linf_distance(x.emb->row(u), x.emb->row(t)));
    }
    Magnitude operator()(const heuristic::TieBreak& x) const
    {
      return Magnitude(evaluate_tiebreak(*x.emb, u, t));
    }
    Magnitude operator()(const heuristic::Labeling& x) const
    {
      return Magnitude(x.table->combine(x.table->label(u), x.table->label(t)));
    }
  };
  return std::visit(Visitor{u, t}, h);
}

Weight evaluate_exact(const HeuristicSpec& h, Vertex u, Vertex t)
{
  return evaluate(h, u, t).exact();
}

bool is_rational(const HeuristicSpec& h)
{
  const auto* x = std::get_if<heuristic::Norm>(&h);
  return x == nullptr || x->p <= 1;
}

TargetHeuristic bind_target(const HeuristicSpec& h, Vertex t)
{
  return [&h, t](Vertex u) { return evaluate(h, u, t); };
}

SearchTrace astar(const Graph& g, Vertex s, Vertex t, const HeuristicSpec& h, TieBreak tie)
{
  return astar(g, s, t, bind_target(h, t), tie);
}

ScanSets scan_sets(const Graph& g, Vertex s, Vertex t, const HeuristicSpec& h)
{
  return scan_sets(g, s, t, bind_target(h, t));
}

LabelTable as_label_table(const HeuristicSpec& h, const Weight& cap)
{
  const Embedding& emb = embedding_of(h);
  const bool tiebreak = std::holds_alternative<heuristic::TieBreak>(h);
  if (tiebreak && !emb.has_positions())
    throw std::invalid_argument("tie-break heuristic needs Euler positions");
  const auto d = emb.dim();
  LabelTable table;
  table.length = tiebreak ? 3 * d : d;
  table.cap = cap;
  table.labels.reserve(emb.size() * table.length);
  for (Vertex v = 0; v < emb.size(); ++v)
  {
    for (std::size_t i = 0; i < d; ++i)
      table.labels.push_back(emb.coord(v, i));
    if (tiebreak)
      for (std::size_t i = 0; i < d; ++i)
      {
        table.labels.emplace_back(emb.position(v, i).open);
        table.labels.emplace_back(emb.position(v, i).close);
      }
  }
  table.combine = tiebreak ? tiebreak_combiner(d) : linf_combiner();
  table.combiner_name = tiebreak ? "tiebreak" : "linf";
  table.validate();
  return table;
}

LabelTable as_label_table(const HeuristicSpec& h, const Graph& g)
{
  return as_label_table(h, default_label_cap(g));
}

std::string serialize_embedding(const Embedding& emb)
{
  std::ostringstream out;
  out << emb.size() << ' ' << emb.dim();
  if (emb.has_positions())
    out << " pi1";
  out << '\n';
  if (!emb.beacon_ids().empty())
  {
    out << "beacons";
    for (Vertex b : emb.beacon_ids())
      out << ' ' << b;
    out << '\n';
  }
  for (Vertex v = 0; v < emb.size(); ++v)
  {
    for (std::size_t i = 0; i < emb.dim(); ++i)
      out << (i ? " " : "") << format_weight(emb.coord(v, i));
    if (emb.has_positions())
      for (std::size_t i = 0; i < emb.dim(); ++i)
        out << ' ' << emb.position(v, i).open << ' ' << emb.position(v, i).close;
    out << '\n';
  }
  return out.str();
}

Embedding parse_embedding(const std::string& text)
{
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&](std::string& out) {
    while (std::getline(in, out))
    {
      ++line_no;
      if (const auto hash = out.find('#'); hash != std::string::npos)
        out.erase(hash);
      if (out.find_first_not_of(" \t\r") != std::string::npos)
        return true;
    }
    return false;
  };
  auto fail = [&](const std::string& msg) {
    throw std::invalid_argument("embedding line " + std::to_string(line_no) + ": " + msg);
  };

  if (!next_line(line))
    throw std::invalid_argument("embedding file is empty");
  std::istringstream header(line);
  std::size_t n = 0, d = 0;
  std::string flag, extra;
  if (!(header >> n >> d))
    fail("header must be 'n d' or 'n d pi1'");
  const bool positions = static_cast<bool>(header >> flag);
  if (positions && flag != "pi1")
    fail("unknown header flag '" + flag + "'");
  if (header >> extra)
    fail("trailing header tokens");
  if (d == 0)
    fail("dimension must be positive");

  std::vector<Vertex> beacons;
  std::vector<Weight> pi0;
  std::vector<EulerSpan> pi1;
  pi0.reserve(n * d);
  bool first = true;
  std::size_t rows = 0;
  while (next_line(line))
  {
    std::istringstream row(line);
    std::string tok;
    if (first && line.find("beacons") != std::string::npos)
    {
      row >> tok;
      if (tok != "beacons")
        fail("expected 'beacons' line");
      Vertex b;
      while (row >> b)
        beacons.push_back(b);
      first = false;
      continue;
    }
    first = false;
    if (rows == n)
      fail("more than n vertex lines");
    for (std::size_t i = 0; i < d; ++i)
    {
      if (!(row >> tok))
        fail("expected " + std::to_string(d) + " coordinates");
      try
      {
        pi0.push_back(parse_weight(tok));
      }
      catch (const std::invalid_argument& e)
      {
        fail(e.what());
      }
    }
    if (positions)
      for (std::size_t i = 0; i < d; ++i)
      {
        EulerSpan span;
        if (!(row >> span.open >> span.close))
          fail("expected " + std::to_string(d) + " position pairs");
        pi1.push_back(span);
      }
    if (row >> tok)
      fail("trailing tokens");
    ++rows;
  }
  if (rows != n)
    throw std::invalid_argument("embedding: expected " + std::to_string(n) + " vertex lines, got "
      + std::to_string(rows));
  if (positions)
    return Embedding(n, d, std::move(pi0), std::move(pi1), std::move(beacons));
  return Embedding(n, d, std::move(pi0), std::nullopt, std::move(beacons));
}

}  // namespace astarlab
