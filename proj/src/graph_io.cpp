#include "astarlab/graph_io.hpp"

#include <fstream>
#include <sstream>
#include <vector>

namespace astarlab {

namespace {

std::vector<std::string> tokenize(std::string_view line)
{
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size())
  {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r'))
      ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r')
      ++j;
    if (j > i)
      out.emplace_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::uint64_t parse_count(const std::string& tok, std::size_t line_no)
{
  if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos
      || tok.size() > 18)
    throw GraphError(GraphError::Kind::Malformed,
      "line " + std::to_string(line_no) + ": expected a non-negative integer, got '" + tok + "'");
  return std::stoull(tok);
}

}  // namespace

Graph parse_graph(std::string_view text)
{
  using K = GraphError::Kind;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;

  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos <= text.size())
  {
    const auto nl = text.find('\n', pos);
    auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    auto toks = tokenize(line);
    if (!toks.empty())
    {
      rows.push_back(std::move(toks));
      line_numbers.push_back(line_no);
    }
    if (nl == std::string_view::npos)
      break;
    pos = nl + 1;
  }

  if (rows.empty())
    throw GraphError(K::Malformed, "empty graph file");
  if (rows[0].size() != 2)
    throw GraphError(K::Malformed, "line " + std::to_string(line_numbers[0]) + ": header must be 'n m'");
  const auto n = parse_count(rows[0][0], line_numbers[0]);
  const auto m = parse_count(rows[0][1], line_numbers[0]);
  if (rows.size() - 1 != m)
    throw GraphError(K::Malformed,
      "header declares " + std::to_string(m) + " edges but file has " + std::to_string(rows.size() - 1));

  std::vector<Edge> edges;
  edges.reserve(m);
  for (std::size_t r = 1; r < rows.size(); ++r)
  {
    const auto& row = rows[r];
    if (row.size() != 3)
      throw GraphError(K::Malformed, "line " + std::to_string(line_numbers[r]) + ": expected 'u v p/q'");
    Edge e{static_cast<Vertex>(parse_count(row[0], line_numbers[r])),
           static_cast<Vertex>(parse_count(row[1], line_numbers[r])), Weight(0)};
    try
    {
      e.w = parse_weight(row[2]);
    }
    catch (const std::invalid_argument& err)
    {
      throw GraphError(K::BadRational, "line " + std::to_string(line_numbers[r]) + ": " + err.what());
    }
    edges.push_back(std::move(e));
  }
  return Graph::build(n, std::move(edges));
}

std::string serialize_graph(const Graph& g)
{
  std::ostringstream out;
  out << g.size() << ' ' << g.edge_count() << '\n';
  for (const auto& e : g.edges())
    out << e.u << ' ' << e.v << ' ' << format_weight(e.w) << '\n';
  return out.str();
}

Graph load_graph_file(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw std::ios_base::failure("cannot open graph file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_graph(buf.str());
}

void save_graph_file(const Graph& g, const std::string& path)
{
  std::ofstream out(path);
  if (!out)
    throw std::ios_base::failure("cannot write graph file: " + path);
  out << serialize_graph(g);
}

}  // namespace astarlab
