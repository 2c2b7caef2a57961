#include "astarlab/weight.hpp"

#include <cstdio>
#include <stdexcept>

namespace astarlab {

namespace {

bool is_integer_literal(std::string_view s, bool allow_sign)
{
  if (s.empty())
    return false;
  std::size_t i = 0;
  if (allow_sign && (s[0] == '-' || s[0] == '+'))
    i = 1;
  if (i == s.size())
    return false;
  for (; i < s.size(); ++i)
    if (s[i] < '0' || s[i] > '9')
      return false;
  return true;
}

mpz_class parse_integer(std::string_view s)
{
  std::string buf(s);
  if (!buf.empty() && buf[0] == '+')
    buf.erase(0, 1);
  return mpz_class(buf, 10);
}

}  // namespace

Weight parse_weight(std::string_view text)
{
  const auto slash = text.find('/');
  const auto num_text = text.substr(0, slash);
  if (!is_integer_literal(num_text, true))
    throw std::invalid_argument("bad rational literal: '" + std::string(text) + "'");

  Weight out;
  out.get_num() = parse_integer(num_text);
  if (slash == std::string_view::npos)
  {
    out.get_den() = 1;
    return out;
  }

  const auto den_text = text.substr(slash + 1);
  if (!is_integer_literal(den_text, false))
    throw std::invalid_argument("bad rational literal: '" + std::string(text) + "'");
  mpz_class den = parse_integer(den_text);
  if (den == 0)
    throw std::invalid_argument("zero denominator: '" + std::string(text) + "'");
  out.get_den() = den;
  out.canonicalize();
  return out;
}

std::string format_weight(const Weight& w)
{
  return w.get_num().get_str() + "/" + w.get_den().get_str();
}

std::string approx_weight(const Weight& w, int digits)
{
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, w.get_d());
  return buf;
}

Weight weight_pow(const Weight& base, unsigned long exponent)
{
  Weight out;
  mpz_pow_ui(out.get_num_mpz_t(), base.get_num_mpz_t(), exponent);
  mpz_pow_ui(out.get_den_mpz_t(), base.get_den_mpz_t(), exponent);
  out.canonicalize();
  return out;
}

}  // namespace astarlab
