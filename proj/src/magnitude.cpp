#include "astarlab/magnitude.hpp"

#include <mpfr.h>

#include <algorithm>
#include <stdexcept>

namespace astarlab {

namespace {

/// RAII wrapper for an mpfr_t.
class Real
{
public:
  explicit Real(mpfr_prec_t prec) { mpfr_init2(_v, prec); }
  ~Real() { mpfr_clear(_v); }
  Real(const Real&) = delete;
  Real& operator=(const Real&) = delete;

  mpfr_ptr get() { return _v; }
  mpfr_srcptr get() const { return _v; }

private:
  mpfr_t _v;
};

/// Exact p-th root of a non-negative rational, if one exists.
bool exact_root(const Weight& x, unsigned p, Weight& out)
{
  if (sgn(x) < 0)
    return false;
  mpz_class num, den;
  if (!mpz_root(num.get_mpz_t(), x.get_num_mpz_t(), p))
    return false;
  if (!mpz_root(den.get_mpz_t(), x.get_den_mpz_t(), p))
    return false;
  out = Weight(num, den);
  out.canonicalize();
  return true;
}

bool term_less(const RootTerm& a, const RootTerm& b)
{
  if (a.p != b.p)
    return a.p < b.p;
  return a.power_sum < b.power_sum;
}

/// Returns -1/0/+1 for the sign of rational + sum(roots), certified.
int certified_sign(const Weight& rational, const std::vector<RootTerm>& roots, const Weight& gap)
{
  if (roots.empty())
    return sgn(rational);

  for (mpfr_prec_t prec = 64;; prec *= 2)
  {
    Real lo(prec), hi(prec), t_lo(prec), t_hi(prec), tmp(prec);
    mpfr_set_q(lo.get(), rational.get_mpq_t(), MPFR_RNDD);
    mpfr_set_q(hi.get(), rational.get_mpq_t(), MPFR_RNDU);
    for (const auto& term : roots)
    {
      mpfr_set_q(t_lo.get(), term.power_sum.get_mpq_t(), MPFR_RNDD);
      mpfr_rootn_ui(t_lo.get(), t_lo.get(), term.p, MPFR_RNDD);
      mpfr_set_q(t_hi.get(), term.power_sum.get_mpq_t(), MPFR_RNDU);
      mpfr_rootn_ui(t_hi.get(), t_hi.get(), term.p, MPFR_RNDU);
      if (term.coeff >= 0)
      {
        mpfr_mul_si(tmp.get(), t_lo.get(), term.coeff, MPFR_RNDD);
        mpfr_add(lo.get(), lo.get(), tmp.get(), MPFR_RNDD);
        mpfr_mul_si(tmp.get(), t_hi.get(), term.coeff, MPFR_RNDU);
        mpfr_add(hi.get(), hi.get(), tmp.get(), MPFR_RNDU);
      }
      else
      {
        mpfr_mul_si(tmp.get(), t_hi.get(), term.coeff, MPFR_RNDD);
        mpfr_add(lo.get(), lo.get(), tmp.get(), MPFR_RNDD);
        mpfr_mul_si(tmp.get(), t_lo.get(), term.coeff, MPFR_RNDU);
        mpfr_add(hi.get(), hi.get(), tmp.get(), MPFR_RNDU);
      }
    }
    if (mpfr_sgn(lo.get()) > 0)
      return 1;
    if (mpfr_sgn(hi.get()) < 0)
      return -1;
    if (sgn(gap) > 0)
    {
      // Distinct values differ by at least gap, so |value| < gap means zero.
      mpfr_set_q(tmp.get(), gap.get_mpq_t(), MPFR_RNDD);
      if (mpfr_cmp(hi.get(), tmp.get()) < 0)
      {
        mpfr_neg(tmp.get(), tmp.get(), MPFR_RNDN);
        if (mpfr_cmp(lo.get(), tmp.get()) > 0)
          return 0;
      }
    }
    // No declared gap: an interval of width 2^-max_precision_bits around zero
    // is treated as a tie.
    if (2 * prec > Magnitude::max_precision_bits)
      return 0;
  }
}

}  // namespace

Magnitude Magnitude::root(const Weight& power_sum, unsigned p, const Weight& tie_gap)
{
  if (p == 0)
    throw std::invalid_argument("root: p must be positive");
  if (sgn(power_sum) < 0)
    throw std::invalid_argument("root: negative power sum");
  Magnitude out;
  out._tie_gap = tie_gap;
  Weight folded;
  if (p == 1)
    out._rational = power_sum;
  else if (exact_root(power_sum, p, folded))
    out._rational = folded;
  else
    out._roots.push_back({power_sum, p, 1});
  return out;
}

const Weight& Magnitude::exact() const
{
  if (!_roots.empty())
    throw std::logic_error("magnitude has irrational root terms: " + to_string());
  return _rational;
}

void Magnitude::normalize()
{
  std::sort(_roots.begin(), _roots.end(), term_less);
  std::vector<RootTerm> merged;
  for (auto& t : _roots)
  {
    if (!merged.empty() && merged.back().p == t.p && merged.back().power_sum == t.power_sum)
      merged.back().coeff += t.coeff;
    else
      merged.push_back(std::move(t));
  }
  std::erase_if(merged, [](const RootTerm& t) { return t.coeff == 0 || sgn(t.power_sum) == 0; });
  _roots = std::move(merged);
}

Magnitude& Magnitude::operator+=(const Magnitude& rhs)
{
  _rational += rhs._rational;
  _roots.insert(_roots.end(), rhs._roots.begin(), rhs._roots.end());
  if (rhs._tie_gap > _tie_gap)
    _tie_gap = rhs._tie_gap;
  if (!rhs._roots.empty())
    normalize();
  return *this;
}

Magnitude& Magnitude::operator-=(const Magnitude& rhs)
{
  return *this += -rhs;
}

Magnitude Magnitude::operator-() const
{
  Magnitude out = *this;
  out._rational = -out._rational;
  for (auto& t : out._roots)
    t.coeff = -t.coeff;
  return out;
}

int Magnitude::sign() const
{
  return certified_sign(_rational, _roots, _tie_gap);
}

std::strong_ordering operator<=>(const Magnitude& a, const Magnitude& b)
{
  int s;
  if (a._roots.empty() && b._roots.empty())
    s = cmp(a._rational, b._rational);
  else
    s = (a - b).sign();
  if (s < 0)
    return std::strong_ordering::less;
  if (s > 0)
    return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

double Magnitude::approx() const
{
  double v = _rational.get_d();
  for (const auto& t : _roots)
  {
    Real r(128);
    mpfr_set_q(r.get(), t.power_sum.get_mpq_t(), MPFR_RNDN);
    mpfr_rootn_ui(r.get(), r.get(), t.p, MPFR_RNDN);
    v += static_cast<double>(t.coeff) * mpfr_get_d(r.get(), MPFR_RNDN);
  }
  return v;
}

std::string Magnitude::to_string() const
{
  std::string out = format_weight(_rational);
  for (const auto& t : _roots)
  {
    out += t.coeff < 0 ? " - " : " + ";
    const long c = t.coeff < 0 ? -t.coeff : t.coeff;
    if (c != 1)
      out += std::to_string(c) + "*";
    out += "(" + format_weight(t.power_sum) + ")^(1/" + std::to_string(t.p) + ")";
  }
  return out;
}

}  // namespace astarlab
