#pragma once

#include "astarlab/weight.hpp"

#include <compare>
#include <string>
#include <vector>

namespace astarlab {

/// coeff * power_sum^(1/p); produced by finite-p norm heuristics with p >= 2.
struct RootTerm
{
  Weight power_sum;
  unsigned p = 2;
  long coeff = 1;

  bool operator==(const RootTerm&) const = default;
};

/// A rational plus a (usually empty) sum of p-th roots of rationals.
///
/// When every term is rational, comparison is plain exact rational
/// comparison. Otherwise identical root terms are cancelled first and the
/// remainder is decided with outward-rounded MPFR intervals whose precision
/// doubles until the sign is certain. If the interval still straddles zero
/// at max_precision_bits and lies within tie_gap of zero, the two sides are
/// reported equal.
class Magnitude
{
public:
  Magnitude() = default;
  Magnitude(Weight value) : _rational(std::move(value)) {}
  Magnitude(long value) : _rational(value) {}

  /// power_sum^(1/p); folds to an exact rational when power_sum is a perfect
  /// p-th power. tie_gap is the smallest gap the caller guarantees between
  /// distinct keys.
  static Magnitude root(const Weight& power_sum, unsigned p, const Weight& tie_gap = Weight(0));

  bool is_exact() const { return _roots.empty(); }

  /// Throws std::logic_error if root terms remain.
  const Weight& exact() const;

  const Weight& rational_part() const { return _rational; }
  const std::vector<RootTerm>& roots() const { return _roots; }
  const Weight& tie_gap() const { return _tie_gap; }

  Magnitude& operator+=(const Magnitude& rhs);
  Magnitude& operator-=(const Magnitude& rhs);
  friend Magnitude operator+(Magnitude a, const Magnitude& b) { return a += b; }
  friend Magnitude operator-(Magnitude a, const Magnitude& b) { return a -= b; }
  Magnitude operator-() const;

  /// Certified three-way comparison, see class comment.
  friend std::strong_ordering operator<=>(const Magnitude& a, const Magnitude& b);
  friend bool operator==(const Magnitude& a, const Magnitude& b)
  {
    return (a <=> b) == std::strong_ordering::equal;
  }

  /// Sign of the value: -1, 0 or +1 (certified as above).
  int sign() const;

  /// Decimal approximation for reports.
  double approx() const;

  /// "p/q" when exact, otherwise "p/q + (s)^(1/p) …".
  std::string to_string() const;

  static constexpr unsigned max_precision_bits = 8192;

private:
  void normalize();

  Weight _rational = 0;
  std::vector<RootTerm> _roots;
  Weight _tie_gap = 0;
};

}  // namespace astarlab
