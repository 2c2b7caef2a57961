#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

namespace astarlab {

/// Exact edge weight / distance. Always kept in lowest terms with a positive
/// denominator; GMP canonicalizes every arithmetic result, and the parser
/// canonicalizes literals.
using Weight = mpq_class;

/// Parses "p/q" or a bare integer "p". Throws std::invalid_argument on
/// anything else (whitespace, signs on q, q = 0, trailing junk).
Weight parse_weight(std::string_view text);

/// Always "p/q", even when q = 1.
std::string format_weight(const Weight& w);

/// Rough decimal rendering for human-facing summaries only.
std::string approx_weight(const Weight& w, int digits = 6);

Weight weight_pow(const Weight& base, unsigned long exponent);

}  // namespace astarlab
