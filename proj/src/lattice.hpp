#pragma once

// Scaled-integer view of exact rationals for bulk kernels. Every value is
// multiplied by a common denominator L; when all scaled values (and the sums
// the kernel forms) stay well inside int64, comparisons on the integers are
// exactly the rational comparisons.

#include "astarlab/weight.hpp"

#include <algorithm>
#include <cstdint>
#include <exception>
#include <span>
#include <thread>
#include <vector>

namespace astarlab::detail {

/// Scaled magnitudes stay below this so that sums of four of them fit.
constexpr std::int64_t kLatticeLimit = std::int64_t(1) << 60;

inline void include_denominator(mpz_class& lcm, const Weight& w)
{
  mpz_lcm(lcm.get_mpz_t(), lcm.get_mpz_t(), w.get_den_mpz_t());
}

/// Appends w * scale for each value; false when one leaves the lattice
/// limit (out is then unspecified).
inline bool to_lattice(std::span<const Weight> values, const mpz_class& scale, std::vector<std::int64_t>& out)
{
  mpz_class tmp;
  out.reserve(out.size() + values.size());
  for (const auto& w : values)
  {
    tmp = scale / w.get_den();
    tmp *= w.get_num();
    if (!tmp.fits_slong_p())
      return false;
    const long x = tmp.get_si();
    if (x >= kLatticeLimit || x <= -kLatticeLimit)
      return false;
    out.push_back(x);
  }
  return true;
}

/// Runs fn(i) for i in [0, count) on up to `workers` threads, striding.
template <typename Fn>
void parallel_for(std::size_t count, unsigned workers, Fn&& fn)
{
  if (workers <= 1 || count < 2)
  {
    for (std::size_t i = 0; i < count; ++i)
      fn(i);
    return;
  }
  const unsigned used = static_cast<unsigned>(std::min<std::size_t>(workers, count));
  std::vector<std::thread> threads;
  std::vector<std::exception_ptr> errors(used);
  threads.reserve(used);
  for (unsigned w = 0; w < used; ++w)
    threads.emplace_back([&, w] {
      try
      {
        for (std::size_t i = w; i < count; i += used)
          fn(i);
      }
      catch (...)
      {
        errors[w] = std::current_exception();
      }
    });
  for (auto& t : threads)
    t.join();
  for (auto& e : errors)
    if (e)
      std::rethrow_exception(e);
}

}  // namespace astarlab::detail
