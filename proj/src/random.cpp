#include "astarlab/random.hpp"

#include <numeric>
#include <stdexcept>
#include <string>

namespace astarlab {

std::uint64_t Rng::below(std::uint64_t bound)
{
  if (bound == 0)
    throw std::invalid_argument("Rng::below: bound must be positive");
  // Reject the top partial block so every residue is equally likely.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  for (;;)
  {
    const std::uint64_t x = _engine();
    if (x < limit)
      return x % bound;
  }
}

std::vector<std::uint32_t> sample_without_replacement(std::uint32_t n, std::uint32_t size, Rng& rng)
{
  if (size > n)
    throw std::invalid_argument("cannot sample " + std::to_string(size) + " of "
      + std::to_string(n) + " items");
  std::vector<std::uint32_t> pool(n);
  std::iota(pool.begin(), pool.end(), 0u);
  for (std::uint32_t i = 0; i < size; ++i)
  {
    const auto j = i + static_cast<std::uint32_t>(rng.below(n - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(size);
  return pool;
}

}  // namespace astarlab
