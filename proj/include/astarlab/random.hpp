#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace astarlab {

/// Seeded generator with a portable uniform draw. The std distributions are
/// implementation-defined, so instances would differ across standard
/// libraries; this one only relies on mt19937_64's specified output.
class Rng
{
public:
  explicit Rng(std::uint64_t seed) : _engine(seed) {}

  std::uint64_t next() { return _engine(); }

  /// Uniform in [0, bound). bound must be positive.
  std::uint64_t below(std::uint64_t bound);

  /// Uniform in [lo, hi].
  std::uint64_t between(std::uint64_t lo, std::uint64_t hi) { return lo + below(hi - lo + 1); }

  /// True with probability num/den.
  bool chance(std::uint64_t num, std::uint64_t den) { return below(den) < num; }

private:
  std::mt19937_64 _engine;
};

/// Uniform sample of `size` distinct values from [0, n), in draw order.
/// Throws std::invalid_argument when size > n.
std::vector<std::uint32_t> sample_without_replacement(std::uint32_t n, std::uint32_t size, Rng& rng);

}  // namespace astarlab
