#include "corrkit/random.hpp"

#include <cmath>

#include "corrkit/errors.hpp"

namespace corrkit {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RandomStream::RandomStream(std::uint64_t seed) {
  root_ = mix64(seed);
  engine_.seed(mix64(root_ ^ 0xa02bdbf7bb3c0a7ULL));
}

RandomStream RandomStream::substream(std::uint64_t stream_id) const {
  RandomStream child;
  child.root_ = mix64(root_ ^ mix64(stream_id + 0x632be59bd9b4e019ULL));
  child.engine_.seed(mix64(child.root_ ^ 0xa02bdbf7bb3c0a7ULL));
  return child;
}

std::uint64_t RandomStream::next_u64() { return engine_(); }

double RandomStream::uniform() {
  // 53-bit mantissa in [0, 1)
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RandomStream::gaussian() {
  if (has_cached_gaussian_) {
    has_cached_gaussian_ = false;
    return cached_gaussian_;
  }
  // Box-Muller on (0,1] x [0,1)
  double u1 = 1.0 - uniform();
  double u2 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double a = 6.283185307179586476925286766559 * u2;
  cached_gaussian_ = r * std::sin(a);
  has_cached_gaussian_ = true;
  return r * std::cos(a);
}

int RandomStream::uniform_int(int n) {
  if (n <= 0) throw ValidationError("uniform_int: n must be positive");
  // rejection sampling for an unbiased draw
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return static_cast<int>(x % bound);
}

}  // namespace corrkit
