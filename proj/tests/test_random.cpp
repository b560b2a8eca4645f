#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "corrkit/random.hpp"
#include "doctest.h"

using corrkit::RandomStream;

TEST_CASE("same seed reproduces the full stream") {
  RandomStream a(42), b(42);
  for (int i = 0; i < 1000; ++i) {
    CHECK(a.next_u64() == b.next_u64());
  }
  RandomStream c(42), d(42);
  for (int i = 0; i < 1000; ++i) {
    CHECK(c.gaussian() == d.gaussian());
    CHECK(c.uniform() == d.uniform());
  }
}

TEST_CASE("different seeds give different streams") {
  RandomStream a(1), b(2);
  int same = 0;
  for (int i = 0; i < 64; ++i)
    if (a.next_u64() == b.next_u64()) ++same;
  CHECK(same == 0);
}

TEST_CASE("uniform stays in [0, 1)") {
  RandomStream rng(7);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("uniform_int covers the range uniformly") {
  RandomStream rng(11);
  std::vector<int> counts(6, 0);
  for (int i = 0; i < 60000; ++i) {
    const int v = rng.uniform_int(6);
    REQUIRE(v >= 0);
    REQUIRE(v < 6);
    ++counts[static_cast<size_t>(v)];
  }
  for (int c : counts) CHECK(std::abs(c - 10000) < 500);  // ~5 sigma
}

TEST_CASE("gaussian moments match a standard normal") {
  RandomStream rng(100);
  const int n = 200000;
  double s1 = 0.0, s2 = 0.0, s4 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double g = rng.gaussian();
    s1 += g;
    s2 += g * g;
    s4 += g * g * g * g;
  }
  CHECK(std::abs(s1 / n) < 0.01);
  CHECK(std::abs(s2 / n - 1.0) < 0.02);
  CHECK(std::abs(s4 / n - 3.0) < 0.1);
}

TEST_CASE("substreams are deterministic and decorrelated") {
  RandomStream root(9);
  RandomStream s1 = root.substream(1);
  RandomStream s1_again = root.substream(1);
  RandomStream s2 = root.substream(2);
  bool identical = true, differs = false;
  for (int i = 0; i < 256; ++i) {
    const std::uint64_t a = s1.next_u64();
    if (a != s1_again.next_u64()) identical = false;
    if (a != s2.next_u64()) differs = true;
  }
  CHECK(identical);
  CHECK(differs);
}

TEST_CASE("substream derivation does not consume parent state") {
  RandomStream a(13), b(13);
  (void)a.substream(5);
  (void)a.substream(6);
  CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("nested substreams are stable addresses") {
  RandomStream root(21);
  const std::uint64_t x = root.substream(3).substream(7).next_u64();
  const std::uint64_t y = root.substream(3).substream(7).next_u64();
  CHECK(x == y);
  CHECK(x != root.substream(7).substream(3).next_u64());
}

TEST_CASE("mix64 spreads consecutive inputs") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(corrkit::mix64(i));
  CHECK(seen.size() == 1000);
  CHECK(corrkit::mix64(5) == corrkit::mix64(5));
}
