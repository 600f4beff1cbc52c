#include <algorithm>
#include <numeric>
#include <set>

#include "doctest.h"
#include "prefbench/rng.hpp"

using prefbench::Rng;

TEST_CASE("same seed and keys give the same stream") {
  Rng a(42, {1, 2}), b(42, {1, 2});
  for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
}

TEST_CASE("keys separate streams") {
  Rng a(42, {1, 2}), b(42, {2, 1}), c(43, {1, 2});
  const auto x = a.next();
  CHECK(x != b.next());
  CHECK(x != c.next());
}

TEST_CASE("uniform stays in [0,1) and has the right mean") {
  Rng r(7);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  // sd of the mean is 1/sqrt(12 n) ~ 0.0009
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.005));
}

TEST_CASE("below covers its range without bias") {
  Rng r(3);
  std::vector<int> hist(7, 0);
  for (int i = 0; i < 70000; ++i) ++hist[r.below(7)];
  for (int h : hist) CHECK(std::abs(h - 10000) < 500);
}

TEST_CASE("shuffle is a permutation") {
  Rng r(11);
  std::vector<int> v(50);
  std::iota(v.begin(), v.end(), 0);
  auto w = v;
  r.shuffle(w);
  CHECK(w != v);
  std::sort(w.begin(), w.end());
  CHECK(w == v);
}

TEST_CASE("key_of is FNV-1a") {
  CHECK(prefbench::key_of("") == 0xcbf29ce484222325ULL);
  CHECK(prefbench::key_of("a") == 0xaf63dc4c8601ec8cULL);
}
