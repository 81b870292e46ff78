#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "fedgen/rng.hpp"

using namespace fedgen;

TEST_CASE("same seed reproduces the same stream") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("different seeds and derived streams diverge") {
  Rng a(1), b(2);
  CHECK(a.next_u64() != b.next_u64());
  Rng base(7);
  CHECK(base.derive(0).next_u64() != base.derive(1).next_u64());
  // two-level derivation is order sensitive
  CHECK(base.derive(3, 4).next_u64() != base.derive(4, 3).next_u64());
}

TEST_CASE("double_at is a pure lookup") {
  Rng r(9);
  const double v5 = r.double_at(5);
  (void)r.next_u64();
  (void)r.next_u64();
  CHECK(r.double_at(5) == v5);
  CHECK(Rng(9).double_at(5) == v5);
}

TEST_CASE("next_double stays in [0, 1)") {
  Rng r(123);
  for (int i = 0; i < 10000; ++i) {
    const double u = r.next_double();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("next_below respects the bound") {
  Rng r(5);
  for (int i = 0; i < 1000; ++i) CHECK(r.next_below(7) < 7);
}

TEST_CASE("normal draws match mean 0 variance 1 roughly") {
  Rng r(2024);
  const int n = 20000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = r.next_normal();
    sum += x;
    sq += x * x;
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  CHECK(std::fabs(mean) < 0.05);
  CHECK(std::fabs(var - 1.0) < 0.1);
}

TEST_CASE("gamma draws match the expected mean") {
  for (double alpha : {0.5, 2.0, 8.0}) {
    Rng r(static_cast<std::uint64_t>(alpha * 100) + 3);
    const int n = 20000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += r.next_gamma(alpha);
    // mean of Gamma(alpha, 1) is alpha; tolerance ~5 sigma of the sample mean
    CHECK(std::fabs(sum / n - alpha) < 5.0 * std::sqrt(alpha / n));
  }
}

TEST_CASE("shuffle is a seeded permutation") {
  std::vector<int> v(50);
  std::iota(v.begin(), v.end(), 0);
  std::vector<int> w = v;
  Rng(11).shuffle(v);
  Rng(11).shuffle(w);
  CHECK(v == w);
  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  std::vector<int> expect(50);
  std::iota(expect.begin(), expect.end(), 0);
  CHECK(sorted == expect);
  CHECK(v != expect);  // 50 elements: identity permutation is effectively impossible
}

TEST_CASE("derive_seed is stable") {
  CHECK(derive_seed(42, 7) == derive_seed(42, 7));
  CHECK(derive_seed(42, 7) != derive_seed(42, 8));
  CHECK(derive_seed(42, 7) != derive_seed(43, 7));
}
