#include "segeval/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <set>

namespace {
using segeval::CounterRng;
}

TEST_CASE("replay yields identical streams") {
  CounterRng a(123), b(123);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("forked streams are independent of draw order") {
  CounterRng root(7);
  CounterRng x = root.fork("x");
  CounterRng y = root.fork("y");
  const auto x0 = x.next_u64();
  const auto y0 = y.next_u64();

  CounterRng root2(7);
  CounterRng y2 = root2.fork("y");
  CounterRng x2 = root2.fork("x");
  CHECK(y2.next_u64() == y0);
  CHECK(x2.next_u64() == x0);
  CHECK(x0 != y0);
}

TEST_CASE("uniform draws stay in range and look uniform") {
  CounterRng rng(42);
  double sum = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.next_unit();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    sum += u;
  }
  // 5 sigma band around the mean of U[0,1).
  CHECK(std::abs(sum / n - 0.5) < 5 * std::sqrt(1.0 / 12 / n));

  std::set<std::int64_t> seen;
  for (int i = 0; i < 1000; ++i) {
    const auto v = rng.uniform_int(-3, 3);
    CHECK(v >= -3);
    CHECK(v <= 3);
    seen.insert(v);
  }
  CHECK(seen.size() == 7);
}
