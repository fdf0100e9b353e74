#include <cmath>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "dynoprimal/sampler_tree.hpp"

using dynoprimal::SamplerTree;

namespace {

// linear-scan reference for return_index
std::optional<std::size_t> scan_index(const std::vector<double>& a, double y) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    acc += a[i];
    if (y < acc) return i;
  }
  return std::nullopt;
}

} // namespace

TEST_CASE("prefix search on a fixed array") {
  SamplerTree t(4);
  const double a[4] = {0.3, 0.5, 0.2, 0.4};
  for (std::size_t i = 0; i < 4; ++i) t.increment(i, a[i]);

  CHECK(t.total() == doctest::Approx(1.4).epsilon(1e-12));
  CHECK(t.leaf(1) == 0.5);
  // prefix sums 0.3, 0.8, 1.0, 1.4
  CHECK(t.return_index(0.0).value() == 0);
  CHECK(t.return_index(0.3).value() == 1);
  CHECK(t.return_index(0.9).value() == 2);
  CHECK(t.return_index(1.1).value() == 3);
  CHECK_FALSE(t.return_index(1.4).has_value());
  CHECK_FALSE(t.return_index(7.0).has_value());
  CHECK_THROWS_AS(t.return_index(-0.1), std::invalid_argument);

  t.increment(1, 0.1);
  CHECK(t.total() == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(t.return_index(1.4).value() == 3);
  CHECK(t.check_consistency());
}

TEST_CASE("bounds and validation") {
  SamplerTree t(3);
  CHECK(t.leaf_count() == 3);
  CHECK(t.total() == 0.0);
  CHECK_FALSE(t.return_index(0.0).has_value());
  CHECK_THROWS_AS(t.leaf(3), std::out_of_range);
  CHECK_THROWS_AS(t.increment(3, 1.0), std::out_of_range);
  CHECK_THROWS_AS(t.set_leaf(5, 1.0), std::out_of_range);
  CHECK_THROWS_AS(t.set_leaf(0, -0.5), std::invalid_argument);

  t.increment(0, 0.5);
  CHECK_THROWS_AS(t.increment(0, -0.6), std::invalid_argument);
  t.increment(0, -0.5 - 1e-12); // cancellation residue snaps to zero
  CHECK(t.leaf(0) == 0.0);
  CHECK(t.total() == 0.0);

  SamplerTree empty;
  CHECK(empty.leaf_count() == 0);
  CHECK(empty.total() == 0.0);
  CHECK_FALSE(empty.return_index(0.0).has_value());
}

TEST_CASE("ensure grows in place") {
  SamplerTree t(2);
  t.increment(0, 1.0);
  t.increment(1, 2.0);
  t.ensure(2); // no-op
  CHECK(t.leaf_count() == 2);
  t.ensure(11);
  CHECK(t.leaf_count() == 11);
  CHECK(t.leaf(0) == 1.0);
  CHECK(t.leaf(1) == 2.0);
  CHECK(t.leaf(10) == 0.0);
  CHECK(t.total() == doctest::Approx(3.0).epsilon(1e-12));
  t.increment(10, 4.0);
  CHECK(t.total() == doctest::Approx(7.0).epsilon(1e-12));
  CHECK(t.check_consistency());
}

TEST_CASE("set_leaf pins exact values") {
  SamplerTree t(6);
  for (std::size_t i = 0; i < 6; ++i) t.set_leaf(i, 0.1 * double(i));
  CHECK(t.leaf(3) == 0.1 * 3);
  t.set_leaf(3, 0.0);
  CHECK(t.leaf(3) == 0.0); // exact zero, not a rounding residue
  t.set_leaf(3, 2.0);
  CHECK(t.leaf(3) == 2.0);
  CHECK(t.check_consistency());
}

TEST_CASE("random interleavings match the linear scan") {
  std::mt19937_64 rng(2024);
  auto u01 = [&]() { return double(rng() >> 11) * 0x1.0p-53; };

  for (int round = 0; round < 40; ++round) {
    const std::size_t k = 1 + rng() % 64;
    SamplerTree t(k);
    std::vector<double> ref(k, 0.0);
    for (int op = 0; op < 300; ++op) {
      const int kind = int(rng() % 3);
      const std::size_t i = rng() % k;
      if (kind == 0) {
        const double d = u01();
        t.increment(i, d);
        ref[i] += d;
      } else if (kind == 1) {
        const double v = u01() * 2.0;
        t.set_leaf(i, v);
        ref[i] = v;
      } else {
        double total = 0.0;
        for (double a : ref) total += a;
        const double y = u01() * (total + 0.1);
        auto got = t.return_index(y);
        auto want = scan_index(ref, y);
        if (got != want) {
          // a disagreement is only legal within float noise of a boundary
          REQUIRE(got.has_value());
          REQUIRE(want.has_value());
          double acc = 0.0;
          for (std::size_t j = 0; j <= std::min(*got, *want); ++j)
            acc += ref[j];
          CHECK(std::abs(y - acc) <= 1e-9 * std::max(1.0, total));
        }
        if (got) {
          CHECK(*got < k);
          CHECK(t.leaf(*got) > 0.0);
        }
      }
    }
    CHECK(t.check_consistency());
    for (std::size_t i = 0; i < k; ++i)
      CHECK(t.leaf(i) == doctest::Approx(ref[i]).epsilon(1e-9));
  }
}

TEST_CASE("consistency audit sees a planted corruption") {
  SamplerTree t(8);
  for (std::size_t i = 0; i < 8; ++i) t.increment(i, 1.0);
  CHECK(t.check_consistency());
  t.raw_storage()[1] += 0.5; // root no longer sums its children
  CHECK_FALSE(t.check_consistency());
}
