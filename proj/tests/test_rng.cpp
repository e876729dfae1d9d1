#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include "macs/rng.hpp"

using namespace macs;

TEST_CASE("same spec gives identical streams") {
  Rng a(42, stream_id("generate"));
  Rng b(42, stream_id("generate"));
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("different streams diverge") {
  Rng a(42, stream_id("generate"));
  Rng b(42, stream_id("split"));
  int same = 0;
  for (int i = 0; i < 64; ++i) same += (a.next_u64() == b.next_u64());
  CHECK(same == 0);
}

TEST_CASE("derived streams are distinct and reproducible") {
  RngSpec base{7, stream_id("bootstrap")};
  std::set<std::uint64_t> firsts;
  for (std::size_t i = 0; i < 1000; ++i) {
    Rng r(derive(base, i));
    Rng r2(derive(base, i));
    std::uint64_t v = r.next_u64();
    CHECK(v == r2.next_u64());
    firsts.insert(v);
  }
  CHECK(firsts.size() == 1000);
}

TEST_CASE("next_double in unit interval") {
  Rng r(1, 0);
  for (int i = 0; i < 10000; ++i) {
    double d = r.next_double();
    CHECK(d >= 0.0);
    CHECK(d < 1.0);
  }
}

TEST_CASE("below respects bound and hits all residues") {
  Rng r(3, 1);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 7000; ++i) {
    std::uint64_t v = r.below(7);
    REQUIRE(v < 7);
    counts[v]++;
  }
  for (int c : counts) CHECK(c > 700);
}

TEST_CASE("bernoulli extremes") {
  Rng r(5, 2);
  for (int i = 0; i < 100; ++i) {
    CHECK_FALSE(r.bernoulli(0.0));
    CHECK(r.bernoulli(1.0));
  }
}

TEST_CASE("exponential matches target median roughly") {
  Rng r(11, 4);
  std::vector<double> draws(20000);
  double median_target = 3.0;
  double rate = std::log(2.0) / median_target;
  for (auto& d : draws) d = r.exponential(rate);
  std::nth_element(draws.begin(), draws.begin() + 10000, draws.end());
  CHECK(draws[10000] == doctest::Approx(median_target).epsilon(0.05));
}

TEST_CASE("normal has near zero mean unit sd") {
  Rng r(13, 9);
  double sum = 0, sumsq = 0;
  const int n = 40000;
  for (int i = 0; i < n; ++i) {
    double v = r.normal();
    sum += v;
    sumsq += v * v;
  }
  double mean = sum / n;
  double var = sumsq / n - mean * mean;
  CHECK(std::abs(mean) < 0.02);
  CHECK(var == doctest::Approx(1.0).epsilon(0.03));
}

TEST_CASE("shuffle is a seeded permutation") {
  std::vector<int> v(50);
  std::iota(v.begin(), v.end(), 0);
  std::vector<int> w = v;
  Rng r(21, 6);
  r.shuffle(v);
  Rng r2(21, 6);
  r2.shuffle(w);
  CHECK(v == w);
  std::vector<int> sorted_v = v;
  std::sort(sorted_v.begin(), sorted_v.end());
  std::vector<int> id(50);
  std::iota(id.begin(), id.end(), 0);
  CHECK(sorted_v == id);
  CHECK(v != id);
}

TEST_CASE("stream ids differ per name") {
  CHECK(stream_id("generate") != stream_id("split"));
  CHECK(stream_id("cv") != stream_id("bootstrap"));
  CHECK(stream_id("bias") != stream_id("os"));
}
