#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hardball/graphs.hpp"
#include "hardball/random.hpp"

#include <algorithm>

using namespace hardball;

namespace {

CollisionSequence seq_of(int n, std::vector<BallPair> labels) {
  CollisionSequence s;
  s.ball_count = n;
  s.labels = std::move(labels);
  s.times.resize(s.labels.size());
  for (std::size_t l = 0; l < s.times.size(); ++l)
    s.times[l] = static_cast<Real>(l + 1);
  return s;
}

CollisionSequence random_seq(int n, int len, SeedStream& rng) {
  std::vector<BallPair> labels;
  for (int l = 0; l < len; ++l) {
    int i = static_cast<int>(rng.uniform() * n);
    int j = static_cast<int>(rng.uniform() * (n - 1));
    if (j >= i) ++j;
    labels.push_back(BallPair::of(i, j));
  }
  return seq_of(n, std::move(labels));
}

CollisionSequence concat(const CollisionSequence& a, const CollisionSequence& b) {
  CollisionSequence s = a;
  s.labels.insert(s.labels.end(), b.labels.begin(), b.labels.end());
  s.times.resize(s.labels.size());
  for (std::size_t l = 0; l < s.times.size(); ++l)
    s.times[l] = static_cast<Real>(l + 1);
  return s;
}

}  // namespace

TEST_CASE("connectivity basics") {
  CHECK(is_connected(seq_of(2, {{0, 1}}), 0, 1));
  CHECK_FALSE(is_connected(seq_of(3, {{0, 1}}), 0, 1));
  CHECK(is_connected(seq_of(3, {{0, 1}, {1, 2}}), 0, 2));
  CHECK_FALSE(is_connected(seq_of(3, {}), 0, 0));
}

TEST_CASE("connectivity is monotone under edge addition") {
  SeedStream rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    CollisionSequence s = random_seq(5, 12, rng);
    bool was_connected = false;
    for (std::size_t k = 0; k <= s.size(); ++k) {
      const bool now = is_connected(s, 0, k);
      if (was_connected) CHECK(now);
      was_connected = now;
    }
  }
}

TEST_CASE("richness examples") {
  CHECK(richness(seq_of(3, {})) == 0);
  // two balls: every edge closes a block on its own
  CHECK(richness(seq_of(2, {{0, 1}, {0, 1}, {0, 1}, {0, 1}})) == 4);
  // hand-scanned: blocks [(1,2),(1,3)] and [(1,2),(2,3)] in 1-based labels
  CHECK(richness(seq_of(3, {{0, 1}, {0, 2}, {0, 1}, {1, 2}})) == 2);
}

TEST_CASE("richness concatenation bounds") {
  SeedStream rng(77);
  for (int trial = 0; trial < 300; ++trial) {
    CollisionSequence a = random_seq(4, 1 + static_cast<int>(rng.uniform() * 10), rng);
    CollisionSequence b = random_seq(4, 1 + static_cast<int>(rng.uniform() * 10), rng);
    const int ra = richness(a), rb = richness(b);
    const int rc = richness(concat(a, b));
    CHECK(rc >= ra + rb - 1);

    // exact additivity when `a` ends exactly at a block boundary
    auto bounds = richness_blocks(a);
    if (!bounds.empty() && bounds.back() == a.size())
      CHECK(rc == ra + rb);
  }
}

TEST_CASE("first connected prefix examples") {
  auto pre = first_connected_prefix(seq_of(3, {{0, 1}, {1, 2}, {0, 2}}));
  REQUIRE(pre.has_value());
  CHECK(pre->k == 2);
  CHECK(pre->component_a == std::vector<int>{0, 1});
  CHECK(pre->component_b == std::vector<int>{2});

  auto two = first_connected_prefix(seq_of(2, {{0, 1}}));
  REQUIRE(two.has_value());
  CHECK(two->k == 1);
  CHECK(two->component_a.size() == 1);
  CHECK(two->component_b.size() == 1);

  // ball 2 never touched
  CHECK_FALSE(first_connected_prefix(seq_of(3, {{0, 1}, {0, 1}})).has_value());
}

TEST_CASE("first connected prefix agrees with is_connected") {
  SeedStream rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    CollisionSequence s = random_seq(5, 20, rng);
    auto pre = first_connected_prefix(s);
    if (!pre) {
      CHECK_FALSE(is_connected(s, 0, s.size()));
      continue;
    }
    CHECK(is_connected(s, 0, pre->k));
    CHECK_FALSE(is_connected(s, 0, pre->k - 1));
    // bipartition covers all balls exactly once
    std::vector<int> all = pre->component_a;
    all.insert(all.end(), pre->component_b.begin(), pre->component_b.end());
    std::sort(all.begin(), all.end());
    std::vector<int> expect(s.ball_count);
    for (int b = 0; b < s.ball_count; ++b) expect[b] = b;
    CHECK(all == expect);
  }
}
