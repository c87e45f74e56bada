#include <doctest.h>

#include <algorithm>
#include <cstdint>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hitrank/rng.hpp"
#include "hitrank/sampling.hpp"
#include "support/oracles.hpp"

using hitrank::AbPartition;
using hitrank::PairBatch;
using hitrank::Rng;
using hitrank::SampleOptions;

TEST_SUITE_BEGIN("sampling");

namespace {

std::set<std::pair<std::size_t, std::size_t>> pair_set(const PairBatch& b) {
  std::set<std::pair<std::size_t, std::size_t>> keys;
  for (const auto& p : b.pairs) {
    keys.insert({std::min(p.i, p.j), std::max(p.i, p.j)});
  }
  return keys;
}

void check_batch_wellformed(const PairBatch& b,
                            const std::vector<double>& scores) {
  const auto keys = pair_set(b);
  CHECK(keys.size() == b.pairs.size());  // no duplicate unordered pair
  REQUIRE(b.yi.size() == b.pairs.size());
  REQUIRE(b.yj.size() == b.pairs.size());
  for (std::size_t k = 0; k < b.pairs.size(); ++k) {
    CHECK(b.pairs[k].i != b.pairs[k].j);
    CHECK(b.yi[k] == scores[b.pairs[k].i]);
    CHECK(b.yj[k] == scores[b.pairs[k].j]);
  }
}

std::vector<double> distinct_scores(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> scores(n);
  for (std::size_t i = 0; i < n; ++i) {
    scores[i] = static_cast<double>(i) + 0.1 * hitrank::uniform01(rng);
  }
  hitrank::shuffle(scores, rng);
  return scores;
}

}  // namespace

TEST_CASE("three songs and three requested pairs exhaust the population") {
  const std::vector<double> scores{1.0, 2.0, 3.0};
  const PairBatch b = hitrank::naive_sample(scores, 3, 7);
  check_batch_wellformed(b, scores);
  CHECK(pair_set(b) == std::set<std::pair<std::size_t, std::size_t>>{
                           {0, 1}, {0, 2}, {1, 2}});
}

TEST_CASE("same seed replays the same batch, new seed does not") {
  const auto scores = distinct_scores(100, 1);
  const PairBatch a = hitrank::naive_sample(scores, 50, 42);
  const PairBatch b = hitrank::naive_sample(scores, 50, 42);
  const PairBatch c = hitrank::naive_sample(scores, 50, 43);
  REQUIRE(a.pairs.size() == 50);
  bool same = true;
  for (std::size_t k = 0; k < 50; ++k) {
    same = same && a.pairs[k].i == b.pairs[k].i && a.pairs[k].j == b.pairs[k].j;
  }
  CHECK(same);
  CHECK(pair_set(a) != pair_set(c));
}

TEST_CASE("requesting more pairs than exist names the maximum") {
  const std::vector<double> scores{1.0, 2.0, 3.0};
  try {
    hitrank::naive_sample(scores, 4, 0);
    FAIL("expected rejection");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find('3') != std::string::npos);
  }
}

TEST_CASE("pair membership is uniform across songs") {
  const auto scores = distinct_scores(100, 2);
  std::vector<std::uint64_t> membership(100, 0);
  const std::size_t kSeeds = 10, kPairs = 4000;
  for (std::uint64_t seed = 0; seed < kSeeds; ++seed) {
    const PairBatch b = hitrank::naive_sample(scores, kPairs, seed);
    for (const auto& p : b.pairs) {
      ++membership[p.i];
      ++membership[p.j];
    }
  }
  CHECK(oracle::uniform_not_rejected(membership,
                                     2.0 * static_cast<double>(kSeeds * kPairs)));
}

TEST_CASE("sampled pairs are uniform over the pair population") {
  const auto scores = distinct_scores(40, 3);
  std::vector<std::uint64_t> counts(40 * 40, 0);
  const std::size_t kSeeds = 25, kPairs = 400;
  for (std::uint64_t seed = 0; seed < kSeeds; ++seed) {
    const PairBatch b = hitrank::naive_sample(scores, kPairs, seed);
    for (const auto& p : b.pairs) {
      counts[std::min(p.i, p.j) * 40 + std::max(p.i, p.j)]++;
    }
  }
  std::vector<std::uint64_t> cells;
  for (std::size_t i = 0; i < 40; ++i) {
    for (std::size_t j = i + 1; j < 40; ++j) cells.push_back(counts[i * 40 + j]);
  }
  REQUIRE(cells.size() == 780);
  CHECK(oracle::uniform_not_rejected(cells,
                                     static_cast<double>(kSeeds * kPairs)));
}

TEST_CASE("tie filter removes equal-score pairs") {
  std::vector<double> scores{1.0, 1.0, 1.0, 2.0, 2.0, 3.0};
  const PairBatch b =
      hitrank::naive_sample(scores, 8, 5, SampleOptions{.exclude_ties = true});
  check_batch_wellformed(b, scores);
  for (std::size_t k = 0; k < b.pairs.size(); ++k) {
    CHECK(b.yi[k] != b.yj[k]);
  }
}

TEST_CASE("partition splits strictly above the mean") {
  const AbPartition p = hitrank::ab_partition({1.0, 1.0, 1.0, 5.0});
  CHECK(p.threshold == 2.0);
  CHECK(p.group_a == std::vector<std::size_t>{3});
  CHECK(p.group_b == std::vector<std::size_t>{0, 1, 2});
}

TEST_CASE("equal scores leave the upper group empty") {
  const AbPartition p = hitrank::ab_partition({4.0, 4.0, 4.0});
  CHECK(p.group_a.empty());
  CHECK(p.group_b.size() == 3);
}

TEST_CASE("partition covers the set exactly once") {
  const auto scores = distinct_scores(200, 4);
  const AbPartition p = hitrank::ab_partition(scores);
  std::vector<std::size_t> all = p.group_a;
  all.insert(all.end(), p.group_b.begin(), p.group_b.end());
  std::sort(all.begin(), all.end());
  std::vector<std::size_t> want(200);
  for (std::size_t i = 0; i < 200; ++i) want[i] = i;
  CHECK(all == want);
  for (const std::size_t i : p.group_a) CHECK(scores[i] > p.threshold);
  for (const std::size_t i : p.group_b) CHECK(scores[i] <= p.threshold);
}

TEST_CASE("one top song with two others gives exactly its two pairs") {
  const std::vector<double> scores{9.0, 1.0, 2.0};
  const AbPartition p = hitrank::ab_partition(scores);
  REQUIRE(p.group_a == std::vector<std::size_t>{0});
  const PairBatch b = hitrank::ab_sample(scores, p, 2, 11);
  check_batch_wellformed(b, scores);
  CHECK(pair_set(b) == std::set<std::pair<std::size_t, std::size_t>>{
                           {0, 1}, {0, 2}});
}

TEST_CASE("an empty upper group cannot be sampled") {
  const std::vector<double> scores{4.0, 4.0, 4.0};
  const AbPartition p = hitrank::ab_partition(scores);
  CHECK_THROWS_AS(hitrank::ab_sample(scores, p, 1, 0), std::invalid_argument);
}

TEST_CASE("upper-group sampling rejects an oversized request") {
  const std::vector<double> scores{9.0, 1.0, 2.0};
  const AbPartition p = hitrank::ab_partition(scores);
  CHECK_THROWS_AS(hitrank::ab_sample(scores, p, 3, 0), std::invalid_argument);
}

TEST_CASE("every sampled pair touches the upper group") {
  const auto scores = distinct_scores(60, 6);
  const AbPartition p = hitrank::ab_partition(scores);
  std::set<std::size_t> in_a(p.group_a.begin(), p.group_a.end());
  REQUIRE_FALSE(in_a.empty());
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const PairBatch b = hitrank::ab_sample(scores, p, 1200, seed);
    check_batch_wellformed(b, scores);
    for (const auto& pr : b.pairs) {
      CHECK((in_a.count(pr.i) || in_a.count(pr.j)));
    }
  }
}

TEST_CASE("upper-group pairs are uniform over qualifying pairs") {
  // 30 songs, 5 far above the rest so the partition is known.
  std::vector<double> scores(30, 1.0);
  for (std::size_t i = 0; i < 30; ++i) scores[i] = static_cast<double>(i % 7);
  for (std::size_t i = 0; i < 5; ++i) scores[i * 6] = 50.0 + static_cast<double>(i);
  const AbPartition part = hitrank::ab_partition(scores);
  REQUIRE(part.group_a.size() == 5);
  const std::set<std::size_t> in_a(part.group_a.begin(), part.group_a.end());

  std::vector<std::uint64_t> counts(30 * 30, 0);
  const std::size_t kSeeds = 20, kPairs = 100;
  for (std::uint64_t seed = 0; seed < kSeeds; ++seed) {
    const PairBatch b = hitrank::ab_sample(scores, part, kPairs, seed);
    for (const auto& p : b.pairs) {
      counts[std::min(p.i, p.j) * 30 + std::max(p.i, p.j)]++;
    }
  }
  std::vector<std::uint64_t> cells;
  for (std::size_t i = 0; i < 30; ++i) {
    for (std::size_t j = i + 1; j < 30; ++j) {
      if (in_a.count(i) || in_a.count(j)) cells.push_back(counts[i * 30 + j]);
    }
  }
  REQUIRE(cells.size() == 5 * 29 - 10);  // |A|(n-1) - C(|A|,2)
  CHECK(oracle::uniform_not_rejected(cells,
                                     static_cast<double>(kSeeds * kPairs)));
}

TEST_CASE("a lone two-song artist yields exactly its pair") {
  const std::vector<double> scores{0.5, 0.9, 0.7};
  const std::vector<std::string> artists{"X", "X", "Y"};
  const PairBatch b = hitrank::artist_sample(scores, artists, 5, 3);
  check_batch_wellformed(b, scores);
  CHECK(pair_set(b) == std::set<std::pair<std::size_t, std::size_t>>{{0, 1}});
}

TEST_CASE("all-distinct artists have no pairs to offer") {
  const std::vector<double> scores{0.1, 0.2, 0.3};
  const std::vector<std::string> artists{"A", "B", "C"};
  CHECK_THROWS_AS(hitrank::artist_sample(scores, artists, 1, 0),
                  std::invalid_argument);
}

TEST_CASE("same-artist pairs always share the artist") {
  Rng rng(8);
  const std::size_t n = 90;
  std::vector<double> scores(n);
  std::vector<std::string> artists(n);
  for (std::size_t i = 0; i < n; ++i) {
    scores[i] = hitrank::normal(rng);
    artists[i] = "artist-" + std::to_string(i % 15);
  }
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const PairBatch b = hitrank::artist_sample(scores, artists, 300, seed);
    check_batch_wellformed(b, scores);
    for (const auto& p : b.pairs) {
      CHECK(artists[p.i] == artists[p.j]);
    }
  }
}

TEST_CASE("same-artist ties are filtered by default and keepable") {
  const std::vector<double> scores{1.0, 1.0, 2.0};
  const std::vector<std::string> artists{"X", "X", "X"};
  const PairBatch filtered = hitrank::artist_sample(scores, artists, 3, 0);
  CHECK(pair_set(filtered) == std::set<std::pair<std::size_t, std::size_t>>{
                                  {0, 2}, {1, 2}});
  const PairBatch kept = hitrank::artist_sample(
      scores, artists, 3, 0, SampleOptions{.exclude_ties = false});
  CHECK(pair_set(kept).size() == 3);
}

TEST_CASE("oversized same-artist requests exhaust the population instead") {
  const std::vector<double> scores{0.5, 0.9, 0.7, 0.2};
  const std::vector<std::string> artists{"X", "X", "Y", "Y"};
  const PairBatch b = hitrank::artist_sample(scores, artists, 100, 9);
  CHECK(pair_set(b) == std::set<std::pair<std::size_t, std::size_t>>{
                           {0, 1}, {2, 3}});
}

TEST_CASE("same-artist pairs are uniform over the qualifying population") {
  const std::size_t n = 72;
  std::vector<double> scores(n);
  std::vector<std::string> artists(n);
  for (std::size_t i = 0; i < n; ++i) {
    scores[i] = static_cast<double>(i) * 0.25;  // distinct: no tie filtering
    artists[i] = "a" + std::to_string(i / 6);   // 12 artists x 6 songs
  }
  std::vector<std::uint64_t> counts(n * n, 0);
  const std::size_t kSeeds = 20, kPairs = 90;
  for (std::uint64_t seed = 0; seed < kSeeds; ++seed) {
    const PairBatch b = hitrank::artist_sample(scores, artists, kPairs, seed);
    REQUIRE(b.pairs.size() == kPairs);
    for (const auto& p : b.pairs) {
      counts[std::min(p.i, p.j) * n + std::max(p.i, p.j)]++;
    }
  }
  std::vector<std::uint64_t> cells;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (artists[i] == artists[j]) cells.push_back(counts[i * n + j]);
    }
  }
  REQUIRE(cells.size() == 12 * 15);
  CHECK(oracle::uniform_not_rejected(cells,
                                     static_cast<double>(kSeeds * kPairs)));
}

TEST_CASE("fusing identical score lists changes nothing") {
  const std::vector<double> s{0.4, -1.0, 2.5};
  CHECK(hitrank::fuse_scores(s, s) == s);
}

TEST_CASE("fusion is the elementwise mean") {
  const std::vector<double> mid = hitrank::fuse_scores({0.2}, {0.4});
  REQUIRE(mid.size() == 1);
  CHECK(mid[0] == doctest::Approx(0.3).epsilon(1e-15));
  // Halves are exact in binary, so this pair fuses with no rounding at all.
  CHECK(hitrank::fuse_scores({1.0, 3.0}, {2.0, 5.0}) ==
        std::vector<double>{1.5, 4.0});
}

TEST_CASE("fusion rejects misaligned lists") {
  CHECK_THROWS_AS(hitrank::fuse_scores({1.0}, {1.0, 2.0}),
                  std::invalid_argument);
}

TEST_CASE("pair batches round-trip through their text form") {
  const auto scores = distinct_scores(50, 10);
  const PairBatch b = hitrank::naive_sample(scores, 30, 77);

  std::stringstream buffer;
  hitrank::write_pair_batch(buffer, b);
  const PairBatch back = hitrank::read_pair_batch(buffer, scores);

  CHECK(back.sampler == b.sampler);
  CHECK(back.seed == b.seed);
  REQUIRE(back.pairs.size() == b.pairs.size());
  for (std::size_t k = 0; k < b.pairs.size(); ++k) {
    CHECK(back.pairs[k].i == b.pairs[k].i);
    CHECK(back.pairs[k].j == b.pairs[k].j);
    CHECK(back.yi[k] == b.yi[k]);
    CHECK(back.yj[k] == b.yj[k]);
  }
}

TEST_CASE("reading a batch validates indices against the score list") {
  const auto scores = distinct_scores(50, 11);
  const PairBatch b = hitrank::naive_sample(scores, 10, 1);
  std::stringstream buffer;
  hitrank::write_pair_batch(buffer, b);
  const std::vector<double> too_short(3, 1.0);
  CHECK_THROWS(hitrank::read_pair_batch(buffer, too_short));
}

TEST_SUITE_END();
