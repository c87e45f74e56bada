#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "hitrank/data.hpp"
#include "hitrank/metrics.hpp"
#include "hitrank/model.hpp"
#include "hitrank/rng.hpp"
#include "hitrank/sampling.hpp"

using hitrank::RankedEval;
using hitrank::Rng;
using hitrank::SongRecord;
using hitrank::SplitPlan;
using hitrank::SynthCorpus;
using hitrank::SynthSpec;
using hitrank::TestFold;

TEST_SUITE_BEGIN("data");

namespace {

SongRecord flat_record(const std::string& id, double share,
                       std::size_t days = 61) {
  SongRecord rec;
  rec.id = id;
  rec.artist_id = "artist-a";
  rec.release_date = "2017-03-01";
  rec.playcounts.assign(days, share);
  return rec;
}

SynthSpec small_spec(std::uint64_t seed) {
  SynthSpec spec;
  spec.n = 400;
  spec.n_artists = 40;
  spec.bins = 8;
  spec.frames = 12;
  spec.seed = seed;
  return spec;
}

}  // namespace

TEST_CASE("dates parse strictly and round-trip") {
  const auto day = hitrank::parse_date("2017-03-01");
  CHECK(hitrank::format_date(day) == "2017-03-01");
  CHECK(hitrank::format_date(hitrank::parse_date("1999-12-31")) ==
        "1999-12-31");

  CHECK_THROWS_AS(hitrank::parse_date("2017-13-01"), std::invalid_argument);
  CHECK_THROWS_AS(hitrank::parse_date("2017-02-30"), std::invalid_argument);
  CHECK_THROWS_AS(hitrank::parse_date("2017-1-1"), std::invalid_argument);
  CHECK_THROWS_AS(hitrank::parse_date("17-01-01"), std::invalid_argument);
  CHECK_THROWS_AS(hitrank::parse_date("hello"), std::invalid_argument);
  CHECK_THROWS_AS(hitrank::parse_date("2017-03-01x"), std::invalid_argument);
}

TEST_CASE("a constant share series scores its constant") {
  CHECK(hitrank::hit_score(flat_record("s", 0.25)) == 0.25);
}

TEST_CASE("an early spike is ignored, only day sixty counts") {
  SongRecord rec = flat_record("s", 0.0);
  rec.playcounts[3] = 0.9;  // launch-day burst
  for (std::size_t t = 4; t <= 60; ++t) rec.playcounts[t] = 1e-6;
  CHECK(hitrank::hit_score(rec) == 1e-6);
}

TEST_CASE("a series short of day sixty cannot be scored") {
  const SongRecord rec = flat_record("shorty", 0.2, 60);  // days 0..59 only
  CHECK_THROWS_AS(hitrank::hit_score(rec), std::invalid_argument);

  std::vector<SongRecord> records{flat_record("ok", 0.2),
                                  flat_record("shorty", 0.2, 60)};
  std::vector<hitrank::Exclusion> excluded;
  const auto ids = hitrank::eligible_ids(records, &excluded);
  CHECK(ids == std::vector<std::size_t>{0});
  REQUIRE(excluded.size() == 1);
  CHECK(excluded[0].song_id == "shorty");
  CHECK_FALSE(excluded[0].reason.empty());
}

TEST_CASE("top selection keeps the highest scores") {
  std::vector<SongRecord> records;
  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    records.push_back(flat_record("song-" + std::to_string(1000 + i),
                                  hitrank::uniform01(rng)));
  }
  const auto selection = hitrank::select_top(records, 150);
  REQUIRE(selection.ids.size() == 150);
  CHECK_FALSE(selection.short_of_k);

  // Defining property: the worst kept is at least the best dropped.
  std::set<std::size_t> kept(selection.ids.begin(), selection.ids.end());
  double min_kept = 2.0, max_dropped = -1.0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const double score = hitrank::hit_score(records[i]);
    if (kept.count(i)) {
      min_kept = std::min(min_kept, score);
    } else {
      max_dropped = std::max(max_dropped, score);
    }
  }
  CHECK(min_kept >= max_dropped);

  // Full-sort cross-check: identical membership and order.
  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double sa = hitrank::hit_score(records[a]);
    const double sb = hitrank::hit_score(records[b]);
    if (sa != sb) return sa > sb;
    return records[a].id < records[b].id;
  });
  order.resize(150);
  CHECK(selection.ids == order);
}

TEST_CASE("selecting exactly the population is the identity") {
  std::vector<SongRecord> records;
  for (int i = 0; i < 20; ++i) {
    records.push_back(flat_record("song-" + std::to_string(100 + i),
                                  0.01 * (i + 1)));
  }
  const auto selection = hitrank::select_top(records, 20);
  CHECK(selection.ids.size() == 20);
  std::set<std::size_t> kept(selection.ids.begin(), selection.ids.end());
  CHECK(kept.size() == 20);
}

TEST_CASE("a short population is kept whole and flagged") {
  std::vector<SongRecord> records{flat_record("a", 0.1),
                                  flat_record("b", 0.2)};
  const auto selection = hitrank::select_top(records, 15000);
  CHECK(selection.ids.size() == 2);
  CHECK(selection.short_of_k);
}

TEST_CASE("splits cover every position as test exactly once") {
  for (const std::uint64_t seed : {0ULL, 7ULL, 123ULL}) {
    const SplitPlan plan = SplitPlan::make(150, seed, 10);
    REQUIRE(plan.fold_count() == 10);
    CHECK(plan.fold_size() == 15);
    CHECK(plan.used() == 150);

    std::vector<int> tested(150, 0);
    for (std::size_t t = 0; t < 10; ++t) {
      const TestFold fold = plan.test_fold(t);
      fold.evaluate(
          [&](std::size_t pos) {
            ++tested[pos];
            return 0.0;
          },
          [](const std::vector<std::size_t>& ids) {
            return std::vector<double>(ids.size(), 0.0);
          });
    }
    for (const int count : tested) CHECK(count == 1);
  }
}

TEST_CASE("per-iteration sets are disjoint and complete") {
  const SplitPlan plan = SplitPlan::make(100, 3, 5);
  for (std::size_t t = 0; t < 5; ++t) {
    const auto train = plan.train_ids(t);
    const auto val = plan.validation_ids(t);
    std::set<std::size_t> seen(train.begin(), train.end());
    CHECK(seen.size() == train.size());
    CHECK(train.size() == 60);  // 3 of 5 folds
    CHECK(val.size() == 20);
    for (const auto v : val) CHECK_FALSE(seen.count(v));
    seen.insert(val.begin(), val.end());

    std::vector<std::size_t> test_positions;
    plan.test_fold(t).evaluate(
        [&](std::size_t pos) {
          test_positions.push_back(pos);
          return 0.0;
        },
        [](const std::vector<std::size_t>& ids) {
          return std::vector<double>(ids.size(), 0.0);
        });
    CHECK(test_positions.size() == 20);
    for (const auto p : test_positions) CHECK_FALSE(seen.count(p));
    seen.insert(test_positions.begin(), test_positions.end());
    CHECK(seen.size() == 100);  // the three sets tile everything
  }
}

TEST_CASE("a remainder is trimmed, never tested") {
  const SplitPlan plan = SplitPlan::make(157, 9, 10);
  CHECK(plan.fold_size() == 15);
  CHECK(plan.used() == 150);
}

TEST_CASE("the same seed replays the same split") {
  const SplitPlan a = SplitPlan::make(60, 5, 6);
  const SplitPlan b = SplitPlan::make(60, 5, 6);
  const SplitPlan c = SplitPlan::make(60, 6, 6);
  bool same_ab = true, same_ac = true;
  for (std::size_t t = 0; t < 6; ++t) {
    same_ab = same_ab && a.train_ids(t) == b.train_ids(t);
    same_ac = same_ac && a.train_ids(t) == c.train_ids(t);
  }
  CHECK(same_ab);
  CHECK_FALSE(same_ac);
}

TEST_CASE("degenerate split requests are rejected") {
  CHECK_THROWS_AS(SplitPlan::make(5, 0, 10), std::invalid_argument);
  CHECK_THROWS_AS(SplitPlan::make(100, 0, 2), std::invalid_argument);
}

TEST_CASE("evaluation asks the predictor once for all held-out songs") {
  const SplitPlan plan = SplitPlan::make(40, 1, 4);
  const TestFold fold = plan.test_fold(2);
  REQUIRE(fold.size() == 10);

  std::size_t predict_calls = 0;
  std::size_t truth_calls = 0;
  const RankedEval eval = fold.evaluate(
      [&](std::size_t pos) {
        ++truth_calls;
        return static_cast<double>(pos);
      },
      [&](const std::vector<std::size_t>& ids) {
        ++predict_calls;
        std::vector<double> out;
        for (const auto id : ids) out.push_back(static_cast<double>(id) * 2);
        return out;
      },
      0.5);
  CHECK(predict_calls == 1);
  CHECK(truth_calls == 10);
  REQUIRE(eval.true_scores.size() == 10);
  CHECK(eval.fraction == 0.5);
  for (std::size_t k = 0; k < 10; ++k) {
    CHECK(eval.predicted[k] == 2.0 * eval.true_scores[k]);  // aligned
  }

  // A predictor returning the wrong number of scores is rejected.
  CHECK_THROWS(fold.evaluate(
      [](std::size_t) { return 0.0; },
      [](const std::vector<std::size_t>&) { return std::vector<double>{}; }));
}

// Probed through a template parameter so an absent member evaluates the
// requires-expression to false instead of failing to compile.
template <typename T>
concept ExposesPositions = requires(const T f) { f.positions(); };
template <typename T>
concept ExposesIds = requires(const T f) { f.ids(); };
template <typename T>
concept ExposesIteration = requires(const T f) { f.begin(); };
template <typename T>
concept ExposesIndexing = requires(const T f) { f[std::size_t{0}]; };

TEST_CASE("held-out positions are unreachable except through evaluation") {
  // The fold type deliberately has no accessor for its positions; the
  // only way data flows out is the evaluate() gateway above.
  static_assert(!ExposesPositions<TestFold>);
  static_assert(!ExposesIds<TestFold>);
  static_assert(!ExposesIteration<TestFold>);
  static_assert(!ExposesIndexing<TestFold>);
  CHECK(true);
}

TEST_CASE("the generator replays bit-identically under one seed") {
  const SynthCorpus a = hitrank::synth_longtail(small_spec(77));
  const SynthCorpus b = hitrank::synth_longtail(small_spec(77));
  const SynthCorpus c = hitrank::synth_longtail(small_spec(78));

  REQUIRE(a.records.size() == 400);
  REQUIRE(b.records.size() == 400);
  bool identical = a.true_scores == b.true_scores &&
                   a.oracle_scores == b.oracle_scores;
  for (std::size_t i = 0; identical && i < 400; ++i) {
    identical = a.records[i].id == b.records[i].id &&
                a.records[i].artist_id == b.records[i].artist_id &&
                a.records[i].release_date == b.records[i].release_date &&
                a.records[i].playcounts == b.records[i].playcounts &&
                a.records[i].tags == b.records[i].tags &&
                a.records[i].features->values() ==
                    b.records[i].features->values();
  }
  CHECK(identical);
  CHECK(a.true_scores != c.true_scores);
}

TEST_CASE("generated records satisfy every corpus invariant") {
  const SynthCorpus corpus = hitrank::synth_longtail(small_spec(5));
  CHECK_NOTHROW(hitrank::validate_corpus(corpus.records));
  for (std::size_t i = 0; i < corpus.records.size(); ++i) {
    const SongRecord& rec = corpus.records[i];
    REQUIRE(rec.tags.has_value());
    CHECK(rec.tags->size() == 50);
    REQUIRE(rec.features.has_value());
    CHECK(rec.features->dim(0) == 8);
    CHECK(rec.features->dim(1) == 12);
    CHECK(corpus.true_scores[i] == hitrank::hit_score(rec));
  }
}

TEST_CASE("most songs sit below the mean score") {
  const SynthCorpus corpus = hitrank::synth_longtail(small_spec(11));
  const double mean =
      std::accumulate(corpus.true_scores.begin(), corpus.true_scores.end(),
                      0.0) /
      static_cast<double>(corpus.true_scores.size());
  std::size_t below = 0;
  for (const double s : corpus.true_scores) below += s < mean ? 1 : 0;
  const double fraction =
      static_cast<double>(below) / static_cast<double>(corpus.true_scores.size());
  CHECK(fraction > 0.72);  // the small-n bound; the full-size corpus is
  CHECK(fraction < 0.95);  // pinned to [0.80, 0.92] by the acceptance gate
}

TEST_CASE("the planted latent map ranks generated songs almost perfectly") {
  const SynthCorpus corpus = hitrank::synth_longtail(small_spec(13));
  RankedEval eval;
  eval.true_scores = corpus.true_scores;
  eval.predicted = corpus.oracle_scores;
  eval.fraction = 0.10;
  const auto tau = hitrank::kendall_tau(eval);
  REQUIRE(tau.has_value());
  CHECK(*tau > 0.9);
}

TEST_CASE("same-artist songs correlate through the shared latent") {
  SynthSpec spec = small_spec(17);
  spec.n = 600;
  spec.n_artists = 60;
  const SynthCorpus corpus = hitrank::synth_longtail(spec);

  // Group scores by artist and compare within-artist to global variance.
  std::vector<double> all = corpus.oracle_scores;
  double global_mean = std::accumulate(all.begin(), all.end(), 0.0) /
                       static_cast<double>(all.size());
  double global_var = 0.0;
  for (const double v : all) global_var += (v - global_mean) * (v - global_mean);
  global_var /= static_cast<double>(all.size());

  std::vector<std::vector<double>> groups;
  {
    std::vector<std::pair<std::string, double>> tagged;
    for (std::size_t i = 0; i < corpus.records.size(); ++i) {
      tagged.emplace_back(corpus.records[i].artist_id,
                          corpus.oracle_scores[i]);
    }
    std::sort(tagged.begin(), tagged.end());
    std::size_t i = 0;
    while (i < tagged.size()) {
      std::size_t j = i;
      std::vector<double> group;
      while (j < tagged.size() && tagged[j].first == tagged[i].first) {
        group.push_back(tagged[j].second);
        ++j;
      }
      if (group.size() >= 2) groups.push_back(std::move(group));
      i = j;
    }
  }
  REQUIRE_FALSE(groups.empty());
  double within = 0.0;
  std::size_t counted = 0;
  for (const auto& group : groups) {
    const double mean = std::accumulate(group.begin(), group.end(), 0.0) /
                        static_cast<double>(group.size());
    for (const double v : group) {
      within += (v - mean) * (v - mean);
      ++counted;
    }
  }
  within /= static_cast<double>(counted);
  CHECK(within < global_var);  // shared artist latent shrinks the spread
}

TEST_CASE("manifests round-trip through the line format") {
  SynthSpec spec = small_spec(19);
  spec.n = 40;
  spec.n_artists = 8;
  SynthCorpus corpus = hitrank::synth_longtail(spec);
  // Feature matrices travel through the cache, not the manifest.
  for (auto& rec : corpus.records) {
    rec.features.reset();
    rec.feature_path = rec.id + ".mid30.hrfc";
  }

  const auto path =
      (std::filesystem::temp_directory_path() / "hitrank_manifest_test.jsonl")
          .string();
  hitrank::write_manifest(path, corpus.records);
  const std::vector<SongRecord> back = hitrank::read_manifest(path);
  std::filesystem::remove(path);

  REQUIRE(back.size() == corpus.records.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].id == corpus.records[i].id);
    CHECK(back[i].artist_id == corpus.records[i].artist_id);
    CHECK(back[i].release_date == corpus.records[i].release_date);
    CHECK(back[i].playcounts == corpus.records[i].playcounts);
    CHECK(back[i].tags == corpus.records[i].tags);
    CHECK(back[i].feature_path == corpus.records[i].feature_path);
  }
}

TEST_CASE("corpus validation names the offending song") {
  std::vector<SongRecord> records{flat_record("song-a", 0.3),
                                  flat_record("song-b", 0.3)};

  SUBCASE("duplicate ids") {
    records[1].id = "song-a";
    CHECK_THROWS_WITH_AS(hitrank::validate_corpus(records),
                         doctest::Contains("song-a"), std::invalid_argument);
  }
  SUBCASE("share out of range") {
    records[1].playcounts[10] = 1.5;
    CHECK_THROWS_WITH_AS(hitrank::validate_corpus(records),
                         doctest::Contains("song-b"), std::invalid_argument);
  }
  SUBCASE("negative share") {
    records[0].playcounts[2] = -0.1;
    CHECK_THROWS_WITH_AS(hitrank::validate_corpus(records),
                         doctest::Contains("song-a"), std::invalid_argument);
  }
  SUBCASE("wrong tag width") {
    records[1].tags = std::vector<double>(49, 0.5);
    CHECK_THROWS_AS(hitrank::validate_corpus(records), std::invalid_argument);
  }
  SUBCASE("tag out of range") {
    records[0].tags = std::vector<double>(50, 0.5);
    records[1].tags = std::vector<double>(50, 0.5);
    (*records[1].tags)[7] = 1.2;
    CHECK_THROWS_WITH_AS(hitrank::validate_corpus(records),
                         doctest::Contains("song-b"), std::invalid_argument);
  }
  SUBCASE("unparseable date") {
    records[0].release_date = "March 1st";
    CHECK_THROWS_AS(hitrank::validate_corpus(records), std::invalid_argument);
  }
  SUBCASE("calendar day oversubscribed") {
    // Same release date, shares summing above 1 on every shared day.
    records[0].playcounts.assign(61, 0.6);
    records[1].playcounts.assign(61, 0.6);
    CHECK_THROWS_AS(hitrank::validate_corpus(records), std::invalid_argument);
  }
  SUBCASE("well-formed corpus passes") {
    CHECK_NOTHROW(hitrank::validate_corpus(records));
  }
}

TEST_CASE("record parsing rejects unknown fields") {
  const std::string good =
      R"({"id":"s1","artist_id":"a1","release_date":"2017-01-01",)"
      R"("playcounts":[0.1,0.2]})";
  const std::string bad =
      R"({"id":"s1","artist_id":"a1","release_date":"2017-01-01",)"
      R"("playcounts":[0.1,0.2],"surprise":true})";

  const auto path =
      (std::filesystem::temp_directory_path() / "hitrank_badfield.jsonl")
          .string();
  {
    std::ofstream out(path);
    out << good << "\n";
  }
  // A two-day series is readable; eligibility filters are separate.
  CHECK_NOTHROW(hitrank::read_manifest(path));
  {
    std::ofstream out(path);
    out << bad << "\n";
  }
  CHECK_THROWS(hitrank::read_manifest(path));
  {
    std::ofstream out(path);
    out << "not json at all\n";
  }
  CHECK_THROWS(hitrank::read_manifest(path));
  std::filesystem::remove(path);
}

TEST_SUITE_END();
