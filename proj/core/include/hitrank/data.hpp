#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hitrank/metrics.hpp"
#include "hitrank/tensor.hpp"

namespace hitrank {

/// One song of the corpus. playcounts[t] is the song's share of all plays
/// on the t-th day after release (day 0 = release day), each in [0, 1];
/// across the corpus the shares of any calendar day sum to at most 1.
/// Feature data comes from exactly one of: an in-memory matrix, a feature
/// cache path, or an audio path still to be processed.
struct SongRecord {
  std::string id;
  std::string artist_id;
  std::string release_date;  // ISO-8601 date, YYYY-MM-DD
  std::vector<double> playcounts;
  std::optional<std::vector<double>> tags;  // exactly 50 values in [0,1]
  std::string feature_path;
  std::string audio_path;
  std::optional<Tensor> features;  // [bins, frames]
};

std::chrono::sys_days parse_date(const std::string& iso);
std::string format_date(std::chrono::sys_days day);

/// Share on the 60th day after release. Requires 61 series entries;
/// shorter series throw (callers exclude those songs instead of
/// extrapolating).
double hit_score(const SongRecord& record);

/// Number of series days required before hit_score is defined.
inline constexpr std::size_t kHitScoreDay = 60;

struct Exclusion {
  std::string song_id;
  std::string reason;
};

/// Indices of records with a defined hit score, in input order. Excluded
/// songs are reported with reasons when `excluded` is given.
std::vector<std::size_t> eligible_ids(const std::vector<SongRecord>& records,
                                      std::vector<Exclusion>* excluded = nullptr);

struct TopSelection {
  /// Record indices, hit score descending; boundary ties keep ascending
  /// song id.
  std::vector<std::size_t> ids;
  /// Set when fewer than k eligible songs existed and all were kept.
  bool short_of_k = false;
};

TopSelection select_top(const std::vector<SongRecord>& records,
                        std::size_t k = 15000,
                        std::vector<Exclusion>* excluded = nullptr);

/// Held-out positions of one cross-validation iteration. The positions
/// are deliberately unreachable except through evaluate(), so tuning code
/// cannot iterate the test set; evaluation builds the aligned score
/// vectors and hands back only those.
class TestFold {
 public:
  TestFold() = default;

  std::size_t size() const noexcept { return positions_.size(); }

  /// Calls `truth` once per held-out position and `predict` once with all
  /// of them, then pairs the results for the metrics.
  RankedEval evaluate(
      const std::function<double(std::size_t)>& truth,
      const std::function<std::vector<double>(const std::vector<std::size_t>&)>&
          predict,
      double fraction = 0.10) const;

 private:
  friend class SplitPlan;
  std::vector<std::size_t> positions_;
};

/// Equal-fold cross-validation plan over positions 0..count-1. Iteration
/// t tests on fold t and validates on fold (t+1) mod folds; the remaining
/// folds train. A remainder of count modulo folds is trimmed after the
/// shuffle (those positions are simply unused).
class SplitPlan {
 public:
  static SplitPlan make(std::size_t count, std::uint64_t seed,
                        std::size_t folds = 10);

  std::size_t fold_count() const noexcept { return folds_.size(); }
  std::size_t fold_size() const noexcept { return fold_size_; }
  /// Positions actually used (fold_count * fold_size).
  std::size_t used() const noexcept { return fold_size_ * folds_.size(); }

  std::vector<std::size_t> train_ids(std::size_t iteration) const;
  std::vector<std::size_t> validation_ids(std::size_t iteration) const;
  TestFold test_fold(std::size_t iteration) const;

 private:
  std::size_t fold_size_ = 0;
  std::vector<std::vector<std::size_t>> folds_;
};

/// Synthetic long-tail corpus layout. Songs draw latent vectors
/// z = artist_weight * u_artist + song_weight * v_song with standard
/// normal u, v. A fixed unit map w gives t = w . z; the share scale is
/// h = exp(tilt * softplus(t)) + luck, which produces the heavy tail.
/// The luck term is half-normal (sigma luck_noise), drawn once per song
/// and invisible to features and tags: it dwarfs the content-driven
/// differences between tail songs but is negligible next to hit-sized
/// scales, so tail order is mostly unlearnable noise while the top of
/// the chart stays content-driven. Features render only the first
/// audio_dims latent coordinates (smooth cosine patterns scaled by
/// signal_weight, plus noise); tags squash a random projection of ALL
/// coordinates, so they carry signal the features lack.
struct SynthSpec {
  std::size_t n = 15000;
  std::size_t n_artists = 1500;
  std::size_t latent_dim = 8;
  std::size_t bins = 32;
  std::size_t frames = 16;
  std::size_t audio_dims = 5;
  std::size_t tag_count = 50;
  std::size_t days = 75;
  std::size_t release_spread_days = 180;
  double artist_weight = 0.6;
  double song_weight = 0.8;
  double tilt = 2.4;
  double signal_weight = 1.0;
  double feature_noise = 0.25;
  double tag_noise = 0.25;
  double luck_noise = 2.5;
  std::uint64_t seed = 0;
};

struct SynthCorpus {
  std::vector<SongRecord> records;  // features and tags filled in-memory
  /// hit_score(records[i]), precomputed.
  std::vector<double> true_scores;
  /// The planted latent map t = w . z; ranking by it is the generator's
  /// content ordering, before luck and the monotone share transform.
  std::vector<double> oracle_scores;
};

/// Deterministic under spec.seed. Every record carries a full playcount
/// series whose day-60 value is exactly the song's share scale, so the
/// early-burst decoration never disturbs the target.
SynthCorpus synth_longtail(const SynthSpec& spec);

/// JSON Lines manifest, one record per line with fields id, artist_id,
/// release_date, playcounts, and optional tags / feature / audio paths.
/// Loading validates the record and corpus invariants (share ranges and
/// per-calendar-day sums).
std::vector<SongRecord> read_manifest(const std::string& path);
void write_manifest(const std::string& path,
                    const std::vector<SongRecord>& records);

/// Validates share ranges, tag shape/range, dates, and the corpus-level
/// per-calendar-day sum bound; throws std::invalid_argument naming the
/// first offending song.
void validate_corpus(const std::vector<SongRecord>& records);

}  // namespace hitrank
